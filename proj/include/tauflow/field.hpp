#pragma once

#include "tauflow/sym_eigen.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace tauflow {

using Point = std::array<double, 3>; // trailing components zero when dim < 3

/// Uniform box grid, symmetric about the origin, odd point count per axis.
struct Grid {
    int dim = 1;
    double half_width = 1.0;
    double spacing = 0.1;
    int points_per_axis = 0; // m = 2*floor(L/h) + 1

    Grid() = default;
    Grid(int dim, double half_width, double spacing);

    int m() const { return points_per_axis; }
    size_t total_points() const;
    int center_index() const { return (points_per_axis - 1) / 2; }
    /// Coordinate of axis index i.
    double coord(int i) const { return (i - center_index()) * spacing; }
    /// Farthest grid coordinate from the origin along one axis.
    double extent() const { return center_index() * spacing; }

    size_t flat_index(const std::array<int, 3>& idx) const;
    std::array<int, 3> multi_index(size_t flat) const;
    Point point(const std::array<int, 3>& idx) const;
    Point point(size_t flat) const { return point(multi_index(flat)); }

    /// True if every axis index of `idx` is at least `offset` from both edges.
    bool is_interior(const std::array<int, 3>& idx, int offset) const;

    bool operator==(const Grid&) const = default;
};

/// Visit every grid point whose axis indices are >= offset from both edges.
void for_each_interior(const Grid& grid, int offset,
                       const std::function<void(size_t, const std::array<int, 3>&)>& fn);

struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g) : grid(g), values(g.total_points(), 0.0) {}

    double& operator[](size_t i) { return values[i]; }
    double operator[](size_t i) const { return values[i]; }
};

/// Per-point symmetric Hessian, stored as packed upper triangle per point.
struct HessianField {
    Grid grid;
    int stencil_offset = 1; // entries valid only at interior points with this offset
    std::vector<double> packed;

    static int pair_count(int dim) { return dim * (dim + 1) / 2; }
    SymMatrix at(size_t flat) const;
};

/// Sample a pointwise function on the grid. Throws on non-finite samples.
ScalarField sample(const Grid& grid, const std::function<double(const Point&)>& f);

/// Centered first derivative along `axis` at an interior point (offset >= 1).
double derivative1_at(const ScalarField& f, const std::array<int, 3>& idx, int axis);

/// Full gradient at an interior point.
Point gradient_at(const ScalarField& f, const std::array<int, 3>& idx);

/// Centered 3-point / 4-point-cross Hessian at an interior point (offset >= 1).
SymMatrix hessian_at(const ScalarField& f, const std::array<int, 3>& idx);

/// Hessian at every offset-1 interior point; symmetry exact by construction.
HessianField hessian_field(const ScalarField& f);

/// u_ijk at an offset-2 interior point, by centered first differences of Hessian entries.
/// Returns entries in a dim^3 row-major layout (i,j,k).
std::array<double, 27> third_derivative_at(const ScalarField& f, const std::array<int, 3>& idx);

/// Max over interior points of the Frobenius norm of the order-l derivative tensor.
/// l = 2 uses offset-1 interior points, l = 3 offset-2.
double sup_derivative_norm(const ScalarField& f, int l);

/// Multilinear interpolation of the field at an arbitrary point inside the box.
double interpolate(const ScalarField& f, const Point& x);
bool inside_box(const Grid& grid, const Point& x);

/// u_sigma(y) = sigma^2 [u(x0 + y/sigma) - center_value - grad_at_center . (y/sigma)].
/// Off-grid values by multilinear interpolation; throws if the mapped target box
/// escapes the source box.
ScalarField parabolic_rescale(const ScalarField& f, const Point& center,
                              const Point& grad_at_center, double center_value,
                              double sigma, const Grid& target);

// --- snapshot files ---------------------------------------------------------

/// Plain-text snapshot: header `dim m h L t`, then row-major values, one per
/// line, 17 significant digits.
void write_snapshot(const std::string& path, const ScalarField& f, double t);
std::pair<ScalarField, double> read_snapshot(const std::string& path);

/// Same payload as JSON with keys dim, m, h, L, t, values.
void write_snapshot_json(const std::string& path, const ScalarField& f, double t);

/// Fixed 17-significant-digit float formatting shared by all emitters.
std::string format_double(double v);

} // namespace tauflow
