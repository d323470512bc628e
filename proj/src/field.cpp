#include "tauflow/field.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tauflow {

Grid::Grid(int dim_, double half_width_, double spacing_)
    : dim(dim_), half_width(half_width_), spacing(spacing_) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid dim must be 1, 2 or 3");
    if (!(half_width > 0) || !(spacing > 0))
        throw std::invalid_argument("grid half_width and spacing must be positive");
    const int half = static_cast<int>(std::floor(half_width / spacing + 1e-12));
    points_per_axis = 2 * half + 1;
    if (points_per_axis < 5)
        throw std::invalid_argument("grid too small: need at least 5 points per axis");
}

size_t Grid::total_points() const {
    size_t t = 1;
    for (int d = 0; d < dim; ++d) t *= static_cast<size_t>(points_per_axis);
    return t;
}

size_t Grid::flat_index(const std::array<int, 3>& idx) const {
    size_t f = 0;
    for (int d = 0; d < dim; ++d) f = f * static_cast<size_t>(points_per_axis) + static_cast<size_t>(idx[static_cast<size_t>(d)]);
    return f;
}

std::array<int, 3> Grid::multi_index(size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int d = dim - 1; d >= 0; --d) {
        idx[static_cast<size_t>(d)] = static_cast<int>(flat % static_cast<size_t>(points_per_axis));
        flat /= static_cast<size_t>(points_per_axis);
    }
    return idx;
}

Point Grid::point(const std::array<int, 3>& idx) const {
    Point p{0, 0, 0};
    for (int d = 0; d < dim; ++d) p[static_cast<size_t>(d)] = coord(idx[static_cast<size_t>(d)]);
    return p;
}

bool Grid::is_interior(const std::array<int, 3>& idx, int offset) const {
    for (int d = 0; d < dim; ++d) {
        const int i = idx[static_cast<size_t>(d)];
        if (i < offset || i > points_per_axis - 1 - offset) return false;
    }
    return true;
}

void for_each_interior(const Grid& grid, int offset,
                       const std::function<void(size_t, const std::array<int, 3>&)>& fn) {
    const int m = grid.m();
    std::array<int, 3> idx{0, 0, 0};
    const int lo = offset, hi = m - 1 - offset;
    if (hi < lo) throw std::invalid_argument("grid too small for stencil offset");
    const int d = grid.dim;
    for (int i = lo; i <= hi; ++i) {
        idx[0] = i;
        if (d == 1) {
            fn(grid.flat_index(idx), idx);
            continue;
        }
        for (int j = lo; j <= hi; ++j) {
            idx[1] = j;
            if (d == 2) {
                fn(grid.flat_index(idx), idx);
                continue;
            }
            for (int k = lo; k <= hi; ++k) {
                idx[2] = k;
                fn(grid.flat_index(idx), idx);
            }
        }
    }
}

SymMatrix HessianField::at(size_t flat) const {
    SymMatrix H = SymMatrix::zero(grid.dim);
    const int np = pair_count(grid.dim);
    size_t base = flat * static_cast<size_t>(np);
    int k = 0;
    for (int i = 0; i < grid.dim; ++i)
        for (int j = i; j < grid.dim; ++j) {
            H(i, j) = packed[base + static_cast<size_t>(k)];
            H(j, i) = H(i, j);
            ++k;
        }
    return H;
}

ScalarField sample(const Grid& grid, const std::function<double(const Point&)>& f) {
    ScalarField out(grid);
    const size_t total = grid.total_points();
    for (size_t p = 0; p < total; ++p) {
        const Point x = grid.point(p);
        const double v = f(x);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "non-finite sample at (" << x[0] << ", " << x[1] << ", " << x[2] << ")";
            throw std::runtime_error(os.str());
        }
        out[p] = v;
    }
    return out;
}

namespace {

inline size_t shifted(const Grid& g, std::array<int, 3> idx, int axis, int delta) {
    idx[static_cast<size_t>(axis)] += delta;
    return g.flat_index(idx);
}

} // namespace

double derivative1_at(const ScalarField& f, const std::array<int, 3>& idx, int axis) {
    const Grid& g = f.grid;
    return (f[shifted(g, idx, axis, +1)] - f[shifted(g, idx, axis, -1)]) / (2.0 * g.spacing);
}

Point gradient_at(const ScalarField& f, const std::array<int, 3>& idx) {
    Point grad{0, 0, 0};
    for (int d = 0; d < f.grid.dim; ++d) grad[static_cast<size_t>(d)] = derivative1_at(f, idx, d);
    return grad;
}

SymMatrix hessian_at(const ScalarField& f, const std::array<int, 3>& idx) {
    const Grid& g = f.grid;
    const double h2 = g.spacing * g.spacing;
    SymMatrix H = SymMatrix::zero(g.dim);
    const double center = f[g.flat_index(idx)];
    for (int i = 0; i < g.dim; ++i) {
        H(i, i) = (f[shifted(g, idx, i, +1)] - 2.0 * center + f[shifted(g, idx, i, -1)]) / h2;
        for (int j = i + 1; j < g.dim; ++j) {
            std::array<int, 3> q = idx;
            auto v = [&](int di, int dj) {
                q = idx;
                q[static_cast<size_t>(i)] += di;
                q[static_cast<size_t>(j)] += dj;
                return f[g.flat_index(q)];
            };
            const double cross = (v(1, 1) - v(1, -1) - v(-1, 1) + v(-1, -1)) / (4.0 * h2);
            H(i, j) = cross;
            H(j, i) = cross;
        }
    }
    return H;
}

HessianField hessian_field(const ScalarField& f) {
    HessianField out;
    out.grid = f.grid;
    out.stencil_offset = 1;
    const int np = HessianField::pair_count(f.grid.dim);
    out.packed.assign(f.grid.total_points() * static_cast<size_t>(np), 0.0);
    for_each_interior(f.grid, 1, [&](size_t flat, const std::array<int, 3>& idx) {
        const SymMatrix H = hessian_at(f, idx);
        size_t base = flat * static_cast<size_t>(np);
        int k = 0;
        for (int i = 0; i < f.grid.dim; ++i)
            for (int j = i; j < f.grid.dim; ++j) out.packed[base + static_cast<size_t>(k++)] = H(i, j);
    });
    return out;
}

std::array<double, 27> third_derivative_at(const ScalarField& f, const std::array<int, 3>& idx) {
    const Grid& g = f.grid;
    if (!g.is_interior(idx, 2)) throw std::invalid_argument("third derivative needs offset-2 interior point");
    std::array<double, 27> out{};
    const int n = g.dim;
    for (int k = 0; k < n; ++k) {
        std::array<int, 3> ip = idx, im = idx;
        ip[static_cast<size_t>(k)] += 1;
        im[static_cast<size_t>(k)] -= 1;
        const SymMatrix Hp = hessian_at(f, ip);
        const SymMatrix Hm = hessian_at(f, im);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out[static_cast<size_t>((i * n + j) * n + k)] =
                    (Hp(i, j) - Hm(i, j)) / (2.0 * g.spacing);
    }
    return out;
}

double sup_derivative_norm(const ScalarField& f, int l) {
    if (l != 2 && l != 3) throw std::invalid_argument("sup_derivative_norm: l must be 2 or 3");
    double best = 0.0;
    const int n = f.grid.dim;
    if (l == 2) {
        for_each_interior(f.grid, 1, [&](size_t, const std::array<int, 3>& idx) {
            const SymMatrix H = hessian_at(f, idx);
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) s += H(i, j) * H(i, j);
            best = std::max(best, std::sqrt(s));
        });
    } else {
        for_each_interior(f.grid, 2, [&](size_t, const std::array<int, 3>& idx) {
            const auto T = third_derivative_at(f, idx);
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k) {
                        const double v = T[static_cast<size_t>((i * n + j) * n + k)];
                        s += v * v;
                    }
            best = std::max(best, std::sqrt(s));
        });
    }
    return best;
}

bool inside_box(const Grid& grid, const Point& x) {
    const double ext = grid.extent() + 1e-12 * grid.spacing;
    for (int d = 0; d < grid.dim; ++d)
        if (std::abs(x[static_cast<size_t>(d)]) > ext) return false;
    return true;
}

double interpolate(const ScalarField& f, const Point& x) {
    const Grid& g = f.grid;
    if (!inside_box(g, x)) {
        std::ostringstream os;
        os << "interpolation point (" << x[0] << ", " << x[1] << ", " << x[2]
           << ") outside box of extent " << g.extent();
        throw std::out_of_range(os.str());
    }
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> frac{0, 0, 0};
    for (int d = 0; d < g.dim; ++d) {
        double s = x[static_cast<size_t>(d)] / g.spacing + g.center_index();
        int i = static_cast<int>(std::floor(s));
        if (i < 0) i = 0;
        if (i > g.m() - 2) i = g.m() - 2;
        base[static_cast<size_t>(d)] = i;
        frac[static_cast<size_t>(d)] = s - i;
    }
    double acc = 0.0;
    const int corners = 1 << g.dim;
    for (int c = 0; c < corners; ++c) {
        std::array<int, 3> idx = base;
        double w = 1.0;
        for (int d = 0; d < g.dim; ++d) {
            const bool hi = (c >> d) & 1;
            idx[static_cast<size_t>(d)] += hi ? 1 : 0;
            w *= hi ? frac[static_cast<size_t>(d)] : 1.0 - frac[static_cast<size_t>(d)];
        }
        acc += w * f[g.flat_index(idx)];
    }
    return acc;
}

ScalarField parabolic_rescale(const ScalarField& f, const Point& center,
                              const Point& grad_at_center, double center_value,
                              double sigma, const Grid& target) {
    if (!(sigma > 0)) throw std::invalid_argument("parabolic_rescale: sigma must be positive");
    if (target.dim != f.grid.dim) throw std::invalid_argument("parabolic_rescale: dim mismatch");
    ScalarField out(target);
    const size_t total = target.total_points();
    for (size_t p = 0; p < total; ++p) {
        const Point y = target.point(p);
        Point x = center;
        double lin = 0.0;
        for (int d = 0; d < target.dim; ++d) {
            const double yd = y[static_cast<size_t>(d)] / sigma;
            x[static_cast<size_t>(d)] += yd;
            lin += grad_at_center[static_cast<size_t>(d)] * yd;
        }
        out[p] = sigma * sigma * (interpolate(f, x) - center_value - lin);
    }
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_snapshot(const std::string& path, const ScalarField& f, double t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << f.grid.dim << ' ' << f.grid.m() << ' ' << format_double(f.grid.spacing) << ' '
       << format_double(f.grid.half_width) << ' ' << format_double(t) << '\n';
    for (double v : f.values) os << format_double(v) << '\n';
    if (!os) throw std::runtime_error("write failed: " + path);
}

std::pair<ScalarField, double> read_snapshot(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    int dim = 0, m = 0;
    double h = 0, L = 0, t = 0;
    is >> dim >> m >> h >> L >> t;
    if (!is) throw std::runtime_error("bad snapshot header: " + path);
    Grid g(dim, L, h);
    if (g.m() != m) throw std::runtime_error("snapshot header inconsistent (m) in " + path);
    ScalarField f(g);
    for (double& v : f.values) {
        is >> v;
        if (!is) throw std::runtime_error("truncated snapshot: " + path);
    }
    return {std::move(f), t};
}

void write_snapshot_json(const std::string& path, const ScalarField& f, double t) {
    nlohmann::ordered_json j;
    j["dim"] = f.grid.dim;
    j["m"] = f.grid.m();
    j["h"] = f.grid.spacing;
    j["L"] = f.grid.half_width;
    j["t"] = t;
    j["values"] = f.values;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << j.dump(2) << '\n';
}

} // namespace tauflow
