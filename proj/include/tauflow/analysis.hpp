#pragma once

#include "tauflow/field.hpp"
#include "tauflow/flow.hpp"
#include "tauflow/operators.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace tauflow {

enum class ConditionKind { A, B, E, L };

/// One of the Hessian-cone conditions of the flow, paired with its regime.
/// B: [-1+zeta, rho] at tau = pi/4; E: [b mu - a, b Lam - a] for tau in (0,pi/4),
/// mu > 1 required; L: [-(b+b eta+a), b+b eta-a] for tau in (pi/4,pi/2).
struct ConditionSpec {
    ConditionKind kind = ConditionKind::B;
    double tau = 0.0;
    double zeta = 0.0, rho = 0.0; // B
    double mu = 0.0, lam = 0.0;   // E
    double eta = 0.0;             // L

    static ConditionSpec b(double zeta, double rho);
    static ConditionSpec e(double tau, double mu, double lam);
    static ConditionSpec l(double tau, double eta);

    /// Eigenvalue bounds [lower, upper]; throws for kind A.
    std::pair<double, double> bounds() const;
};

struct ConditionReport {
    bool satisfied = false;
    double lam_min = 0.0;
    double lam_max = 0.0;
    double margin = 0.0;     // signed distance to the nearest bound
    size_t worst_point = 0;  // flat grid index realizing the margin
};

std::string condition_report_json(const ConditionReport& r);

/// Sorted Hessian eigenvalues at every offset-1 interior point (row-major, n per point).
std::vector<EigenTuple> eigen_field(const HessianField& hess);

ConditionReport check_condition(const ConditionSpec& spec, const ScalarField& field);

/// Max over sampled radii R and directions x of |u0(Rx)/R^2 - u0(x)|;
/// zero iff u0 is 2-homogeneous on the samples.
double homogeneity_defect(const std::function<double(const Point&)>& u0,
                          const std::vector<double>& sample_radii,
                          const std::vector<Point>& sample_dirs);

struct DecayFit {
    double alpha = 0.0;
    double c = 0.0;
    double rms_residual = 0.0;
};

/// Least-squares fit of log v = log c - alpha log t. Requires >= 5 positive samples.
/// `transient_fraction` drops the first part of the series before fitting.
DecayFit decay_exponent(const std::vector<std::pair<double, double>>& series,
                        double transient_fraction = 0.2);

/// g = sin(tau) (I + H^2) + 2 cos(tau) H, the graph metric at one Hessian.
SymMatrix induced_metric(double tau, const SymMatrix& hess_point);

/// Max over interior of |d_k F_tau(D^2 u) - sum_ij g^ij u_ijk| per component;
/// the discrete check of the mean-curvature identity H_k = g^ij u_ijk.
double geometry_residual(const FlowState& state);

} // namespace tauflow
