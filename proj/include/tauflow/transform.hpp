#pragma once

#include "tauflow/analysis.hpp"
#include "tauflow/field.hpp"
#include "tauflow/operators.hpp"

#include <string>
#include <vector>

namespace tauflow {

/// Potential map between a LogRatio/ArctanRatio flow and its LogDet/ArctanSum
/// counterpart: phi(x) = scale_u * u(scale_x * x) + quad_coeff |x|^2 + time_linear * t.
/// Hessian eigenvalues transport as nu = (lambda + a) / b.
struct TransformSpec {
    double source_tau = 0.0;
    double a = 0.0, b = 0.0;
    double scale_x = 0.0;    // (a^2+1)^{1/4} / b
    double scale_u = 0.0;    // b / sqrt(a^2+1)
    double quad_coeff = 0.0; // a / (2b)
    double time_linear = 0.0; // 0 for the log case; n*pi/4 for the corrected arctan case
};

/// Build the transform for a LogRatio or ArctanRatio source regime. For the
/// arctan case `corrected_time_term` selects the +(n pi/4) t term that makes the
/// target equation hold exactly; false reproduces the literal constant-only map.
TransformSpec make_transform(double source_tau, int dim, bool corrected_time_term = true);

/// Target-branch regime of a transform (LogDet for LogRatio sources, ArctanSum otherwise).
TauRegime target_regime(const TransformSpec& spec);

/// Apply the potential map at time t, interpolating u at scale_x * x.
ScalarField map_potential(const TransformSpec& spec, const ScalarField& field, double t,
                          const Grid& target);

/// Eigenvalue bounds of the mapped potential: E -> [mu, Lam], L -> [-(1+eta), 1+eta].
std::pair<double, double> map_condition(const TransformSpec& spec, const ConditionSpec& cond);

struct ShiftIdentity {
    double lhs = 0.0; // arctan((lambda+a-b)/(lambda+a+b))
    double rhs = 0.0; // arctan((lambda+a)/b) - pi/4
    double gap = 0.0;
};

/// The tangent-difference identity behind the arctan-branch shift; exact on the
/// principal branch lambda > -a-b. Throws at the ratio form's pole.
ShiftIdentity arctan_shift_identity(double lambda, const TauRegime& regime);

struct ConsistencyReport {
    double source_tau = 0.0;
    int dim = 0;
    double spacing = 0.0;
    std::vector<double> times;
    /// sup |map(flow(u0)) - flow(map(u0))| per time, with the corrected time term.
    std::vector<double> gap_corrected;
    /// Same with time_linear = 0 (the constant-only arctan map; equals the log-case
    /// report, where there is no time term).
    std::vector<double> gap_literal;
    bool arctan_case = false;
};

/// Runs (i) source flow then map and (ii) map then target flow, both with
/// QuadraticHold boundaries, and reports the sup-difference time series.
ConsistencyReport cross_flow_consistency(double source_tau, const ScalarField& u0, double t_end,
                                         int snapshot_count = 5);

std::string consistency_report_json(const ConsistencyReport& rep);

} // namespace tauflow
