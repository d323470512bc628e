#include "tauflow/transform.hpp"

#include "tauflow/flow.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

namespace tauflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

} // namespace

TransformSpec make_transform(double source_tau, int dim, bool corrected_time_term) {
    const TauRegime r = regime_of(source_tau);
    if (r.branch != Branch::LogRatio && r.branch != Branch::ArctanRatio)
        throw std::invalid_argument(
            "transform defined for tau in (0,pi/4) or (pi/4,pi/2), got branch " +
            std::string(branch_name(r.branch)));
    TransformSpec s;
    s.source_tau = source_tau;
    s.a = r.a;
    s.b = r.b;
    s.scale_x = std::pow(r.a * r.a + 1.0, 0.25) / r.b;
    s.scale_u = r.b / std::sqrt(r.a * r.a + 1.0);
    s.quad_coeff = r.a / (2.0 * r.b);
    s.time_linear = 0.0;
    if (r.branch == Branch::ArctanRatio && corrected_time_term)
        s.time_linear = dim * kPi / 4.0;
    return s;
}

TauRegime target_regime(const TransformSpec& spec) {
    return spec.a > 1.0 ? regime_of(0.0) : regime_of(kPi / 2.0);
}

ScalarField map_potential(const TransformSpec& spec, const ScalarField& field, double t,
                          const Grid& target) {
    if (target.dim != field.grid.dim) throw std::invalid_argument("map_potential: dim mismatch");
    if (spec.scale_x * target.extent() > field.grid.extent() + 1e-9 * field.grid.spacing)
        throw std::out_of_range("map_potential: scaled target box escapes the source box");
    ScalarField out(target);
    const size_t total = target.total_points();
    for (size_t p = 0; p < total; ++p) {
        const Point x = target.point(p);
        Point sx{0, 0, 0};
        double r2 = 0.0;
        for (int d = 0; d < target.dim; ++d) {
            sx[static_cast<size_t>(d)] = spec.scale_x * x[static_cast<size_t>(d)];
            r2 += x[static_cast<size_t>(d)] * x[static_cast<size_t>(d)];
        }
        out[p] = spec.scale_u * interpolate(field, sx) + spec.quad_coeff * r2 +
                 spec.time_linear * t;
    }
    return out;
}

std::pair<double, double> map_condition(const TransformSpec& spec, const ConditionSpec& cond) {
    const bool log_side = spec.a > 1.0;
    if (cond.kind == ConditionKind::E && !log_side)
        throw std::invalid_argument("condition E belongs to the log-side transform");
    if (cond.kind == ConditionKind::L && log_side)
        throw std::invalid_argument("condition L belongs to the arctan-side transform");
    if (cond.kind != ConditionKind::E && cond.kind != ConditionKind::L)
        throw std::invalid_argument("map_condition: kind must be E or L");
    const auto [lo, hi] = cond.bounds();
    // nu = (lambda + a) / b
    return {(lo + spec.a) / spec.b, (hi + spec.a) / spec.b};
}

ShiftIdentity arctan_shift_identity(double lambda, const TauRegime& regime) {
    if (regime.branch != Branch::ArctanRatio)
        throw std::invalid_argument("arctan_shift_identity needs an ArctanRatio regime");
    const double a = regime.a, b = regime.b;
    const double denom = lambda + a + b;
    if (std::abs(denom) < 1e-14)
        throw std::domain_error("arctan_shift_identity: lambda at the ratio form's pole");
    ShiftIdentity out;
    out.lhs = std::atan((lambda + a - b) / denom);
    out.rhs = std::atan((lambda + a) / b) - kPi / 4.0;
    out.gap = out.lhs - out.rhs;
    return out;
}

ConsistencyReport cross_flow_consistency(double source_tau, const ScalarField& u0, double t_end,
                                         int snapshot_count) {
    const TauRegime source = regime_of(source_tau);
    const TransformSpec spec = make_transform(source_tau, u0.grid.dim, true);
    const TauRegime target = target_regime(spec);

    ConsistencyReport rep;
    rep.source_tau = source_tau;
    rep.dim = u0.grid.dim;
    rep.arctan_case = source.branch == Branch::ArctanRatio;

    std::vector<double> times;
    for (int k = 1; k <= snapshot_count; ++k)
        times.push_back(t_end * static_cast<double>(k) / snapshot_count);
    rep.times = times;

    // target grid chosen so scale_x * (target point) lands on a source grid point
    Grid tgrid(u0.grid.dim, u0.grid.extent() / spec.scale_x + 0.5 * u0.grid.spacing / spec.scale_x,
               u0.grid.spacing / spec.scale_x);
    rep.spacing = tgrid.spacing;

    // path (i): source flow, then map
    FlowState src_state = make_flow_state(u0, source, {BoundaryMode::QuadraticHold, nullptr});
    Trajectory src_traj = run(src_state, t_end, times);
    if (src_traj.failed) throw std::runtime_error("source flow failed: " + src_traj.failure);

    // path (ii): map the data, then run the target flow
    ScalarField mapped0 = map_potential(spec, u0, 0.0, tgrid);
    FlowState tgt_state = make_flow_state(mapped0, target, {BoundaryMode::QuadraticHold, nullptr});
    Trajectory tgt_traj = run(tgt_state, t_end, times);
    if (tgt_traj.failed) throw std::runtime_error("target flow failed: " + tgt_traj.failure);

    for (size_t k = 0; k < times.size(); ++k) {
        const ScalarField& src_snap = src_traj.snapshots[k].second;
        const ScalarField& tgt_snap = tgt_traj.snapshots[k].second;
        const ScalarField mapped = map_potential(spec, src_snap, times[k], tgrid);
        double gap_corr = 0.0, gap_lit = 0.0;
        for_each_interior(tgrid, 2, [&](size_t p, const std::array<int, 3>&) {
            const double diff_corr = mapped[p] - tgt_snap[p];
            gap_corr = std::max(gap_corr, std::abs(diff_corr));
            gap_lit = std::max(gap_lit, std::abs(diff_corr - spec.time_linear * times[k]));
        });
        rep.gap_corrected.push_back(gap_corr);
        rep.gap_literal.push_back(gap_lit);
    }
    return rep;
}

std::string consistency_report_json(const ConsistencyReport& rep) {
    nlohmann::ordered_json j;
    j["source_tau"] = rep.source_tau;
    j["dim"] = rep.dim;
    j["spacing"] = rep.spacing;
    j["arctan_case"] = rep.arctan_case;
    j["times"] = rep.times;
    j["gap_corrected"] = rep.gap_corrected;
    j["gap_literal"] = rep.gap_literal;
    return j.dump(2);
}

} // namespace tauflow
