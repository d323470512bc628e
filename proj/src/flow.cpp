#include "tauflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace tauflow {

namespace {

constexpr double kConeMargin = 1e-9;
constexpr int kRingWidth = 2;

// Pointwise blended operator value over offset-2 interior points. Throws
// ConeExitError when gamma > 0 and an eigenvalue is within kConeMargin of the cone edge.
void compute_rhs(const ScalarField& f, const TauRegime& regime, double gamma,
                 std::vector<double>& out) {
    out.assign(f.grid.total_points(), 0.0);
    const double lo = cone_lower(regime) + kConeMargin;
    const bool check = gamma > 0.0;
    for_each_interior(f.grid, kRingWidth, [&](size_t flat, const std::array<int, 3>& idx) {
        const SymMatrix H = hessian_at(f, idx);
        const EigenTuple eigs = sym_eigenvalues(H);
        if (check) {
            for (int i = 0; i < eigs.n; ++i)
                if (!(eigs[i] > lo)) {
                    std::ostringstream os;
                    os << "cone exit at flat index " << flat << ": lambda = " << eigs[i]
                       << " vs " << branch_name(regime.branch) << " lower bound "
                       << cone_lower(regime);
                    throw ConeExitError(flat, eigs[i], os.str());
                }
        }
        out[flat] = gamma_blend(regime, gamma, eigs);
    });
}

double boundary_value(const FlowState& s, size_t ring_pos, double t) {
    switch (s.boundary.mode) {
    case BoundaryMode::Frozen:
        return s.ring_base[ring_pos];
    case BoundaryMode::Exact:
        return s.boundary.exact_fn(s.field.grid.point(s.ring[ring_pos]), t);
    case BoundaryMode::QuadraticHold:
        return s.ring_base[ring_pos] + t * s.ring_rate[ring_pos];
    }
    return 0.0;
}

void apply_boundary(FlowState& s, double t) {
    for (size_t k = 0; k < s.ring.size(); ++k) s.field[s.ring[k]] = boundary_value(s, k, t);
}

} // namespace

void FlowState::prepare() {
    if (prepared) return;
    const Grid& g = field.grid;
    if (boundary.mode == BoundaryMode::Exact && !boundary.exact_fn)
        throw std::invalid_argument("Exact boundary policy requires exact_fn");
    ring.clear();
    ring_base.clear();
    ring_rate.clear();
    const size_t total = g.total_points();
    for (size_t p = 0; p < total; ++p) {
        const auto idx = g.multi_index(p);
        if (!g.is_interior(idx, kRingWidth)) ring.push_back(p);
    }
    ring_base.reserve(ring.size());
    for (size_t p : ring) ring_base.push_back(field[p]);
    if (boundary.mode == BoundaryMode::QuadraticHold) {
        ring_rate.reserve(ring.size());
        for (size_t p : ring) {
            // initial Hessian, with axis indices clamped to where the stencil fits
            auto idx = g.multi_index(p);
            for (int d = 0; d < g.dim; ++d)
                idx[static_cast<size_t>(d)] =
                    std::clamp(idx[static_cast<size_t>(d)], 1, g.m() - 2);
            const EigenTuple eigs = sym_eigenvalues(hessian_at(field, idx));
            ring_rate.push_back(gamma_blend(regime, gamma, eigs));
        }
        // hold rates relative to t = 0 of the hold; shift base so value(t) = base + t*rate
        for (size_t k = 0; k < ring.size(); ++k) ring_base[k] -= time * ring_rate[k];
    }
    prepared = true;
}

FlowState make_flow_state(ScalarField field, const TauRegime& regime, BoundaryPolicy boundary,
                          double gamma, double t0) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0,1]");
    FlowState s;
    s.field = std::move(field);
    s.time = t0;
    s.regime = regime;
    s.gamma = gamma;
    s.boundary = std::move(boundary);
    s.prepare();
    return s;
}

double stable_dt(const FlowState& state, double safety) {
    const ScalarField& f = state.field;
    const double lo = cone_lower(state.regime) + kConeMargin;
    double gmax = 0.0;
    for_each_interior(f.grid, kRingWidth, [&](size_t flat, const std::array<int, 3>& idx) {
        const EigenTuple eigs = sym_eigenvalues(hessian_at(f, idx));
        for (int i = 0; i < eigs.n; ++i) {
            double coeff = 1.0 - state.gamma;
            if (state.gamma > 0.0) {
                if (!(eigs[i] > lo)) {
                    std::ostringstream os;
                    os << "stable_dt: inadmissible eigenvalue " << eigs[i] << " at flat index "
                       << flat;
                    throw ConeExitError(flat, eigs[i], os.str());
                }
                coeff += state.gamma * f_prime(state.regime, eigs[i]);
            }
            gmax = std::max(gmax, coeff);
        }
    });
    const double h = f.grid.spacing;
    return safety * h * h / (2.0 * f.grid.dim * gmax);
}

FlowState step(const FlowState& state, double dt) {
    FlowState next = state;
    next.prepare();
    const double t1 = state.time + dt;

    std::vector<double> k1, k2;
    compute_rhs(state.field, state.regime, state.gamma, k1);

    FlowState pred = next;
    for_each_interior(pred.field.grid, kRingWidth, [&](size_t p, const std::array<int, 3>&) {
        pred.field[p] = state.field[p] + dt * k1[p];
    });
    apply_boundary(pred, t1);

    compute_rhs(pred.field, state.regime, state.gamma, k2);

    for_each_interior(next.field.grid, kRingWidth, [&](size_t p, const std::array<int, 3>&) {
        next.field[p] = state.field[p] + 0.5 * dt * (k1[p] + k2[p]);
    });
    apply_boundary(next, t1);
    next.time = t1;

    // re-check the stepped state
    if (state.gamma > 0.0) {
        std::vector<double> scratch;
        compute_rhs(next.field, state.regime, state.gamma, scratch);
    }
    return next;
}

namespace {

MonitorRow make_monitor_row(const FlowState& s, double residual) {
    MonitorRow row{};
    row.t = s.time;
    row.lam_min = std::numeric_limits<double>::infinity();
    row.lam_max = -row.lam_min;
    for_each_interior(s.field.grid, 1, [&](size_t, const std::array<int, 3>& idx) {
        const EigenTuple eigs = sym_eigenvalues(hessian_at(s.field, idx));
        row.lam_min = std::min(row.lam_min, eigs[0]);
        row.lam_max = std::max(row.lam_max, eigs[eigs.n - 1]);
    });
    row.d2_sup = sup_derivative_norm(s.field, 2);
    row.d3_sup = sup_derivative_norm(s.field, 3);
    row.pde_residual = residual;
    return row;
}

double step_residual(const FlowState& before, const FlowState& after, double dt) {
    std::vector<double> r0, r1;
    compute_rhs(before.field, before.regime, before.gamma, r0);
    compute_rhs(after.field, after.regime, after.gamma, r1);
    double sup = 0.0;
    for_each_interior(after.field.grid, kRingWidth, [&](size_t p, const std::array<int, 3>&) {
        const double lhs = (after.field[p] - before.field[p]) / dt;
        sup = std::max(sup, std::abs(lhs - 0.5 * (r0[p] + r1[p])));
    });
    return sup;
}

} // namespace

Trajectory run(FlowState initial, double t_end, const std::vector<double>& snapshot_times,
               const RunOptions& opts) {
    initial.prepare();
    Trajectory traj;
    if (!(t_end >= initial.time)) throw std::invalid_argument("run: t_end before initial time");

    std::vector<double> snaps = snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    const double teps = 1e-12 * std::max(1.0, std::abs(t_end));

    size_t next_snap = 0;
    auto take_due_snapshots = [&](const FlowState& s) {
        while (next_snap < snaps.size() && snaps[next_snap] <= s.time + teps) {
            if (snaps[next_snap] >= initial.time - teps)
                traj.snapshots.emplace_back(snaps[next_snap], s.field);
            ++next_snap;
        }
    };

    FlowState state = std::move(initial);
    traj.monitors.push_back(make_monitor_row(state, 0.0));
    take_due_snapshots(state);
    if (t_end <= state.time + teps) {
        if (traj.snapshots.empty()) traj.snapshots.emplace_back(state.time, state.field);
        return traj;
    }

    double dt_sched = 0.0;
    long step_count = 0;
    const int stride = std::max(1, opts.monitor_stride);
    try {
        while (state.time < t_end - teps) {
            if (step_count % stride == 0)
                dt_sched = opts.fixed_dt ? *opts.fixed_dt : stable_dt(state, opts.safety);
            double dt = dt_sched;
            double limit = t_end;
            if (next_snap < snaps.size() && snaps[next_snap] > state.time + teps)
                limit = std::min(limit, snaps[next_snap]);
            dt = std::min(dt, limit - state.time);

            const bool monitored = (step_count + 1) % stride == 0;
            FlowState before;
            if (monitored) before = state;
            state = step(state, dt);
            ++step_count;
            if (monitored)
                traj.monitors.push_back(make_monitor_row(state, step_residual(before, state, dt)));
            take_due_snapshots(state);
        }
    } catch (const ConeExitError& e) {
        traj.failed = true;
        traj.failure = e.what();
        return traj;
    }
    if (traj.monitors.back().t < state.time - teps)
        traj.monitors.push_back(make_monitor_row(state, 0.0));
    return traj;
}

void write_monitor_csv(const std::string& path, const Trajectory& traj,
                       const std::vector<std::string>& footer_comments) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << "t,lam_min,lam_max,d2_sup,d3_sup,pde_residual\n";
    for (const MonitorRow& r : traj.monitors)
        os << format_double(r.t) << ',' << format_double(r.lam_min) << ','
           << format_double(r.lam_max) << ',' << format_double(r.d2_sup) << ','
           << format_double(r.d3_sup) << ',' << format_double(r.pde_residual) << '\n';
    if (traj.failed) os << "# FAILED: " << traj.failure << '\n';
    for (const std::string& line : footer_comments) os << "# " << line << '\n';
}

} // namespace tauflow
