#pragma once

#include "tauflow/field.hpp"
#include "tauflow/operators.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tauflow {

/// Raised when a step would leave the admissibility cone (or get within the
/// 1e-9 safety margin of its edge).
struct ConeExitError : std::runtime_error {
    size_t point;
    double lambda;
    ConeExitError(size_t point_, double lambda_, const std::string& what)
        : std::runtime_error(what), point(point_), lambda(lambda_) {}
};

enum class BoundaryMode { Frozen, Exact, QuadraticHold };

struct BoundaryPolicy {
    BoundaryMode mode = BoundaryMode::Frozen;
    // required iff mode == Exact
    std::function<double(const Point&, double)> exact_fn;
};

/// The evolving object: a potential field, its time, operator regime and the
/// gamma-homotopy weight (1 = pure F_tau, 0 = heat equation).
struct FlowState {
    ScalarField field;
    double time = 0.0;
    TauRegime regime;
    double gamma = 1.0;
    BoundaryPolicy boundary;

    // boundary-ring bookkeeping, filled by prepare()
    std::vector<size_t> ring;          // flat indices with some axis index < 2 or > m-3
    std::vector<double> ring_base;     // u0 at ring points
    std::vector<double> ring_rate;     // QuadraticHold: F(D^2 u0) at (clamped) ring points
    bool prepared = false;

    /// Collect the width-2 boundary ring and precompute the per-policy data.
    void prepare();
};

FlowState make_flow_state(ScalarField field, const TauRegime& regime, BoundaryPolicy boundary,
                          double gamma = 1.0, double t0 = 0.0);

struct MonitorRow {
    double t;
    double lam_min;
    double lam_max;
    double d2_sup;
    double d3_sup;
    double pde_residual;
};

struct Trajectory {
    std::vector<std::pair<double, ScalarField>> snapshots;
    std::vector<MonitorRow> monitors;
    bool failed = false;
    std::string failure;
};

/// Largest explicit-stable step: safety * h^2 / (2 n Gmax), Gmax the largest
/// blended diffusion coefficient gamma*f'(lambda_i) + (1-gamma) over the interior.
double stable_dt(const FlowState& state, double safety = 0.5);

/// One Heun (explicit trapezoidal) step; boundary ring advanced by policy.
/// Throws ConeExitError if the state leaves the admissibility cone.
FlowState step(const FlowState& state, double dt);

struct RunOptions {
    double safety = 0.5;
    int monitor_stride = 10;
    std::optional<double> fixed_dt; // bypass the CFL schedule when set
};

/// March to t_end, recomputing dt every monitor_stride steps and shortening
/// steps to hit snapshot times exactly. On cone exit the partial trajectory is
/// returned with `failed` set.
Trajectory run(FlowState initial, double t_end, const std::vector<double>& snapshot_times,
               const RunOptions& opts = {});

/// Monitor CSV with header `t,lam_min,lam_max,d2_sup,d3_sup,pde_residual`;
/// `footer_comments` lines are appended as `# ...`.
void write_monitor_csv(const std::string& path, const Trajectory& traj,
                       const std::vector<std::string>& footer_comments = {});

} // namespace tauflow
