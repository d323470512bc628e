#pragma once

#include "tauflow/field.hpp"
#include "tauflow/flow.hpp"
#include "tauflow/operators.hpp"

#include <functional>
#include <string>
#include <vector>

namespace tauflow {

/// Dirichlet problem for the self-expander equation F_tau(D^2 u) = u - <x, Du>/2.
struct ExpanderProblem {
    TauRegime regime;
    Grid grid;
    /// Ring data; typically the 2-homogeneous profile U0 of the flow's initial
    /// datum at infinity, evaluated on the boundary ring.
    std::function<double(const Point&)> boundary_data;
    ScalarField initial_guess;
};

/// Pointwise r(x) = F_tau(D^2 u) - u + <x, Du>/2 on the offset-2 interior.
/// The drift derivative uses second-order one-sided upwind differences (exact
/// on quadratics); the same discretization backs normalized_step and the
/// Newton solver, so all three share one discrete root. Ring left at zero.
ScalarField expander_residual(const ScalarField& field, const TauRegime& regime);

double sup_interior_abs(const ScalarField& f, int offset = 2);

/// v_t(x) = u(sqrt(t) x, t) / t, interpolated onto `target`. `t` must be among
/// the trajectory's snapshot times.
ScalarField rescaled_snapshot(const Trajectory& traj, double t, const Grid& target);

/// CFL bound for the normalized flow: the diffusive limit of stable_dt combined
/// with the drift limit 2h/max|y| (second-order upwind drift differencing).
double normalized_stable_ds(const FlowState& state, double safety = 0.5);

/// One Heun step of dw/ds = F_tau(D^2 w) - w + <y, Dw>/2, drift upwinded with
/// second-order one-sided differences (exact on quadratics). The boundary ring
/// is held fixed. state.time carries s.
FlowState normalized_step(const FlowState& state, double ds);

struct NewtonResult {
    ScalarField solution;
    int iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
};

/// Damped Newton on the discretized expander equation (the same second-order
/// upwind drift discretization as normalized_step, so both target the same
/// discrete root). Linear solves by Gauss-Seidel sweeps to a 1e-8 relative
/// residual; backtracking halves the update until the residual decreases and
/// the iterate stays admissible.
NewtonResult solve_expander_newton(const ExpanderProblem& problem, double tol, int max_iter);

struct ConvergenceReport {
    std::vector<double> times;
    std::vector<double> sup_differences; // d_k = ||v_{t_{k+1}} - v_{t_k}||_inf
    double final_residual = 0.0;         // ||expander_residual(v_last)||_inf
};

/// Theorem-style convergence evidence: decreasing d_k plus a small final
/// residual indicate the rescaled flow approaches a self-expander.
ConvergenceReport convergence_report(const Trajectory& traj, const Grid& target,
                                     const std::vector<double>& times, const TauRegime& regime);

} // namespace tauflow
