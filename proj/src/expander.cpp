#include "tauflow/expander.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tauflow {

namespace {

constexpr double kConeMargin = 1e-9;

// Second-order one-sided first derivative for the <y, Dw>/2 drift. The term's
// characteristics move toward the origin (dy/ds = -y/2), so information comes
// from larger |y| and the stencil must reach outward; the width-2 boundary ring
// supplies the two exterior values it needs.
double drift_derivative(const ScalarField& f, const std::array<int, 3>& idx, int axis) {
    const Grid& g = f.grid;
    const double h = g.spacing;
    auto at = [&](int delta) {
        std::array<int, 3> q = idx;
        q[static_cast<size_t>(axis)] += delta;
        return f[g.flat_index(q)];
    };
    if (g.coord(idx[static_cast<size_t>(axis)]) >= 0.0)
        return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    return (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h);
}

double residual_at(const ScalarField& f, const TauRegime& regime,
                   const std::array<int, 3>& idx, size_t flat) {
    const EigenTuple eigs = sym_eigenvalues(hessian_at(f, idx));
    double drift = 0.0;
    const Point x = f.grid.point(idx);
    for (int d = 0; d < f.grid.dim; ++d)
        drift += x[static_cast<size_t>(d)] * drift_derivative(f, idx, d);
    return f_eval(regime, eigs) - f[flat] + 0.5 * drift;
}

} // namespace

ScalarField expander_residual(const ScalarField& field, const TauRegime& regime) {
    ScalarField r(field.grid);
    for_each_interior(field.grid, 2, [&](size_t flat, const std::array<int, 3>& idx) {
        r[flat] = residual_at(field, regime, idx, flat);
    });
    return r;
}

double sup_interior_abs(const ScalarField& f, int offset) {
    double sup = 0.0;
    for_each_interior(f.grid, offset, [&](size_t flat, const std::array<int, 3>&) {
        sup = std::max(sup, std::abs(f[flat]));
    });
    return sup;
}

ScalarField rescaled_snapshot(const Trajectory& traj, double t, const Grid& target) {
    const ScalarField* src = nullptr;
    for (const auto& [st, field] : traj.snapshots)
        if (std::abs(st - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
            src = &field;
            break;
        }
    if (!src) throw std::invalid_argument("rescaled_snapshot: t not among snapshot times");
    if (!(t > 0)) throw std::invalid_argument("rescaled_snapshot: t must be positive");
    const double root = std::sqrt(t);
    if (root * target.extent() > src->grid.extent() + 1e-12)
        throw std::out_of_range("rescaled_snapshot: sqrt(t) * target box escapes the source box");
    ScalarField out(target);
    const size_t total = target.total_points();
    for (size_t p = 0; p < total; ++p) {
        const Point x = target.point(p);
        const Point sx{root * x[0], root * x[1], root * x[2]};
        out[p] = interpolate(*src, sx) / t;
    }
    return out;
}

double normalized_stable_ds(const FlowState& state, double safety) {
    const double diffusive = stable_dt(state, safety);
    const Grid& g = state.field.grid;
    const double speed = 0.5 * g.dim * g.extent(); // sum_d |y_d|/2 at a box corner
    const double drift = speed > 0 ? safety * g.spacing / speed : diffusive;
    return std::min({diffusive, drift, safety});
}

FlowState normalized_step(const FlowState& state, double ds) {
    FlowState next = state;
    next.prepare();
    const Grid& g = state.field.grid;
    const double lo = cone_lower(state.regime) + kConeMargin;

    auto rhs = [&](const ScalarField& w, std::vector<double>& out) {
        out.assign(g.total_points(), 0.0);
        for_each_interior(g, 2, [&](size_t flat, const std::array<int, 3>& idx) {
            const EigenTuple eigs = sym_eigenvalues(hessian_at(w, idx));
            for (int i = 0; i < eigs.n; ++i)
                if (!(eigs[i] > lo)) {
                    std::ostringstream os;
                    os << "normalized flow cone exit at flat index " << flat
                       << ": lambda = " << eigs[i];
                    throw ConeExitError(flat, eigs[i], os.str());
                }
            double drift = 0.0;
            const Point y = g.point(idx);
            for (int d = 0; d < g.dim; ++d)
                drift += y[static_cast<size_t>(d)] * drift_derivative(w, idx, d);
            out[flat] = f_eval(state.regime, eigs) - w[flat] + 0.5 * drift;
        });
    };

    std::vector<double> k1, k2;
    rhs(state.field, k1);
    ScalarField pred = state.field;
    for_each_interior(g, 2, [&](size_t p, const std::array<int, 3>&) {
        pred[p] = state.field[p] + ds * k1[p];
    });
    rhs(pred, k2);
    for_each_interior(g, 2, [&](size_t p, const std::array<int, 3>&) {
        next.field[p] = state.field[p] + 0.5 * ds * (k1[p] + k2[p]);
    });
    next.time = state.time + ds;
    return next;
}

NewtonResult solve_expander_newton(const ExpanderProblem& problem, double tol, int max_iter) {
    const Grid& g = problem.grid;
    const int n = g.dim;
    const double h = g.spacing;
    const double lo = cone_lower(problem.regime) + kConeMargin;

    ScalarField w = problem.initial_guess;
    if (!(w.grid == g)) throw std::invalid_argument("initial guess grid mismatch");
    const size_t total = g.total_points();
    for (size_t p = 0; p < total; ++p)
        if (!g.is_interior(g.multi_index(p), 2)) w[p] = problem.boundary_data(g.point(p));

    // interior point list (offset 2)
    std::vector<size_t> interior;
    std::vector<std::array<int, 3>> interior_idx;
    for_each_interior(g, 2, [&](size_t flat, const std::array<int, 3>& idx) {
        interior.push_back(flat);
        interior_idx.push_back(idx);
    });

    auto residual_field = [&](const ScalarField& u, ScalarField& r) {
        r = ScalarField(g);
        for (size_t k = 0; k < interior.size(); ++k)
            r[interior[k]] = residual_at(u, problem.regime, interior_idx[k], interior[k]);
    };
    auto admissible_everywhere = [&](const ScalarField& u) {
        bool ok = true;
        for (size_t k = 0; k < interior.size() && ok; ++k) {
            const EigenTuple eigs = sym_eigenvalues(hessian_at(u, interior_idx[k]));
            for (int i = 0; i < eigs.n; ++i)
                if (!(eigs[i] > lo)) ok = false;
        }
        return ok;
    };

    NewtonResult result;
    ScalarField r;
    residual_field(w, r); // throws std::domain_error if the guess is inadmissible
    double rn = sup_interior_abs(r, 2);

    const int np = n * (n + 1) / 2;
    std::vector<double> ginv(interior.size() * static_cast<size_t>(np));
    std::vector<double> diag(interior.size());

    for (int iter = 0; iter < max_iter; ++iter) {
        if (rn <= tol) {
            result.converged = true;
            break;
        }

        // freeze g^ij and the Jacobian diagonal at the current iterate
        for (size_t k = 0; k < interior.size(); ++k) {
            EigenTuple eigs;
            std::array<std::array<double, 3>, 3> vec;
            sym_eigen(hessian_at(w, interior_idx[k]), eigs, &vec);
            SymMatrix gm = SymMatrix::zero(n);
            for (int e = 0; e < n; ++e) {
                const double fp = f_prime(problem.regime, eigs[e]);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        gm(i, j) += fp * vec[static_cast<size_t>(e)][static_cast<size_t>(i)] *
                                    vec[static_cast<size_t>(e)][static_cast<size_t>(j)];
            }
            int c = 0;
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    ginv[k * static_cast<size_t>(np) + static_cast<size_t>(c++)] = gm(i, j);
            // The Jacobian models the drift with first-order outward upwinding:
            // that keeps every row strictly diagonally dominant (the residual's
            // second-order stencil is not), so Gauss-Seidel is guaranteed to
            // converge. The O(h) Jacobian mismatch only damps the Newton rate;
            // the root is still the second-order residual's root.
            double d = -1.0;
            const Point y = g.point(interior_idx[k]);
            for (int i = 0; i < n; ++i) {
                d += -2.0 * gm(i, i) / (h * h);
                d += -0.5 * std::abs(y[static_cast<size_t>(i)]) / h;
            }
            diag[k] = d;
        }

        // L[delta] = sum g^ij delta_ij - delta + <y, D_upw delta>/2, delta = 0 on the ring
        ScalarField delta(g);
        auto apply_L = [&](const ScalarField& d, size_t k) {
            const auto& idx = interior_idx[k];
            const size_t flat = interior[k];
            double acc = -d[flat];
            int c = 0;
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    const double gij = ginv[k * static_cast<size_t>(np) + static_cast<size_t>(c++)];
                    if (gij == 0.0) continue;
                    double second;
                    if (i == j) {
                        std::array<int, 3> q = idx;
                        q[static_cast<size_t>(i)] += 1;
                        const double up = d[g.flat_index(q)];
                        q[static_cast<size_t>(i)] -= 2;
                        const double dn = d[g.flat_index(q)];
                        second = (up - 2.0 * d[flat] + dn) / (h * h);
                        acc += gij * second;
                    } else {
                        auto v = [&](int di, int dj) {
                            std::array<int, 3> q = idx;
                            q[static_cast<size_t>(i)] += di;
                            q[static_cast<size_t>(j)] += dj;
                            return d[g.flat_index(q)];
                        };
                        second = (v(1, 1) - v(1, -1) - v(-1, 1) + v(-1, -1)) / (4.0 * h * h);
                        acc += 2.0 * gij * second; // ij and ji
                    }
                }
            const Point y = g.point(idx);
            for (int dd = 0; dd < n; ++dd) {
                const double yd = y[static_cast<size_t>(dd)];
                std::array<int, 3> q = idx;
                q[static_cast<size_t>(dd)] += yd >= 0.0 ? 1 : -1;
                const double one_sided =
                    (yd >= 0.0 ? d[g.flat_index(q)] - d[flat] : d[flat] - d[g.flat_index(q)]) / h;
                acc += 0.5 * yd * one_sided;
            }
            return acc;
        };

        // Gauss-Seidel on L[delta] = -r to a 1e-8 relative residual
        double b_norm = rn;
        const int max_sweeps = 50000;
        double lin_res = std::numeric_limits<double>::infinity();
        for (int sweep = 0; sweep < max_sweeps && lin_res > 1e-8 * b_norm; ++sweep) {
            lin_res = 0.0;
            for (size_t k = 0; k < interior.size(); ++k) {
                const double res = -r[interior[k]] - apply_L(delta, k);
                delta[interior[k]] += res / diag[k];
                lin_res = std::max(lin_res, std::abs(res));
            }
        }

        // backtracking line search
        double stepsize = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half, stepsize *= 0.5) {
            ScalarField cand = w;
            for (size_t k = 0; k < interior.size(); ++k)
                cand[interior[k]] = w[interior[k]] + stepsize * delta[interior[k]];
            if (!admissible_everywhere(cand)) continue;
            ScalarField rc;
            residual_field(cand, rc);
            const double rcn = sup_interior_abs(rc, 2);
            if (rcn < rn) {
                w = std::move(cand);
                r = std::move(rc);
                rn = rcn;
                accepted = true;
                break;
            }
        }
        ++result.iterations;
        if (!accepted) break; // stalled; report best iterate
        if (rn <= tol) {
            result.converged = true;
            break;
        }
    }

    result.solution = std::move(w);
    result.final_residual = rn;
    if (rn <= tol) result.converged = true;
    return result;
}

ConvergenceReport convergence_report(const Trajectory& traj, const Grid& target,
                                     const std::vector<double>& times, const TauRegime& regime) {
    if (times.size() < 2)
        throw std::invalid_argument("convergence_report: need at least two times");
    ConvergenceReport rep;
    rep.times = times;
    ScalarField prev = rescaled_snapshot(traj, times[0], target);
    ScalarField last = prev;
    for (size_t k = 1; k < times.size(); ++k) {
        ScalarField cur = rescaled_snapshot(traj, times[k], target);
        double d = 0.0;
        for (size_t p = 0; p < cur.values.size(); ++p)
            d = std::max(d, std::abs(cur[p] - prev[p]));
        rep.sup_differences.push_back(d);
        prev = cur;
        if (k + 1 == times.size()) last = std::move(cur);
    }
    rep.final_residual = sup_interior_abs(expander_residual(last, regime), 2);
    return rep;
}

} // namespace tauflow
