#include "tauflow/analysis.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace tauflow {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTauTol = 1e-12;

} // namespace

ConditionSpec ConditionSpec::b(double zeta, double rho) {
    if (!(rho > 0) || !(zeta > 0) || !(zeta < rho + 1))
        throw std::invalid_argument("condition B needs 0 < zeta < rho + 1, rho > 0");
    ConditionSpec s;
    s.kind = ConditionKind::B;
    s.tau = kPi / 4;
    s.zeta = zeta;
    s.rho = rho;
    return s;
}

ConditionSpec ConditionSpec::e(double tau, double mu, double lam) {
    if (!(tau > kTauTol) || !(tau < kPi / 4 - kTauTol))
        throw std::invalid_argument("condition E pairs with tau in (0, pi/4)");
    if (!(mu > 1))
        throw std::invalid_argument("condition E requires mu > 1 (keeps the log branch defined)");
    if (!(mu < lam)) throw std::invalid_argument("condition E needs mu < Lambda");
    ConditionSpec s;
    s.kind = ConditionKind::E;
    s.tau = tau;
    s.mu = mu;
    s.lam = lam;
    return s;
}

ConditionSpec ConditionSpec::l(double tau, double eta) {
    if (!(tau > kPi / 4 + kTauTol) || !(tau < kPi / 2 - kTauTol))
        throw std::invalid_argument("condition L pairs with tau in (pi/4, pi/2)");
    if (!(eta > 0)) throw std::invalid_argument("condition L needs eta > 0");
    ConditionSpec s;
    s.kind = ConditionKind::L;
    s.tau = tau;
    s.eta = eta;
    return s;
}

std::pair<double, double> ConditionSpec::bounds() const {
    switch (kind) {
    case ConditionKind::A:
        throw std::invalid_argument("condition A has no eigenvalue bounds; use homogeneity_defect");
    case ConditionKind::B:
        return {-1.0 + zeta, rho};
    case ConditionKind::E: {
        const TauRegime r = regime_of(tau);
        return {r.b * mu - r.a, r.b * lam - r.a};
    }
    case ConditionKind::L: {
        const TauRegime r = regime_of(tau);
        return {-(r.b + r.b * eta + r.a), r.b + r.b * eta - r.a};
    }
    }
    return {0, 0};
}

std::string condition_report_json(const ConditionReport& r) {
    nlohmann::ordered_json j;
    j["satisfied"] = r.satisfied;
    j["lam_min"] = r.lam_min;
    j["lam_max"] = r.lam_max;
    j["margin"] = r.margin;
    j["worst_point"] = r.worst_point;
    return j.dump();
}

std::vector<EigenTuple> eigen_field(const HessianField& hess) {
    std::vector<EigenTuple> out(hess.grid.total_points());
    for_each_interior(hess.grid, hess.stencil_offset,
                      [&](size_t flat, const std::array<int, 3>&) {
                          out[flat] = sym_eigenvalues(hess.at(flat));
                      });
    return out;
}

ConditionReport check_condition(const ConditionSpec& spec, const ScalarField& field) {
    const auto [lo, hi] = spec.bounds();
    ConditionReport rep;
    rep.lam_min = std::numeric_limits<double>::infinity();
    rep.lam_max = -rep.lam_min;
    rep.margin = std::numeric_limits<double>::infinity();
    for_each_interior(field.grid, 1, [&](size_t flat, const std::array<int, 3>& idx) {
        const EigenTuple eigs = sym_eigenvalues(hessian_at(field, idx));
        const double emin = eigs[0], emax = eigs[eigs.n - 1];
        rep.lam_min = std::min(rep.lam_min, emin);
        rep.lam_max = std::max(rep.lam_max, emax);
        const double m = std::min(emin - lo, hi - emax);
        if (m < rep.margin) {
            rep.margin = m;
            rep.worst_point = flat;
        }
    });
    rep.satisfied = rep.margin >= 0.0;
    return rep;
}

double homogeneity_defect(const std::function<double(const Point&)>& u0,
                          const std::vector<double>& sample_radii,
                          const std::vector<Point>& sample_dirs) {
    double worst = 0.0;
    for (const Point& x : sample_dirs) {
        const double base = u0(x);
        for (double R : sample_radii) {
            if (!(R > 0)) throw std::invalid_argument("homogeneity_defect: radii must be positive");
            const Point rx{R * x[0], R * x[1], R * x[2]};
            worst = std::max(worst, std::abs(u0(rx) / (R * R) - base));
        }
    }
    return worst;
}

DecayFit decay_exponent(const std::vector<std::pair<double, double>>& series,
                        double transient_fraction) {
    if (series.size() < 5) throw std::invalid_argument("decay_exponent: need at least 5 samples");
    size_t skip = static_cast<size_t>(std::floor(transient_fraction * static_cast<double>(series.size())));
    if (series.size() - skip < 5) skip = series.size() - 5;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const size_t count = series.size() - skip;
    std::vector<std::pair<double, double>> logs;
    logs.reserve(count);
    for (size_t i = skip; i < series.size(); ++i) {
        const auto [t, v] = series[i];
        if (!(t > 0) || !(v > 0))
            throw std::invalid_argument("decay_exponent: times and values must be positive");
        const double x = std::log(t), y = std::log(v);
        logs.emplace_back(x, y);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double nd = static_cast<double>(count);
    const double denom = nd * sxx - sx * sx;
    const double slope = denom != 0.0 ? (nd * sxy - sx * sy) / denom : 0.0;
    const double intercept = (sy - slope * sx) / nd;
    DecayFit fit;
    fit.alpha = -slope;
    fit.c = std::exp(intercept);
    double ss = 0;
    for (const auto& [x, y] : logs) {
        const double r = y - (intercept + slope * x);
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / nd);
    return fit;
}

SymMatrix induced_metric(double tau, const SymMatrix& H) {
    const double st = std::sin(tau), ct = std::cos(tau);
    SymMatrix g = SymMatrix::zero(H.n);
    for (int i = 0; i < H.n; ++i)
        for (int j = 0; j < H.n; ++j) {
            double h2 = 0;
            for (int k = 0; k < H.n; ++k) h2 += H(i, k) * H(k, j);
            g(i, j) = st * ((i == j ? 1.0 : 0.0) + h2) + 2.0 * ct * H(i, j);
        }
    return g;
}

double geometry_residual(const FlowState& state) {
    const ScalarField& f = state.field;
    const Grid& g = f.grid;
    const int n = g.dim;

    // pointwise F field on the offset-1 interior
    ScalarField Ffield(g);
    for_each_interior(g, 1, [&](size_t flat, const std::array<int, 3>& idx) {
        Ffield[flat] = f_eval(state.regime, sym_eigenvalues(hessian_at(f, idx)));
    });

    double worst = 0.0;
    for_each_interior(g, 2, [&](size_t, const std::array<int, 3>& idx) {
        // g^ij = sum_e f'(lambda_e) v_e v_e^T in the Hessian eigenframe
        EigenTuple eigs;
        std::array<std::array<double, 3>, 3> vec;
        sym_eigen(hessian_at(f, idx), eigs, &vec);
        SymMatrix ginv = SymMatrix::zero(n);
        for (int e = 0; e < n; ++e) {
            const double w = f_prime(state.regime, eigs[e]);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    ginv(i, j) += w * vec[static_cast<size_t>(e)][static_cast<size_t>(i)] *
                                  vec[static_cast<size_t>(e)][static_cast<size_t>(j)];
        }
        const auto third = third_derivative_at(f, idx);
        for (int k = 0; k < n; ++k) {
            const double dF = derivative1_at(Ffield, idx, k);
            double contracted = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    contracted += ginv(i, j) * third[static_cast<size_t>((i * n + j) * n + k)];
            worst = std::max(worst, std::abs(dF - contracted));
        }
    });
    return worst;
}

} // namespace tauflow
