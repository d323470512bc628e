#include "tauflow/operators.hpp"

#include <cmath>
#include <limits>

namespace tauflow {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTauTol = 1e-12;

[[noreturn]] void throw_inadmissible(const TauRegime& regime, double lambda, int index) {
    throw std::domain_error("eigenvalue " + std::to_string(index) + " = " +
                            std::to_string(lambda) + " outside the " +
                            std::string(branch_name(regime.branch)) +
                            " cone (lower bound " + std::to_string(cone_lower(regime)) + ")");
}

} // namespace

const char* branch_name(Branch b) {
    switch (b) {
    case Branch::LogDet: return "LogDet";
    case Branch::LogRatio: return "LogRatio";
    case Branch::InverseSum: return "InverseSum";
    case Branch::ArctanRatio: return "ArctanRatio";
    case Branch::ArctanSum: return "ArctanSum";
    }
    return "?";
}

TauRegime regime_of(double tau) {
    if (!(tau >= -kTauTol && tau <= kPi / 2 + kTauTol))
        throw std::domain_error("tau = " + std::to_string(tau) + " outside [0, pi/2]");

    TauRegime r;
    r.tau = tau;
    if (std::abs(tau) <= kTauTol) {
        r.tau = 0.0;
        r.branch = Branch::LogDet;
        return r;
    }
    if (std::abs(tau - kPi / 2) <= kTauTol) {
        r.branch = Branch::ArctanSum;
        r.a = 0.0;
        r.b = 1.0;
        return r;
    }
    if (std::abs(tau - kPi / 4) <= kTauTol) {
        r.branch = Branch::InverseSum;
        r.a = 1.0;
        r.b = 0.0;
        return r;
    }
    r.a = 1.0 / std::tan(tau);
    r.b = std::sqrt(std::abs(r.a * r.a - 1.0));
    r.branch = tau < kPi / 4 ? Branch::LogRatio : Branch::ArctanRatio;
    return r;
}

double cone_lower(const TauRegime& regime) {
    switch (regime.branch) {
    case Branch::LogDet: return 0.0;
    case Branch::LogRatio: return regime.b - regime.a; // principal component only
    case Branch::InverseSum: return -1.0;
    case Branch::ArctanRatio:
    case Branch::ArctanSum: return -std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

bool admissible_scalar(const TauRegime& regime, double lambda) {
    return lambda > cone_lower(regime);
}

bool admissible(const TauRegime& regime, const EigenTuple& eigs) {
    for (int i = 0; i < eigs.n; ++i)
        if (!admissible_scalar(regime, eigs[i])) return false;
    return true;
}

double f_scalar(const TauRegime& regime, double lambda) {
    if (!admissible_scalar(regime, lambda)) throw_inadmissible(regime, lambda, 0);
    const double a = regime.a, b = regime.b;
    switch (regime.branch) {
    case Branch::LogDet:
        return 0.5 * std::log(lambda);
    case Branch::LogRatio:
        return std::sqrt(a * a + 1.0) / (2.0 * b) *
               std::log((lambda + a - b) / (lambda + a + b));
    case Branch::InverseSum:
        return -std::sqrt(2.0) / (1.0 + lambda);
    case Branch::ArctanRatio:
        // shifted form of the ratio formula, no pole at lambda = -a-b
        return std::sqrt(a * a + 1.0) / b * (std::atan((lambda + a) / b) - kPi / 4.0);
    case Branch::ArctanSum:
        return std::atan(lambda);
    }
    return 0.0;
}

double f_eval(const TauRegime& regime, const EigenTuple& eigs) {
    double s = 0.0;
    for (int i = 0; i < eigs.n; ++i) {
        if (!admissible_scalar(regime, eigs[i])) throw_inadmissible(regime, eigs[i], i);
        s += f_scalar(regime, eigs[i]);
    }
    return s;
}

double f_prime(const TauRegime& regime, double lambda) {
    if (!admissible_scalar(regime, lambda)) throw_inadmissible(regime, lambda, 0);
    const double a = regime.a, b = regime.b;
    switch (regime.branch) {
    case Branch::LogDet:
        return 1.0 / (2.0 * lambda);
    case Branch::LogRatio:
        return std::sqrt(a * a + 1.0) / ((lambda + a) * (lambda + a) - b * b);
    case Branch::InverseSum:
        return std::sqrt(2.0) / ((1.0 + lambda) * (1.0 + lambda));
    case Branch::ArctanRatio:
        return std::sqrt(a * a + 1.0) / ((lambda + a) * (lambda + a) + b * b);
    case Branch::ArctanSum:
        return 1.0 / (1.0 + lambda * lambda);
    }
    return 0.0;
}

double gamma_blend(const TauRegime& regime, double gamma, const EigenTuple& eigs) {
    double trace = 0.0;
    for (int i = 0; i < eigs.n; ++i) trace += eigs[i];
    if (gamma == 0.0) return trace;
    return gamma * f_eval(regime, eigs) + (1.0 - gamma) * trace;
}

double fbar_eval(const EigenTuple& eigs_shifted) {
    double s = 0.0;
    for (int i = 0; i < eigs_shifted.n; ++i) {
        if (!(eigs_shifted[i] > 0.0))
            throw std::domain_error("fbar: eigenvalue " + std::to_string(i) + " = " +
                                    std::to_string(eigs_shifted[i]) + " not positive");
        s += 1.0 / eigs_shifted[i];
    }
    return -std::sqrt(2.0) * s;
}

} // namespace tauflow
