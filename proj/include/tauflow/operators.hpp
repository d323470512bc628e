#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace tauflow {

/// The five branches of the operator family F_tau, selected by tau in [0, pi/2].
enum class Branch {
    LogDet,      // tau = 0
    LogRatio,    // 0 < tau < pi/4
    InverseSum,  // tau = pi/4
    ArctanRatio, // pi/4 < tau < pi/2
    ArctanSum,   // tau = pi/2
};

const char* branch_name(Branch b);

/// Operator branch plus the derived constants a = cot(tau), b = sqrt(|cot^2(tau)-1|).
struct TauRegime {
    double tau = 0.0;
    Branch branch = Branch::LogDet;
    double a = 0.0; // unused for LogDet
    double b = 0.0; // zero for LogDet, InverseSum
};

/// Up to three sorted eigenvalues of a Hessian.
struct EigenTuple {
    int n = 0;
    std::array<double, 3> lam{};

    double& operator[](int i) { return lam[static_cast<size_t>(i)]; }
    double operator[](int i) const { return lam[static_cast<size_t>(i)]; }
};

inline EigenTuple eigs1(double l0) { return {1, {l0, 0, 0}}; }
inline EigenTuple eigs2(double l0, double l1) { return {2, {l0, l1, 0}}; }
inline EigenTuple eigs3(double l0, double l1, double l2) { return {3, {l0, l1, l2}}; }

/// Branch selection. Endpoint/midpoint values of tau are detected within 1e-12.
TauRegime regime_of(double tau);

/// Lower edge of the admissibility cone (-inf for the arctan branches).
double cone_lower(const TauRegime& regime);

bool admissible_scalar(const TauRegime& regime, double lambda);
bool admissible(const TauRegime& regime, const EigenTuple& eigs);

/// Single-eigenvalue contribution to F_tau. Throws std::domain_error outside the cone.
double f_scalar(const TauRegime& regime, double lambda);

/// F_tau(lambda), the sum of per-eigenvalue terms. The pi/4 < tau < pi/2 branch
/// is evaluated in the pole-free shifted form arctan((l+a)/b) - pi/4.
double f_eval(const TauRegime& regime, const EigenTuple& eigs);

/// dF_tau/dlambda in closed form; strictly positive on the cone.
double f_prime(const TauRegime& regime, double lambda);

/// gamma * F_tau(lambda) + (1 - gamma) * trace(lambda).
double gamma_blend(const TauRegime& regime, double gamma, const EigenTuple& eigs);

/// The shifted tau = pi/4 operator: -sqrt(2) * sum 1/lbar_i on the positive cone.
/// Relates to InverseSum by F_{pi/4}(lambda) = fbar(lambda + 1).
double fbar_eval(const EigenTuple& eigs_shifted);

} // namespace tauflow
