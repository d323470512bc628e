#include "tauflow/sym_eigen.hpp"

#include <algorithm>
#include <cmath>

namespace tauflow {

namespace {

// Sort eigenvalues ascending, permuting the vector columns along.
void sort3(int n, EigenTuple& values, std::array<std::array<double, 3>, 3>* vectors) {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.begin() + n,
              [&](int i, int j) { return values[i] < values[j]; });
    EigenTuple v = values;
    for (int k = 0; k < n; ++k) values[k] = v[order[static_cast<size_t>(k)]];
    if (vectors) {
        auto cols = *vectors;
        for (int k = 0; k < n; ++k)
            (*vectors)[static_cast<size_t>(k)] = cols[static_cast<size_t>(order[static_cast<size_t>(k)])];
    }
}

} // namespace

void sym_eigen(const SymMatrix& A, EigenTuple& values,
               std::array<std::array<double, 3>, 3>* vectors) {
    const int n = A.n;
    values.n = n;
    if (vectors)
        for (int k = 0; k < 3; ++k) (*vectors)[static_cast<size_t>(k)] = {0, 0, 0};

    if (n == 1) {
        values[0] = A(0, 0);
        if (vectors) (*vectors)[0][0] = 1.0;
        return;
    }
    if (n == 2) {
        const double p = A(0, 0), q = A(0, 1), r = A(1, 1);
        const double mean = 0.5 * (p + r);
        const double disc = std::hypot(0.5 * (p - r), q);
        values[0] = mean - disc;
        values[1] = mean + disc;
        if (vectors) {
            if (q == 0.0 && p <= r) {
                (*vectors)[0] = {1, 0, 0};
                (*vectors)[1] = {0, 1, 0};
            } else if (q == 0.0) {
                (*vectors)[0] = {0, 1, 0};
                (*vectors)[1] = {1, 0, 0};
            } else {
                // (A - l I) v = 0 via the better-conditioned row
                double vx = values[0] - r, vy = q;
                double norm = std::hypot(vx, vy);
                (*vectors)[0] = {vx / norm, vy / norm, 0};
                (*vectors)[1] = {-vy / norm, vx / norm, 0};
            }
        }
        return;
    }

    // n == 3: cyclic Jacobi rotations
    std::array<std::array<double, 3>, 3> a = A.m;
    std::array<std::array<double, 3>, 3> v{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    constexpr double tol = 1e-13;
    for (int sweep = 0; sweep < 30; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off < tol) break;
        for (int p = 0; p < 2; ++p)
            for (int q = p + 1; q < 3; ++q) {
                const double apq = a[static_cast<size_t>(p)][static_cast<size_t>(q)];
                if (std::abs(apq) < tol * 1e-3) continue;
                const double app = a[static_cast<size_t>(p)][static_cast<size_t>(p)];
                const double aqq = a[static_cast<size_t>(q)][static_cast<size_t>(q)];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[static_cast<size_t>(k)][static_cast<size_t>(p)];
                    const double akq = a[static_cast<size_t>(k)][static_cast<size_t>(q)];
                    a[static_cast<size_t>(k)][static_cast<size_t>(p)] = c * akp - s * akq;
                    a[static_cast<size_t>(k)][static_cast<size_t>(q)] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[static_cast<size_t>(p)][static_cast<size_t>(k)];
                    const double aqk = a[static_cast<size_t>(q)][static_cast<size_t>(k)];
                    a[static_cast<size_t>(p)][static_cast<size_t>(k)] = c * apk - s * aqk;
                    a[static_cast<size_t>(q)][static_cast<size_t>(k)] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    const double vkp = v[static_cast<size_t>(k)][static_cast<size_t>(p)];
                    const double vkq = v[static_cast<size_t>(k)][static_cast<size_t>(q)];
                    v[static_cast<size_t>(k)][static_cast<size_t>(p)] = c * vkp - s * vkq;
                    v[static_cast<size_t>(k)][static_cast<size_t>(q)] = s * vkp + c * vkq;
                }
            }
    }
    values[0] = a[0][0];
    values[1] = a[1][1];
    values[2] = a[2][2];
    if (vectors)
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 3; ++i)
                (*vectors)[static_cast<size_t>(k)][static_cast<size_t>(i)] =
                    v[static_cast<size_t>(i)][static_cast<size_t>(k)];
    sort3(3, values, vectors);
    return;
}

} // namespace tauflow
