#pragma once

#include "tauflow/operators.hpp"

#include <array>
#include <cmath>

namespace tauflow {

/// Dense symmetric n x n matrix, n <= 3. Stored full; writers keep it symmetric.
struct SymMatrix {
    int n = 0;
    std::array<std::array<double, 3>, 3> m{};

    double& operator()(int i, int j) { return m[static_cast<size_t>(i)][static_cast<size_t>(j)]; }
    double operator()(int i, int j) const { return m[static_cast<size_t>(i)][static_cast<size_t>(j)]; }

    static SymMatrix zero(int n) {
        SymMatrix s;
        s.n = n;
        return s;
    }
    static SymMatrix identity(int n) {
        SymMatrix s = zero(n);
        for (int i = 0; i < n; ++i) s(i, i) = 1.0;
        return s;
    }
    static SymMatrix diag(int n, double d0, double d1 = 0, double d2 = 0) {
        SymMatrix s = zero(n);
        s(0, 0) = d0;
        if (n > 1) s(1, 1) = d1;
        if (n > 2) s(2, 2) = d2;
        return s;
    }
};

/// Eigenvalues in nondecreasing order. Closed form for n <= 2, cyclic Jacobi for n = 3
/// (off-diagonal tolerance 1e-13, at most 30 sweeps). `vectors`, when non-null, gets
/// the orthonormal eigenvector columns: vectors[k] pairs with values[k].
void sym_eigen(const SymMatrix& A, EigenTuple& values,
               std::array<std::array<double, 3>, 3>* vectors = nullptr);

inline EigenTuple sym_eigenvalues(const SymMatrix& A) {
    EigenTuple e;
    sym_eigen(A, e);
    return e;
}

} // namespace tauflow
