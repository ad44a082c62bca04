#pragma once

#include "balred/common.hpp"
#include "balred/linalg.hpp"

namespace balred::testutil {

inline CMat random_matrix(Rng& rng, std::size_t n) {
    CMat m(n, n);
    for (cplx& z : m.a) z = cplx(rng.normal(), rng.normal());
    return m;
}

inline CMat random_hermitian(Rng& rng, std::size_t n) {
    CMat m = random_matrix(rng, n);
    CMat h(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    return h;
}

inline CMat random_psd(Rng& rng, std::size_t n) {
    CMat x = random_matrix(rng, n);
    return matmul(x, adjoint(x));
}

inline CVec random_cvec(Rng& rng, std::size_t n) {
    CVec v(n);
    for (cplx& z : v) z = cplx(rng.normal(), rng.normal());
    return v;
}

// Naive O(L^2) causal convolution, the independent oracle for the FFT path.
inline CVec naive_causal_convolution(const CVec& a, const CVec& b) {
    CVec out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i <= k; ++i) acc += a[i] * b[k - i];
        out[k] = acc;
    }
    return out;
}

inline double rel_residual(const CMat& actual, const CMat& reference) {
    return fro_norm(sub(actual, reference)) / std::max(fro_norm(reference), 1e-300);
}

} // namespace balred::testutil

#include "balred/ssm.hpp"

namespace balred::testutil {

// Random stable diagonal SSM; re_lo/re_hi bound the eigenvalue real parts.
inline DiagonalSSM random_stable_diagonal(Rng& rng, std::size_t n, double re_lo = -2.0,
                                          double re_hi = -0.1, double delta = 0.1) {
    DiagonalSSM s;
    s.delta = delta;
    s.lambda.resize(n);
    s.B.resize(n);
    s.C.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.lambda[i] = cplx(rng.uniform(re_lo, re_hi), rng.normal(0.0, 2.0));
        s.B[i] = cplx(rng.normal(), rng.normal());
        s.C[i] = cplx(rng.normal(), rng.normal());
    }
    return s;
}

// Dense Lyapunov oracle: solves (I (x) A + conj(A) (x) I) vec(P) = -vec(BB*)
// directly, column-major vec. Only viable for small n.
inline CMat kron_lyapunov_ctrl(const CMat& a, const CVec& b) {
    const std::size_t n = a.rows;
    CMat big(n * n, n * n);
    // vec index v(i,j) = j*n + i (column-major).
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::size_t row = j * n + i;
            for (std::size_t k = 0; k < n; ++k) {
                big(row, j * n + k) += a(i, k);              // (I (x) A)
                big(row, k * n + i) += std::conj(a(j, k));   // (conj(A) (x) I)
            }
        }
    }
    CVec rhs(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) rhs[j * n + i] = -b[i] * std::conj(b[j]);
    CVec x = solve(big, rhs);
    CMat p(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) p(i, j) = x[j * n + i];
    return p;
}

} // namespace balred::testutil
