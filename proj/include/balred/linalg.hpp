#pragma once

#include "balred/common.hpp"

namespace balred {

/// Dense complex matrix, row-major.
struct CMat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<cplx> a;

    CMat() = default;
    CMat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}

    /// Construction from explicit entries; rejects NaN/Inf.
    static CMat from_entries(std::size_t r, std::size_t c, std::vector<cplx> entries);
    static CMat identity(std::size_t n);
    static CMat diagonal(const CVec& d);

    cplx& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    bool square() const { return rows == cols; }
    void check_finite(const char* what) const;
};

CMat matmul(const CMat& x, const CMat& y);
CMat adjoint(const CMat& x);
CMat transpose(const CMat& x);
CMat add(const CMat& x, const CMat& y);
CMat sub(const CMat& x, const CMat& y);
CMat scale(const CMat& x, cplx s);
CVec matvec(const CMat& m, const CVec& v);
CVec vecmat(const CVec& v, const CMat& m); // row vector times matrix
cplx dot_unconj(const CVec& x, const CVec& y);

double fro_norm(const CMat& x);
double vec_norm(const CVec& v);
double max_abs(const CMat& x);

struct HermitianEig {
    std::vector<double> values; // ascending
    CMat vectors;               // unitary, columns are eigenvectors
};

/// Eigendecomposition of a Hermitian matrix via Householder
/// tridiagonalization followed by implicit-shift QL on the real
/// tridiagonal form. Throws NonHermitian when the asymmetry exceeds
/// 1e-10 * ||M||; the input is symmetrized before solving.
HermitianEig hermitian_eig(const CMat& m);

struct SchurDecomposition {
    CMat q; // unitary
    CMat t; // upper triangular, a = q t q*
};

/// Complex Schur form via Householder Hessenberg reduction and
/// shifted QR iteration.
SchurDecomposition schur_decompose(const CMat& a);

struct GeneralEig {
    CVec values;  // sorted by (Re desc, Im desc)
    CMat vectors; // columns, unit norm, first significant entry real-positive
    double cond;  // 2-norm condition number of the eigenvector matrix
};

/// Eigendecomposition of a general complex matrix. Eigenvectors come from
/// back-substitution on the Schur form. Throws NearDefective when the
/// eigenvector matrix condition number exceeds 1e10.
GeneralEig general_eig(const CMat& m);

/// Eigenvalues only (Schur diagonal), sorted by (Re desc, Im desc).
CVec general_eigenvalues(const CMat& m);

/// 2-norm condition number estimate (power iteration on V*V and its
/// inverse); infinity when the matrix is singular to LU.
double condition_number(const CMat& v);

/// Hermitian PSD square root. Eigenvalues in [-1e-12*lambda_max, 0) are
/// clamped to zero; anything below that threshold raises NotPSD.
CMat hermitian_sqrt(const CMat& p);

/// Hermitian PSD inverse square root with the same clamping rule; clamped
/// eigenvalues map to zero (pseudo-inverse direction).
CMat hermitian_inv_sqrt(const CMat& p);

/// LU solve with partial pivoting; Singular on pivot < 1e-14 * ||M||.
CMat solve(const CMat& m, const CMat& rhs);
CVec solve(const CMat& m, const CVec& rhs);
CMat inverse(const CMat& m);

/// Unnormalized forward DFT; length must be a power of two.
CVec fft(CVec v);
/// Inverse DFT carrying the 1/len factor.
CVec ifft(CVec v);

/// Causal prefix of the linear convolution of two equal-length vectors,
/// computed by zero-padded FFT at the next power of two >= 2L.
CVec linear_convolution(const CVec& a, const CVec& b);

} // namespace balred
