#pragma once

#include "balred/linalg.hpp"

#include <iosfwd>
#include <optional>
#include <span>

namespace balred {

/// Continuous-time SISO system with diagonal state matrix. No eigenvalue may
/// sit on the imaginary axis and the sample time must be positive.
struct DiagonalSSM {
    CVec lambda;
    CVec B;
    CVec C;
    double delta = 1.0;

    std::size_t dim() const { return lambda.size(); }
    void validate() const;
};

/// Dense SISO system, typically the output of a truncation.
struct DenseSSM {
    CMat A;
    CVec B;
    CVec C;

    std::size_t dim() const { return B.size(); }
    void validate() const;
};

/// Zero-order-hold discretization of a DiagonalSSM.
struct DiscreteSSM {
    CVec Abar;
    CVec Bbar;
    CVec Cbar;

    std::size_t dim() const { return Abar.size(); }
};

struct ImpulseKernel {
    CVec values;
};

/// Abar_i = exp(lambda_i * delta), Bbar_i = (Abar_i - 1) B_i / lambda_i,
/// Cbar = C.
DiscreteSSM discretize(const DiagonalSSM& s);

/// h_k = sum_j C_j exp(lambda_j k delta) (exp(lambda_j delta) - 1) B_j / lambda_j
ImpulseKernel impulse_kernel(const DiagonalSSM& s, std::size_t len);

/// Magnitude of the first impulse-response sample beyond the window,
/// |h_len|; diagnostic for how well a length-len convolution approximates
/// the recurrence.
double kernel_tail_magnitude(const DiagonalSSM& s, std::size_t len);

struct RecurrentResult {
    CVec y;
    CVec x_final;
};

/// Exact recurrence x <- Abar x + Bbar u_k; y_k = Cbar x. The initial state
/// defaults to zero; passing the final state of a previous chunk continues
/// the stream exactly.
RecurrentResult recurrent_run(const DiscreteSSM& d, std::span<const double> u, const CVec& x0 = {});

/// G(s) = C (sI - A)^{-1} B. The diagonal path evaluates sum C_i B_i / (s - lambda_i).
cplx transfer_eval(const DiagonalSSM& sys, cplx s);
cplx transfer_eval(const DenseSSM& sys, cplx s);

struct Gramians {
    CMat P;
    CMat Q;
};

/// Closed-form Gramians for diagonal A:
///   P_ij = -B_i conj(B_j) / (lambda_i + conj(lambda_j))
///   Q_ij = -conj(C_i) C_j / (conj(lambda_i) + lambda_j)
Gramians gramians_diagonal(const DiagonalSSM& s);

/// Dense Lyapunov solve via complex Schur substitution.
Gramians gramians_dense(const DenseSSM& s);

struct StabilityResult {
    bool stable = false;
    double margin = 0.0; // max Re(eigenvalue); stable iff margin < -1e-12
};

StabilityResult is_stable(const DiagonalSSM& sys);
StabilityResult is_stable(const DenseSSM& sys);

/// Embed a diagonal system as a DenseSSM (A = diag(lambda)).
DenseSSM dense_embed(const DiagonalSSM& s);

/// Lyapunov residuals ||AP+PA*+BB*|| / ||BB*|| and the Q analogue.
double lyapunov_residual_p(const DenseSSM& s, const CMat& p);
double lyapunov_residual_q(const DenseSSM& s, const CMat& q);

// --- plain-text state-space file format -----------------------------------
//
// Header line: "<kind> <N> <delta>" with kind in {diagonal, dense}; then one
// complex entry per line as "re im". diagonal lists lambda, B, C (N lines
// each); dense lists A row-major (N*N lines), then B and C.

struct StateSpaceFile {
    enum class Kind { Diagonal, Dense } kind = Kind::Diagonal;
    std::optional<DiagonalSSM> diagonal;
    std::optional<DenseSSM> dense;
    double delta = 1.0;
};

void save_statespace(std::ostream& out, const DiagonalSSM& s);
void save_statespace(std::ostream& out, const DenseSSM& s, double delta);
StateSpaceFile load_statespace(std::istream& in);
StateSpaceFile load_statespace_file(const std::string& path);
void save_statespace_file(const std::string& path, const DiagonalSSM& s);
void save_statespace_file(const std::string& path, const DenseSSM& s, double delta);

} // namespace balred
