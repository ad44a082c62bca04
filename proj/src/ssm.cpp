#include "balred/ssm.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace balred {

namespace {
constexpr double kAxisTol = 1e-12;

// exp(z) - 1 with a series fallback near zero.
cplx expm1_complex(cplx z) {
    if (std::abs(z) < 1e-4) {
        return z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)));
    }
    return std::exp(z) - 1.0;
}
} // namespace

void DiagonalSSM::validate() const {
    if (B.size() != lambda.size() || C.size() != lambda.size()) {
        throw Error(ErrorCode::BadLength, "DiagonalSSM field lengths disagree");
    }
    if (!(delta > 0.0)) throw Error(ErrorCode::BadConfig, "sample time must be positive");
    for (const cplx& l : lambda) {
        if (!is_finite(l)) throw Error(ErrorCode::NonFinite, "lambda");
        if (std::abs(l.real()) <= kAxisTol) {
            throw Error(ErrorCode::OnImaginaryAxis, "lambda with Re " + format_double(l.real()));
        }
    }
    for (const cplx& z : B)
        if (!is_finite(z)) throw Error(ErrorCode::NonFinite, "B");
    for (const cplx& z : C)
        if (!is_finite(z)) throw Error(ErrorCode::NonFinite, "C");
}

void DenseSSM::validate() const {
    if (!A.square() || A.rows != B.size() || A.rows != C.size()) {
        throw Error(ErrorCode::BadLength, "DenseSSM dimensions disagree");
    }
    A.check_finite("DenseSSM::A");
}

DiscreteSSM discretize(const DiagonalSSM& s) {
    s.validate();
    const std::size_t n = s.dim();
    DiscreteSSM d;
    d.Abar.resize(n);
    d.Bbar.resize(n);
    d.Cbar = s.C;
    for (std::size_t i = 0; i < n; ++i) {
        cplx ld = s.lambda[i] * s.delta;
        d.Abar[i] = std::exp(ld);
        d.Bbar[i] = expm1_complex(ld) * s.B[i] / s.lambda[i];
    }
    return d;
}

ImpulseKernel impulse_kernel(const DiagonalSSM& s, std::size_t len) {
    s.validate();
    if (len < 1) throw Error(ErrorCode::BadLength, "kernel length must be >= 1");
    const std::size_t n = s.dim();
    ImpulseKernel k;
    k.values.assign(len, cplx(0.0));
    for (std::size_t j = 0; j < n; ++j) {
        cplx coeff = s.C[j] * expm1_complex(s.lambda[j] * s.delta) * s.B[j] / s.lambda[j];
        if (coeff == cplx(0.0)) continue;
        cplx ld = s.lambda[j] * s.delta;
        for (std::size_t i = 0; i < len; ++i) {
            k.values[i] += coeff * std::exp(ld * static_cast<double>(i));
        }
    }
    return k;
}

double kernel_tail_magnitude(const DiagonalSSM& s, std::size_t len) {
    cplx h = 0.0;
    for (std::size_t j = 0; j < s.dim(); ++j) {
        cplx coeff = s.C[j] * expm1_complex(s.lambda[j] * s.delta) * s.B[j] / s.lambda[j];
        h += coeff * std::exp(s.lambda[j] * s.delta * static_cast<double>(len));
    }
    return std::abs(h);
}

RecurrentResult recurrent_run(const DiscreteSSM& d, std::span<const double> u, const CVec& x0) {
    const std::size_t n = d.dim();
    CVec x = x0.empty() ? CVec(n, cplx(0.0)) : x0;
    if (x.size() != n) throw Error(ErrorCode::BadLength, "initial state length mismatch");
    RecurrentResult out;
    out.y.resize(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        cplx yk = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = d.Abar[i] * x[i] + d.Bbar[i] * u[k];
            yk += d.Cbar[i] * x[i];
        }
        out.y[k] = yk;
    }
    out.x_final = std::move(x);
    return out;
}

cplx transfer_eval(const DiagonalSSM& sys, cplx s) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < sys.dim(); ++i) {
        cplx den = s - sys.lambda[i];
        if (std::abs(den) < 1e-14) throw Error(ErrorCode::PoleHit, "evaluation point at a pole");
        acc += sys.C[i] * sys.B[i] / den;
    }
    return acc;
}

cplx transfer_eval(const DenseSSM& sys, cplx s) {
    const std::size_t n = sys.dim();
    CMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m(i, j) = -sys.A(i, j);
        m(i, i) += s;
    }
    CVec x;
    try {
        x = solve(m, sys.B);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Singular) throw Error(ErrorCode::PoleHit, "evaluation point at a pole");
        throw;
    }
    return dot_unconj(sys.C, x);
}

Gramians gramians_diagonal(const DiagonalSSM& s) {
    s.validate();
    const std::size_t n = s.dim();
    for (const cplx& l : s.lambda) {
        if (l.real() >= -kAxisTol) {
            throw Error(ErrorCode::Unstable, "eigenvalue with Re " + format_double(l.real()));
        }
    }
    Gramians g{CMat(n, n), CMat(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            g.P(i, j) = -s.B[i] * std::conj(s.B[j]) / (s.lambda[i] + std::conj(s.lambda[j]));
            g.Q(i, j) = -std::conj(s.C[i]) * s.C[j] / (std::conj(s.lambda[i]) + s.lambda[j]);
        }
    }
    return g;
}

namespace {

// Solves T Y + Y T* = -C for upper triangular T by column back-substitution,
// rightmost column first.
CMat triangular_lyapunov(const CMat& t, const CMat& c) {
    const std::size_t n = t.rows;
    CMat y(n, n);
    for (std::size_t j = n; j-- > 0;) {
        CVec rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            cplx acc = -c(i, j);
            for (std::size_t k = j + 1; k < n; ++k) acc -= y(i, k) * std::conj(t(j, k));
            rhs[i] = acc;
        }
        // (T + conj(T_jj) I) y_col = rhs, upper triangular back-substitution.
        cplx shift = std::conj(t(j, j));
        for (std::size_t ii = n; ii-- > 0;) {
            cplx acc = rhs[ii];
            for (std::size_t k = ii + 1; k < n; ++k) acc -= t(ii, k) * y(k, j);
            cplx den = t(ii, ii) + shift;
            if (std::abs(den) < 1e-300) throw Error(ErrorCode::Singular, "Lyapunov operator singular");
            y(ii, j) = acc / den;
        }
    }
    return y;
}

CMat outer_product(const CVec& b) {
    CMat m(b.size(), b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = b[i] * std::conj(b[j]);
    return m;
}

// Controllability Gramian of (A, B): A P + P A* + B B* = 0.
CMat lyapunov_ctrl(const CMat& a, const CVec& b) {
    SchurDecomposition sd = schur_decompose(a);
    for (std::size_t i = 0; i < a.rows; ++i) {
        if (sd.t(i, i).real() >= -kAxisTol) {
            throw Error(ErrorCode::Unstable, "eigenvalue with Re " + format_double(sd.t(i, i).real()));
        }
    }
    // With A = Q T Q*: T Y + Y T* + (Q* B)(Q* B)* = 0, P = Q Y Q*.
    CVec bt = matvec(adjoint(sd.q), b);
    CMat y = triangular_lyapunov(sd.t, outer_product(bt));
    return matmul(matmul(sd.q, y), adjoint(sd.q));
}

} // namespace

Gramians gramians_dense(const DenseSSM& s) {
    s.validate();
    if (s.dim() > 256) throw Error(ErrorCode::BadLength, "gramians_dense size limit is 256");
    Gramians g;
    g.P = lyapunov_ctrl(s.A, s.B);
    // Q solves A* Q + Q A + C* C = 0, the controllability equation of (A*, C*).
    CVec cconj(s.C.size());
    for (std::size_t i = 0; i < s.C.size(); ++i) cconj[i] = std::conj(s.C[i]);
    g.Q = lyapunov_ctrl(adjoint(s.A), cconj);
    return g;
}

StabilityResult is_stable(const DiagonalSSM& sys) {
    StabilityResult r;
    r.margin = -std::numeric_limits<double>::infinity();
    for (const cplx& l : sys.lambda) r.margin = std::max(r.margin, l.real());
    r.stable = r.margin < -kAxisTol;
    return r;
}

StabilityResult is_stable(const DenseSSM& sys) {
    sys.validate();
    StabilityResult r;
    r.margin = -std::numeric_limits<double>::infinity();
    for (const cplx& mu : general_eigenvalues(sys.A)) r.margin = std::max(r.margin, mu.real());
    r.stable = r.margin < -kAxisTol;
    return r;
}

DenseSSM dense_embed(const DiagonalSSM& s) {
    DenseSSM d;
    d.A = CMat::diagonal(s.lambda);
    d.B = s.B;
    d.C = s.C;
    return d;
}

double lyapunov_residual_p(const DenseSSM& s, const CMat& p) {
    CMat bb = outer_product(s.B);
    CMat res = add(add(matmul(s.A, p), matmul(p, adjoint(s.A))), bb);
    return fro_norm(res) / std::max(fro_norm(bb), 1e-300);
}

double lyapunov_residual_q(const DenseSSM& s, const CMat& q) {
    CVec cconj(s.C.size());
    for (std::size_t i = 0; i < s.C.size(); ++i) cconj[i] = std::conj(s.C[i]);
    CMat cc = outer_product(cconj);
    CMat res = add(add(matmul(adjoint(s.A), q), matmul(q, s.A)), cc);
    return fro_norm(res) / std::max(fro_norm(cc), 1e-300);
}

// --- text format -----------------------------------------------------------

namespace {

void write_entry(std::ostream& out, cplx z) {
    out << format_double(z.real()) << ' ' << format_double(z.imag()) << '\n';
}

cplx read_entry(std::istream& in, std::size_t line_no) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::ParseError, "unexpected end of file at line " + std::to_string(line_no));
    }
    std::istringstream ls(line);
    std::string re, im;
    if (!(ls >> re >> im)) {
        throw Error(ErrorCode::ParseError, "bad entry at line " + std::to_string(line_no));
    }
    return cplx(parse_double(re), parse_double(im));
}

} // namespace

void save_statespace(std::ostream& out, const DiagonalSSM& s) {
    out << "diagonal " << s.dim() << ' ' << format_double(s.delta) << '\n';
    for (const cplx& z : s.lambda) write_entry(out, z);
    for (const cplx& z : s.B) write_entry(out, z);
    for (const cplx& z : s.C) write_entry(out, z);
}

void save_statespace(std::ostream& out, const DenseSSM& s, double delta) {
    out << "dense " << s.dim() << ' ' << format_double(delta) << '\n';
    for (const cplx& z : s.A.a) write_entry(out, z);
    for (const cplx& z : s.B) write_entry(out, z);
    for (const cplx& z : s.C) write_entry(out, z);
}

StateSpaceFile load_statespace(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw Error(ErrorCode::ParseError, "empty state-space file");
    std::istringstream hs(header);
    std::string kind, delta_str;
    std::size_t n = 0;
    if (!(hs >> kind >> n >> delta_str)) throw Error(ErrorCode::ParseError, "bad header '" + header + "'");
    StateSpaceFile f;
    f.delta = parse_double(delta_str);
    std::size_t line = 2;
    if (kind == "diagonal") {
        f.kind = StateSpaceFile::Kind::Diagonal;
        DiagonalSSM s;
        s.delta = f.delta;
        s.lambda.resize(n);
        s.B.resize(n);
        s.C.resize(n);
        for (auto* vec : {&s.lambda, &s.B, &s.C}) {
            for (std::size_t i = 0; i < n; ++i) (*vec)[i] = read_entry(in, line++);
        }
        s.validate();
        f.diagonal = std::move(s);
    } else if (kind == "dense") {
        f.kind = StateSpaceFile::Kind::Dense;
        DenseSSM s;
        s.A = CMat(n, n);
        s.B.resize(n);
        s.C.resize(n);
        for (std::size_t i = 0; i < n * n; ++i) s.A.a[i] = read_entry(in, line++);
        for (std::size_t i = 0; i < n; ++i) s.B[i] = read_entry(in, line++);
        for (std::size_t i = 0; i < n; ++i) s.C[i] = read_entry(in, line++);
        s.validate();
        f.dense = std::move(s);
    } else {
        throw Error(ErrorCode::ParseError, "unknown state-space kind '" + kind + "'");
    }
    return f;
}

StateSpaceFile load_statespace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    return load_statespace(in);
}

void save_statespace_file(const std::string& path, const DiagonalSSM& s) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
    save_statespace(out, s);
}

void save_statespace_file(const std::string& path, const DenseSSM& s, double delta) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
    save_statespace(out, s, delta);
}

} // namespace balred
