#include "balred/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace balred {

namespace {
constexpr double kEps = 2.220446049250313e-16;

double hypot2(double a, double b) { return std::hypot(a, b); }
} // namespace

CMat CMat::from_entries(std::size_t r, std::size_t c, std::vector<cplx> entries) {
    if (entries.size() != r * c) throw Error(ErrorCode::BadLength, "entry count mismatch");
    CMat m;
    m.rows = r;
    m.cols = c;
    m.a = std::move(entries);
    m.check_finite("CMat::from_entries");
    return m;
}

CMat CMat::identity(std::size_t n) {
    CMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMat CMat::diagonal(const CVec& d) {
    CMat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

void CMat::check_finite(const char* what) const {
    for (const cplx& z : a) {
        if (!is_finite(z)) throw Error(ErrorCode::NonFinite, std::string(what) + ": non-finite entry");
    }
}

CMat matmul(const CMat& x, const CMat& y) {
    if (x.cols != y.rows) throw Error(ErrorCode::BadLength, "matmul shape mismatch");
    CMat out(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t k = 0; k < x.cols; ++k) {
            cplx xik = x(i, k);
            if (xik == cplx(0.0)) continue;
            const cplx* yrow = &y.a[k * y.cols];
            cplx* orow = &out.a[i * out.cols];
            for (std::size_t j = 0; j < y.cols; ++j) orow[j] += xik * yrow[j];
        }
    }
    return out;
}

CMat adjoint(const CMat& x) {
    CMat out(x.cols, x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) out(j, i) = std::conj(x(i, j));
    return out;
}

CMat transpose(const CMat& x) {
    CMat out(x.cols, x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) out(j, i) = x(i, j);
    return out;
}

CMat add(const CMat& x, const CMat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw Error(ErrorCode::BadLength, "add shape mismatch");
    CMat out = x;
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] += y.a[i];
    return out;
}

CMat sub(const CMat& x, const CMat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw Error(ErrorCode::BadLength, "sub shape mismatch");
    CMat out = x;
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] -= y.a[i];
    return out;
}

CMat scale(const CMat& x, cplx s) {
    CMat out = x;
    for (cplx& z : out.a) z *= s;
    return out;
}

CVec matvec(const CMat& m, const CVec& v) {
    if (m.cols != v.size()) throw Error(ErrorCode::BadLength, "matvec shape mismatch");
    CVec out(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        cplx acc = 0.0;
        const cplx* row = &m.a[i * m.cols];
        for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

CVec vecmat(const CVec& v, const CMat& m) {
    if (m.rows != v.size()) throw Error(ErrorCode::BadLength, "vecmat shape mismatch");
    CVec out(m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        cplx vi = v[i];
        const cplx* row = &m.a[i * m.cols];
        for (std::size_t j = 0; j < m.cols; ++j) out[j] += vi * row[j];
    }
    return out;
}

cplx dot_unconj(const CVec& x, const CVec& y) {
    if (x.size() != y.size()) throw Error(ErrorCode::BadLength, "dot shape mismatch");
    cplx acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

double fro_norm(const CMat& x) {
    double acc = 0.0;
    for (const cplx& z : x.a) acc += std::norm(z);
    return std::sqrt(acc);
}

double vec_norm(const CVec& v) {
    double acc = 0.0;
    for (const cplx& z : v) acc += std::norm(z);
    return std::sqrt(acc);
}

double max_abs(const CMat& x) {
    double m = 0.0;
    for (const cplx& z : x.a) m = std::max(m, std::abs(z));
    return m;
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver: Householder tridiagonalization, then implicit-shift
// QL on the real tridiagonal with rotations accumulated into the complex
// transform matrix.
// ---------------------------------------------------------------------------

namespace {

// Reduces Hermitian a in place to tridiagonal form; q accumulates the unitary
// transform so that q^* a_orig q is tridiagonal. On return d holds the
// diagonal and e the (complex) subdiagonal.
void householder_tridiag(CMat& a, CMat& q, std::vector<double>& d, CVec& e) {
    const std::size_t n = a.rows;
    q = CMat::identity(n);
    if (n == 0) return;
    CVec v(n), p(n), w(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t m = n - k - 1; // length of the column below the diagonal
        double xnorm2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) xnorm2 += std::norm(a(k + 1 + i, k));
        double xnorm = std::sqrt(xnorm2);
        if (xnorm == 0.0) continue;
        cplx x0 = a(k + 1, k);
        cplx phase = (std::abs(x0) > 0.0) ? x0 / std::abs(x0) : cplx(1.0);
        // v = x + phase*|x| e1 ; the reflector maps x to -phase*|x| e1.
        for (std::size_t i = 0; i < m; ++i) v[i] = a(k + 1 + i, k);
        v[0] += phase * xnorm;
        double beta = xnorm2 + 2.0 * xnorm * std::abs(x0) + xnorm2;
        if (beta == 0.0) continue;
        const double tau = 2.0 / beta;

        // Trailing block update: A <- (I - tau v v*) A (I - tau v v*).
        for (std::size_t i = 0; i < m; ++i) {
            cplx acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) acc += a(k + 1 + i, k + 1 + j) * v[j];
            p[i] = tau * acc;
        }
        cplx vp = 0.0;
        for (std::size_t i = 0; i < m; ++i) vp += std::conj(v[i]) * p[i];
        cplx kk = 0.5 * tau * vp;
        for (std::size_t i = 0; i < m; ++i) w[i] = p[i] - kk * v[i];
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                a(k + 1 + i, k + 1 + j) -= v[i] * std::conj(w[j]) + w[i] * std::conj(v[j]);
            }
        }
        a(k + 1, k) = -phase * xnorm;
        a(k, k + 1) = std::conj(a(k + 1, k));
        for (std::size_t i = 2; i <= m; ++i) {
            a(k + i, k) = 0.0;
            a(k, k + i) = 0.0;
        }
        // q <- q (I - tau v v*)
        for (std::size_t r = 0; r < n; ++r) {
            cplx acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) acc += q(r, k + 1 + j) * v[j];
            acc *= tau;
            for (std::size_t j = 0; j < m; ++j) q(r, k + 1 + j) -= acc * std::conj(v[j]);
        }
    }
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i).real();
    for (std::size_t i = 0; i + 1 < n; ++i) e[i] = a(i + 1, i);
}

// Implicit-shift QL on a real symmetric tridiagonal, rotating the complex
// columns of z alongside. d/e are modified in place; e[n-1] is a sentinel.
void tridiag_ql(std::vector<double>& d, std::vector<double>& e, CMat& z) {
    const std::size_t n = d.size();
    if (n == 0) return;
    e[n - 1] = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= kEps * dd) break;
            }
            if (m != l) {
                if (iter++ == 64) throw Error(ErrorCode::NonConvergence, "tridiagonal QL exceeded iteration budget");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = hypot2(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t ii = m; ii-- > l;) {
                    double f = s * e[ii];
                    double b = c * e[ii];
                    r = hypot2(f, g);
                    e[ii + 1] = r;
                    if (r == 0.0) {
                        d[ii + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[ii + 1] - p;
                    r = (d[ii] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[ii + 1] = g + p;
                    g = c * r - b;
                    for (std::size_t k = 0; k < z.rows; ++k) {
                        cplx fk = z(k, ii + 1);
                        z(k, ii + 1) = s * z(k, ii) + c * fk;
                        z(k, ii) = c * z(k, ii) - s * fk;
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

} // namespace

HermitianEig hermitian_eig(const CMat& m) {
    if (!m.square()) throw Error(ErrorCode::BadLength, "hermitian_eig requires a square matrix");
    const std::size_t n = m.rows;
    double scale = fro_norm(m);
    double asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) asym = std::max(asym, std::abs(m(i, j) - std::conj(m(j, i))));
    if (asym > 1e-10 * std::max(scale, 1e-300)) {
        throw Error(ErrorCode::NonHermitian, "asymmetry " + format_double(asym));
    }
    CMat a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));

    CMat q;
    std::vector<double> d;
    CVec esub;
    householder_tridiag(a, q, d, esub);

    // Phase-rotate columns so the subdiagonal becomes real nonnegative.
    const std::size_t nn = n;
    std::vector<double> e(nn, 0.0);
    cplx phi = 1.0;
    std::vector<cplx> phases(nn, cplx(1.0));
    for (std::size_t i = 0; i + 1 < nn; ++i) {
        double mag = std::abs(esub[i]);
        e[i] = mag;
        phi = (mag > 0.0) ? phi * (esub[i] / mag) : phi;
        phases[i + 1] = phi;
    }
    for (std::size_t j = 1; j < nn; ++j) {
        for (std::size_t r = 0; r < nn; ++r) q(r, j) *= phases[j];
    }

    tridiag_ql(d, e, q);

    // Sort ascending, carrying the eigenvector columns along.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });
    HermitianEig out;
    out.values.resize(n);
    out.vectors = CMat(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = d[order[j]];
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) = q(r, order[j]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Schur decomposition: Householder Hessenberg reduction + explicit
// single-shift QR with Wilkinson shifts and occasional exceptional shifts.
// ---------------------------------------------------------------------------

namespace {

struct Givens {
    double c = 1.0;
    cplx s = 0.0;
};

Givens make_givens(cplx f, cplx g) {
    Givens gv;
    double d = std::sqrt(std::norm(f) + std::norm(g));
    if (d == 0.0) return gv;
    double af = std::abs(f);
    if (af == 0.0) {
        gv.c = 0.0;
        gv.s = std::conj(g) / std::abs(g);
    } else {
        gv.c = af / d;
        gv.s = (f / af) * (std::conj(g) / d);
    }
    return gv;
}

void hessenberg_reduce(CMat& a, CMat& q) {
    const std::size_t n = a.rows;
    q = CMat::identity(n);
    CVec v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t m = n - k - 1;
        double xnorm2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) xnorm2 += std::norm(a(k + 1 + i, k));
        double xnorm = std::sqrt(xnorm2);
        if (xnorm == 0.0) continue;
        cplx x0 = a(k + 1, k);
        cplx phase = (std::abs(x0) > 0.0) ? x0 / std::abs(x0) : cplx(1.0);
        for (std::size_t i = 0; i < m; ++i) v[i] = a(k + 1 + i, k);
        v[0] += phase * xnorm;
        double beta = 2.0 * (xnorm2 + xnorm * std::abs(x0));
        if (beta == 0.0) continue;
        const double tau = 2.0 / beta;
        // Rows k+1..n-1: A <- (I - tau v v*) A
        for (std::size_t j = k; j < n; ++j) {
            cplx acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) acc += std::conj(v[i]) * a(k + 1 + i, j);
            acc *= tau;
            for (std::size_t i = 0; i < m; ++i) a(k + 1 + i, j) -= v[i] * acc;
        }
        // Columns k+1..n-1: A <- A (I - tau v v*)
        for (std::size_t r = 0; r < n; ++r) {
            cplx acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) acc += a(r, k + 1 + i) * v[i];
            acc *= tau;
            for (std::size_t i = 0; i < m; ++i) a(r, k + 1 + i) -= acc * std::conj(v[i]);
        }
        for (std::size_t r = 0; r < n; ++r) {
            cplx acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) acc += q(r, k + 1 + i) * v[i];
            acc *= tau;
            for (std::size_t i = 0; i < m; ++i) q(r, k + 1 + i) -= acc * std::conj(v[i]);
        }
        for (std::size_t i = 2; i <= m; ++i) a(k + i, k) = 0.0;
    }
}

cplx wilkinson_shift(const CMat& h, std::size_t hi) {
    cplx a = h(hi - 1, hi - 1);
    cplx b = h(hi - 1, hi);
    cplx c = h(hi, hi - 1);
    cplx d = h(hi, hi);
    cplx tr = a + d;
    cplx det = a * d - b * c;
    cplx disc = std::sqrt(tr * tr - 4.0 * det);
    cplx r1 = 0.5 * (tr + disc);
    cplx r2 = 0.5 * (tr - disc);
    return (std::abs(r1 - d) < std::abs(r2 - d)) ? r1 : r2;
}

} // namespace

SchurDecomposition schur_decompose(const CMat& m) {
    if (!m.square()) throw Error(ErrorCode::BadLength, "schur_decompose requires a square matrix");
    const std::size_t n = m.rows;
    SchurDecomposition out;
    out.t = m;
    out.t.check_finite("schur_decompose");
    if (n <= 1) {
        out.q = CMat::identity(n);
        return out;
    }
    CMat& h = out.t;
    hessenberg_reduce(h, out.q);
    CMat& z = out.q;

    const double hnorm = std::max(fro_norm(h), 1e-300);
    std::size_t hi = n - 1;
    std::size_t total_iter = 0;
    std::size_t since_deflate = 0;
    const std::size_t budget = 60 * n;
    std::vector<Givens> rots(n);

    while (hi > 0) {
        // Deflate converged subdiagonals from the bottom.
        std::size_t lo = hi;
        while (lo > 0) {
            double sd = std::abs(h(lo, lo - 1));
            double diag = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
            if (sd <= kEps * std::max(diag, hnorm * kEps) || sd <= 1e-300) {
                h(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) {
            --hi;
            since_deflate = 0;
            continue;
        }
        if (++total_iter > budget) throw Error(ErrorCode::NonConvergence, "QR iteration budget exhausted");
        ++since_deflate;

        cplx sigma;
        if (since_deflate % 12 == 0) {
            // Exceptional shift to break cyclic behavior.
            sigma = h(hi, hi) + 0.75 * std::abs(h(hi, hi - 1));
        } else {
            sigma = wilkinson_shift(h, hi);
        }

        for (std::size_t i = lo; i <= hi; ++i) h(i, i) -= sigma;
        // QR step: eliminate the subdiagonal with row rotations...
        for (std::size_t i = lo; i < hi; ++i) {
            Givens g = make_givens(h(i, i), h(i + 1, i));
            rots[i] = g;
            for (std::size_t j = i; j < n; ++j) {
                cplx t0 = h(i, j);
                cplx t1 = h(i + 1, j);
                h(i, j) = g.c * t0 + g.s * t1;
                h(i + 1, j) = -std::conj(g.s) * t0 + g.c * t1;
            }
        }
        // ...then multiply from the right (RQ), restoring Hessenberg form.
        for (std::size_t i = lo; i < hi; ++i) {
            const Givens& g = rots[i];
            std::size_t rmax = std::min(i + 1, hi);
            for (std::size_t r = 0; r <= rmax; ++r) {
                cplx t0 = h(r, i);
                cplx t1 = h(r, i + 1);
                h(r, i) = g.c * t0 + std::conj(g.s) * t1;
                h(r, i + 1) = -g.s * t0 + g.c * t1;
            }
            for (std::size_t r = 0; r < n; ++r) {
                cplx t0 = z(r, i);
                cplx t1 = z(r, i + 1);
                z(r, i) = g.c * t0 + std::conj(g.s) * t1;
                z(r, i + 1) = -g.s * t0 + g.c * t1;
            }
        }
        for (std::size_t i = lo; i <= hi; ++i) h(i, i) += sigma;
    }
    // Zero out anything below the diagonal left over from the iteration.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) h(i, j) = 0.0;
    return out;
}

namespace {

bool eig_ordering(const cplx& x, const cplx& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
}

void normalize_column_phase(CMat& v, std::size_t j) {
    double nrm = 0.0;
    for (std::size_t r = 0; r < v.rows; ++r) nrm += std::norm(v(r, j));
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) return;
    cplx phase = 1.0;
    for (std::size_t r = 0; r < v.rows; ++r) {
        if (std::abs(v(r, j)) > 1e-12 * nrm) {
            phase = std::conj(v(r, j)) / std::abs(v(r, j));
            break;
        }
    }
    for (std::size_t r = 0; r < v.rows; ++r) v(r, j) = v(r, j) * phase / nrm;
}

} // namespace

CVec general_eigenvalues(const CMat& m) {
    SchurDecomposition sd = schur_decompose(m);
    CVec vals(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) vals[i] = sd.t(i, i);
    std::sort(vals.begin(), vals.end(), eig_ordering);
    return vals;
}

GeneralEig general_eig(const CMat& m) {
    if (!m.square()) throw Error(ErrorCode::BadLength, "general_eig requires a square matrix");
    if (m.rows > 512) throw Error(ErrorCode::BadLength, "general_eig size limit is 512");
    const std::size_t n = m.rows;
    SchurDecomposition sd = schur_decompose(m);
    const CMat& t = sd.t;
    const double tnorm = std::max(fro_norm(t), 1e-300);

    // Eigenvectors of the triangular factor by back-substitution; near-equal
    // diagonal entries get an eps-scaled divisor instead of a breakdown.
    CMat y(n, n);
    CVec zcol(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(zcol.begin(), zcol.end(), cplx(0.0));
        zcol[j] = 1.0;
        for (std::size_t ii = j; ii-- > 0;) {
            cplx s = 0.0;
            for (std::size_t k = ii + 1; k <= j; ++k) s += t(ii, k) * zcol[k];
            cplx den = t(ii, ii) - t(j, j);
            if (std::abs(den) < kEps * tnorm) den = cplx(kEps * tnorm);
            zcol[ii] = -s / den;
        }
        for (std::size_t r = 0; r < n; ++r) y(r, j) = zcol[r];
    }
    CMat v = matmul(sd.q, y);
    for (std::size_t j = 0; j < n; ++j) normalize_column_phase(v, j);

    GeneralEig out;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = t(i, i);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t yv) { return eig_ordering(out.values[x], out.values[yv]); });
    CVec sorted_vals(n);
    CMat sorted_vecs(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        sorted_vals[j] = out.values[order[j]];
        for (std::size_t r = 0; r < n; ++r) sorted_vecs(r, j) = v(r, order[j]);
    }
    out.values = std::move(sorted_vals);
    out.vectors = std::move(sorted_vecs);

    out.cond = condition_number(out.vectors);
    if (out.cond > 1e10) {
        throw Error(ErrorCode::NearDefective, "eigenvector condition " + format_double(out.cond));
    }
    return out;
}

namespace {

CMat hermitian_power(const CMat& p, double expo, const char* what) {
    HermitianEig eig = hermitian_eig(p);
    double lmax = std::max(0.0, eig.values.back());
    double clamp_floor = -1e-12 * std::max(lmax, 1e-300);
    CVec d(eig.values.size());
    for (std::size_t i = 0; i < eig.values.size(); ++i) {
        double lam = eig.values[i];
        if (lam < clamp_floor) {
            throw Error(ErrorCode::NotPSD, std::string(what) + ": eigenvalue " + format_double(lam));
        }
        lam = std::max(lam, 0.0);
        d[i] = (lam == 0.0 && expo < 0.0) ? cplx(0.0) : cplx(std::pow(lam, expo));
    }
    CMat ud = eig.vectors;
    for (std::size_t j = 0; j < ud.cols; ++j)
        for (std::size_t r = 0; r < ud.rows; ++r) ud(r, j) *= d[j];
    return matmul(ud, adjoint(eig.vectors));
}

} // namespace

CMat hermitian_sqrt(const CMat& p) { return hermitian_power(p, 0.5, "hermitian_sqrt"); }

CMat hermitian_inv_sqrt(const CMat& p) { return hermitian_power(p, -0.5, "hermitian_inv_sqrt"); }

// ---------------------------------------------------------------------------
// LU with partial pivoting
// ---------------------------------------------------------------------------

namespace {

struct Lu {
    CMat lu;
    std::vector<std::size_t> perm;
};

Lu lu_factor(const CMat& m) {
    if (!m.square()) throw Error(ErrorCode::BadLength, "solve requires a square matrix");
    const std::size_t n = m.rows;
    Lu f{m, {}};
    f.perm.resize(n);
    std::iota(f.perm.begin(), f.perm.end(), 0);
    const double tol = 1e-14 * std::max(fro_norm(m), 1e-300);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(f.lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = std::abs(f.lu(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best <= tol) throw Error(ErrorCode::Singular, "pivot " + format_double(best) + " at column " + std::to_string(k));
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
        }
        cplx inv_piv = 1.0 / f.lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            cplx lik = f.lu(i, k) * inv_piv;
            f.lu(i, k) = lik;
            if (lik == cplx(0.0)) continue;
            for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= lik * f.lu(k, j);
        }
    }
    return f;
}

void lu_solve_inplace(const Lu& f, CVec& x) {
    const std::size_t n = f.perm.size();
    CVec b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = x[f.perm[i]];
    for (std::size_t i = 1; i < n; ++i) {
        cplx acc = b[i];
        for (std::size_t j = 0; j < i; ++j) acc -= f.lu(i, j) * b[j];
        b[i] = acc;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        cplx acc = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= f.lu(ii, j) * b[j];
        b[ii] = acc / f.lu(ii, ii);
    }
    x = std::move(b);
}

} // namespace

namespace {

// Largest eigenvalue of a Hermitian PSD operator given as a matvec, by power
// iteration from a fixed start vector (deterministic).
double power_iteration(std::size_t n, const std::function<void(const CVec&, CVec&)>& apply) {
    CVec x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = cplx(1.0 + 0.01 * static_cast<double>(i % 7), 0.0);
    double nx = vec_norm(x);
    for (cplx& z : x) z /= nx;
    double lambda = 0.0;
    for (int it = 0; it < 40; ++it) {
        apply(x, y);
        lambda = vec_norm(y);
        if (lambda == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / lambda;
    }
    return lambda;
}

} // namespace

double condition_number(const CMat& v) {
    const std::size_t n = v.rows;
    if (n == 0) return 1.0;
    const CMat vh = adjoint(v);
    double smax_sq = power_iteration(n, [&](const CVec& x, CVec& y) {
        CVec t = matvec(v, x);
        y = matvec(vh, t);
    });
    double smax = std::sqrt(smax_sq);
    try {
        Lu f = lu_factor(v);
        Lu fh = lu_factor(vh);
        double sinv_sq = power_iteration(n, [&](const CVec& x, CVec& y) {
            CVec t = x;
            lu_solve_inplace(f, t); // t = V^-1 x
            y = t;
            lu_solve_inplace(fh, y); // y = V^-* V^-1 x
        });
        return smax * std::sqrt(sinv_sq);
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
}

CMat solve(const CMat& m, const CMat& rhs) {
    if (m.rows != rhs.rows) throw Error(ErrorCode::BadLength, "solve rhs shape mismatch");
    Lu f = lu_factor(m);
    CMat out(rhs.rows, rhs.cols);
    CVec col(rhs.rows);
    for (std::size_t j = 0; j < rhs.cols; ++j) {
        for (std::size_t i = 0; i < rhs.rows; ++i) col[i] = rhs(i, j);
        lu_solve_inplace(f, col);
        for (std::size_t i = 0; i < rhs.rows; ++i) out(i, j) = col[i];
    }
    return out;
}

CVec solve(const CMat& m, const CVec& rhs) {
    if (m.rows != rhs.size()) throw Error(ErrorCode::BadLength, "solve rhs shape mismatch");
    Lu f = lu_factor(m);
    CVec out = rhs;
    lu_solve_inplace(f, out);
    return out;
}

CMat inverse(const CMat& m) { return solve(m, CMat::identity(m.rows)); }

// ---------------------------------------------------------------------------
// FFT
// ---------------------------------------------------------------------------

namespace {

const CVec& twiddles_for(std::size_t n) {
    thread_local std::unordered_map<std::size_t, CVec> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    CVec tw(n / 2);
    for (std::size_t i = 0; i < n / 2; ++i) {
        double ang = -2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        tw[i] = cplx(std::cos(ang), std::sin(ang));
    }
    return cache.emplace(n, std::move(tw)).first->second;
}

void fft_inplace(CVec& v, bool inverse) {
    const std::size_t n = v.size();
    if (n == 0 || (n & (n - 1)) != 0) throw Error(ErrorCode::BadLength, "fft length must be a power of two");
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(v[i], v[j]);
    }
    const CVec& tw = twiddles_for(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t step = n / len;
        for (std::size_t base = 0; base < n; base += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx w = tw[k * step];
                if (inverse) w = std::conj(w);
                cplx lo = v[base + k];
                cplx hiv = v[base + k + len / 2] * w;
                v[base + k] = lo + hiv;
                v[base + k + len / 2] = lo - hiv;
            }
        }
    }
    if (inverse) {
        double inv_n = 1.0 / static_cast<double>(n);
        for (cplx& z : v) z *= inv_n;
    }
}

} // namespace

CVec fft(CVec v) {
    fft_inplace(v, false);
    return v;
}

CVec ifft(CVec v) {
    fft_inplace(v, true);
    return v;
}

CVec linear_convolution(const CVec& a, const CVec& b) {
    if (a.size() != b.size()) throw Error(ErrorCode::BadLength, "linear_convolution expects equal lengths");
    const std::size_t l = a.size();
    if (l == 0) return {};
    std::size_t n = 1;
    while (n < 2 * l) n <<= 1;
    CVec fa(n), fb(n);
    std::copy(a.begin(), a.end(), fa.begin());
    std::copy(b.begin(), b.end(), fb.begin());
    fft_inplace(fa, false);
    fft_inplace(fb, false);
    for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
    fft_inplace(fa, true);
    fa.resize(l);
    return fa;
}

} // namespace balred
