#include "doctest.h"

#include "balred/linalg.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace balred;
using namespace balred::testutil;

namespace {

double reconstruction_residual(const CMat& m, const HermitianEig& eig) {
    CMat ud = eig.vectors;
    for (std::size_t j = 0; j < ud.cols; ++j)
        for (std::size_t r = 0; r < ud.rows; ++r) ud(r, j) *= eig.values[j];
    CMat rec = matmul(ud, adjoint(eig.vectors));
    return fro_norm(sub(rec, m)) / std::max(fro_norm(m), 1e-300);
}

double unitarity_residual(const CMat& u) {
    return fro_norm(sub(matmul(adjoint(u), u), CMat::identity(u.cols)));
}

} // namespace

TEST_CASE("hermitian_eig identity and diagonal") {
    CMat eye = CMat::identity(2);
    HermitianEig e = hermitian_eig(eye);
    CHECK(e.values[0] == doctest::Approx(1.0));
    CHECK(e.values[1] == doctest::Approx(1.0));
    CHECK(unitarity_residual(e.vectors) < 1e-12);

    CMat d = CMat::diagonal({cplx(2.0), cplx(3.0)});
    e = hermitian_eig(d);
    CHECK(e.values[0] == doctest::Approx(2.0));
    CHECK(e.values[1] == doctest::Approx(3.0));
}

TEST_CASE("hermitian_eig 2x2 swap matrix has eigenvalues -1, 1") {
    // Roots of the characteristic polynomial t^2 - 1.
    CMat m = CMat::from_entries(2, 2, {0.0, 1.0, 1.0, 0.0});
    HermitianEig e = hermitian_eig(m);
    CHECK(e.values[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hermitian_eig random reconstruction and unitarity") {
    Rng rng(11);
    for (std::size_t n : {1, 2, 3, 5, 16, 33, 64}) {
        CMat m = random_hermitian(rng, n);
        HermitianEig e = hermitian_eig(m);
        CHECK(reconstruction_residual(m, e) < 1e-10);
        CHECK(unitarity_residual(e.vectors) < 1e-10);
        for (std::size_t i = 0; i + 1 < n; ++i) CHECK(e.values[i] <= e.values[i + 1]);
    }
}

TEST_CASE("hermitian_eig rejects non-hermitian input") {
    CMat m = CMat::from_entries(2, 2, {1.0, 2.0, 3.0, 4.0});
    CHECK_THROWS_AS(hermitian_eig(m), Error);
    try {
        hermitian_eig(m);
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::NonHermitian);
    }
}

TEST_CASE("general_eig diagonal passthrough") {
    CMat m = CMat::diagonal({cplx(-1.0, 0.0), cplx(-2.0, 3.0)});
    GeneralEig e = general_eig(m);
    CHECK(e.values[0].real() == doctest::Approx(-1.0));
    CHECK(e.values[0].imag() == doctest::Approx(0.0));
    CHECK(e.values[1].real() == doctest::Approx(-2.0));
    CHECK(e.values[1].imag() == doctest::Approx(3.0));
    CHECK(e.cond == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("general_eig rotation matrix has eigenvalues +-i") {
    // Characteristic polynomial t^2 + 1.
    CMat m = CMat::from_entries(2, 2, {0.0, -1.0, 1.0, 0.0});
    GeneralEig e = general_eig(m);
    CHECK(e.values[0].real() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.values[0].imag() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.values[1].imag() == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("general_eig flags a Jordan block as near-defective") {
    CMat m = CMat::from_entries(2, 2, {1.0, 1.0, 0.0, 1.0});
    CHECK_THROWS_AS(general_eig(m), Error);
    try {
        general_eig(m);
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::NearDefective);
    }
}

TEST_CASE("general_eig residual on random matrices") {
    Rng rng(23);
    for (std::size_t n : {2, 3, 8, 16, 48}) {
        CMat m = random_matrix(rng, n);
        GeneralEig e = general_eig(m);
        // ||M V - V diag(mu)|| / ||M||
        CMat mv = matmul(m, e.vectors);
        CMat vd = e.vectors;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t r = 0; r < n; ++r) vd(r, j) *= e.values[j];
        CHECK(fro_norm(sub(mv, vd)) / fro_norm(m) < 1e-8);
    }
}

TEST_CASE("schur decomposition reconstructs the matrix") {
    Rng rng(31);
    for (std::size_t n : {1, 2, 5, 24, 64}) {
        CMat m = random_matrix(rng, n);
        SchurDecomposition sd = schur_decompose(m);
        CMat rec = matmul(matmul(sd.q, sd.t), adjoint(sd.q));
        CHECK(fro_norm(sub(rec, m)) / fro_norm(m) < 1e-12);
        CHECK(unitarity_residual(sd.q) < 1e-12);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) CHECK(sd.t(i, j) == cplx(0.0));
    }
}

TEST_CASE("hermitian_sqrt basics") {
    CHECK(fro_norm(sub(hermitian_sqrt(CMat::identity(3)), CMat::identity(3))) < 1e-12);
    CMat s = hermitian_sqrt(CMat::diagonal({cplx(4.0), cplx(9.0)}));
    CHECK(s(0, 0).real() == doctest::Approx(2.0));
    CHECK(s(1, 1).real() == doctest::Approx(3.0));
}

TEST_CASE("hermitian_sqrt of random PSD multiplies back") {
    Rng rng(5);
    for (std::size_t n : {2, 8, 32, 64}) {
        CMat p = random_psd(rng, n);
        CMat s = hermitian_sqrt(p);
        CHECK(fro_norm(sub(matmul(s, s), p)) / fro_norm(p) < 1e-9);
    }
}

TEST_CASE("hermitian_sqrt rejects indefinite input") {
    CMat m = CMat::diagonal({cplx(1.0), cplx(-1.0)});
    CHECK_THROWS_AS(hermitian_sqrt(m), Error);
}

TEST_CASE("solve and inverse") {
    Rng rng(17);
    CMat r = random_matrix(rng, 4);
    CMat x = solve(CMat::identity(4), r);
    CHECK(fro_norm(sub(x, r)) < 1e-14);

    CMat inv = inverse(CMat::diagonal({cplx(2.0), cplx(4.0)}));
    CHECK(inv(0, 0).real() == doctest::Approx(0.5));
    CHECK(inv(1, 1).real() == doctest::Approx(0.25));

    CMat m = random_matrix(rng, 16);
    CHECK(fro_norm(sub(matmul(m, inverse(m)), CMat::identity(16))) < 1e-10);
}

TEST_CASE("solve flags singular matrices") {
    CMat m = CMat::from_entries(2, 2, {1.0, 2.0, 2.0, 4.0});
    CHECK_THROWS_AS(inverse(m), Error);
    try {
        inverse(m);
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::Singular);
    }
}

TEST_CASE("fft of delta and constant") {
    CVec delta = {1.0, 0.0, 0.0, 0.0};
    CVec f = fft(delta);
    for (const cplx& z : f) CHECK(std::abs(z - cplx(1.0)) < 1e-15);

    CVec ones = {1.0, 1.0, 1.0, 1.0};
    f = fft(ones);
    CHECK(std::abs(f[0] - cplx(4.0)) < 1e-15);
    for (std::size_t i = 1; i < 4; ++i) CHECK(std::abs(f[i]) < 1e-15);
}

TEST_CASE("fft round trip") {
    Rng rng(3);
    CVec v = random_cvec(rng, 256);
    CVec rt = ifft(fft(v));
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        err += std::norm(rt[i] - v[i]);
        ref += std::norm(v[i]);
    }
    CHECK(std::sqrt(err / ref) < 1e-12);
}

TEST_CASE("fft rejects non power of two lengths") {
    CVec v(3, cplx(1.0));
    CHECK_THROWS_AS(fft(v), Error);
    try {
        fft(v);
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::BadLength);
    }
}

TEST_CASE("linear_convolution identity and causal prefix") {
    CVec delta = {1.0, 0.0, 0.0};
    Rng rng(9);
    CVec b = random_cvec(rng, 3);
    CVec out = linear_convolution(delta, b);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(out[i] - b[i]) < 1e-14);

    // (1,1)*(1,1) has full convolution (1,2,1); the causal prefix is (1,2).
    out = linear_convolution({1.0, 1.0}, {1.0, 1.0});
    CHECK(std::abs(out[0] - cplx(1.0)) < 1e-14);
    CHECK(std::abs(out[1] - cplx(2.0)) < 1e-14);
}

TEST_CASE("linear_convolution matches the naive loop") {
    Rng rng(13);
    for (std::size_t l : {1, 2, 17, 64, 129, 256}) {
        CVec a = random_cvec(rng, l);
        CVec b = random_cvec(rng, l);
        CVec fast = linear_convolution(a, b);
        CVec slow = naive_causal_convolution(a, b);
        for (std::size_t i = 0; i < l; ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-10);
    }
}

TEST_CASE("CMat::from_entries validates finiteness") {
    CHECK_THROWS_AS(CMat::from_entries(1, 1, {cplx(std::nan(""), 0.0)}), Error);
}
