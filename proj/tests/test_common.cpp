#include "doctest.h"

#include "balred/common.hpp"

using namespace balred;

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    std::string million(1000000, 'a');
    CHECK(sha256_hex(million) == "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("format_double round-trips bit-exactly") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        double x = (rng.uniform01() - 0.5) * std::pow(10.0, rng.uniform(-300.0, 300.0));
        CHECK(parse_double(format_double(x)) == x);
    }
    CHECK(parse_double(format_double(0.0)) == 0.0);
    CHECK(parse_double(format_double(-1.0 / 3.0)) == -1.0 / 3.0);
}

TEST_CASE("rng streams are reproducible and fork independently") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(42);
    for (int i = 0; i < 100; ++i) (void)c.next_u64();
    Rng child = c.fork(3);
    CHECK(child.next_u64() != c.next_u64());
}

TEST_CASE("rng normal moments are sane") {
    Rng rng(1);
    double sum = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.03);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("parallel_for covers every index once") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
}

TEST_CASE("error codes classify validation vs numerical") {
    CHECK(Error(ErrorCode::ParseError, "x").is_validation());
    CHECK(Error(ErrorCode::BadOrder, "x").is_validation());
    CHECK_FALSE(Error(ErrorCode::Unstable, "x").is_validation());
    CHECK_FALSE(Error(ErrorCode::NearDefective, "x").is_validation());
}
