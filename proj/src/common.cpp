#include "balred/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <thread>

namespace balred {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NearDefective: return "NearDefective";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::OnImaginaryAxis: return "OnImaginaryAxis";
    case ErrorCode::Unstable: return "Unstable";
    case ErrorCode::NearlyUncontrollable: return "NearlyUncontrollable";
    case ErrorCode::BadOrder: return "BadOrder";
    case ErrorCode::PoleHit: return "PoleHit";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::PositiveRealPart: return "PositiveRealPart";
    case ErrorCode::TokenOutOfRange: return "TokenOutOfRange";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::BadConfig: return "BadConfig";
    }
    return "Unknown";
}

// --- Mersenne Twister (MT19937-64), written out so the stream is fixed ---

namespace {
constexpr std::size_t kMtN = 312;
constexpr std::size_t kMtM = 156;
constexpr std::uint64_t kMatrixA = 0xB5026F5AA96619E9ULL;
constexpr std::uint64_t kUpperMask = 0xFFFFFFFF80000000ULL;
constexpr std::uint64_t kLowerMask = 0x7FFFFFFFULL;
} // namespace

Rng::State Rng::split_seed(std::uint64_t seed) {
    State st;
    st.mt.resize(kMtN);
    st.mt[0] = seed;
    for (std::size_t i = 1; i < kMtN; ++i) {
        st.mt[i] = 6364136223846793005ULL * (st.mt[i - 1] ^ (st.mt[i - 1] >> 62)) + i;
    }
    st.idx = kMtN;
    return st;
}

std::uint64_t Rng::next_u64() {
    if (s_.idx >= kMtN) {
        for (std::size_t i = 0; i < kMtN; ++i) {
            std::uint64_t x = (s_.mt[i] & kUpperMask) | (s_.mt[(i + 1) % kMtN] & kLowerMask);
            std::uint64_t xa = x >> 1;
            if (x & 1ULL) xa ^= kMatrixA;
            s_.mt[i] = s_.mt[(i + kMtM) % kMtN] ^ xa;
        }
        s_.idx = 0;
    }
    std::uint64_t x = s_.mt[s_.idx++];
    x ^= (x >> 29) & 0x5555555555555555ULL;
    x ^= (x << 17) & 0x71D67FFFEDA60000ULL;
    x ^= (x << 37) & 0xFFF7EEE000000000ULL;
    x ^= x >> 43;
    return x;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform01();
    } while (u1 <= 0.0);
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw Error(ErrorCode::BadConfig, "Rng::below(0)");
    // Rejection sampling keeps the draw unbiased.
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

void Rng::shuffle(std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(below(i));
        std::swap(v[i - 1], v[j]);
    }
}

Rng Rng::fork(std::uint64_t salt) {
    std::uint64_t base = next_u64();
    return Rng(base ^ (salt * 0x9E3779B97F4A7C15ULL + 0x165667B19E3779F9ULL));
}

// --- SHA-256 ---

namespace {

struct Sha256 {
    std::uint32_t h[8] = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                          0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
    std::uint64_t total = 0;
    unsigned char buf[64];
    std::size_t buflen = 0;

    static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void block(const unsigned char* p) {
        static const std::uint32_t k[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
            0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
            0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
            0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
            0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
            0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
            0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
            0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
            0xc67178f2};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i) {
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        }
        for (int i = 16; i < 64; ++i) {
            std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
        std::uint32_t e = h[4], f = h[5], g = h[6], hh = h[7];
        for (int i = 0; i < 64; ++i) {
            std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t t1 = hh + s1 + ch + k[i] + w[i];
            std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t t2 = s0 + maj;
            hh = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
        h[5] += f;
        h[6] += g;
        h[7] += hh;
    }

    void update(const unsigned char* p, std::size_t n) {
        total += n;
        while (n > 0) {
            std::size_t take = std::min(n, 64 - buflen);
            std::memcpy(buf + buflen, p, take);
            buflen += take;
            p += take;
            n -= take;
            if (buflen == 64) {
                block(buf);
                buflen = 0;
            }
        }
    }

    std::string final_hex() {
        std::uint64_t bits = total * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (buflen != 56) update(&zero, 1);
        unsigned char len[8];
        for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
        update(len, 8);
        char out[65];
        for (int i = 0; i < 8; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
        return std::string(out, 64);
    }
};

} // namespace

std::string sha256_hex(const std::string& bytes) {
    Sha256 s;
    s.update(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
    return s.final_hex();
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    Sha256 s;
    char chunk[8192];
    while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
        s.update(reinterpret_cast<const unsigned char*>(chunk), static_cast<std::size_t>(in.gcount()));
    }
    return s.final_hex();
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

double parse_double(const std::string& s) {
    const char* p = s.c_str();
    char* end = nullptr;
    double x = std::strtod(p, &end);
    if (end == p || (end && *end != '\0')) {
        throw Error(ErrorCode::ParseError, "bad real literal '" + s + "'");
    }
    return x;
}

bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("BALRED_SSM_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= n) break;
                    fn(i);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace balred
