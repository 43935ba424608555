#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <utility>

namespace k3cones {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline int sgn(const Int& x) { return x.sign(); }

inline Int abs_int(const Int& x) { return x < 0 ? Int(-x) : x; }

inline Int gcd_int(const Int& a, const Int& b) {
    return boost::multiprecision::gcd(a, b);
}

inline Int gcd3(const Int& a, const Int& b, const Int& c) {
    return gcd_int(gcd_int(a, b), c);
}

// Floor of sqrt(n) for n >= 0.
inline Int isqrt_floor(const Int& n) {
    return boost::multiprecision::sqrt(n);
}

inline bool is_perfect_square(const Int& n, Int* root = nullptr) {
    if (n < 0) return false;
    Int r = isqrt_floor(n);
    if (r * r == n) {
        if (root) *root = r;
        return true;
    }
    return false;
}

// Exact division; caller guarantees divisibility.
inline Int exact_div(const Int& a, const Int& b) {
    return a / b;
}

inline bool divides(const Int& d, const Int& a) {
    if (d == 0) return a == 0;
    return a % d == 0;
}

#if defined(__SIZEOF_INT128__)
using i128 = __int128;
using u128 = unsigned __int128;

// Floor sqrt for non-negative 128-bit values, pure integer Newton iteration.
inline u128 isqrt_u128(u128 n) {
    if (n == 0) return 0;
    int bits = 0;
    for (u128 t = n; t != 0; t >>= 1) ++bits;
    u128 x = u128(1) << ((bits + 1) / 2);
    while (true) {
        u128 y = (x + n / x) >> 1;
        if (y >= x) break;
        x = y;
    }
    while (x * x > n) --x;
    return x;
}

inline bool fits_i128(const Int& v) {
    // conservative: |v| < 2^120
    static const Int lim = Int(1) << 120;
    return abs_int(v) < lim;
}

inline i128 to_i128(const Int& v) {
    bool neg = v < 0;
    Int a = abs_int(v);
    u128 r = 0;
    // cpp_int -> limbs via export_bits would be heavier; 120-bit values split manually.
    Int hi = a >> 64;
    Int lo = a - (hi << 64);
    r = (u128)hi.convert_to<std::uint64_t>();
    r <<= 64;
    r |= (u128)lo.convert_to<std::uint64_t>();
    i128 s = (i128)r;
    return neg ? -s : s;
}
#endif

// Deterministic RNG used by randomized property tests.
struct XorShift64 {
    std::uint64_t state;
    explicit XorShift64(std::uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
    std::uint64_t next() {
        std::uint64_t x = state;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        state = x;
        return x;
    }
    // uniform in [lo, hi]
    long long range(long long lo, long long hi) {
        return lo + (long long)(next() % (std::uint64_t)(hi - lo + 1));
    }
};

}  // namespace k3cones
