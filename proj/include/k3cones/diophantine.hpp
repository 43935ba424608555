#pragma once

#include <algorithm>
#include <array>
#include <set>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace k3cones {

// ---------------------------------------------------------------------------
// Continued fractions of square roots
// ---------------------------------------------------------------------------

struct ContinuedFraction {
    Int a0;                   // integer part
    std::vector<Int> period;  // repeating tail; last term is always 2*a0
};

// Periodic continued-fraction expansion of sqrt(D) for non-square D > 0.
inline ContinuedFraction cf_sqrt(const Int& D) {
    if (D <= 0) throw PerfectSquare("radicand must be a positive non-square, got " + D.str());
    Int a0 = isqrt_floor(D);
    if (a0 * a0 == D) throw PerfectSquare("radicand is a perfect square: " + D.str());
    ContinuedFraction cf;
    cf.a0 = a0;
    // Standard (P, Q) recurrence: x_k = (sqrt(D) + P_k) / Q_k.
    Int P = 0, Q = 1, a = a0;
    while (true) {
        P = a * Q - P;
        Q = (D - P * P) / Q;
        a = (a0 + P) / Q;
        cf.period.push_back(a);
        if (a == 2 * a0) break;  // period always ends at the term 2*a0
    }
    return cf;
}

// ---------------------------------------------------------------------------
// Pell equations
// ---------------------------------------------------------------------------

struct PellSolution {
    Int x, y;
    bool operator==(const PellSolution& o) const { return x == o.x && y == o.y; }
};

// Least solution with x, y > 0 of x^2 - D y^2 = 1 (D > 0 non-square),
// found among the continued-fraction convergents of sqrt(D).
inline PellSolution pell_fundamental(const Int& D) {
    ContinuedFraction cf = cf_sqrt(D);
    Int h2 = 0, h1 = 1;  // numerators  h_{k-2}, h_{k-1}
    Int k2 = 1, k1 = 0;  // denominators
    std::size_t L = cf.period.size();
    // The fundamental solution appears within two periods.
    for (std::size_t i = 0; i <= 2 * L + 2; ++i) {
        Int a = (i == 0) ? cf.a0 : cf.period[(i - 1) % L];
        Int h = a * h1 + h2;
        Int k = a * k1 + k2;
        if (k > 0 && h * h - D * k * k == 1) return {h, k};
        h2 = h1; h1 = h;
        k2 = k1; k1 = k;
    }
    throw InternalError("pell_fundamental: no solution among convergents for D=" + D.str());
}

// Representatives of all solution classes of x^2 - D y^2 = N, normalized to
// x >= 0.  For non-square D the classes, combined with the automorphism
// (x, y) -> (x*x0 + D*y*y0, x*y0 + y*x0), generate every solution.  For
// square D the equation factors and the returned list is the complete
// solution set with x >= 0.
inline std::vector<PellSolution> pell_general(const Int& D, const Int& N) {
    if (D <= 0) throw PerfectSquare("pell_general requires D > 0, got " + D.str());
    std::vector<PellSolution> out;
    if (N == 0) return out;

    Int e;
    if (is_perfect_square(D, &e)) {
        // (x - e*y)(x + e*y) = N: enumerate divisor pairs.
        Int absN = abs_int(N);
        for (Int u = -absN; u <= absN; ++u) {
            if (u == 0 || N % u != 0) continue;
            Int w = N / u;
            Int x2 = u + w, y2 = w - u;
            if (x2 % 2 != 0) continue;
            if (y2 % (2 * e) != 0) continue;
            Int x = x2 / 2, y = y2 / (2 * e);
            if (x < 0) continue;  // mirror of the (-u,-w) pair
            out.push_back({x, y});
        }
    } else {
        PellSolution fund = pell_fundamental(D);
        // Classical window: every class has a representative with
        // 0 <= y <= sqrt(|N| (x0+1) / (2D)); pad by 2 for safety.
        Int ylim = isqrt_floor(abs_int(N) * (fund.x + 1) / (2 * D)) + 2;
        for (Int y = 0; y <= ylim; ++y) {
            Int xx = N + D * y * y;
            if (xx < 0) continue;
            Int x;
            if (!is_perfect_square(xx, &x)) continue;
            out.push_back({x, y});
            if (y > 0) out.push_back({x, -y});
        }
    }
    std::sort(out.begin(), out.end(), [](const PellSolution& a, const PellSolution& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Indefinite binary quadratic forms
// ---------------------------------------------------------------------------

struct BQFSolutionSet {
    Int A, B, C;  // form A m^2 + B mn + C n^2
    Int t;        // target value
    std::vector<std::pair<Int, Int>> solutions;  // all solutions in the box |m|,|n| <= bound
    bool has_automorphism = false;               // false when the discriminant is a square
    std::array<std::array<Int, 2>, 2> automorphism{};  // proper automorphism of the form
};

// Exhaustive scan |m|, |n| <= bound; independent test oracle.
inline std::vector<std::pair<Int, Int>> brute_oracle(const Int& A, const Int& B, const Int& C,
                                                     const Int& t, const Int& bound) {
    std::vector<std::pair<Int, Int>> out;
    for (Int m = -bound; m <= bound; ++m)
        for (Int n = -bound; n <= bound; ++n)
            if (A * m * m + B * m * n + C * n * n == t) out.emplace_back(m, n);
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

// Solutions of q2 u^2 + q1 u + q0 = 0 appended as (fixed, u) or (u, fixed).
inline void solve_quadratic_axis(const Int& q2, const Int& q1, const Int& q0, const Int& fixed,
                                 bool fixed_first, const Int& bound,
                                 std::set<std::pair<Int, Int>>& sink) {
    auto push = [&](const Int& u) {
        if (abs_int(u) > bound) return;
        if (fixed_first)
            sink.emplace(fixed, u);
        else
            sink.emplace(u, fixed);
    };
    if (q2 != 0) {
        Int disc = q1 * q1 - 4 * q2 * q0;
        if (disc < 0) return;
        Int s;
        if (!is_perfect_square(disc, &s)) return;
        for (int sign : {+1, -1}) {
            Int num = -q1 + sign * s;
            if (num % (2 * q2) == 0) push(num / (2 * q2));
            if (s == 0) break;
        }
    } else if (q1 != 0) {
        if (q0 % q1 == 0) push(-q0 / q1);
    } else if (q0 == 0) {
        // identity in u: a full family inside the box
        for (Int u = -bound; u <= bound; ++u) push(u);
    }
}

}  // namespace detail

// All solutions of A m^2 + B mn + C n^2 = t with |m|, |n| <= bound, together
// with a generator of the form's proper automorphism group (when infinite).
inline BQFSolutionSet bqf_solve(const Int& A, const Int& B, const Int& C, const Int& t,
                                const Int& bound) {
    Int disc = B * B - 4 * A * C;
    if (disc <= 0)
        throw DegenerateForm("form is not indefinite: discriminant " + disc.str());

    BQFSolutionSet res;
    res.A = A; res.B = B; res.C = C; res.t = t;

    std::set<std::pair<Int, Int>> found;
    for (Int m = -bound; m <= bound; ++m)
        detail::solve_quadratic_axis(C, B * m, A * m * m - t, m, /*fixed_first=*/true, bound, found);
    for (Int n = -bound; n <= bound; ++n)
        detail::solve_quadratic_axis(A, B * n, C * n * n - t, n, /*fixed_first=*/false, bound, found);
    res.solutions.assign(found.begin(), found.end());

    Int root;
    if (!is_perfect_square(disc, &root)) {
        Int T, U;
        if (disc % 4 == 0) {
            PellSolution p = pell_fundamental(disc / 4);
            T = 2 * p.x; U = p.y;
        } else {
            PellSolution p = pell_fundamental(disc);
            T = 2 * p.x; U = 2 * p.y;
        }
        // M = [[(T - B U)/2, -C U], [A U, (T + B U)/2]], det = 1.
        res.automorphism = {{{(T - B * U) / 2, -C * U}, {A * U, (T + B * U) / 2}}};
        res.has_automorphism = true;
        // Safety: M must preserve the form matrix [[2A, B], [B, 2C]].
        const auto& M = res.automorphism;
        Int g00 = 2 * A, g01 = B, g11 = 2 * C;
        Int c00 = M[0][0] * (g00 * M[0][0] + g01 * M[1][0]) + M[1][0] * (g01 * M[0][0] + g11 * M[1][0]);
        Int c01 = M[0][0] * (g00 * M[0][1] + g01 * M[1][1]) + M[1][0] * (g01 * M[0][1] + g11 * M[1][1]);
        Int c11 = M[0][1] * (g00 * M[0][1] + g01 * M[1][1]) + M[1][1] * (g01 * M[0][1] + g11 * M[1][1]);
        if (c00 != g00 || c01 != g01 || c11 != g11)
            throw InternalError("bqf_solve: automorphism does not preserve the form");
    }
    return res;
}

}  // namespace k3cones
