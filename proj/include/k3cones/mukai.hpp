#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <string>

#include "errors.hpp"
#include "numeric.hpp"

namespace k3cones {

// Numerical parameters of a degree-h2 polarized K3 surface with cyclic
// Picard group.  h2 = H^2 = 2d = 2g - 2 must be a positive even integer.
struct SurfaceParams {
    Int h2;

    explicit SurfaceParams(Int h2_in) : h2(std::move(h2_in)) {
        if (h2 <= 0) throw NonPositiveDegree("degree parameter must be positive, got " + h2.str());
        if (h2 % 2 != 0) throw OddDegree("degree parameter must be even, got " + h2.str());
    }

    Int d() const { return h2 / 2; }
    Int genus() const { return h2 / 2 + 1; }
};

// Integral class (a, y, b) in the rank-3 lattice Z + Z*H + Z with pairing
// <(a,y,b),(a',y',b')> = h2*y*y' - a*b' - b*a'.
struct MukaiVector {
    Int a, y, b;

    MukaiVector() : a(0), y(0), b(0) {}
    MukaiVector(Int a_, Int y_, Int b_) : a(std::move(a_)), y(std::move(y_)), b(std::move(b_)) {}

    bool operator==(const MukaiVector& o) const { return a == o.a && y == o.y && b == o.b; }
    bool operator!=(const MukaiVector& o) const { return !(*this == o); }

    MukaiVector operator+(const MukaiVector& o) const { return {a + o.a, y + o.y, b + o.b}; }
    MukaiVector operator-(const MukaiVector& o) const { return {a - o.a, y - o.y, b - o.b}; }
    MukaiVector operator-() const { return {-a, -y, -b}; }
    MukaiVector operator*(const Int& k) const { return {a * k, y * k, b * k}; }

    bool is_zero() const { return a == 0 && y == 0 && b == 0; }

    Int content() const { return gcd3(a, y, b); }
    bool is_primitive() const { return content() == 1; }

    // Largest primitive vector u with *this = content * u; sign is preserved.
    MukaiVector primitive_part() const {
        Int g = content();
        if (g == 0) throw InternalError("primitive_part of the zero vector");
        return {a / g, y / g, b / g};
    }

    std::string str() const { return "(" + a.str() + "," + y.str() + "," + b.str() + ")"; }
};

inline std::ostream& operator<<(std::ostream& os, const MukaiVector& v) { return os << v.str(); }

inline Int pair(const MukaiVector& u, const MukaiVector& w, const SurfaceParams& s) {
    return s.h2 * u.y * w.y - u.a * w.b - u.b * w.a;
}

inline Int square(const MukaiVector& u, const SurfaceParams& s) { return pair(u, u, s); }

inline bool is_spherical(const MukaiVector& u, const SurfaceParams& s) { return square(u, s) == -2; }
inline bool is_isotropic(const MukaiVector& u, const SurfaceParams& s) { return square(u, s) == 0; }

// Expected dimension of the moduli space attached to v: v^2 + 2.
inline Int moduli_dim(const MukaiVector& v, const SurfaceParams& s) { return square(v, s) + 2; }

// Saturated basis of the rank-2 sublattice v^perp, canonicalized by row
// Hermite normal form so the result is deterministic.
struct OrthoBasis {
    MukaiVector v;
    MukaiVector f1, f2;
    // gram[0][0] = <f1,f1>, gram[0][1] = gram[1][0] = <f1,f2>, gram[1][1] = <f2,f2>
    std::array<std::array<Int, 2>, 2> gram;

    Int gram_det() const { return gram[0][0] * gram[1][1] - gram[0][1] * gram[0][1]; }

    MukaiVector ambient(const Int& m, const Int& n) const {
        return f1 * m + f2 * n;
    }

    // Value of the quadratic form on coordinates (m, n).
    Int form(const Int& m, const Int& n) const {
        return gram[0][0] * m * m + 2 * gram[0][1] * m * n + gram[1][1] * n * n;
    }
};

namespace detail {

struct Row3 {
    Int x0, x1, x2;
    Row3 operator-(const Row3& o) const { return {x0 - o.x0, x1 - o.x1, x2 - o.x2}; }
    Row3 operator*(const Int& k) const { return {x0 * k, x1 * k, x2 * k}; }
    Int& at(int i) { return i == 0 ? x0 : (i == 1 ? x1 : x2); }
    const Int& at(int i) const { return i == 0 ? x0 : (i == 1 ? x1 : x2); }
    bool zero() const { return x0 == 0 && x1 == 0 && x2 == 0; }
};

// Floor division (round toward negative infinity).
inline Int floor_div(const Int& a, const Int& b) {
    Int q = a / b, r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}

// Row Hermite normal form of a rank-2 2x3 integer matrix: pivots positive,
// pivot of row 1 strictly left of pivot of row 2, entries above a pivot
// reduced to [0, pivot).
inline void hnf2x3(Row3& r1, Row3& r2) {
    int j1 = 0;
    while (j1 < 3 && r1.at(j1) == 0 && r2.at(j1) == 0) ++j1;
    if (j1 >= 3) throw InternalError("hnf2x3: zero matrix");
    // Euclid on the leading column until one row has zero there.
    while (r1.at(j1) != 0 && r2.at(j1) != 0) {
        if (abs_int(r1.at(j1)) < abs_int(r2.at(j1))) std::swap(r1, r2);
        Int q = r1.at(j1) / r2.at(j1);  // truncated is fine for Euclid
        r1 = r1 - r2 * q;
    }
    if (r1.at(j1) == 0) std::swap(r1, r2);
    if (r1.at(j1) < 0) r1 = r1 * Int(-1);
    int j2 = j1 + 1;
    while (j2 < 3 && r2.at(j2) == 0) ++j2;
    if (j2 >= 3) throw InternalError("hnf2x3: rank < 2");
    if (r2.at(j2) < 0) r2 = r2 * Int(-1);
    Int q = floor_div(r1.at(j2), r2.at(j2));
    r1 = r1 - r2 * q;
}

}  // namespace detail

inline OrthoBasis orth_basis(const MukaiVector& v, const SurfaceParams& s) {
    if (v.is_zero()) throw NotPrimitive("orth_basis of the zero vector");
    if (!v.is_primitive()) throw NotPrimitive("orth_basis requires a primitive vector, got " + v.str());
    if (square(v, s) < 2)
        throw NonPositiveSquare("orth_basis requires square(v) >= 2, got " + square(v, s).str() +
                                " for v = " + v.str());

    // <x, v> = c0*x.a + c1*x.y + c2*x.b
    Int c0 = -v.b, c1 = s.h2 * v.y, c2 = -v.a;
    Int g = gcd3(c0, c1, c2);
    if (g == 0) throw InternalError("orth_basis: zero pairing functional");
    c0 /= g; c1 /= g; c2 /= g;

    detail::Row3 k1, k2;
    if (c0 == 0 && c1 == 0) {
        // functional is +-x.b
        k1 = {1, 0, 0};
        k2 = {0, 1, 0};
    } else {
        // ext gcd on (c0, c1)
        Int old_r = c0, r = c1, old_su = 1, su = 0, old_sv = 0, sv = 1;
        while (r != 0) {
            Int q = old_r / r;
            Int t;
            t = old_r - q * r; old_r = r; r = t;
            t = old_su - q * su; old_su = su; su = t;
            t = old_sv - q * sv; old_sv = sv; sv = t;
        }
        Int g12 = old_r, u = old_su, w = old_sv;  // u*c0 + w*c1 = g12
        if (g12 < 0) { g12 = -g12; u = -u; w = -w; }
        k1 = {c1 / g12, -c0 / g12, 0};
        k2 = {u * c2, w * c2, -g12};
    }
    detail::hnf2x3(k1, k2);

    OrthoBasis B;
    B.v = v;
    B.f1 = {k1.x0, k1.x1, k1.x2};
    B.f2 = {k2.x0, k2.x1, k2.x2};
    if (pair(B.f1, v, s) != 0 || pair(B.f2, v, s) != 0)
        throw InternalError("orth_basis: basis not orthogonal to v");
    B.gram[0][0] = square(B.f1, s);
    B.gram[0][1] = B.gram[1][0] = pair(B.f1, B.f2, s);
    B.gram[1][1] = square(B.f2, s);
    if (B.gram_det() >= 0)
        throw InternalError("orth_basis: restricted form is not hyperbolic");
    return B;
}

// Coordinates of x in the basis (f1, f2), or nullopt when x is not an
// integral combination (in particular when x is outside v^perp).
inline std::optional<std::array<Int, 2>> in_basis(const MukaiVector& x, const OrthoBasis& B,
                                                  const SurfaceParams& s) {
    Int p1 = pair(x, B.f1, s), p2 = pair(x, B.f2, s);
    Int det = B.gram_det();
    Int mNum = p1 * B.gram[1][1] - p2 * B.gram[0][1];
    Int nNum = p2 * B.gram[0][0] - p1 * B.gram[0][1];
    if (mNum % det != 0 || nNum % det != 0) return std::nullopt;
    Int m = mNum / det, n = nNum / det;
    if (B.ambient(m, n) != x) return std::nullopt;
    return std::array<Int, 2>{m, n};
}

// Distinguished ray of v^perp: the primitive part of (0, v.a, h2*v.y),
// oriented so its middle coordinate is positive (falling back to the last
// coordinate when the middle one vanishes).
inline MukaiVector orient_reference(const MukaiVector& v, const SurfaceParams& s) {
    if (v.a == 0 && v.y == 0)
        throw EmptyPullbackLine("no distinguished ray for " + v.str());
    MukaiVector u{0, v.a, s.h2 * v.y};
    u = u.primitive_part();
    if (u.y < 0 || (u.y == 0 && u.b < 0)) u = -u;
    return u;
}

}  // namespace k3cones
