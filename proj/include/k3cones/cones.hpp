#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "diophantine.hpp"
#include "errors.hpp"
#include "mukai.hpp"
#include "numeric.hpp"

namespace k3cones {

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

enum class WallType { Lagrangian, Flop, HC, LGU, BN };

inline const char* wall_type_name(WallType t) {
    switch (t) {
        case WallType::Lagrangian: return "Lagrangian";
        case WallType::Flop: return "Flop";
        case WallType::HC: return "HC";
        case WallType::LGU: return "LGU";
        case WallType::BN: return "BN";
    }
    return "?";
}

inline const char* wall_type_short(WallType t) {
    return t == WallType::Lagrangian ? "Lagr" : wall_type_name(t);
}

// A class a with square(a) >= -2 and 0 <= <a,v> <= pairing bound whose
// orthogonal hyperplane cuts the positive arc of v^perp.
struct Witness {
    MukaiVector cls;
    Int sq;  // square(cls)
    Int pv;  // <cls, v>
};

// Primitive generator of a ray in v^perp, normalized into the positive arc
// that contains the reference class.
struct Ray {
    Int m, n;            // coordinates in the saturated basis (f1, f2)
    MukaiVector ambient; // m*f1 + n*f2
    Int square;          // <ambient, ambient>

    bool same_ray(const Ray& o) const { return m == o.m && n == o.n; }
};

struct Wall {
    Ray ray;
    WallType type = WallType::Flop;
    std::vector<Witness> witnesses;
    std::optional<MukaiVector> contracted;  // divisor class, HC/LGU/BN walls only
};

struct EnumOptions {
    Int bound = 10000;               // half-width of the coordinate scan
    int max_doublings = 8;           // stabilization retries
    bool literal_pairing_bound = false;  // cap <a,v> at 2 instead of floor(v^2/2)
};

struct ConeDescription {
    Ray lo;  // bound away from the ample-chamber side
    Ray hi;  // bound on the ample-chamber side
    std::string lo_origin, hi_origin;
};

struct FlopReport {
    bool has_flop = false;
    std::vector<Wall> flops;
    std::vector<int> b_side;  // sign of <B, ray> per flop, when a B class is supplied
};

// The component of {x in v^perp : x^2 > 0} containing the reference class.
struct PositiveArc {
    OrthoBasis basis;
    Ray reference;
    Int um, un;  // primitive coordinates of the reference ray

    bool contains(const Int& m, const Int& n) const {
        if (basis.form(m, n) <= 0) return false;
        const Int& g00 = basis.gram[0][0];
        const Int& g01 = basis.gram[0][1];
        const Int& g11 = basis.gram[1][1];
        Int p = m * (g00 * um + g01 * un) + n * (g01 * um + g11 * un);
        return p > 0;
    }

    // Coefficients (q20, q11, q02) of the boundary quadratic
    // q20 m^2 + q11 mn + q02 n^2 = 0 cutting out the two isotropic lines.
    std::array<Int, 3> boundary_form() const {
        return {basis.gram[0][0], 2 * basis.gram[0][1], basis.gram[1][1]};
    }
};

struct ConeAnalysis {
    SurfaceParams s;
    MukaiVector v;        // sign-normalized input
    OrthoBasis basis;
    Int v2;               // square(v)
    Ray reference;        // oriented reference ray (pullback polarization)
    Int anchor_m, anchor_n;      // ample-side displacement direction, coords
    MukaiVector anchor_ambient;  // same class in the ambient lattice
    int anchor_side;             // sign of cross(reference, anchor)
    std::vector<Wall> walls;         // every wall found, in sweep order
    std::vector<Wall> walls_in_mov;  // walls meeting the closed movable cone
    std::vector<Wall> flop_walls;    // flopping walls inside the movable cone
    ConeDescription mov, nef, eff;
    std::vector<std::string> warnings;
    Int stabilized_bound;

    const Wall* wall_at(const Ray& r) const {
        for (const auto& w : walls)
            if (w.ray.same_ray(r)) return &w;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// Internals
// ---------------------------------------------------------------------------

namespace detail {

struct Coord {
    Int m, n;
    bool operator==(const Coord& o) const { return m == o.m && n == o.n; }
};

inline Int cross(const Coord& a, const Coord& b) { return a.m * b.n - a.n * b.m; }

inline Coord prim_coord(Coord x) {
    Int g = gcd_int(x.m, x.n);
    if (g == 0) throw InternalError("prim_coord of zero");
    return {x.m / g, x.n / g};
}

inline Int gpair(const OrthoBasis& B, const Coord& a, const Coord& b) {
    const Int& g00 = B.gram[0][0];
    const Int& g01 = B.gram[0][1];
    const Int& g11 = B.gram[1][1];
    return a.m * (g00 * b.m + g01 * b.n) + a.n * (g01 * b.m + g11 * b.n);
}

// Primitive arc representative of the line through x.
inline Ray make_ray(const OrthoBasis& B, const Coord& uc, Coord x, const SurfaceParams& s) {
    x = prim_coord(x);
    Int p = gpair(B, x, uc);
    if (p == 0) throw InternalError("ray is orthogonal to the reference class");
    if (p < 0) { x.m = -x.m; x.n = -x.n; }
    Ray r;
    r.m = x.m; r.n = x.n;
    r.ambient = B.ambient(r.m, r.n);
    r.square = square(r.ambient, s);
    return r;
}

// The ray of the wall cut out by a class projecting to N in v^perp: the
// gram-orthogonal rotation of N (proportional to N itself when N is isotropic).
inline Ray ray_from_N(const OrthoBasis& B, const Coord& uc, const Coord& N, const SurfaceParams& s) {
    const Int& g00 = B.gram[0][0];
    const Int& g01 = B.gram[0][1];
    const Int& g11 = B.gram[1][1];
    Coord r{-(g01 * N.m + g11 * N.n), g00 * N.m + g01 * N.n};
    return make_ray(B, uc, r, s);
}

inline Int abs_sum(const MukaiVector& x) { return abs_int(x.a) + abs_int(x.y) + abs_int(x.b); }

inline bool vec_less(const MukaiVector& a, const MukaiVector& b) {
    return std::tie(a.a, a.y, a.b) < std::tie(b.a, b.y, b.b);
}

inline bool witness_order(const Witness& a, const Witness& b) {
    Int sa = abs_sum(a.cls), sb = abs_sum(b.cls);
    if (sa != sb) return sa < sb;
    return vec_less(a.cls, b.cls);
}

// Flop display order: prefer small square, then small pairing, then size.
inline bool flop_witness_order(const Witness& a, const Witness& b) {
    if (a.sq != b.sq) return a.sq < b.sq;
    if (a.pv != b.pv) return a.pv < b.pv;
    return witness_order(a, b);
}

inline void sign_fix_effective(MukaiVector& C, const MukaiVector& U, const MukaiVector& anchor_amb,
                               const SurfaceParams& s) {
    Int p = pair(C, U, s);
    if (p < 0) { C = -C; return; }
    if (p > 0) return;
    Int q = pair(C, anchor_amb, s);
    if (q < 0) { C = -C; return; }
    if (q == 0) throw InternalError("cannot orient contracted class " + C.str());
}

// Assign type and contracted class from the collected witnesses.
inline void classify_record(Wall& w, const MukaiVector& v, const Int& v2, const SurfaceParams& s,
                            const MukaiVector& U, const MukaiVector& anchor_amb) {
    w.contracted.reset();
    if (w.square == 0 ? false : false) {}  // (placeholder removed below)
    if (w.ray.square == 0) {
        w.type = WallType::Lagrangian;
        return;
    }
    const Witness* best = nullptr;
    auto pick = [&](const Int& sq, const Int& pv) -> const Witness* {
        const Witness* r = nullptr;
        for (const auto& wit : w.witnesses)
            if (wit.sq == sq && wit.pv == pv && (!r || witness_order(wit, *r))) r = &wit;
        return r;
    };
    if ((best = pick(0, 1))) {
        w.type = WallType::HC;
    } else if ((best = pick(0, 2))) {
        w.type = WallType::LGU;
    } else if ((best = pick(-2, 0))) {
        w.type = WallType::BN;
    } else {
        w.type = WallType::Flop;
        return;
    }
    MukaiVector C;
    if (w.type == WallType::BN) {
        C = best->cls;
    } else {
        C = (best->cls * v2 - v * best->pv).primitive_part();
    }
    sign_fix_effective(C, U, anchor_amb, s);
    w.contracted = C;
}

// Witness shown in tables: the one that determined the classification.
inline const Witness* display_witness(const Wall& w) {
    if (w.witnesses.empty()) return nullptr;
    const Witness* best = nullptr;
    auto scan = [&](auto&& keep, auto&& order) {
        for (const auto& wit : w.witnesses)
            if (keep(wit) && (!best || order(wit, *best))) best = &wit;
    };
    switch (w.type) {
        case WallType::Lagrangian:
            scan([](const Witness& x) { return x.sq == 0 && x.pv == 0; }, witness_order);
            break;
        case WallType::HC:
            scan([](const Witness& x) { return x.sq == 0 && x.pv == 1; }, witness_order);
            break;
        case WallType::LGU:
            scan([](const Witness& x) { return x.sq == 0 && x.pv == 2; }, witness_order);
            break;
        case WallType::BN:
            scan([](const Witness& x) { return x.sq == -2 && x.pv == 0; }, witness_order);
            break;
        case WallType::Flop:
            scan([](const Witness&) { return true; }, flop_witness_order);
            break;
    }
    if (!best) best = &w.witnesses.front();
    return best;
}

class ConeEngine {
public:
    SurfaceParams s;
    MukaiVector v;
    EnumOptions opts;
    OrthoBasis basis;
    Int v2;
    Int g00, g01, g11, negdet;
    MukaiVector U;
    Coord uc{};
    Coord anchor{};
    MukaiVector anchor_amb;
    int side_anchor = 0;
    bool iso_rational = false;
    Coord iso1{}, iso2{};  // arc-normalized primitive isotropic directions
    bool has_aut = false;
    std::array<std::array<Int, 2>, 2> Maut{}, Maut_inv{};

    static MukaiVector normalize_sign(MukaiVector x) {
        if (x.a < 0 || (x.a == 0 && (x.y < 0 || (x.y == 0 && x.b < 0)))) return -x;
        return x;
    }

    ConeEngine(const MukaiVector& v_in, const SurfaceParams& s_in, EnumOptions o)
        : s(s_in), v(normalize_sign(v_in)), opts(std::move(o)), basis(orth_basis(v, s)) {
        v2 = square(v, s);
        g00 = basis.gram[0][0];
        g01 = basis.gram[0][1];
        g11 = basis.gram[1][1];
        negdet = -basis.gram_det();
        U = orient_reference(v, s);
        if (square(U, s) <= 0)
            throw EmptyPullbackLine("reference class " + U.str() +
                                    " is not positive; rank-zero inputs are unsupported");
        auto ucoords = in_basis(U, basis, s);
        if (!ucoords) throw InternalError("reference class escaped the orthogonal sublattice");
        uc = prim_coord({(*ucoords)[0], (*ucoords)[1]});
        if (g11 <= 0) throw InternalError("basis is not aligned with the reference ray");
        pick_anchor();
        Int root;
        if (is_perfect_square(negdet, &root)) {
            iso_rational = true;
            iso1 = arc_coord(prim_coord({g11, -g01 + root}));
            iso2 = arc_coord(prim_coord({g11, -g01 - root}));
        } else {
            PellSolution p = pell_fundamental(negdet);
            Maut = {{{p.x - g01 * p.y, -g11 * p.y}, {g00 * p.y, p.x + g01 * p.y}}};
            Maut_inv = {{{p.x + g01 * p.y, g11 * p.y}, {-g00 * p.y, p.x - g01 * p.y}}};
            has_aut = true;
        }
    }

    Coord arc_coord(Coord x) const {
        Int p = gpair(basis, x, uc);
        if (p == 0) throw InternalError("cannot normalize a ray orthogonal to the reference");
        if (p < 0) { x.m = -x.m; x.n = -x.n; }
        return x;
    }

    void pick_anchor() {
        const Int r = v.a, c = v.y, b = v.b, h2 = s.h2;
        const std::array<std::pair<Int, Int>, 4> betas = {{
            {c - r, r}, {2 * c - r, 2 * r}, {4 * c - r, 4 * r}, {8 * c - r, 8 * r}}};
        for (const auto& [p, q] : betas) {
            // Subleading term of the large-volume central-charge functional at
            // slope parameter p/q; always lands in v^perp.
            MukaiVector W{2 * h2 * q * (r * p - c * q),
                          h2 * r * p * p - 2 * b * q * q,
                          h2 * h2 * c * p * p - 2 * h2 * p * q * b};
            if (W.is_zero()) continue;
            auto co = in_basis(W, basis, s);
            if (!co) throw InternalError("ample-side probe escaped the orthogonal sublattice");
            Coord a{(*co)[0], (*co)[1]};
            if (a.m == 0 && a.n == 0) continue;
            a = prim_coord(a);
            Int cr = cross(uc, a);
            if (cr != 0) {
                anchor = a;
                anchor_amb = basis.ambient(a.m, a.n);
                side_anchor = sgn(cr);
                return;
            }
        }
        throw InternalError("could not separate the ample chamber from the reference ray");
    }

    // Sweep order: ample-side bound first, reference in the middle, far side last.
    bool before(const Coord& a, const Coord& b) const {
        return sgn(cross(a, b)) == -side_anchor;
    }

    int side_of(const Coord& x) const { return sgn(cross(uc, x)); }

    // a strictly nearer to the reference ray than b, both on side `sd`.
    bool nearer(const Coord& a, const Coord& b, int sd) const {
        Int c = cross(a, b);
        return sd > 0 ? c > 0 : c < 0;
    }

    struct Built {
        bool complete = false;
        std::string reason;
        std::vector<Wall> walls;
        std::vector<Wall> walls_in_mov;
        std::vector<Wall> flops;
        ConeDescription mov, nef, eff;
        std::string key;
    };

    // ---- quadratic-form solution scan -------------------------------------

    // All (m, n) with Q(m, n) = target < 0 and |m| <= bound or |n| <= bound.
    std::vector<Coord> solve_form(const Int& target, const Int& bound) const {
        std::set<std::pair<Int, Int>> sols;
        scan_m(target, bound, sols);
        if (g00 != 0) {
            scan_n(target, bound, sols);
        } else {
            // n * (2 g01 m + g11 n) = target: n runs over divisors of target.
            Int at = abs_int(target);
            for (Int i = 1; i * i <= at; ++i) {
                if (at % i != 0) continue;
                for (const Int& dv : {i, at / i})
                    for (int sn : {+1, -1}) {
                        Int n = dv * sn;
                        Int rem = target / n - g11 * n;
                        if (rem % (2 * g01) == 0) sols.emplace(rem / (2 * g01), n);
                    }
            }
        }
        std::vector<Coord> out;
        out.reserve(sols.size());
        for (const auto& [m, n] : sols) out.push_back({m, n});
        return out;
    }

    void scan_m(const Int& target, const Int& bound, std::set<std::pair<Int, Int>>& sols) const {
        // discriminant/4 of the quadratic in n: negdet*m^2 + g11*target
#if defined(__SIZEOF_INT128__)
        if (fits_small(bound) && fits_small(negdet) && fits_small(g01) && fits_small(g11) &&
            fits_small(target)) {
            i128 nd = to_i128(negdet), gg11 = to_i128(g11), tg = to_i128(target), gg01 = to_i128(g01);
            long long B = static_cast<long long>(to_i128(bound));
            for (long long m = -B; m <= B; ++m) {
                i128 D = nd * m * m + gg11 * tg;
                if (D < 0) continue;
                i128 r = static_cast<i128>(isqrt_u128(static_cast<u128>(D)));
                if (r * r != D) continue;
                for (int sg : {+1, -1}) {
                    i128 num = -gg01 * m + sg * r;
                    if (num % gg11 == 0) sols.emplace(Int(static_cast<long long>(m)),
                                                      from_i128(num / gg11));
                    if (r == 0) break;
                }
            }
            return;
        }
#endif
        for (Int m = -bound; m <= bound; ++m) {
            Int D = negdet * m * m + g11 * target;
            if (D < 0) continue;
            Int r;
            if (!is_perfect_square(D, &r)) continue;
            for (int sg : {+1, -1}) {
                Int num = -g01 * m + r * sg;
                if (num % g11 == 0) sols.emplace(m, num / g11);
                if (r == 0) break;
            }
        }
    }

    void scan_n(const Int& target, const Int& bound, std::set<std::pair<Int, Int>>& sols) const {
#if defined(__SIZEOF_INT128__)
        if (fits_small(bound) && fits_small(negdet) && fits_small(g00) && fits_small(g01) &&
            fits_small(target)) {
            i128 nd = to_i128(negdet), gg00 = to_i128(g00), tg = to_i128(target), gg01 = to_i128(g01);
            long long B = static_cast<long long>(to_i128(bound));
            for (long long n = -B; n <= B; ++n) {
                i128 D = nd * n * n + gg00 * tg;
                if (D < 0) continue;
                i128 r = static_cast<i128>(isqrt_u128(static_cast<u128>(D)));
                if (r * r != D) continue;
                for (int sg : {+1, -1}) {
                    i128 num = -gg01 * n + sg * r;
                    if (num % gg00 == 0) sols.emplace(from_i128(num / gg00),
                                                      Int(static_cast<long long>(n)));
                    if (r == 0) break;
                }
            }
            return;
        }
#endif
        for (Int n = -bound; n <= bound; ++n) {
            Int D = negdet * n * n + g00 * target;
            if (D < 0) continue;
            Int r;
            if (!is_perfect_square(D, &r)) continue;
            for (int sg : {+1, -1}) {
                Int num = -g01 * n + r * sg;
                if (num % g00 == 0) sols.emplace(num / g00, n);
                if (r == 0) break;
            }
        }
    }

#if defined(__SIZEOF_INT128__)
    static bool fits_small(const Int& x) {
        // conservative: products of five such factors stay inside __int128
        return abs_int(x) < (Int(1) << 40);
    }
    static Int from_i128(i128 x) {
        bool neg = x < 0;
        u128 ux = neg ? static_cast<u128>(-x) : static_cast<u128>(x);
        Int hi = Int(static_cast<unsigned long long>(ux >> 64));
        Int lo = Int(static_cast<unsigned long long>(ux));
        Int r = (hi << 64) + lo;
        return neg ? -r : r;
    }
#endif

    // ---- wall accumulation --------------------------------------------------

    using WallMap = std::map<std::pair<Int, Int>, Wall>;

    void add_witness(WallMap& walls, const Coord& N, const Int& sq, const Int& pv,
                     const MukaiVector& cls) const {
        Ray r = ray_from_N(basis, uc, N, s);
        Wall& w = walls[{r.m, r.n}];
        if (w.witnesses.empty()) w.ray = r;
        if (w.witnesses.size() >= 64) return;
        for (const auto& wit : w.witnesses)
            if (wit.cls == cls) return;
        w.witnesses.push_back({cls, sq, pv});
    }

    // Returns true when N carries an integral witness for the cell (t, sigma).
    bool process(WallMap& walls, const Coord& N, const Int& t, const Int& sigma) const {
        if (t == 0) {
            add_witness(walls, N, sigma, t, basis.ambient(N.m, N.n));
            return true;
        }
        MukaiVector cand = basis.ambient(N.m, N.n) + v * t;
        if (cand.a % v2 != 0 || cand.y % v2 != 0 || cand.b % v2 != 0) return false;
        add_witness(walls, N, sigma, t, {cand.a / v2, cand.y / v2, cand.b / v2});
        return true;
    }

    void orbit_extend(WallMap& walls, const std::vector<Coord>& seeds, const Int& t,
                      const Int& sigma) const {
        static const Int CAP = Int(1) << 340;
        constexpr int KLIM = 96;
        std::set<std::pair<Int, Int>> visited;
        auto apply = [](const std::array<std::array<Int, 2>, 2>& M, const Coord& x) -> Coord {
            return {M[0][0] * x.m + M[0][1] * x.n, M[1][0] * x.m + M[1][1] * x.n};
        };
        for (const Coord& seed : seeds) {
            for (int dir = 0; dir < 2; ++dir) {
                Coord cur = seed;
                for (int k = 0; k < KLIM; ++k) {
                    if (dir == 1 && k == 0) {  // seed handled by the forward pass
                        cur = apply(Maut_inv, cur);
                        continue;
                    }
                    if (abs_int(cur.m) > CAP || abs_int(cur.n) > CAP) break;
                    auto ins = visited.emplace(cur.m, cur.n);
                    if (!ins.second) break;
                    process(walls, cur, t, sigma);
                    cur = apply(dir == 0 ? Maut : Maut_inv, cur);
                }
            }
        }
    }

    // ---- one full enumeration at a given bound ------------------------------

    Built build(const Int& bound) const {
        WallMap wallmap;

        Int tmax = v2 / 2;
        if (opts.literal_pairing_bound && tmax > 2) tmax = 2;

        for (Int t = 0; t <= tmax; ++t) {
            Int sig_hi = (t * t) / v2;
            for (Int sigma = -2; sigma <= sig_hi; sigma += 2) {
                if (t == 0 && sigma == 0) {
                    // isotropic rays: boundary (Lagrangian) walls
                    if (iso_rational) {
                        for (const Coord& d : {iso1, iso2})
                            add_witness(wallmap, d, 0, 0, basis.ambient(d.m, d.n));
                    }
                    continue;
                }
                Int target = (t == 0) ? sigma : v2 * (v2 * sigma - t * t);
                if (t > 0 && target == 0) {
                    // witnesses projecting onto an isotropic ray
                    if (iso_rational) {
                        for (const Coord& d : {iso1, iso2})
                            for (int sg : {+1, -1})
                                for (Int k = 1; k <= v2; ++k)
                                    process(wallmap, {d.m * k * sg, d.n * k * sg}, t, sigma);
                    }
                    continue;
                }
                std::vector<Coord> seeds = solve_form(target, bound);
                if (has_aut) {
                    orbit_extend(wallmap, seeds, t, sigma);
                } else {
                    for (const Coord& N : seeds) process(wallmap, N, t, sigma);
                }
            }
        }

        Built out;
        for (auto& [key, w] : wallmap) {
            classify_record(w, v, v2, s, U, anchor_amb);
            out.walls.push_back(w);
        }
        std::sort(out.walls.begin(), out.walls.end(), [&](const Wall& a, const Wall& b) {
            return before({a.ray.m, a.ray.n}, {b.ray.m, b.ray.n});
        });

        // --- movable cone ----------------------------------------------------
        auto is_div = [](const Wall& w) {
            return w.type == WallType::HC || w.type == WallType::LGU || w.type == WallType::BN;
        };
        const Wall* uwall = nullptr;
        for (const auto& w : out.walls)
            if (Coord{w.ray.m, w.ray.n} == uc) { uwall = &w; break; }

        auto nearest = [&](int sd, auto&& keep) -> const Wall* {
            const Wall* best = nullptr;
            for (const auto& w : out.walls) {
                Coord c{w.ray.m, w.ray.n};
                if (side_of(c) != sd || !keep(w)) continue;
                if (!best || nearer(c, {best->ray.m, best->ray.n}, sd)) best = &w;
            }
            return best;
        };
        auto bound_on = [&](int sd) -> std::pair<const Wall*, std::string> {
            if (const Wall* w = nearest(sd, is_div)) return {w, "divisorial wall"};
            if (const Wall* w = nearest(sd, [](const Wall& x) {
                    return x.type == WallType::Lagrangian; }))
                return {w, "isotropic boundary"};
            return {nullptr, {}};
        };

        Ray uray = make_ray(basis, uc, uc, s);
        if (uwall && is_div(*uwall)) {
            auto [hi, hi_org] = bound_on(side_anchor);
            if (!hi) {
                out.reason = "no bound for the movable cone on the ample side";
                return out;
            }
            out.mov.lo = uray;
            out.mov.lo_origin = "reference divisorial wall";
            out.mov.hi = hi->ray;
            out.mov.hi_origin = hi_org;
        } else {
            auto [hi, hi_org] = bound_on(side_anchor);
            auto [lo, lo_org] = bound_on(-side_anchor);
            if (!hi || !lo) {
                out.reason = "no bound for the movable cone on one side";
                return out;
            }
            out.mov.lo = lo->ray;
            out.mov.lo_origin = lo_org;
            out.mov.hi = hi->ray;
            out.mov.hi_origin = hi_org;
        }

        // --- nef cone ---------------------------------------------------------
        const Wall* nef_far = nearest(side_anchor, [](const Wall&) { return true; });
        if (!nef_far) {
            out.reason = "no wall on the ample side";
            return out;
        }
        out.nef.lo = uray;
        out.nef.lo_origin = "reference ray";
        out.nef.hi = nef_far->ray;
        out.nef.hi_origin = std::string("first wall (") + wall_type_name(nef_far->type) + ")";

        // --- effective cone (dual route + generator route) --------------------
        auto dual_of = [&](const Ray& bnd, const Ray& other) -> Ray {
            Coord r{-(g01 * bnd.m + g11 * bnd.n), g00 * bnd.m + g01 * bnd.n};
            r = prim_coord(r);
            Int p = gpair(basis, r, {other.m, other.n});
            if (p == 0) throw InternalError("degenerate dual ray");
            if (p < 0) { r.m = -r.m; r.n = -r.n; }
            Ray out_ray;
            out_ray.m = r.m; out_ray.n = r.n;
            out_ray.ambient = basis.ambient(r.m, r.n);
            out_ray.square = square(out_ray.ambient, s);
            return out_ray;
        };
        auto generator_of = [&](const Ray& bnd, const std::string& origin) -> MukaiVector {
            if (origin == "isotropic boundary") return bnd.ambient;
            for (const auto& w : out.walls)
                if (w.ray.same_ray(bnd)) {
                    if (!w.contracted)
                        throw InternalError("boundary wall without a contracted class");
                    return *w.contracted;
                }
            throw InternalError("boundary ray not among the walls");
        };

        auto eff_side = [&](const Ray& bnd, const std::string& origin, const Ray& other) -> Ray {
            Ray dual = dual_of(bnd, other);
            MukaiVector gen = generator_of(bnd, origin);
            auto gco = in_basis(gen, basis, s);
            if (!gco) throw InternalError("generator escaped the orthogonal sublattice");
            Coord gc = prim_coord({(*gco)[0], (*gco)[1]});
            if (gc.m != dual.m || gc.n != dual.n)
                throw DualityMismatch("extremal ray mismatch: contracted/boundary class " +
                                      gen.str() + " vs dual ray " + dual.ambient.str() +
                                      " for v = " + v.str());
            return dual;
        };
        out.eff.lo = eff_side(out.mov.lo, out.mov.lo_origin, out.mov.hi);
        out.eff.lo_origin = out.mov.lo_origin == "isotropic boundary"
                                ? "isotropic boundary ray"
                                : "contracted divisor class";
        out.eff.hi = eff_side(out.mov.hi, out.mov.hi_origin, out.mov.lo);
        out.eff.hi_origin = out.mov.hi_origin == "isotropic boundary"
                                ? "isotropic boundary ray"
                                : "contracted divisor class";

        // --- walls inside the closed movable cone -----------------------------
        Coord hi_c{out.mov.hi.m, out.mov.hi.n}, lo_c{out.mov.lo.m, out.mov.lo.n};
        for (const auto& w : out.walls) {
            Coord c{w.ray.m, w.ray.n};
            if (before(c, hi_c) || before(lo_c, c)) continue;
            out.walls_in_mov.push_back(w);
            if (w.type == WallType::Flop) out.flops.push_back(w);
        }

        // --- stability fingerprint --------------------------------------------
        auto ray_key = [](const Ray& r) { return r.m.str() + "," + r.n.str() + ";"; };
        out.key = ray_key(out.mov.lo) + ray_key(out.mov.hi) + "|" + ray_key(out.nef.lo) +
                  ray_key(out.nef.hi) + "|" + ray_key(out.eff.lo) + ray_key(out.eff.hi) + "|";
        for (const auto& w : out.walls_in_mov) {
            out.key += ray_key(w.ray);
            out.key += wall_type_name(w.type);
            if (w.contracted) out.key += w.contracted->str();
            out.key += "#";
        }
        out.complete = true;
        return out;
    }

    ConeAnalysis run() const {
        Int bnd = opts.bound;
        if (bnd < 16) bnd = 16;
        Built prev = build(bnd);
        for (int k = 0; k < std::max(1, opts.max_doublings); ++k) {
            Int bnd2 = bnd * 2;
            Built next = build(bnd2);
            if (prev.complete && next.complete && prev.key == next.key)
                return assemble(std::move(next), bnd, k);
            prev = std::move(next);
            bnd = bnd2;
        }
        throw UnstableEnumeration(
            prev.complete
                ? "cone data did not stabilize up to search bound " + bnd.str() +
                      "; raise the bound or the doubling limit"
                : prev.reason + " up to search bound " + bnd.str() +
                      "; raise the bound or the doubling limit");
    }

    ConeAnalysis assemble(Built b, const Int& stabilized, int doublings) const {
        ConeAnalysis a{s, v, basis, v2, make_ray(basis, uc, uc, s),
                       anchor.m, anchor.n, anchor_amb, side_anchor,
                       std::move(b.walls), std::move(b.walls_in_mov), std::move(b.flops),
                       b.mov, b.nef, b.eff, {}, stabilized};
        if (doublings > 0)
            a.warnings.push_back("wall search widened to bound " + stabilized.str() +
                                 " before the cone data stabilized");
        return a;
    }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Public interface
// ---------------------------------------------------------------------------

inline ConeAnalysis analyze_cones(const MukaiVector& v, const SurfaceParams& s,
                                  const EnumOptions& opts = {}) {
    return detail::ConeEngine(v, s, opts).run();
}

inline std::vector<Wall> enumerate_walls(const MukaiVector& v, const SurfaceParams& s,
                                         const EnumOptions& opts = {}) {
    return analyze_cones(v, s, opts).walls;
}

inline ConeDescription movable_cone(const MukaiVector& v, const SurfaceParams& s,
                                    const EnumOptions& opts = {}) {
    return analyze_cones(v, s, opts).mov;
}

inline ConeDescription nef_cone(const MukaiVector& v, const SurfaceParams& s,
                                const EnumOptions& opts = {}) {
    return analyze_cones(v, s, opts).nef;
}

inline ConeDescription effective_cone(const MukaiVector& v, const SurfaceParams& s,
                                      const EnumOptions& opts = {}) {
    return analyze_cones(v, s, opts).eff;
}

inline FlopReport flop_report(const MukaiVector& v, const SurfaceParams& s,
                              const EnumOptions& opts = {},
                              const MukaiVector* b_class = nullptr) {
    ConeAnalysis a = analyze_cones(v, s, opts);
    FlopReport r;
    r.flops = a.flop_walls;
    r.has_flop = !r.flops.empty();
    if (b_class)
        for (const auto& w : r.flops) r.b_side.push_back(sgn(pair(*b_class, w.ray.ambient, s)));
    return r;
}

inline PositiveArc positive_arc(const MukaiVector& v, const SurfaceParams& s) {
    OrthoBasis B = orth_basis(detail::ConeEngine::normalize_sign(v), s);
    MukaiVector U = orient_reference(B.v, s);
    if (square(U, s) <= 0)
        throw EmptyPullbackLine("reference class " + U.str() +
                                " is not positive; rank-zero inputs are unsupported");
    auto co = in_basis(U, B, s);
    if (!co) throw InternalError("reference class escaped the orthogonal sublattice");
    detail::Coord uc = detail::prim_coord({(*co)[0], (*co)[1]});
    PositiveArc arc{B, detail::make_ray(B, uc, uc, s), uc.m, uc.n};
    return arc;
}

// Wall determined by a single witness class; the witness is normalized to
// pair non-negatively with v.
inline Wall classify_wall(const MukaiVector& v, const SurfaceParams& s,
                          const MukaiVector& witness, const EnumOptions& opts = {}) {
    ConeAnalysis a = analyze_cones(v, s, opts);
    MukaiVector w = witness;
    Int pv = pair(w, a.v, s);
    if (pv < 0) { w = -w; pv = -pv; }
    Int sq = square(w, s);
    if (sq < -2) throw NoWitness("class " + witness.str() + " has square below -2");
    Int tmax = a.v2 / 2;
    if (opts.literal_pairing_bound && tmax > 2) tmax = 2;
    if (pv > tmax)
        throw NoWitness("class " + witness.str() + " pairs too large with v: " + pv.str());
    if (a.v2 * sq > pv * pv)
        throw NoWitness("class " + witness.str() + " cuts no wall through the positive arc");
    MukaiVector N_amb = w * a.v2 - a.v * pv;
    auto nc = in_basis(N_amb, a.basis, s);
    if (!nc) throw InternalError("projection escaped the orthogonal sublattice");
    detail::Coord uc{0, 0};
    {
        auto uco = in_basis(a.reference.ambient, a.basis, s);
        uc = detail::prim_coord({(*uco)[0], (*uco)[1]});
    }
    Ray r = detail::ray_from_N(a.basis, uc, {(*nc)[0], (*nc)[1]}, s);
    for (const auto& known : a.walls)
        if (known.ray.same_ray(r)) {
            Wall out = known;
            bool have = false;
            for (const auto& wit : out.witnesses)
                if (wit.cls == w) { have = true; break; }
            if (!have) out.witnesses.push_back({w, sq, pv});
            return out;
        }
    Wall fresh;
    fresh.ray = r;
    fresh.witnesses.push_back({w, sq, pv});
    detail::classify_record(fresh, a.v, a.v2, s, a.reference.ambient, a.anchor_ambient);
    return fresh;
}

}  // namespace k3cones
