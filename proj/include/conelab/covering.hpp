#pragma once

// Inductive good/bad-ball coverings of pinched sets, the refined covering with
// its order-drop alternative, the Minkowski tube-volume estimator, and packing
// measures. Covered sets are point sets (stratum representatives); the
// containment scales of the construction are finer than the lattice, so
// grid-thickened inputs trip the containment diagnostic by design. The
// existential constants of the source results are parameters; the conclusions
// the proofs invoke are runtime-checked and violations abort with a
// diagnostic.

#include <algorithm>
#include <deque>
#include <sstream>

#include "flatness.hpp"
#include "strata.hpp"

namespace conelab {

struct AffineSubspace {
    Vec origin{};
    std::vector<Vec> basis;  // orthonormal

    int dim() const { return static_cast<int>(basis.size()); }

    Vec project(const Vec& p) const {
        Vec out = origin;
        const Vec d = vsub(p, origin);
        for (const Vec& b : basis) out = vadd(out, vscale(b, vdot(d, b)));
        return out;
    }

    double dist(const Vec& p) const { return vnorm(vsub(p, project(p))); }
};

inline AffineSubspace affine_from_tuple(const std::vector<Vec>& pts,
                                        const std::vector<int>& tuple) {
    AffineSubspace A;
    A.origin = pts[static_cast<std::size_t>(tuple[0])];
    for (std::size_t i = 1; i < tuple.size(); ++i) {
        Vec d = vsub(pts[static_cast<std::size_t>(tuple[i])], A.origin);
        for (const Vec& b : A.basis) d = vsub(d, vscale(b, vdot(d, b)));
        const double nd = vnorm(d);
        if (nd > 1e-14) A.basis.push_back(vscale(d, 1.0 / nd));
    }
    return A;
}

// Least-squares affine j-plane through points (uniform weights).
inline AffineSubspace affine_fit(const std::vector<Vec>& pts, int j) {
    AffineSubspace A;
    if (pts.empty()) return A;
    Vec mean{0, 0, 0};
    for (const Vec& p : pts) mean = vadd(mean, p);
    A.origin = vscale(mean, 1.0 / static_cast<double>(pts.size()));
    if (j <= 0) return A;
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const Vec& p : pts) {
        const Vec d = vsub(p, A.origin);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                cov(a, b) += d[static_cast<std::size_t>(a)] * d[static_cast<std::size_t>(b)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    for (int c = 0; c < j; ++c) {
        Eigen::Vector3d v = es.eigenvectors().col(2 - c);
        int lead = 0;
        for (int d = 1; d < 3; ++d)
            if (std::abs(v[d]) > std::abs(v[lead])) lead = d;
        if (v[lead] < 0) v = -v;
        A.basis.push_back({v[0], v[1], v[2]});
    }
    return A;
}

enum class BallLabel { good, bad, terminal };

struct CoverBall {
    Vec center{};
    double radius = 0.0;
    BallLabel label = BallLabel::terminal;
    int generation = 0;
    std::vector<int> pinched;  // F for this ball: indices into the covered set D
    AffineSubspace plane;      // V (good, k-dim) or L (bad, (k-1)-dim)
    bool has_plane = false;
};

struct CoverParams {
    double rho = 1.0 / 256;
    double delta = 0.05;
    double sigma = 1.0 / 64;
    double tau = 1.0 / 8;
    int k = 0;
    double M = 0.0;
};

struct BallCover {
    std::vector<CoverBall> balls;  // final cover = bad + terminal; good = refined intermediates
    CoverParams params;
    int generations = 0;
    double packing_sum = 0.0;    // sum r_i^k over the final cover
    double packing_ratio = 0.0;  // packing_sum / tau^k

    std::vector<const CoverBall*> final_balls() const {
        std::vector<const CoverBall*> out;
        for (const auto& b : balls)
            if (b.label != BallLabel::good) out.push_back(&b);
        return out;
    }
};

class CoveringError : public std::runtime_error {
  public:
    CoveringError(const std::string& msg, const Vec& c, double r)
        : std::runtime_error(format(msg, c, r)), center(c), radius(r) {}
    Vec center;
    double radius;

  private:
    static std::string format(const std::string& msg, const Vec& c, double r) {
        std::ostringstream os;
        os << msg << " [ball center=(" << c[0] << "," << c[1] << "," << c[2] << ") radius=" << r
           << "]";
        return os.str();
    }
};

// F(B_r(c)) = {i : D[i] in B_r(c), Ord_phi(D[i], rho r) > M - delta}; radii
// below the grid floor are evaluated at the clamped radius.
inline std::vector<int> pinched_subset(const FieldQuadrature& q, const std::vector<Vec>& D,
                                       const Vec& center, double r, double rho, double delta,
                                       double M) {
    std::vector<int> out;
    for (std::size_t i = 0; i < D.size(); ++i) {
        if (vnorm(vsub(D[i], center)) > r) continue;
        if (q.smoothed_ord_clamped(D[i], rho * r) > M - delta) out.push_back(static_cast<int>(i));
    }
    return out;
}

inline double sup_order(const FieldQuadrature& q, const std::vector<Vec>& D, double radius) {
    double M = 0.0;
    for (const Vec& y : D) M = std::max(M, q.smoothed_ord_clamped(y, radius));
    return M;
}

// The inductive covering: good balls (pinched set rho r-spans a k-plane) are
// refined along their plane with the exact radius schedule tau (10 rho)^m;
// bad balls (pinched set fits a (k-1)-plane tube) are retained. Fifth-ball
// disjointness is maintained throughout.
inline BallCover initial_cover(const FieldQuadrature& q, const std::vector<Vec>& D, const Vec& x,
                               double tau, double sigma, double rho, double delta, int k,
                               double M = -1.0) {
    if (!(rho > 0 && rho <= 1.0 / 256)) throw std::invalid_argument("initial_cover: need 0 < rho <= 1/256");
    if (!(sigma > 0 && sigma < tau && tau <= 1.0 / 8))
        throw std::invalid_argument("initial_cover: need 0 < sigma < tau <= 1/8");
    if (k < 0 || k > q.field().grid.n) throw std::invalid_argument("initial_cover: k out of range");

    BallCover cover;
    cover.params = {rho, delta, sigma, tau, k, M};
    if (M < 0) {
        M = sup_order(q, D, 8.0 * tau);
        cover.params.M = M;
    }

    if (D.empty()) {
        CoverBall b;
        b.center = x;
        b.radius = tau;
        b.label = BallLabel::terminal;
        cover.balls.push_back(b);
        cover.packing_sum = std::pow(tau, k);
        cover.packing_ratio = 1.0;
        return cover;
    }

    struct Pending {
        Vec c;
        double r;
        int gen;
    };
    std::vector<Pending> pending{{x, tau, 0}};
    std::vector<CoverBall> retained_bad;

    int gen = 0;
    for (;; ++gen) {
        const double r_gen = tau * std::pow(10.0 * rho, gen);
        if (r_gen <= sigma) {
            for (const auto& p : pending) {
                CoverBall b;
                b.center = p.c;
                b.radius = p.r;
                b.label = BallLabel::terminal;
                b.generation = p.gen;
                cover.balls.push_back(b);
            }
            break;
        }

        std::vector<std::pair<CoverBall, std::vector<int>>> goods;  // ball + D-cap (indices)
        for (const auto& p : pending) {
            std::vector<int> Dcap;
            for (std::size_t i = 0; i < D.size(); ++i)
                if (vnorm(vsub(D[i], p.c)) <= p.r) Dcap.push_back(static_cast<int>(i));
            std::vector<int> F;
            for (int i : Dcap)
                if (q.smoothed_ord_clamped(D[static_cast<std::size_t>(i)], rho * p.r) > M - delta)
                    F.push_back(i);
            std::vector<Vec> Fpts;
            Fpts.reserve(F.size());
            for (int i : F) Fpts.push_back(D[static_cast<std::size_t>(i)]);

            CoverBall b;
            b.center = p.c;
            b.radius = p.r;
            b.generation = p.gen;
            b.pinched = F;

            auto span = effective_span(Fpts, rho * p.r, k);
            if (!span && Fpts.size() <= 24 && effective_span_exhaustive(Fpts, rho * p.r, k)) {
                // greedy is sound but not complete; small sets get the
                // exhaustive fallback before the ball is declared bad
                span = effective_span(Fpts, rho * p.r, k);
            }

            if (span) {
                b.label = BallLabel::good;
                b.plane = affine_from_tuple(Fpts, *span);
                b.has_plane = true;
                for (int i : Dcap)
                    if (b.plane.dist(D[static_cast<std::size_t>(i)]) > 2.0 * rho * p.r + 1e-12)
                        throw CoveringError(
                            "initial_cover: containment D cap B_r(x) in B_{2 rho r}(V) failed", p.c,
                            p.r);
                goods.emplace_back(b, Dcap);
                cover.balls.push_back(b);
            } else {
                if (k == 0) {
                    if (!F.empty())
                        throw CoveringError(
                            "initial_cover: k=0 ball with a nonempty pinched set failed to span",
                            p.c, p.r);
                    b.has_plane = false;
                } else {
                    b.plane = affine_fit(Fpts, k - 1);
                    b.has_plane = true;
                    for (const Vec& fp : Fpts)
                        if (b.plane.dist(fp) > rho * p.r + 1e-12)
                            throw CoveringError(
                                "initial_cover: bad-ball pinched set exceeds the (k-1)-plane tube",
                                p.c, p.r);
                }
                b.label = BallLabel::bad;
                retained_bad.push_back(b);
                cover.balls.push_back(b);
            }
        }

        // refine the good balls: cover their D-caps with balls of radius
        // 10 rho r centered on the spanning planes, 2 rho r fifth-balls disjoint
        const double r_next = r_gen * 10.0 * rho;
        std::vector<Vec> accepted;
        std::vector<Pending> next;
        for (const auto& [ball, Dcap] : goods) {
            for (int i : Dcap) {
                const Vec p = D[static_cast<std::size_t>(i)];
                const Vec c = ball.plane.project(p);
                bool keep = true;
                for (const Vec& a : accepted)
                    if (vnorm(vsub(c, a)) <= 4.0 * rho * r_gen) {
                        keep = false;  // the point is already covered by the earlier ball
                        break;
                    }
                if (keep)
                    for (const auto& bb : retained_bad)
                        if (vnorm(vsub(c, bb.center)) < bb.radius / 5.0 + r_next) {
                            keep = false;  // inside a retained bad ball's protected zone
                            break;
                        }
                if (!keep) continue;
                accepted.push_back(c);
                next.push_back({c, r_next, gen + 1});
            }
        }
        pending = std::move(next);
        if (pending.empty()) break;
    }
    cover.generations = gen;

    double sum = 0.0;
    for (const auto* b : cover.final_balls()) sum += std::pow(b->radius, k);
    cover.packing_sum = sum;
    cover.packing_ratio = sum / std::pow(tau, k);
    return cover;
}

struct InitialCoverReport {
    bool radius_floor_ok = true;    // (1) r_i >= 10 rho sigma
    double packing_ratio = 0.0;     // (2) sum r_i^k / tau^k, reported
    bool tube_ok = true;            // (3) non-terminal: F_i inside B_{r_i} cap B_{rho r_i}(L_i)
    bool coverage_ok = true;        // D inside the union of final balls
    bool fifth_disjoint_ok = true;  // (B)
    bool schedule_ok = true;        // radii equal tau (10 rho)^gen bit-for-bit
    bool pass() const {
        return radius_floor_ok && tube_ok && coverage_ok && fifth_disjoint_ok && schedule_ok;
    }
};

inline InitialCoverReport verify_initial_cover(const BallCover& cover, const std::vector<Vec>& D) {
    InitialCoverReport rep;
    const auto finals = cover.final_balls();
    const auto& P = cover.params;
    rep.packing_ratio = cover.packing_ratio;

    for (const auto* b : finals) {
        if (b->radius < 10.0 * P.rho * P.sigma - 1e-15) rep.radius_floor_ok = false;
        const double sched = P.tau * std::pow(10.0 * P.rho, b->generation);
        if (b->radius != sched) rep.schedule_ok = false;
        if (b->label == BallLabel::bad && b->radius > P.sigma) {
            for (int i : b->pinched) {
                const Vec p = D[static_cast<std::size_t>(i)];
                if (vnorm(vsub(p, b->center)) > b->radius + 1e-12) rep.tube_ok = false;
                if (b->has_plane) {
                    if (b->plane.dist(p) > P.rho * b->radius + 1e-12) rep.tube_ok = false;
                } else {
                    rep.tube_ok = false;  // k=0 bad balls must have empty pinched sets
                }
            }
        }
    }
    for (const Vec& p : D) {
        bool covered = false;
        for (const auto* b : finals)
            if (vnorm(vsub(p, b->center)) <= b->radius + 1e-12) {
                covered = true;
                break;
            }
        if (!covered) rep.coverage_ok = false;
    }
    for (std::size_t a = 0; a < finals.size(); ++a)
        for (std::size_t b = a + 1; b < finals.size(); ++b) {
            const double d = vnorm(vsub(finals[a]->center, finals[b]->center));
            if (d + 1e-12 < finals[a]->radius / 5.0 + finals[b]->radius / 5.0)
                rep.fifth_disjoint_ok = false;
        }
    return rep;
}

// --- refined covering (order-drop alternative) -------------------------------

struct RefinedBall {
    Vec center{};
    double s_x = 0.0;
    std::vector<int> members;  // D_x, indices into the covered set
    bool order_drop = false;   // true: the second branch s_x > s with the drop property
};

struct RefineResult {
    std::vector<RefinedBall> balls;
    double M = 0.0;
    double S = 0.0, s = 0.0, delta = 0.0, rho = 0.0;
    int k = 0;
    int depth = 0;
    double packing_sum = 0.0;    // sum s_x^k
    double packing_ratio = 0.0;  // / S^k
};

inline RefineResult refine_cover(const FieldQuadrature& q, const std::vector<Vec>& D, const Vec& x,
                                 double S, double s, int k, double delta, double rho = 1.0 / 256,
                                 double M = -1.0) {
    if (!(0 < s && s < S && S <= 1.0 / 8))
        throw std::invalid_argument("refine_cover: need 0 < s < S <= 1/8");
    RefineResult res;
    res.S = S;
    res.s = s;
    res.delta = delta;
    res.rho = rho;
    res.k = k;
    if (M < 0) M = sup_order(q, D, 8.0 * S);
    res.M = M;

    struct Item {
        std::vector<int> members;
        Vec c;
        double tau;
        int depth;
    };
    std::vector<int> all(D.size());
    for (std::size_t i = 0; i < D.size(); ++i) all[i] = static_cast<int>(i);
    std::deque<Item> queue{{all, x, S, 1}};

    while (!queue.empty()) {
        Item it = std::move(queue.front());
        queue.pop_front();
        res.depth = std::max(res.depth, it.depth);
        std::vector<Vec> sub;
        sub.reserve(it.members.size());
        for (int i : it.members) sub.push_back(D[static_cast<std::size_t>(i)]);
        const double tau = std::min(it.tau, 1.0 / 8);
        const double sigma = std::min(s, tau / 2.0);
        const BallCover C = initial_cover(q, sub, it.c, tau, sigma, rho, delta, k, M);
        for (const auto* b : C.final_balls()) {
            std::vector<int> cap;  // global indices in this ball
            for (std::size_t j = 0; j < sub.size(); ++j)
                if (vnorm(vsub(sub[j], b->center)) <= b->radius) cap.push_back(it.members[j]);
            if (b->label == BallLabel::terminal || b->radius <= s) {
                // radius at or below s: lift to the minimum radius s
                res.balls.push_back({b->center, s, cap, false});
                continue;
            }
            // bad ball of radius r_y > s: the pinched part is re-covered along
            // its tube; the rest carries the order drop at scale rho r_y
            std::vector<int> Fglobal;
            for (int fi : b->pinched) Fglobal.push_back(it.members[static_cast<std::size_t>(fi)]);
            std::vector<int> drop;
            for (int gidx : cap)
                if (std::find(Fglobal.begin(), Fglobal.end(), gidx) == Fglobal.end())
                    drop.push_back(gidx);
            {
                // cover the drop set by balls of radius rho r_y / 8 so the drop
                // property holds at 8 s_x = rho r_y; lifted to s when below s
                const double rc = rho * b->radius / 8.0;
                std::vector<char> used(drop.size(), 0);
                for (std::size_t i = 0; i < drop.size(); ++i) {
                    if (used[i]) continue;
                    const Vec c = D[static_cast<std::size_t>(drop[i])];
                    std::vector<int> cluster;
                    const double reach = std::max(rc, s);
                    for (std::size_t j = i; j < drop.size(); ++j) {
                        if (!used[j] &&
                            vnorm(vsub(D[static_cast<std::size_t>(drop[j])], c)) <= reach) {
                            used[j] = 1;
                            cluster.push_back(drop[j]);
                        }
                    }
                    if (rc >= s)
                        res.balls.push_back({c, rc, cluster, true});
                    else
                        res.balls.push_back({c, s, cluster, false});
                }
            }
            if (!Fglobal.empty()) {
                const double rt = 4.0 * rho * b->radius;
                std::vector<char> used(Fglobal.size(), 0);
                for (std::size_t i = 0; i < Fglobal.size(); ++i) {
                    if (used[i]) continue;
                    Vec c = D[static_cast<std::size_t>(Fglobal[i])];
                    if (b->has_plane) c = b->plane.project(c);
                    std::vector<int> cluster;
                    const double reach = std::max(rt, s);
                    for (std::size_t j = i; j < Fglobal.size(); ++j) {
                        if (!used[j] &&
                            vnorm(vsub(D[static_cast<std::size_t>(Fglobal[j])], c)) <= reach) {
                            used[j] = 1;
                            cluster.push_back(Fglobal[j]);
                        }
                    }
                    if (rt <= s)
                        res.balls.push_back({c, s, cluster, false});
                    else
                        queue.push_back({cluster, c, rt, it.depth + 1});
                }
            }
        }
    }
    for (const auto& b : res.balls) res.packing_sum += std::pow(b.s_x, k);
    res.packing_ratio = res.packing_sum / std::pow(S, k);
    return res;
}

struct RefineReport {
    bool containment_ok = true;  // (1) D_x in B_{s_x}(x)
    double packing_ratio = 0.0;  // (2)
    bool branch_ok = true;       // (3) s_x == s or the order drop holds on D_x
    bool coverage_ok = true;
    bool min_radius_ok = true;  // s_x >= s
    bool pass() const { return containment_ok && branch_ok && coverage_ok && min_radius_ok; }
};

inline RefineReport verify_refine(const FieldQuadrature& q, const RefineResult& res,
                                  const std::vector<Vec>& D) {
    RefineReport rep;
    rep.packing_ratio = res.packing_ratio;
    std::vector<char> covered(D.size(), 0);
    for (const auto& b : res.balls) {
        if (b.s_x < res.s - 1e-15) rep.min_radius_ok = false;
        for (int i : b.members) {
            if (vnorm(vsub(D[static_cast<std::size_t>(i)], b.center)) > b.s_x + 1e-12)
                rep.containment_ok = false;
            covered[static_cast<std::size_t>(i)] = 1;
        }
        if (b.s_x != res.s) {
            for (int i : b.members)
                if (q.smoothed_ord_clamped(D[static_cast<std::size_t>(i)], 8.0 * b.s_x) >
                    res.M - res.delta + 1e-9)
                    rep.branch_ok = false;
        }
    }
    for (char c : covered)
        if (!c) rep.coverage_ok = false;
    return rep;
}

// Minkowski-style iteration: refine, keep the s_x = s balls, recurse on the
// order-drop balls (whose sup order has dropped by delta). Terminates within
// ceil(M/delta) rounds.
struct IteratedCover {
    std::vector<RefinedBall> balls;  // all with s_x == s, members indexing the input D
    int rounds = 0;
    double M0 = 0.0;
    double packing_sum = 0.0;
};

inline IteratedCover iterate_refine(const FieldQuadrature& q, const std::vector<Vec>& D,
                                    const Vec& x, double S, double s, int k, double delta,
                                    double rho = 1.0 / 256) {
    IteratedCover out;
    out.M0 = sup_order(q, D, 8.0 * S);
    const int round_cap = std::max(1, static_cast<int>(std::ceil(out.M0 / delta)));

    struct Item {
        std::vector<int> members;
        Vec c;
        double S;
    };
    std::vector<int> all(D.size());
    for (std::size_t i = 0; i < D.size(); ++i) all[i] = static_cast<int>(i);
    std::vector<Item> work{{all, x, S}};
    while (!work.empty()) {
        ++out.rounds;
        if (out.rounds > round_cap)
            throw CoveringError("iterate_refine: exceeded ceil(M/delta) rounds", x, S);
        std::vector<Item> next;
        for (auto& it : work) {
            std::vector<Vec> sub;
            sub.reserve(it.members.size());
            for (int i : it.members) sub.push_back(D[static_cast<std::size_t>(i)]);
            const RefineResult res = refine_cover(q, sub, it.c, it.S, s, k, delta, rho);
            for (const auto& b : res.balls) {
                std::vector<int> global;
                for (int i : b.members) global.push_back(it.members[static_cast<std::size_t>(i)]);
                if (!b.order_drop)
                    out.balls.push_back({b.center, b.s_x, global, false});
                else
                    next.push_back({global, b.center, std::min(b.s_x, 1.0 / 8)});
            }
        }
        work = std::move(next);
    }
    for (const auto& b : out.balls) out.packing_sum += std::pow(b.s_x, k);
    return out;
}

// --- Minkowski content -------------------------------------------------------

struct MinkowskiRow {
    double r = 0.0;
    double tube_volume = 0.0;      // direct lattice tube volume around the full set
    double tube_restricted = 0.0;  // around the set restricted to B_{1/8}(0)
    double cover_bound = 0.0;      // omega_n 2^n r^{n-k} sum s_x^k, bounds tube_restricted
    long long ball_count = 0;
};

struct MinkowskiTable {
    std::vector<MinkowskiRow> rows;
    double slope = 0.0;  // log-log fit of tube_volume against r
    int k = 0;
};

inline MinkowskiTable minkowski_estimate(const FieldQuadrature& q, const std::vector<Vec>& stratum,
                                         int k, const std::vector<double>& radii, double delta,
                                         double rho = 1.0 / 256) {
    const auto& grid = q.field().grid;
    for (double r : radii)
        if (r < 4.0 * grid.h)
            throw std::invalid_argument("minkowski_estimate: radius below the grid resolution");
    MinkowskiTable table;
    table.k = k;

    std::vector<Vec> D18;
    for (const Vec& p : stratum)
        if (vnorm(p) <= 1.0 / 8 + 1e-12) D18.push_back(p);

    const double cell = std::pow(grid.h, grid.n);
    const double omega_n = grid.n == 2 ? std::numbers::pi : 4.0 * std::numbers::pi / 3.0;
    for (double r : radii) {
        MinkowskiRow row;
        row.r = r;
        if (!stratum.empty()) {
            auto tube = [&](const std::vector<Vec>& pts) {
                return parallel_sum(grid.size(), [&](std::size_t i) {
                           const Vec y = grid.point(static_cast<int>(i));
                           for (const Vec& p : pts)
                               if (vnorm(vsub(y, p)) <= r) return 1.0;
                           return 0.0;
                       }) *
                       cell;
            };
            row.tube_volume = tube(stratum);
            if (!D18.empty()) {
                row.tube_restricted = tube(D18);
                // the covering construction lives below S = 1/8; radii at or
                // above it are covered at the largest admissible scale
                const double s_eff = std::min(r, 0.96 / 8.0);
                const IteratedCover ic =
                    iterate_refine(q, D18, Vec{0, 0, 0}, 1.0 / 8, s_eff, k, delta, rho);
                row.ball_count = static_cast<long long>(ic.balls.size());
                // D in the union of the count cover balls (radius s_eff <= r), so
                // B_r(D) is inside the union of the B_{2r}(x_i):
                // |B_r(D)| <= omega_n 2^n r^{n-k} sum_i r^k
                row.cover_bound = omega_n * std::pow(2.0, grid.n) * std::pow(r, grid.n - k) *
                                  static_cast<double>(ic.balls.size()) * std::pow(r, k);
            }
        }
        table.rows.push_back(row);
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& row : table.rows) {
        if (row.tube_volume <= 0) continue;
        const double lx = std::log(row.r), ly = std::log(row.tube_volume);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    table.slope = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
    return table;
}

// Atomic measure mu = sum (s_i)^k delta_{x_i} from a cover with disjoint
// fifth-balls.
inline DiscreteMeasure packing_measure(const std::vector<RefinedBall>& balls, int k, int dim) {
    for (std::size_t a = 0; a < balls.size(); ++a)
        for (std::size_t b = a + 1; b < balls.size(); ++b)
            if (vnorm(vsub(balls[a].center, balls[b].center)) + 1e-12 <
                balls[a].s_x / 5.0 + balls[b].s_x / 5.0)
                throw std::invalid_argument("packing_measure: fifth-ball disjointness violated");
    DiscreteMeasure mu;
    mu.dim = dim;
    for (const auto& b : balls) {
        mu.points.push_back(b.center);
        mu.mass.push_back(std::pow(b.s_x, k));
    }
    return mu;
}

}  // namespace conelab
