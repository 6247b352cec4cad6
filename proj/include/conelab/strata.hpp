#pragma once

// Singular-set detection, splitting data J(x), effective spanning, pinched
// sets, and the quantitative strata S^k_{0,eta,r}.

#include <Eigen/Dense>
#include <algorithm>
#include <optional>

#include "homogeneity.hpp"

namespace conelab {

// --- singular detection ------------------------------------------------------

// A node is singular when the image of every small node neighborhood
// (rho in {2h, 4h}) fails to embed in a flat, i.e. touches >= 3 rays with
// positive radial.
inline std::vector<int> detect_singular(const MapField& f, int workers = 0) {
    if (f.target.ray_count == 0) return {};  // Euclidean target: every point regular
    const double tol = 1e-8 * std::max(f.max_radial(), 1e-300);
    std::vector<char> flag(f.grid.size(), 0);
    parallel_for(
        f.grid.size(),
        [&](std::size_t i) {
            const auto c = f.grid.idx[i];
            for (int mult : {2, 4}) {
                std::vector<TargetPoint> img;
                for (int di = -mult; di <= mult; ++di)
                    for (int dj = -mult; dj <= mult; ++dj)
                        for (int dk = (f.grid.n == 3 ? -mult : 0); dk <= (f.grid.n == 3 ? mult : 0); ++dk) {
                            if (di * di + dj * dj + dk * dk > mult * mult) continue;
                            const int nb = f.grid.find(c[0] + di, c[1] + dj, c[2] + dk);
                            if (nb >= 0) img.push_back(f.value(nb));
                        }
                if (lies_in_flat(f.target, img, tol)) return;  // flat at this rho: regular
            }
            flag[i] = 1;
        },
        workers);
    std::vector<int> out;
    for (std::size_t i = 0; i < flag.size(); ++i)
        if (flag[i]) out.push_back(static_cast<int>(i));
    return out;
}

// --- splitting data ----------------------------------------------------------

struct SplittingData {
    Vec x{};
    int J = 0;           // dimension of the domain subspace the pod factor ignores
    double sigma = 0.0;  // largest tested radius realizing the factorization
    std::vector<int> invariant_axes;    // domain axes spanning the splitting
    std::vector<int> active_flat_axes;  // target flat coordinates the regular factor uses
    double residual = 0.0;              // worst pod-invariance violation at sigma, relative
};

namespace detail {

// Deterministic sample points in the ball B_sigma(x) subset R^dim (Halton-ish
// via a fixed LCG; reproducible).
inline std::vector<std::vector<double>> ball_samples(const std::vector<double>& x, double sigma,
                                                     int count, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<std::vector<double>> out;
    const int dim = static_cast<int>(x.size());
    while (static_cast<int>(out.size()) < count) {
        std::vector<double> p(x.size());
        double n2 = 0.0;
        for (int d = 0; d < dim; ++d) {
            const double c = uni(rng);
            n2 += c * c;
            p[static_cast<std::size_t>(d)] = c;
        }
        if (n2 > 1.0) continue;
        for (int d = 0; d < dim; ++d)
            p[static_cast<std::size_t>(d)] = x[static_cast<std::size_t>(d)] + sigma * p[static_cast<std::size_t>(d)];
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace detail

// Map-side factorization test: J counts the axis directions along which the
// pod component of the map is invariant on B_sigma(x), with sigma the largest
// tested radius. Residuals are relative to the local pod oscillation; the
// threshold follows the 1e-3 factorization tolerance.
inline SplittingData splitting_data(const AnalyticMap& m, const std::vector<double>& x,
                                    const std::vector<double>& radii, double tol = 1e-3,
                                    unsigned seed = 99, int samples = 160) {
    if (static_cast<int>(x.size()) != m.dim)
        throw std::invalid_argument("splitting_data: center dimension mismatch");
    SplittingData out;
    for (int d = 0; d < std::min(m.dim, 3); ++d) out.x[static_cast<std::size_t>(d)] = x[static_cast<std::size_t>(d)];

    std::vector<double> sorted = radii;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (double sigma : sorted) {
        const auto pts = detail::ball_samples(x, 0.5 * sigma, samples, seed);
        double osc = 0.0;
        std::vector<TargetPoint> base;
        base.reserve(pts.size());
        for (const auto& p : pts) {
            base.push_back(m.eval(p));
            osc = std::max(osc, base.back().radial);
        }
        const double thresh = tol * std::max(osc, 1e-300);

        std::vector<int> inv;
        std::vector<double> worst(static_cast<std::size_t>(m.dim), 0.0);
        for (int d = 0; d < m.dim; ++d) {
            double res = 0.0;
            for (std::size_t i = 0; i < pts.size(); ++i)
                for (double t : {0.5 * sigma, -0.5 * sigma, 0.25 * sigma}) {
                    auto p = pts[i];
                    p[static_cast<std::size_t>(d)] += t;
                    res = std::max(res, pod_distance(m.eval(p), base[i]));
                }
            worst[static_cast<std::size_t>(d)] = res;
            if (res <= thresh) inv.push_back(d);
        }
        if (!inv.empty() || sigma == sorted.back()) {
            out.J = static_cast<int>(inv.size());
            out.sigma = sigma;
            out.invariant_axes = inv;
            double r = 0.0;
            for (int d : inv) r = std::max(r, worst[static_cast<std::size_t>(d)] / std::max(osc, 1e-300));
            out.residual = r;
            // which flat coordinates does the regular factor actually use
            for (int a = 0; a < m.target.flat_dim; ++a) {
                double fosc = 0.0;
                for (std::size_t i = 1; i < base.size(); ++i)
                    fosc = std::max(fosc, std::abs(base[i].flat[a] - base[0].flat[a]));
                if (fosc > thresh) out.active_flat_axes.push_back(a);
            }
            return out;
        }
    }
    return out;
}

inline SplittingData splitting_data(const MapField& f, const Vec& x, double tol = 1e-3) {
    AnalyticMap m;
    m.dim = f.grid.n;
    m.target = f.target;
    m.eval = [&f](std::span<const double> p) {
        Vec v{0, 0, 0};
        for (std::size_t d = 0; d < p.size() && d < 3; ++d) v[d] = p[d];
        return f.eval(v);
    };
    const double avail = f.provenance == Provenance::analytic
                             ? f.grid.radius - vnorm(vsub(x, f.grid.center))
                             : f.grid.admissible_radius(x, 2) / 1.5;
    std::vector<double> radii;
    for (double s = avail / 1.5; s >= 4 * f.grid.h; s *= 0.5) radii.push_back(s);
    if (radii.empty()) radii.push_back(avail / 1.5);
    std::vector<double> xv(static_cast<std::size_t>(f.grid.n));
    for (int d = 0; d < f.grid.n; ++d) xv[static_cast<std::size_t>(d)] = x[static_cast<std::size_t>(d)];
    return splitting_data(m, xv, radii, tol);
}

// Target-side F_0 gate: near x the map must not use the flat factor (its flat
// coordinates are locally constant) and the value must sit at the cone point
// within interpolation error. Maps into Euclidean targets never qualify.
inline bool f0_gate(const MapField& f, int node) {
    if (f.target.ray_count == 0) return false;
    const Vec x = f.grid.point(node);
    if (distance_to_cone(f.target, f.value(node)) > cone_gate(f, x)) return false;
    if (f.target.flat_dim == 0) return true;
    const auto c = f.grid.idx[static_cast<std::size_t>(node)];
    double fosc = 0.0, osc = 0.0;
    const TargetPoint v0 = f.value(node);
    for (int di = -2; di <= 2; ++di)
        for (int dj = -2; dj <= 2; ++dj)
            for (int dk = (f.grid.n == 3 ? -2 : 0); dk <= (f.grid.n == 3 ? 2 : 0); ++dk) {
                if (di * di + dj * dj + dk * dk > 4) continue;
                const int nb = f.grid.find(c[0] + di, c[1] + dj, c[2] + dk);
                if (nb < 0) continue;
                const TargetPoint v = f.value(nb);
                osc = std::max(osc, distance(f.target, v, v0));
                for (int a = 0; a < f.target.flat_dim; ++a)
                    fosc = std::max(fosc, std::abs(v.flat[a] - v0.flat[a]));
            }
    return fosc <= 1e-3 * std::max(osc, 1e-300);
}

// --- effective spanning --------------------------------------------------------

// Greedy rho-effective spanning: x_0 is the lowest-index point; each further
// point is the first one at distance >= rho from the affine span so far. Any
// returned tuple satisfies the definition verbatim.
inline std::optional<std::vector<int>> effective_span(const std::vector<Vec>& pts, double rho,
                                                      int k) {
    if (rho <= 0) throw std::invalid_argument("effective_span: rho must be positive");
    if (k < 0) throw std::invalid_argument("effective_span: negative k");
    if (pts.empty()) return std::nullopt;
    std::vector<int> chosen{0};
    std::vector<Vec> basis;  // orthonormal directions of the affine span
    auto dist_to_span = [&](const Vec& p) {
        Vec d = vsub(p, pts[static_cast<std::size_t>(chosen[0])]);
        for (const Vec& b : basis) d = vsub(d, vscale(b, vdot(d, b)));
        return vnorm(d);
    };
    while (static_cast<int>(chosen.size()) < k + 1) {
        int found = -1;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (dist_to_span(pts[i]) >= rho) {
                found = static_cast<int>(i);
                break;
            }
        }
        if (found < 0) return std::nullopt;
        Vec d = vsub(pts[static_cast<std::size_t>(found)], pts[static_cast<std::size_t>(chosen[0])]);
        for (const Vec& b : basis) d = vsub(d, vscale(b, vdot(d, b)));
        basis.push_back(vscale(d, 1.0 / vnorm(d)));
        chosen.push_back(found);
    }
    return chosen;
}

// Verbatim re-check of the definition on an ordered tuple.
inline bool effective_span_check(const std::vector<Vec>& pts, const std::vector<int>& tuple,
                                 double rho) {
    std::vector<Vec> basis;
    for (std::size_t i = 1; i < tuple.size(); ++i) {
        Vec d = vsub(pts[static_cast<std::size_t>(tuple[i])], pts[static_cast<std::size_t>(tuple[0])]);
        Vec resid = d;
        for (const Vec& b : basis) resid = vsub(resid, vscale(b, vdot(resid, b)));
        if (vnorm(resid) < rho) return false;
        basis.push_back(vscale(resid, 1.0 / vnorm(resid)));
    }
    return true;
}

// Exhaustive search over ordered tuples; completeness oracle for small sets.
inline bool effective_span_exhaustive(const std::vector<Vec>& pts, double rho, int k) {
    const int n = static_cast<int>(pts.size());
    if (n < k + 1) return false;
    std::vector<int> tuple;
    std::function<bool(std::vector<Vec>&)> rec = [&](std::vector<Vec>& basis) -> bool {
        if (static_cast<int>(tuple.size()) == k + 1) return true;
        for (int i = 0; i < n; ++i) {
            if (std::find(tuple.begin(), tuple.end(), i) != tuple.end()) continue;
            if (tuple.empty()) {
                tuple.push_back(i);
                if (rec(basis)) return true;
                tuple.pop_back();
            } else {
                Vec d = vsub(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(tuple[0])]);
                for (const Vec& b : basis) d = vsub(d, vscale(b, vdot(d, b)));
                if (vnorm(d) < rho) continue;
                basis.push_back(vscale(d, 1.0 / vnorm(d)));
                tuple.push_back(i);
                if (rec(basis)) return true;
                tuple.pop_back();
                basis.pop_back();
            }
        }
        return false;
    };
    std::vector<Vec> basis;
    return rec(basis);
}

// --- pinched sets ---------------------------------------------------------------

// F(B_r(center)) = D cap B_r(center) cap {Ord_phi(y, rho r) > M - delta}.
// Radii below the grid floor are evaluated at the clamped radius.
inline std::vector<int> pinched_set(const FieldQuadrature& q, const std::vector<int>& D,
                                    const Vec& center, double r, double rho, double delta,
                                    double M) {
    if (r <= 0 || rho <= 0 || delta <= 0)
        throw std::invalid_argument("pinched_set: parameters must be positive");
    std::vector<int> out;
    for (int node : D) {
        const Vec y = q.field().grid.point(node);
        if (vnorm(vsub(y, center)) > r) continue;
        if (q.smoothed_ord_clamped(y, rho * r) > M - delta) out.push_back(node);
    }
    return out;
}

// --- quantitative strata ----------------------------------------------------------

struct StratumSet {
    int k = 0;
    double eta = 0.0;
    double r = 0.0;
    std::vector<int> nodes;
    std::vector<double> scales_tested;
};

// S^k_{0,eta,r}: F_0-gated singular nodes at which the map is not
// (eta, s, k+1)-homogeneous at any dyadic scale s in [r,1] that the grid
// admits. Strata are defined for k <= n-2; larger k returns the empty set.
inline StratumSet quantitative_stratum(const MapField& f, int k, double eta, double r,
                                       const FieldQuadrature& q,
                                       const std::vector<int>* singular_hint = nullptr,
                                       int workers = 0) {
    if (eta <= 0 || eta >= 1 || r <= 0 || r >= 1)
        throw std::invalid_argument("quantitative_stratum: eta, r must lie in (0,1)");
    StratumSet out;
    out.k = k;
    out.eta = eta;
    out.r = r;
    if (k > f.grid.n - 2) return out;

    std::vector<int> sing = singular_hint ? *singular_hint : detect_singular(f, workers);
    std::vector<Vec> sing_pts;
    sing_pts.reserve(sing.size());
    for (int node : sing) sing_pts.push_back(f.grid.point(node));

    for (double s = r; s <= 1.0 + 1e-12; s *= 2.0) out.scales_tested.push_back(s);

    std::vector<char> keep(sing.size(), 0);
    parallel_for(
        sing.size(),
        [&](std::size_t i) {
            const int node = sing[i];
            if (!f0_gate(f, node)) return;
            const Vec x = f.grid.point(node);
            bool fails_everywhere = true;
            bool any_scale = false;
            for (double s : out.scales_tested) {
                if (s < q.min_radius() || s > q.max_radius(x)) continue;
                any_scale = true;
                const auto verdict = homogeneity_test(f, x, s, k + 1, eta, q, &sing_pts);
                if (verdict.passed) {
                    fails_everywhere = false;
                    break;
                }
            }
            if (any_scale && fails_everywhere) keep[i] = 1;
        },
        workers);
    for (std::size_t i = 0; i < sing.size(); ++i)
        if (keep[i]) out.nodes.push_back(sing[i]);
    return out;
}

}  // namespace conelab
