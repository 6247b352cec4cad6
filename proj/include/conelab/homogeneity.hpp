#pragma once

// Homogeneous competitor maps and the quantitative (eta, r, k)-homogeneity
// test. The infimum over all k-homogeneous maps is replaced by a finite
// dictionary built by symmetrizing the map itself over candidate invariant
// frames; a pass is a certificate, a fail is relative to the dictionary.

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <functional>
#include <optional>
#include <random>

#include "frequency.hpp"

namespace conelab {

struct HomogeneousMap {
    Vec center{};
    double degree = 1.0;
    std::vector<Vec> frame;  // orthonormal basis of the invariant subspace V
    std::function<TargetPoint(const Vec&)> sphere_profile;  // on unit vectors of V-perp
    ConicalTarget target;
    double grad_ratio = 0.0;  // measured sup|grad h| / ((1+4a) sup_{B_2}|grad u|)

    // h(center + v + w) = cone_scale(profile(w/|w|), |w|^degree), v in V.
    TargetPoint eval(const Vec& y) const {
        Vec w = vsub(y, center);
        for (const Vec& v : frame) w = vsub(w, vscale(v, vdot(w, v)));
        const double nw = vnorm(w);
        if (nw == 0.0) return cone_point();
        return cone_scale(target, sphere_profile(vscale(w, 1.0 / nw)), std::pow(nw, degree));
    }
};

struct HomogeneityVerdict {
    bool passed = false;
    double scale = 0.0;
    int k = 0;
    double eta = 0.0;
    double best_discrepancy = 0.0;
    double threshold = 0.0;
    std::optional<HomogeneousMap> witness;
    int dictionary_size = 0;
};

namespace detail {

// Deterministic unit directions for gradient sampling.
inline std::vector<Vec> sample_directions(int n, int count, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(out.size()) < count) {
        Vec v{gauss(rng), gauss(rng), n == 3 ? gauss(rng) : 0.0};
        const double nv = vnorm(v);
        if (nv < 1e-8) continue;
        out.push_back(vscale(v, 1.0 / nv));
    }
    return out;
}

inline double sup_gradient(const std::function<TargetPoint(const Vec&)>& eval,
                           const ConicalTarget& t, int n, double ball_radius, double step,
                           int lattice = 9) {
    double sup = 0.0;
    const double h = 2.0 * ball_radius / (lattice - 1);
    const int kmax = n == 3 ? lattice : 1;
    for (int i = 0; i < lattice; ++i)
        for (int j = 0; j < lattice; ++j)
            for (int k = 0; k < kmax; ++k) {
                const Vec y{-ball_radius + h * i, -ball_radius + h * j,
                            n == 3 ? -ball_radius + h * k : 0.0};
                if (vnorm(y) > ball_radius) continue;
                for (int d = 0; d < n; ++d) {
                    Vec yp = y, ym = y;
                    yp[static_cast<std::size_t>(d)] += step;
                    ym[static_cast<std::size_t>(d)] -= step;
                    sup = std::max(sup, distance(t, eval(yp), eval(ym)) / (2.0 * step));
                }
            }
    return sup;
}

}  // namespace detail

// The symmetrization h-hat of the map about x: h(v,w) = |w|^alpha u(x + w/|w|)
// on V-perp, invariant along V, with the cone point on w = 0. Records the
// measured gradient ratio against (1+4 alpha) sup_{B_2} |grad u|.
inline HomogeneousMap symmetrize(const MapField& f, const Vec& x, double alpha,
                                 const std::vector<Vec>& frame) {
    HomogeneousMap h;
    h.center = x;
    h.degree = alpha;
    h.frame = frame;
    h.target = f.target;
    if (f.provenance == Provenance::analytic) {
        h.sphere_profile = [fn = f.analytic, x](const Vec& w) { return fn(vadd(x, w)); };
    } else {
        if (vnorm(vsub(x, f.grid.center)) + 1.0 > f.grid.radius - 2.0 * f.grid.h + 1e-12)
            throw std::domain_error("symmetrize: unit sphere about x exits the grid");
        // sampling interpolation of the solved field on the unit sphere
        const MapField* fp = &f;
        h.sphere_profile = [fp, x](const Vec& w) { return fp->interpolate(vadd(x, w)); };
    }
    // gradient diagnostic (analytic fields can be probed on B_2 directly;
    // solved fields are probed on the largest available ball)
    const double step = std::max(f.grid.h / 2.0, 1e-4);
    const double avail = f.provenance == Provenance::analytic
                             ? 2.0
                             : std::max(0.25, f.grid.radius - vnorm(vsub(x, f.grid.center)) - 3 * f.grid.h);
    const double sup_u = detail::sup_gradient(
        [&](const Vec& y) { return f.eval(vadd(x, y)); }, f.target, f.grid.n,
        std::min(avail, 2.0), step);
    const double sup_h =
        detail::sup_gradient([&](const Vec& y) { return h.eval(vadd(x, y)); }, f.target, f.grid.n,
                             1.0, step);
    h.grad_ratio = sup_h / std::max(1e-300, (1.0 + 4.0 * alpha) * sup_u);
    return h;
}

// Samples the scaling identity h(x0 + l z) = l^alpha h(x0 + z) and the
// translation invariance along the frame at >= 10^3 random (z, l, v); true iff
// every residual distance is below tol times the local value scale.
inline bool k_homogeneity_check(const HomogeneousMap& h, double tol, unsigned seed = 1234) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::uniform_real_distribution<double> lam(0.05, 1.0);
    for (int it = 0; it < 1000; ++it) {
        const Vec z{uni(rng), uni(rng), uni(rng)};
        const double l = lam(rng);
        const TargetPoint a = h.eval(vadd(h.center, vscale(z, l)));
        const TargetPoint b = cone_scale(h.target, h.eval(vadd(h.center, z)), std::pow(l, h.degree));
        const double scale_ref = std::max(1.0, distance_to_cone(h.target, b));
        if (distance(h.target, a, b) > tol * scale_ref) return false;
        for (const Vec& v : h.frame) {
            const TargetPoint c = h.eval(vadd(vadd(h.center, z), vscale(v, uni(rng))));
            const TargetPoint d = h.eval(vadd(h.center, z));
            if (distance(h.target, c, d) > tol * scale_ref) return false;
        }
    }
    return true;
}

// Same identities checked directly on a field about x. The degree, when not
// supplied, is read off the radial decay d(u(x+z),0_X) between two scales.
inline bool k_homogeneity_check(const MapField& f, const Vec& x, const std::vector<Vec>& frame,
                                double tol, double alpha = 0.0, unsigned seed = 1234) {
    const double avail = 0.9 * (f.provenance == Provenance::analytic
                                    ? f.grid.radius
                                    : f.grid.admissible_radius(x, 2));
    if (avail <= 0) throw std::domain_error("k_homogeneity_check: no room around the center");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::uniform_real_distribution<double> lam(0.1, 1.0);
    auto draw = [&]() {
        for (;;) {
            Vec z{uni(rng), uni(rng), f.grid.n == 3 ? uni(rng) : 0.0};
            const double nz = vnorm(z);
            if (nz > 1e-2 && nz <= 1.0) return vscale(z, avail);
        }
    };

    // homogeneity about x needs u(x) = 0_X
    double local = 0.0;
    for (int it = 0; it < 64; ++it) local = std::max(local, distance_to_cone(f.target, f.eval(vadd(x, draw()))));
    const double scale_ref = std::max(local, 1e-12);
    if (distance_to_cone(f.target, f.eval(x)) > tol * scale_ref) return false;

    if (alpha <= 0.0) {
        // median log-ratio estimate of the degree
        std::vector<double> est;
        for (int it = 0; it < 64; ++it) {
            const Vec z = draw();
            const double d1 = distance_to_cone(f.target, f.eval(vadd(x, z)));
            const double d2 = distance_to_cone(f.target, f.eval(vadd(x, vscale(z, 0.5))));
            if (d1 > 1e-9 * scale_ref && d2 > 1e-9 * scale_ref) est.push_back(std::log2(d1 / d2));
        }
        if (est.empty()) return true;  // map vanishes near x: trivially homogeneous
        std::nth_element(est.begin(), est.begin() + static_cast<long>(est.size() / 2), est.end());
        alpha = est[est.size() / 2];
    }

    for (int it = 0; it < 1000; ++it) {
        const Vec z = draw();
        const double l = lam(rng);
        const TargetPoint a = f.eval(vadd(x, vscale(z, l)));
        const TargetPoint b = cone_scale(f.target, f.eval(vadd(x, z)), std::pow(l, alpha));
        if (distance(f.target, a, b) > tol * scale_ref) return false;
        for (const Vec& v : frame) {
            const Vec y = vadd(vadd(x, vscale(z, 0.5)), vscale(v, 0.45 * avail * uni(rng)));
            if (vnorm(vsub(y, f.grid.center)) > avail / 0.9) continue;
            if (distance(f.target, f.eval(y), f.eval(vadd(x, vscale(z, 0.5)))) > tol * scale_ref)
                return false;
        }
    }
    return true;
}

struct DegreeBound {
    double A = 1.0;
    double r0 = 0.0;
    double beta = 0.0;
    double c_lambda = 0.0;
};

// The admissible-degree bound of the normalized map: beta(n) = C(n) (2 eta0)^2
// with C(n) the constant in I_phi(0,r) <= C(n) tau^2, r0 the largest radius
// with r0 E_phi(0,r0) >= beta E_phi(0,1), and A the smallest degree with
// r0^A C(Lambda) < eta0. Constants are instantiated from measured quantities.
inline DegreeBound degree_bound(const FieldQuadrature& q, const Vec& x, double eta0 = 0.1,
                                bool require_normalized = true) {
    const MapField& f = q.field();
    const int n = f.grid.n;
    const double pi = std::numbers::pi;
    const double omega = (n == 2) ? 2.0 * pi : 4.0 * pi;  // |S^{n-1}|
    const double Cn = 2.0 * omega * (1.0 - std::pow(2.0, 1 - n)) / (n - 1);
    DegreeBound out;
    out.beta = Cn * (2.0 * eta0) * (2.0 * eta0);
    if (out.beta >= 1.0)
        throw std::invalid_argument("degree_bound: eta0 too large (beta >= 1)");

    const double I1 = q.smoothed(x, 1.0).I_phi;
    if (require_normalized && std::abs(I1 - 1.0) > 0.05)
        throw std::invalid_argument("degree_bound: field is not normalized to I_phi(x,1) = 1");
    const double norm = 1.0 / std::sqrt(I1);  // exact normalizing target rescale

    const double E1 = q.smoothed(x, 1.0).E_phi * norm * norm;
    const double rmin = q.min_radius();
    double r0 = 0.0;
    for (int k = 0; k < 48; ++k) {
        const double r = 0.99 * std::pow(rmin / 0.99, k / 47.0);
        const double Er = q.smoothed(x, r).E_phi * norm * norm;
        if (r * Er >= out.beta * E1) {
            r0 = r;
            break;  // ladder descends from 0.99; first hit is the largest radius
        }
    }
    if (r0 == 0.0) r0 = rmin;
    out.r0 = r0;

    // C(Lambda): measured sup of d(u,0_X) on the unit sphere (normalized), plus eta0
    double m = 0.0;
    const int M = 256;
    for (int k = 0; k < M; ++k) {
        if (n == 2) {
            const double th = 2 * pi * (k + 0.5) / M;
            m = std::max(m, distance_to_cone(f.target, f.eval(vadd(x, Vec{std::cos(th), std::sin(th), 0}))));
        } else {
            const double th = pi * ((k % 16) + 0.5) / 16.0;
            const double ph = 2 * pi * ((k / 16) + 0.5) / (M / 16);
            m = std::max(m, distance_to_cone(
                                f.target, f.eval(vadd(x, Vec{std::sin(th) * std::cos(ph),
                                                             std::sin(th) * std::sin(ph), std::cos(th)}))));
        }
    }
    out.c_lambda = m * norm + eta0;
    if (out.c_lambda <= eta0) {
        out.A = 1.0;
        return out;
    }
    out.A = std::max(1.0, std::log(eta0 / out.c_lambda) / std::log(r0));
    return out;
}

// Candidate frames and degrees for the homogeneity test: every axis-aligned
// k-subspace, the top-k principal directions of nearby singular nodes when
// available, degrees {Ord_phi(x,r)} u {1, 1.5, 2, Ord+-0.25} capped by the
// degree bound.
inline std::vector<HomogeneousMap> competitor_dictionary(
    const MapField& f, const Vec& x, double r, int k, const FieldQuadrature& q,
    const std::vector<Vec>* singular_points = nullptr,
    double degree_cap = std::numeric_limits<double>::infinity()) {
    const int n = f.grid.n;
    if (k > n) throw std::invalid_argument("competitor_dictionary: k exceeds the domain dimension");

    const double ord = q.smoothed_ord_clamped(x, r);
    std::vector<double> degrees{ord, 1.0, 1.5, 2.0, ord - 0.25, ord + 0.25};
    std::sort(degrees.begin(), degrees.end());
    degrees.erase(std::unique(degrees.begin(), degrees.end(),
                              [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                  degrees.end());
    std::erase_if(degrees, [&](double a) { return a < 1.0 || a > degree_cap; });
    if (degrees.empty()) degrees.push_back(std::max(1.0, std::min(ord, degree_cap)));

    std::vector<std::vector<Vec>> frames;
    if (k == 0) {
        frames.push_back({});
    } else {
        const Vec axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        // axis-aligned k-subsets
        for (int mask = 0; mask < (1 << n); ++mask) {
            if (std::popcount(static_cast<unsigned>(mask)) != k) continue;
            std::vector<Vec> fr;
            for (int d = 0; d < n; ++d)
                if (mask & (1 << d)) fr.push_back(axes[d]);
            frames.push_back(std::move(fr));
        }
        // PCA frame of singular nodes within B_{2r}(x)
        if (singular_points) {
            std::vector<Vec> near;
            for (const Vec& p : *singular_points)
                if (vnorm(vsub(p, x)) <= 2.0 * r) near.push_back(p);
            if (static_cast<int>(near.size()) >= k + 1) {
                Vec mean{0, 0, 0};
                for (const Vec& p : near) mean = vadd(mean, p);
                mean = vscale(mean, 1.0 / static_cast<double>(near.size()));
                Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
                for (const Vec& p : near) {
                    const Vec d = vsub(p, mean);
                    for (int a = 0; a < 3; ++a)
                        for (int b = 0; b < 3; ++b) cov(a, b) += d[static_cast<std::size_t>(a)] * d[static_cast<std::size_t>(b)];
                }
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
                std::vector<Vec> fr;
                for (int c = 0; c < k; ++c) {
                    Eigen::Vector3d v = es.eigenvectors().col(2 - c);  // descending
                    int lead = 0;
                    for (int d = 1; d < 3; ++d)
                        if (std::abs(v[d]) > std::abs(v[lead])) lead = d;
                    if (v[lead] < 0) v = -v;  // deterministic sign
                    fr.push_back({v[0], v[1], v[2]});
                }
                frames.push_back(std::move(fr));
            }
        }
    }

    std::vector<HomogeneousMap> dict;
    for (const auto& fr : frames)
        for (double a : degrees) dict.push_back(symmetrize(f, x, a, fr));
    return dict;
}

// sup_{B_r(x)} d(u, h^x) over grid nodes (subsampled by a deterministic stride
// when the ball is large), against eta (I_phi(x,r)/r^{n-1})^{1/2}. With
// early_exit, an entry stops scanning once its running sup exceeds the
// threshold (the verdict is unchanged; best_discrepancy becomes a lower bound
// on failing entries).
inline HomogeneityVerdict homogeneity_test(const MapField& f, const Vec& x, double r, int k,
                                           double eta, const FieldQuadrature& q,
                                           const std::vector<Vec>* singular_points = nullptr,
                                           double degree_cap = std::numeric_limits<double>::infinity(),
                                           bool early_exit = true) {
    HomogeneityVerdict v;
    v.scale = r;
    v.k = k;
    v.eta = eta;
    const double I_phi = q.smoothed(x, std::max(r, q.min_radius())).I_phi;
    v.threshold = eta * std::sqrt(I_phi / std::pow(r, f.grid.n - 1));

    auto dict = competitor_dictionary(f, x, r, k, q, singular_points, degree_cap);
    v.dictionary_size = static_cast<int>(dict.size());

    // nodes of B_r(x), strided so at most ~20000 are touched
    const auto& g = f.grid;
    const auto box = g.box_around(x, r);
    const long long span0 = box.hi[0] - box.lo[0] + 1;
    const long long span1 = box.hi[1] - box.lo[1] + 1;
    const long long span2 = box.hi[2] - box.lo[2] + 1;
    const long long cells = span0 * span1 * span2;
    int stride = 1;
    while (cells / static_cast<long long>(std::pow(stride, g.n)) > 20000) ++stride;

    std::vector<std::pair<int, Vec>> samples;
    for (int i = box.lo[0]; i <= box.hi[0]; i += stride)
        for (int j = box.lo[1]; j <= box.hi[1]; j += stride)
            for (int kk = box.lo[2]; kk <= box.hi[2]; kk += (g.n == 3 ? stride : 1)) {
                const int node = g.find(i, j, kk);
                if (node < 0) continue;
                const Vec y = g.point(node);
                if (vnorm(vsub(y, x)) <= r) samples.emplace_back(node, y);
            }

    v.best_discrepancy = std::numeric_limits<double>::infinity();
    for (auto& h : dict) {
        double sup = 0.0;
        for (const auto& [node, y] : samples) {
            sup = std::max(sup, distance(f.target, f.value(node), h.eval(y)));
            if (early_exit && sup > v.threshold) break;
        }
        if (sup < v.best_discrepancy) {
            v.best_discrepancy = sup;
            v.witness = h;
        }
    }
    v.passed = v.best_discrepancy <= v.threshold;
    if (!v.passed) v.witness.reset();
    return v;
}

}  // namespace conelab
