#pragma once

// Discretized maps from a ball grid into a conical target, plus the built-in
// analytic model maps used as oracles throughout: the tripod map f_Y, the
// product map (t, f_Y(z)) and its non-flat factor, and the R^6 example with a
// degree-2 harmonic flat part and a 5-pod factor.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

#include "grid.hpp"
#include "target.hpp"

namespace conelab {

using AnalyticFn = std::function<TargetPoint(const Vec&)>;

enum class Provenance { analytic, solved };

struct MapField {
    DomainGrid grid;
    ConicalTarget target;
    Provenance provenance = Provenance::solved;
    AnalyticFn analytic;  // set iff provenance == analytic; exact off-grid evaluation

    // node values, struct-of-arrays
    std::vector<double> flat;   // grid.size() * target.flat_dim
    std::vector<int> ray;
    std::vector<double> radial;

    static MapField zeros(const DomainGrid& g, const ConicalTarget& t) {
        MapField f;
        f.grid = g;
        f.target = t;
        f.flat.assign(g.size() * static_cast<std::size_t>(t.flat_dim), 0.0);
        f.ray.assign(g.size(), -1);
        f.radial.assign(g.size(), 0.0);
        return f;
    }

    static MapField from_analytic(const DomainGrid& g, const ConicalTarget& t, AnalyticFn fn) {
        MapField f = zeros(g, t);
        f.provenance = Provenance::analytic;
        f.analytic = std::move(fn);
        for (std::size_t i = 0; i < g.size(); ++i) f.set(static_cast<int>(i), f.analytic(g.point(static_cast<int>(i))));
        return f;
    }

    TargetPoint value(int node) const {
        TargetPoint p;
        const std::size_t u = static_cast<std::size_t>(node);
        for (int i = 0; i < target.flat_dim; ++i)
            p.flat[i] = flat[u * static_cast<std::size_t>(target.flat_dim) + static_cast<std::size_t>(i)];
        p.ray = ray[u];
        p.radial = radial[u];
        return p;
    }

    void set(int node, const TargetPoint& p) {
        check_point(target, p);
        const std::size_t u = static_cast<std::size_t>(node);
        for (int i = 0; i < target.flat_dim; ++i)
            flat[u * static_cast<std::size_t>(target.flat_dim) + static_cast<std::size_t>(i)] = p.flat[i];
        TargetPoint q = p;
        q.canonicalize();
        ray[u] = q.ray;
        radial[u] = q.radial;
    }

    // Evaluation at an arbitrary domain point: analytic fields evaluate the
    // closure; solved fields interpolate geodesically (multilinear weights
    // combined by a Frechet mean over the cell corners).
    TargetPoint eval(const Vec& p) const {
        if (provenance == Provenance::analytic) return analytic(p);
        return interpolate(p);
    }

    TargetPoint interpolate(const Vec& p) const {
        const Vec rel = vsub(p, grid.center);
        const double inv = 1.0 / grid.h;
        int base[3] = {0, 0, 0};
        double frac[3] = {0.0, 0.0, 0.0};
        for (int d = 0; d < grid.n; ++d) {
            const double s = rel[static_cast<std::size_t>(d)] * inv;
            base[d] = static_cast<int>(std::floor(s));
            frac[d] = s - base[d];
        }
        std::vector<TargetPoint> corners;
        std::vector<double> w;
        const int cmax = grid.n == 3 ? 8 : 4;
        corners.reserve(static_cast<std::size_t>(cmax));
        w.reserve(static_cast<std::size_t>(cmax));
        for (int c = 0; c < cmax; ++c) {
            const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
            const int node = grid.find(base[0] + di, base[1] + dj, base[2] + dk);
            if (node < 0) throw std::domain_error("MapField::interpolate: point too close to the grid boundary");
            double wc = (di ? frac[0] : 1 - frac[0]) * (dj ? frac[1] : 1 - frac[1]);
            if (grid.n == 3) wc *= (dk ? frac[2] : 1 - frac[2]);
            corners.push_back(value(node));
            w.push_back(wc);
        }
        return frechet_mean(target, corners, w);
    }

    double max_radial() const {
        double m = 0.0;
        for (double r : radial) m = std::max(m, r);
        return m;
    }

    // Max metric difference quotient over edges incident to the node.
    double local_lipschitz(int node) const {
        double m = 0.0;
        const TargetPoint v = value(node);
        for (int d = 0; d < grid.n; ++d)
            for (int s : {-1, +1}) {
                const int nb = grid.neighbor(node, d, s);
                if (nb >= 0) m = std::max(m, distance(target, v, value(nb)) / grid.h);
            }
        return m;
    }
};

// --- analytic model maps ---------------------------------------------------

// Sector index of angle theta for an m-pod model map; sector boundaries are
// the zeros of cos(m theta / 2).
inline int pod_sector(int m, double theta) {
    const double pi = std::numbers::pi;
    const double shift = (m % 2 == 0) ? 0.5 : 0.0;
    const double s = std::floor((theta + pi) * m / (2 * pi) + shift);
    int k = static_cast<int>(s);
    k %= m;
    if (k < 0) k += m;
    return k;
}

// The m-pod model map on the plane: radial distance r^{m/2} |cos(m theta/2)|,
// one ray per sector. For m=3 this is the tripod map f_Y ("Re z^{3/2}").
inline TargetPoint pod_model(int m, double zx, double zy) {
    const double r = std::hypot(zx, zy);
    if (r == 0.0) return cone_point();
    const double theta = std::atan2(zy, zx);
    const double rad = std::pow(r, 0.5 * m) * std::abs(std::cos(0.5 * m * theta));
    if (rad == 0.0) return cone_point();
    return make_pod_point(pod_sector(m, theta), rad);
}

inline TargetPoint eval_tripod(double zx, double zy) { return pod_model(3, zx, zy); }
inline TargetPoint eval_tripod(const Vec& z) { return pod_model(3, z[0], z[1]); }

// Product map u(t,z) = (t, f_Y(z)) into R x Pod_3; domain coordinates (t, z1, z2).
inline TargetPoint eval_product(double t, double zx, double zy) {
    TargetPoint p = pod_model(3, zx, zy);
    p.flat[0] = t;
    return p;
}
inline TargetPoint eval_product(const Vec& p) { return eval_product(p[0], p[1], p[2]); }

// The non-flat factor of the product map: (t,z) |-> f_Y(z) into Pod_3.
inline TargetPoint eval_product_factor(const Vec& p) { return pod_model(3, p[1], p[2]); }

// h(x, z) = (g(x), f_K(z)) on R^4 x R^2 into R x Pod_5, where g(x) = x1^2 - x2^2
// is a degree-2 harmonic polynomial and f_K is the 5-pod model map.
inline TargetPoint eval_example3(std::span<const double, 6> p) {
    TargetPoint q = pod_model(5, p[4], p[5]);
    q.flat[0] = p[0] * p[0] - p[1] * p[1];
    return q;
}

// Analytic map with a general (possibly > 3) domain dimension; used by the
// splitting detector for the R^6 example.
struct AnalyticMap {
    int dim = 2;
    ConicalTarget target;
    std::function<TargetPoint(std::span<const double>)> eval;
};

inline AnalyticMap example3_map() {
    AnalyticMap m;
    m.dim = 6;
    m.target = ConicalTarget::make(1, 5);
    m.eval = [](std::span<const double> p) {
        if (p.size() != 6) throw std::invalid_argument("example3: expects a 6-dimensional point");
        return eval_example3(std::span<const double, 6>(p.data(), 6));
    };
    return m;
}

inline AnalyticMap as_analytic_map(const MapField& f) {
    if (f.provenance != Provenance::analytic)
        throw std::invalid_argument("as_analytic_map: field is not analytic");
    AnalyticMap m;
    m.dim = f.grid.n;
    m.target = f.target;
    m.eval = [fn = f.analytic](std::span<const double> p) {
        Vec v{0.0, 0.0, 0.0};
        for (std::size_t d = 0; d < p.size() && d < 3; ++d) v[d] = p[d];
        return fn(v);
    };
    return m;
}

// --- pointwise energy density ------------------------------------------------

// |grad u|^2 at an interior node by central metric difference quotients,
// sum_d d(u(x+h e_d), u(x-h e_d))^2 / (2h)^2.
inline double energy_density(const MapField& f, int node) {
    const Vec x = f.grid.point(node);
    const double h = f.grid.h;
    double s = 0.0;
    for (int d = 0; d < f.grid.n; ++d) {
        TargetPoint a, b;
        if (f.provenance == Provenance::analytic) {
            Vec xp = x, xm = x;
            xp[static_cast<std::size_t>(d)] += h;
            xm[static_cast<std::size_t>(d)] -= h;
            a = f.analytic(xp);
            b = f.analytic(xm);
        } else {
            const int np = f.grid.neighbor(node, d, +1);
            const int nm = f.grid.neighbor(node, d, -1);
            if (np < 0 || nm < 0) throw std::domain_error("energy_density: boundary node");
            a = f.value(np);
            b = f.value(nm);
        }
        const double q = distance(f.target, a, b) / (2.0 * h);
        s += q * q;
    }
    return s;
}

// Per-node density table; NaN marks nodes where the stencil is unavailable.
inline std::vector<double> density_table(const MapField& f) {
    std::vector<double> out(f.grid.size(), std::numeric_limits<double>::quiet_NaN());
    if (f.provenance == Provenance::analytic) {
        for (std::size_t i = 0; i < f.grid.size(); ++i) out[i] = energy_density(f, static_cast<int>(i));
    } else {
        for (int i : f.grid.interior) out[static_cast<std::size_t>(i)] = energy_density(f, i);
    }
    return out;
}

// Values on nodes whose ball-distance to the sphere is < h, ordered by node index.
inline std::vector<std::pair<int, TargetPoint>> boundary_trace(const MapField& f) {
    std::vector<std::pair<int, TargetPoint>> out;
    out.reserve(f.grid.boundary_nodes.size());
    for (int b : f.grid.boundary_nodes) out.emplace_back(b, f.value(b));
    return out;
}

}  // namespace conelab
