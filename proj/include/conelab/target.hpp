#pragma once

// Exact metric geometry of the conical targets R^j x Pod_m: a j-dimensional
// Euclidean factor times an m-pod (m rays glued at a cone point, tree metric).
// All operations are closed-form; types are immutable values.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace conelab {

inline constexpr int kMaxFlat = 4;  // implementation cap on the flat factor

struct ConicalTarget {
    int flat_dim = 0;   // j >= 0 (<= kMaxFlat)
    int ray_count = 0;  // m in {0} u {3,4,5,...}; m=2 inputs are normalized away

    int total_dim() const { return flat_dim + (ray_count > 0 ? 1 : 0); }
    bool euclidean() const { return ray_count == 0; }

    // A 2-pod is isometric to a line; such inputs are folded into the flat
    // factor (ray 0 -> +coordinate, ray 1 -> -coordinate).
    static ConicalTarget make(int flat_dim, int ray_count) {
        if (flat_dim < 0 || flat_dim > kMaxFlat)
            throw std::invalid_argument("ConicalTarget: flat_dim out of range [0," +
                                        std::to_string(kMaxFlat) + "]");
        if (ray_count == 1)
            throw std::invalid_argument("ConicalTarget: a 1-pod is not a valid target");
        if (ray_count == 2) {
            if (flat_dim + 1 > kMaxFlat)
                throw std::invalid_argument("ConicalTarget: 2-pod normalization exceeds flat cap");
            return ConicalTarget{flat_dim + 1, 0};
        }
        if (ray_count < 0) throw std::invalid_argument("ConicalTarget: negative ray_count");
        return ConicalTarget{flat_dim, ray_count};
    }

    bool operator==(const ConicalTarget&) const = default;
};

// A point of R^j x Pod_m. ray == -1 means the pod cone point (radial == 0);
// construction canonicalizes radial 0 to ray -1.
struct TargetPoint {
    std::array<double, kMaxFlat> flat{};
    int ray = -1;
    double radial = 0.0;

    TargetPoint() = default;
    TargetPoint(std::array<double, kMaxFlat> f, int r, double rad) : flat(f), ray(r), radial(rad) {
        canonicalize();
    }

    void canonicalize() {
        if (radial == 0.0) ray = -1;
        if (ray < 0) {
            ray = -1;
            radial = 0.0;
        }
    }

    bool is_cone(double tol = 0.0) const { return radial <= tol; }
};

inline TargetPoint cone_point() { return TargetPoint{}; }

inline TargetPoint make_flat_point(std::initializer_list<double> coords) {
    TargetPoint p;
    int i = 0;
    for (double c : coords) {
        if (i >= kMaxFlat) throw std::invalid_argument("make_flat_point: too many coordinates");
        p.flat[i++] = c;
    }
    return p;
}

inline TargetPoint make_pod_point(int ray, double radial, std::initializer_list<double> flat = {}) {
    if (radial < 0) throw std::invalid_argument("make_pod_point: negative radial");
    TargetPoint p = make_flat_point(flat);
    p.ray = ray;
    p.radial = radial;
    p.canonicalize();
    return p;
}

inline void check_point(const ConicalTarget& t, const TargetPoint& p) {
    if (p.radial < 0) throw std::invalid_argument("TargetPoint: negative radial");
    if (p.ray >= t.ray_count)
        throw std::invalid_argument("TargetPoint: ray index exceeds target ray_count");
    if (p.ray >= 0 && t.ray_count == 0)
        throw std::invalid_argument("TargetPoint: pod coordinate on a Euclidean target");
}

// Tree distance of the pod parts: |ra - rb| on a shared ray or through the
// cone point otherwise.
inline double pod_distance(const TargetPoint& a, const TargetPoint& b) {
    if (a.ray == b.ray || a.ray < 0 || b.ray < 0) return std::abs(a.radial - b.radial);
    return a.radial + b.radial;
}

inline double distance(const ConicalTarget& t, const TargetPoint& a, const TargetPoint& b) {
    check_point(t, a);
    check_point(t, b);
    double s = 0.0;
    for (int i = 0; i < t.flat_dim; ++i) {
        const double d = a.flat[i] - b.flat[i];
        s += d * d;
    }
    const double pd = pod_distance(a, b);
    return std::sqrt(s + pd * pd);
}

inline double distance2(const ConicalTarget& t, const TargetPoint& a, const TargetPoint& b) {
    const double d = distance(t, a, b);
    return d * d;
}

inline double distance_to_cone(const ConicalTarget& t, const TargetPoint& p) {
    return distance(t, p, TargetPoint{});
}

// Point at parameter lam along the unique geodesic from a to b.
inline TargetPoint geodesic_point(const ConicalTarget& t, const TargetPoint& a,
                                  const TargetPoint& b, double lam) {
    if (lam < 0.0 || lam > 1.0) throw std::invalid_argument("geodesic_point: lambda outside [0,1]");
    check_point(t, a);
    check_point(t, b);
    TargetPoint out;
    for (int i = 0; i < t.flat_dim; ++i) out.flat[i] = (1.0 - lam) * a.flat[i] + lam * b.flat[i];
    if (a.ray == b.ray || a.ray < 0 || b.ray < 0) {
        const int ray = a.ray >= 0 ? a.ray : b.ray;
        out.ray = ray;
        out.radial = (1.0 - lam) * a.radial + lam * b.radial;
    } else {
        // signed coordinate along the line ray_a u {0} u ray_b
        const double s = (1.0 - lam) * a.radial - lam * b.radial;
        if (s >= 0) {
            out.ray = a.ray;
            out.radial = s;
        } else {
            out.ray = b.ray;
            out.radial = -s;
        }
    }
    out.canonicalize();
    return out;
}

// Scaling about the cone point 0_X.
inline TargetPoint cone_scale(const ConicalTarget& t, const TargetPoint& p, double factor) {
    if (factor < 0) throw std::invalid_argument("cone_scale: negative factor");
    check_point(t, p);
    TargetPoint out = p;
    for (int i = 0; i < t.flat_dim; ++i) out.flat[i] *= factor;
    out.radial *= factor;
    out.canonicalize();
    return out;
}

// Unique minimizer of sum w_i d^2(p, p_i). The flat part is the weighted
// arithmetic mean; on the pod, ray l wins iff its "pull"
//   (sum_{i on l} w_i r_i - sum_{i not on l} w_i r_i) / sum w
// is positive, and at most one ray can have positive pull.
inline TargetPoint frechet_mean(const ConicalTarget& t, const std::vector<TargetPoint>& pts,
                                const std::vector<double>& w) {
    if (pts.empty()) throw std::invalid_argument("frechet_mean: empty input");
    if (pts.size() != w.size()) throw std::invalid_argument("frechet_mean: size mismatch");
    double sw = 0.0;
    for (double wi : w) {
        if (wi < 0) throw std::invalid_argument("frechet_mean: negative weight");
        sw += wi;
    }
    if (sw <= 0) throw std::invalid_argument("frechet_mean: weights sum to zero");

    TargetPoint out;
    for (int i = 0; i < t.flat_dim; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < pts.size(); ++k) s += w[k] * pts[k].flat[i];
        out.flat[i] = s / sw;
    }
    if (t.ray_count > 0) {
        std::vector<double> on(static_cast<std::size_t>(t.ray_count), 0.0);
        double all = 0.0;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            check_point(t, pts[k]);
            if (pts[k].ray >= 0) on[static_cast<std::size_t>(pts[k].ray)] += w[k] * pts[k].radial;
            all += w[k] * pts[k].radial;
        }
        int best_ray = -1;
        double best_pull = 0.0;
        for (int l = 0; l < t.ray_count; ++l) {
            const double pull = (2.0 * on[static_cast<std::size_t>(l)] - all) / sw;
            if (pull > best_pull) {
                best_pull = pull;
                best_ray = l;
            }
        }
        out.ray = best_ray;
        out.radial = best_ray >= 0 ? best_pull : 0.0;
    }
    out.canonicalize();
    return out;
}

// Isometric chart of a point set into R^{total_dim}, available iff the pod
// parts touch at most two distinct rays (two rays form a line).
struct FlatChart {
    int flat_dim = 0;
    int ray_pos = -1;  // mapped to +radial
    int ray_neg = -1;  // mapped to -radial

    std::array<double, kMaxFlat + 1> embed(const TargetPoint& p) const {
        std::array<double, kMaxFlat + 1> out{};
        for (int i = 0; i < flat_dim; ++i) out[static_cast<std::size_t>(i)] = p.flat[i];
        double c = 0.0;
        if (p.ray >= 0) {
            if (p.ray == ray_pos)
                c = p.radial;
            else if (p.ray == ray_neg)
                c = -p.radial;
            else
                throw std::invalid_argument("FlatChart: point on a ray outside the chart");
        }
        out[static_cast<std::size_t>(flat_dim)] = c;
        return out;
    }
};

inline std::optional<FlatChart> lies_in_flat(const ConicalTarget& t,
                                             const std::vector<TargetPoint>& pts,
                                             double radial_tol = 0.0) {
    if (pts.empty()) throw std::invalid_argument("lies_in_flat: empty input");
    FlatChart chart;
    chart.flat_dim = t.flat_dim;
    if (t.ray_count == 0) return chart;
    for (const auto& p : pts) {
        check_point(t, p);
        if (p.ray < 0 || p.radial <= radial_tol) continue;
        if (chart.ray_pos < 0 || chart.ray_pos == p.ray) {
            chart.ray_pos = p.ray;
        } else if (chart.ray_neg < 0 || chart.ray_neg == p.ray) {
            chart.ray_neg = p.ray;
        } else {
            return std::nullopt;  // three rays: genuinely branched
        }
    }
    return chart;
}

}  // namespace conelab
