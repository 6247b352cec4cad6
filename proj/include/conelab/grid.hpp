#pragma once

// Axis-aligned lattice of spacing h intersected with a closed ball in R^n,
// n in {2,3}. Node coordinates are reproduced bit-exactly from (center,R,h)
// through index-based addressing; node order is lexicographic in the integer
// coordinates.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace conelab {

using Vec = std::array<double, 3>;

inline Vec vadd(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec vsub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec vscale(const Vec& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline double vdot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double vnorm2(const Vec& a) { return vdot(a, a); }
inline double vnorm(const Vec& a) { return std::sqrt(vnorm2(a)); }

struct DomainGrid {
    int n = 2;
    Vec center{0.0, 0.0, 0.0};
    double radius = 1.0;
    double h = 1.0 / 16.0;

    std::vector<std::array<int, 3>> idx;  // integer lattice coordinates per node
    std::vector<int> interior;            // nodes with ball-distance >= h to the sphere
    std::vector<int> boundary_nodes;      // the rest (ball-distance < h)

    static DomainGrid make(int n, const Vec& center, double radius, double h) {
        if (n != 2 && n != 3) throw std::invalid_argument("DomainGrid: n must be 2 or 3");
        if (radius <= 0 || h <= 0) throw std::invalid_argument("DomainGrid: radius and h must be positive");
        if (h > radius / 8.0) throw std::invalid_argument("DomainGrid: spacing must satisfy h <= R/8");
        DomainGrid g;
        g.n = n;
        g.center = center;
        g.radius = radius;
        g.h = h;
        const int N = static_cast<int>(std::floor(radius / h + 1e-12));
        const double R2 = radius * radius;
        const double rin = radius - h;
        const double rin2 = rin * rin;
        const int kmin = (n == 3) ? -N : 0;
        const int kmax = (n == 3) ? N : 0;
        for (int i = -N; i <= N; ++i) {
            for (int j = -N; j <= N; ++j) {
                for (int k = kmin; k <= kmax; ++k) {
                    const double x = h * i, y = h * j, z = h * k;
                    const double r2 = x * x + y * y + z * z;
                    if (r2 > R2) continue;
                    const int node = static_cast<int>(g.idx.size());
                    g.idx.push_back({i, j, k});
                    g.lookup_.emplace(pack(i, j, k), node);
                    if (r2 > rin2)
                        g.boundary_nodes.push_back(node);
                    else
                        g.interior.push_back(node);
                }
            }
        }
        return g;
    }

    std::size_t size() const { return idx.size(); }

    Vec point(int node) const {
        const auto& q = idx[static_cast<std::size_t>(node)];
        return {center[0] + h * q[0], center[1] + h * q[1], center[2] + h * q[2]};
    }

    int find(int i, int j, int k) const {
        auto it = lookup_.find(pack(i, j, k));
        return it == lookup_.end() ? -1 : it->second;
    }

    int find(const std::array<int, 3>& q) const { return find(q[0], q[1], q[2]); }

    // Axis neighbor (step +1/-1 along axis d); -1 when outside the ball.
    int neighbor(int node, int d, int step) const {
        auto q = idx[static_cast<std::size_t>(node)];
        q[static_cast<std::size_t>(d)] += step;
        return find(q);
    }

    bool is_boundary(int node) const {
        const Vec p = point(node);
        const double r = vnorm(vsub(p, center));
        return radius - r < h;
    }

    bool has_all_neighbors(int node) const {
        for (int d = 0; d < n; ++d)
            if (neighbor(node, d, +1) < 0 || neighbor(node, d, -1) < 0) return false;
        return true;
    }

    // Node parity for red-black sweeps.
    int parity(int node) const {
        const auto& q = idx[static_cast<std::size_t>(node)];
        return ((q[0] + q[1] + q[2]) % 2 + 2) % 2;
    }

    // Integer bounding box of the ball B_r(x); clipped to the lattice extent.
    struct Box {
        int lo[3], hi[3];
    };
    Box box_around(const Vec& x, double r) const {
        Box b{};
        for (int d = 0; d < 3; ++d) {
            if (d < n) {
                b.lo[d] = static_cast<int>(std::ceil((x[d] - center[d] - r) / h - 1e-12));
                b.hi[d] = static_cast<int>(std::floor((x[d] - center[d] + r) / h + 1e-12));
            } else {
                b.lo[d] = 0;
                b.hi[d] = 0;
            }
        }
        return b;
    }

    // Largest quadrature radius about x: balls must stay inside the lattice
    // (minus one cell for fields that need neighbor stencils).
    double admissible_radius(const Vec& x, int stencil_cells = 1) const {
        const double d = vnorm(vsub(x, center));
        return radius - d - stencil_cells * h;
    }

  private:
    static std::int64_t pack(int i, int j, int k) {
        const auto u = [](int v) { return static_cast<std::int64_t>(v + (1 << 20)); };
        return u(i) | (u(j) << 21) | (u(k) << 42);
    }
    std::unordered_map<std::int64_t, int> lookup_;
};

}  // namespace conelab
