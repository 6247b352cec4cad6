#pragma once

// Monotone quantities of a map: energy E, height I, order Ord = rE/I, their
// smoothed versions built from the fixed piecewise-linear mollifier
//   phi = 1 on [0,1/2], 2-2t on [1/2,1], 0 beyond,
// frequency pinching, the two identity residuals, rescalings about cone-point
// centers, and tangent-map extraction.
//
// Smoothed quantities are volume sums on the lattice. The weight factor
// (phi, or the annulus indicator times |y-x|^{-1}) is averaged over each cell
// from a subgrid of sample points; the field factor stays at the cell
// midpoint. This keeps the radius-ladder noise well below the documented
// monotonicity tolerances.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "field.hpp"
#include "parallel.hpp"
#include "solver.hpp"

namespace conelab {

inline double mollifier(double t) {
    if (t <= 0.5) return 1.0;
    if (t < 1.0) return 2.0 - 2.0 * t;
    return 0.0;
}

struct SmoothedOrder {
    double E_phi = 0.0;
    double I_phi = 0.0;
    double ord = 0.0;
};

struct FrequencyProfile {
    Vec center{};
    std::vector<double> r, E, I, ord, E_phi, I_phi, ord_phi;
};

// Cached per-field tables backing all quadratures of one field.
class FieldQuadrature {
  public:
    explicit FieldQuadrature(const MapField& f, int workers = 0)
        : f_(&f), dens_(f.grid.size()), d2cone_(f.grid.size()) {
        const bool analytic = f.provenance == Provenance::analytic;
        std::vector<char> ok(f.grid.size(), analytic ? 1 : 0);
        if (!analytic)
            for (int i : f.grid.interior) ok[static_cast<std::size_t>(i)] = 1;
        parallel_for(
            f.grid.size(),
            [&](std::size_t i) {
                const int node = static_cast<int>(i);
                dens_[i] = ok[i] ? energy_density(f, node) : std::numeric_limits<double>::quiet_NaN();
                d2cone_[i] = distance2(f.target, f.value(node), TargetPoint{});
            },
            workers);
    }

    const MapField& field() const { return *f_; }
    double min_radius() const { return 8.0 * f_->grid.h; }

    // Largest radius r so that B_r(x) quadratures are fully supported.
    double max_radius(const Vec& x) const {
        const int margin = f_->provenance == Provenance::analytic ? 1 : 2;
        return f_->grid.admissible_radius(x, margin);
    }

    void require_admissible(const Vec& x, double r) const {
        if (r > max_radius(x) + 1e-12)
            throw std::domain_error("quadrature ball exits the grid (r too large for this center)");
    }

    // Unsmoothed ball energy E(x,r) = int_{B_r(x)} |grad u|^2.
    double ball_energy(const Vec& x, double r) const {
        require_admissible(x, r);
        double E = 0.0, ignored = 0.0;
        volume_sums(x, r, /*want_smoothed=*/false, E, ignored);
        return E;
    }

    // Height I(x,r) = int_{bd B_r(x)} d^2(u(y), u(x)) by sphere quadrature with
    // geodesic interpolation of the field. Analytic fields sample the closure
    // directly, so the grid-resolution floor applies to solved fields only.
    double height(const Vec& x, double r) const {
        const auto& g = f_->grid;
        const bool analytic = f_->provenance == Provenance::analytic;
        if (!analytic) {
            if (r < 4.0 * g.h) throw std::domain_error("height: radius below 4h");
            require_admissible(x, r);
        }
        const TargetPoint ux = f_->eval(x);
        const double pi = std::numbers::pi;
        if (g.n == 2) {
            const int M = std::max(64, static_cast<int>(std::ceil(2.0 * pi * r / g.h)));
            const double s = parallel_sum(static_cast<std::size_t>(M), [&](std::size_t k) {
                const double th = 2.0 * pi * (static_cast<double>(k) + 0.5) / M;
                const Vec y{x[0] + r * std::cos(th), x[1] + r * std::sin(th), x[2]};
                return distance2(f_->target, f_->eval(y), ux);
            });
            return s * (2.0 * pi * r / M);
        }
        const int P = std::max(24, static_cast<int>(std::ceil(pi * r / g.h)));
        const int Q = 2 * P;
        const double s = parallel_sum(static_cast<std::size_t>(P) * Q, [&](std::size_t pq) {
            const int p = static_cast<int>(pq) / Q;
            const int q = static_cast<int>(pq) % Q;
            const double th = pi * (p + 0.5) / P;
            const double ph = 2.0 * pi * (q + 0.5) / Q;
            const Vec y{x[0] + r * std::sin(th) * std::cos(ph), x[1] + r * std::sin(th) * std::sin(ph),
                        x[2] + r * std::cos(th)};
            return distance2(f_->target, f_->eval(y), ux) * std::sin(th);
        });
        return s * r * r * (pi / P) * (2.0 * pi / Q);
    }

    double order(const Vec& x, double r) const {
        const double I = height(x, r);
        if (I < 1e-14) throw std::domain_error("order: height vanishes (constant map)");
        return r * ball_energy(x, r) / I;
    }

    SmoothedOrder smoothed(const Vec& x, double r) const {
        if (r < min_radius() - 1e-12) throw std::domain_error("smoothed_order: radius below 8h");
        require_admissible(x, r);
        SmoothedOrder out;
        volume_sums(x, r, /*want_smoothed=*/true, out.E_phi, out.I_phi);
        if (out.I_phi < 1e-14) throw std::domain_error("smoothed_order: I_phi vanishes (constant map)");
        out.ord = r * out.E_phi / out.I_phi;
        return out;
    }

    double smoothed_ord(const Vec& x, double r) const { return smoothed(x, r).ord; }

    // Ord_phi with the radius clamped up to the smallest admissible value; the
    // grid proxy for radii the lattice cannot resolve (including "r = 0").
    double smoothed_ord_clamped(const Vec& x, double r, bool* clamped = nullptr) const {
        const double r_eff = std::max(r, min_radius());
        if (clamped) *clamped = r_eff != r;
        return smoothed(x, r_eff).ord;
    }

    double pinching(const Vec& x, double s, double r) const {
        if (!(s < r)) throw std::invalid_argument("pinching: needs s < r");
        return smoothed_ord(x, r) - smoothed_ord(x, s);
    }

    // Relative residual of s^{1-n} I_phi(x,s) = r^{1-n} I_phi(x,r)
    //   exp(-2 int_s^r Ord_phi(x,t) dt/t), integral by 32-point log trapezoid.
    double height_identity_residual(const Vec& x, double s, double r) const {
        if (!(s < r)) throw std::invalid_argument("height_identity_residual: needs s < r");
        const int n = f_->grid.n;
        const int K = 32;
        const double dxi = std::log(r / s) / (K - 1);
        double integral = 0.0;
        double prev = smoothed_ord(x, s);
        for (int k = 1; k < K; ++k) {
            const double t = s * std::exp(dxi * k);
            const double cur = smoothed_ord(x, t);
            integral += 0.5 * (prev + cur) * dxi;
            prev = cur;
        }
        const double lhs = std::pow(s, 1 - n) * smoothed(x, s).I_phi;
        const double rhs = std::pow(r, 1 - n) * smoothed(x, r).I_phi * std::exp(-2.0 * integral);
        return std::abs(lhs - rhs) / lhs;
    }

    // Relative residual of the radial-derivative identity
    //   d_r E_phi = ((n-2)/r) E_phi - (2/r^2) int |d_nu u|^2 |y-x| phi'(|y-x|/r).
    double energy_derivative_residual(const Vec& x, double r) const {
        const double h = f_->grid.h;
        const double lhs = (smoothed(x, r + h).E_phi - smoothed(x, r - h).E_phi) / (2.0 * h);
        const int n = f_->grid.n;
        const double radial_term = radial_derivative_sum(x, r);
        const double rhs = (n - 2) / r * smoothed(x, r).E_phi + (2.0 / (r * r)) * radial_term;
        return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-14});
    }

    FrequencyProfile profile(const Vec& x, const std::vector<double>& radii) const {
        FrequencyProfile p;
        p.center = x;
        for (double r : radii) {
            const auto sm = smoothed(x, r);
            const double I = height(x, r);
            const double E = ball_energy(x, r);
            p.r.push_back(r);
            p.E.push_back(E);
            p.I.push_back(I);
            p.ord.push_back(I < 1e-14 ? std::numeric_limits<double>::quiet_NaN() : r * E / I);
            p.E_phi.push_back(sm.E_phi);
            p.I_phi.push_back(sm.I_phi);
            p.ord_phi.push_back(sm.ord);
        }
        return p;
    }

  private:
    // Shared pass for E (indicator weight), E_phi and I_phi. Weights are
    // averaged over each cell from an S^n subgrid; the subgrid is finer in 2-d
    // where the monotonicity tolerances are tight.
    void volume_sums(const Vec& x, double r, bool want_smoothed, double& first, double& second) const {
        const auto& g = f_->grid;
        const int n = g.n;
        const int S = (n == 2) ? 16 : (r >= 0.5 ? 2 : 4);
        const double cell = std::pow(g.h, n);
        const auto box = g.box_around(x, r + g.h);
        const bool analytic = f_->provenance == Provenance::analytic;
        const double inv_ss = 1.0 / std::pow(static_cast<double>(S), n);

        std::vector<double> sub(static_cast<std::size_t>(S));
        for (int a = 0; a < S; ++a) sub[static_cast<std::size_t>(a)] = ((a + 0.5) / S - 0.5) * g.h;

        const int nj = box.hi[1] - box.lo[1] + 1;
        const int nk = box.hi[2] - box.lo[2] + 1;
        const int ni = box.hi[0] - box.lo[0] + 1;
        const std::size_t total = static_cast<std::size_t>(ni) * nj * nk;

        std::vector<double> outA(total, 0.0), outB(total, 0.0);
        parallel_for(total, [&](std::size_t t) {
            const int i = box.lo[0] + static_cast<int>(t) / (nj * nk);
            const int rem = static_cast<int>(t) % (nj * nk);
            const int j = box.lo[1] + rem / nk;
            const int k = box.lo[2] + rem % nk;
            const Vec y{g.center[0] + g.h * i, g.center[1] + g.h * j, g.center[2] + g.h * k};
            const double dist = vnorm(vsub(y, x));
            if (dist > r + g.h) return;

            double dens, d2c;
            const int node = g.find(i, j, k);
            if (node >= 0) {
                dens = dens_[static_cast<std::size_t>(node)];
                d2c = d2cone_[static_cast<std::size_t>(node)];
            } else if (analytic) {
                // off-lattice rim cell: evaluate the closure directly
                dens = analytic_density(y);
                d2c = distance2(f_->target, f_->analytic(y), TargetPoint{});
            } else {
                return;
            }
            if (std::isnan(dens)) return;

            double wA = 0.0, wB = 0.0;
            for (int a = 0; a < S; ++a)
                for (int b = 0; b < S; ++b) {
                    if (n == 2) {
                        const double dx = y[0] + sub[static_cast<std::size_t>(a)] - x[0];
                        const double dy = y[1] + sub[static_cast<std::size_t>(b)] - x[1];
                        accumulate_weight(std::sqrt(dx * dx + dy * dy), r, want_smoothed, wA, wB);
                    } else {
                        for (int c = 0; c < S; ++c) {
                            const double dx = y[0] + sub[static_cast<std::size_t>(a)] - x[0];
                            const double dy = y[1] + sub[static_cast<std::size_t>(b)] - x[1];
                            const double dz = y[2] + sub[static_cast<std::size_t>(c)] - x[2];
                            accumulate_weight(std::sqrt(dx * dx + dy * dy + dz * dz), r, want_smoothed,
                                              wA, wB);
                        }
                    }
                }
            outA[t] = dens * wA * inv_ss;
            outB[t] = d2c * wB * inv_ss;
        });
        double sA = 0.0, sB = 0.0;
        for (std::size_t t = 0; t < total; ++t) {
            sA += outA[t];
            sB += outB[t];
        }
        first = sA * cell;
        second = sB * cell;
    }

    static void accumulate_weight(double dist, double r, bool smoothed, double& wA, double& wB) {
        const double t = dist / r;
        if (smoothed) {
            wA += mollifier(t);
            if (t > 0.5 && t < 1.0) wB += 2.0 / std::max(dist, 1e-300);
        } else {
            if (t < 1.0) wA += 1.0;
        }
    }

    double analytic_density(const Vec& y) const {
        const double h = f_->grid.h;
        double s = 0.0;
        for (int d = 0; d < f_->grid.n; ++d) {
            Vec yp = y, ym = y;
            yp[static_cast<std::size_t>(d)] += h;
            ym[static_cast<std::size_t>(d)] -= h;
            const double q = distance(f_->target, f_->analytic(yp), f_->analytic(ym)) / (2.0 * h);
            s += q * q;
        }
        return s;
    }

    double radial_derivative_sum(const Vec& x, double r) const {
        const auto& g = f_->grid;
        const auto box = g.box_around(x, r);
        const double cell = std::pow(g.h, g.n);
        const double delta = 0.5 * g.h;
        const int nj = box.hi[1] - box.lo[1] + 1;
        const int nk = box.hi[2] - box.lo[2] + 1;
        const int ni = box.hi[0] - box.lo[0] + 1;
        const std::size_t total = static_cast<std::size_t>(ni) * nj * nk;
        const double s = parallel_sum(total, [&](std::size_t t) {
            const int i = box.lo[0] + static_cast<int>(t) / (nj * nk);
            const int rem = static_cast<int>(t) % (nj * nk);
            const int j = box.lo[1] + rem / nk;
            const int k = box.lo[2] + rem % nk;
            if (g.find(i, j, k) < 0 && f_->provenance != Provenance::analytic) return 0.0;
            const Vec y{g.center[0] + g.h * i, g.center[1] + g.h * j, g.center[2] + g.h * k};
            const double dist = vnorm(vsub(y, x));
            if (dist <= 0.5 * r || dist >= r) return 0.0;
            const Vec nu = vscale(vsub(y, x), 1.0 / dist);
            const TargetPoint a = f_->eval(vadd(y, vscale(nu, delta)));
            const TargetPoint b = f_->eval(vsub(y, vscale(nu, delta)));
            const double q = distance(f_->target, a, b) / (2.0 * delta);
            // -phi'(t) = 2 on (1/2, 1)
            return q * q * dist * 2.0;
        });
        return s * cell;
    }

    const MapField* f_;
    std::vector<double> dens_;
    std::vector<double> d2cone_;
};

// --- free-function forms (convenience; build a throwaway context) -----------

inline double height(const MapField& f, const Vec& x, double r) {
    return FieldQuadrature(f).height(x, r);
}
inline double order(const MapField& f, const Vec& x, double r) {
    return FieldQuadrature(f).order(x, r);
}
inline SmoothedOrder smoothed_order(const MapField& f, const Vec& x, double r) {
    return FieldQuadrature(f).smoothed(x, r);
}
inline double pinching(const MapField& f, const Vec& x, double s, double r) {
    return FieldQuadrature(f).pinching(x, s, r);
}

// --- rescalings and tangent maps --------------------------------------------

// d(u(x), 0_X) gate: a center qualifies as a cone-point center when its value
// sits within interpolation error of 0_X.
inline double cone_gate(const MapField& f, const Vec& x) {
    const double h = f.grid.h;
    double lip = 0.0;
    for (int d = 0; d < f.grid.n; ++d) {
        Vec xp = x, xm = x;
        xp[static_cast<std::size_t>(d)] += h;
        xm[static_cast<std::size_t>(d)] -= h;
        lip = std::max(lip, distance(f.target, f.eval(xp), f.eval(xm)) / (2.0 * h));
    }
    return std::max(1e-12, 2.0 * h * lip);
}

inline bool at_cone_point(const MapField& f, const Vec& x) {
    return distance_to_cone(f.target, f.eval(x)) <= cone_gate(f, x);
}

// u_lambda(y) = u(x + lambda y) scaled about the cone point by
// (lambda^{1-n} I(x,lambda))^{-1/2}; the result lives on B_1.
inline MapField rescale(const MapField& f, const Vec& x, double lambda, double h_out = 0.0) {
    if (!at_cone_point(f, x))
        throw std::domain_error("rescale: u(x) is not at the cone point");
    FieldQuadrature q(f);
    const double I = q.height(x, lambda);
    if (I < 1e-300) throw std::domain_error("rescale: vanishing height");
    const double s = 1.0 / std::sqrt(std::pow(lambda, 1 - f.grid.n) * I);
    if (h_out <= 0.0) h_out = std::clamp(f.grid.h / lambda, f.grid.h, 0.125);
    const DomainGrid out = DomainGrid::make(f.grid.n, Vec{0, 0, 0}, 1.0, h_out);
    const ConicalTarget target = f.target;
    if (f.provenance == Provenance::analytic) {
        AnalyticFn base = f.analytic;
        AnalyticFn fn = [base, target, x, lambda, s](const Vec& y) {
            return cone_scale(target, base(vadd(x, vscale(y, lambda))), s);
        };
        return MapField::from_analytic(out, target, fn);
    }
    if (vnorm(vsub(x, f.grid.center)) + lambda > f.grid.radius - 2.0 * f.grid.h + 1e-12)
        throw std::domain_error("rescale: lambda ball exits the grid");
    MapField g = MapField::zeros(out, target);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Vec y = out.point(static_cast<int>(i));
        g.set(static_cast<int>(i), cone_scale(target, f.interpolate(vadd(x, vscale(y, lambda))), s));
    }
    return g;
}

struct TangentResult {
    MapField field;                   // the last rescaling
    std::vector<double> diagnostics;  // sup distance between consecutive rescalings
    bool converged = false;
};

inline TangentResult tangent_map(const MapField& f, const Vec& x, const std::vector<double>& ladder,
                                 double h_out = 0.0, double conv_tol = 0.01) {
    if (ladder.empty()) throw std::invalid_argument("tangent_map: empty ladder");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (!(ladder[i] < ladder[i - 1])) throw std::invalid_argument("tangent_map: ladder must decrease");
    if (h_out <= 0.0) h_out = f.grid.n == 2 ? 1.0 / 32 : 1.0 / 16;

    TangentResult res{rescale(f, x, ladder[0], h_out), {}, false};
    for (std::size_t i = 1; i < ladder.size(); ++i) {
        MapField next = rescale(f, x, ladder[i], h_out);
        double sup = 0.0;
        for (std::size_t node = 0; node < next.grid.size(); ++node)
            sup = std::max(sup, distance(next.target, next.value(static_cast<int>(node)),
                                         res.field.value(static_cast<int>(node))));
        res.diagnostics.push_back(sup);
        res.field = std::move(next);
    }
    res.converged = res.diagnostics.empty() || res.diagnostics.back() <= conv_tol;
    return res;
}

// Empirical ratio Ord_phi(y,r) / (Ord_phi(x,16r)+1); a lower estimate of the
// doubling constant. Diagnostic only.
inline double order_doubling_ratio(const FieldQuadrature& q, const Vec& x, const Vec& y, double r) {
    if (vnorm(vsub(y, x)) > r / 4.0 + 1e-12)
        throw std::invalid_argument("order_doubling_ratio: y outside B_{r/4}(x)");
    return q.smoothed_ord(y, r) / (q.smoothed_ord(x, 16.0 * r) + 1.0);
}

}  // namespace conelab
