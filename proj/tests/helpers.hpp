#pragma once

#include <random>

#include "conelab/field.hpp"

namespace conelab::testing {

inline MapField tripod_field(double h = 1.0 / 64, double R = 1.0) {
    const auto g = DomainGrid::make(2, Vec{0, 0, 0}, R, h);
    return MapField::from_analytic(g, ConicalTarget::make(0, 3),
                                   [](const Vec& p) { return eval_tripod(p); });
}

inline MapField linear_field(double h = 1.0 / 64, double R = 1.0, int n = 2) {
    const auto g = DomainGrid::make(n, Vec{0, 0, 0}, R, h);
    return MapField::from_analytic(g, ConicalTarget::make(1, 0), [](const Vec& p) {
        TargetPoint t;
        t.flat[0] = p[0];
        return t;
    });
}

inline MapField product_field(double h = 1.0 / 16, double R = 1.0) {
    const auto g = DomainGrid::make(3, Vec{0, 0, 0}, R, h);
    return MapField::from_analytic(g, ConicalTarget::make(1, 3),
                                   [](const Vec& p) { return eval_product(p); });
}

inline MapField product_factor_field(double h = 1.0 / 16, double R = 1.0) {
    const auto g = DomainGrid::make(3, Vec{0, 0, 0}, R, h);
    return MapField::from_analytic(g, ConicalTarget::make(0, 3),
                                   [](const Vec& p) { return eval_product_factor(p); });
}

// Random valid point of a target, bounded coordinates.
inline TargetPoint random_point(const ConicalTarget& t, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    TargetPoint p;
    for (int a = 0; a < t.flat_dim; ++a) p.flat[a] = uni(rng);
    if (t.ray_count > 0 && pos(rng) < 0.85) {
        p.ray = static_cast<int>(pos(rng) * t.ray_count) % t.ray_count;
        p.radial = pos(rng);
    }
    p.canonicalize();
    return p;
}

}  // namespace conelab::testing
