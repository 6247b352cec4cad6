#include <catch2/catch_amalgamated.hpp>
#include <numbers>
#include <random>

#include "conelab/field.hpp"
#include "helpers.hpp"

using namespace conelab;

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(DomainGrid::make(2, Vec{0, 0, 0}, 1.0, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(DomainGrid::make(4, Vec{0, 0, 0}, 1.0, 0.1), std::invalid_argument);
    const auto g = DomainGrid::make(2, Vec{0, 0, 0}, 1.0, 1.0 / 16);
    // index-based addressing is reproducible
    const auto g2 = DomainGrid::make(2, Vec{0, 0, 0}, 1.0, 1.0 / 16);
    REQUIRE(g.size() == g2.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(g.point(static_cast<int>(i))[0] == g2.point(static_cast<int>(i))[0]);
        CHECK(g.point(static_cast<int>(i))[1] == g2.point(static_cast<int>(i))[1]);
    }
    // interior nodes have full stencils
    for (int node : g.interior) CHECK(g.has_all_neighbors(node));
}

TEST_CASE("boundary trace counts and values") {
    const auto f = testing::tripod_field(1.0 / 64, 1.0);
    const auto trace = boundary_trace(f);
    // lattice-circle count: nodes in the annulus (1-h, 1]
    std::size_t expect = 0;
    const int N = 64;
    for (int i = -N; i <= N; ++i)
        for (int j = -N; j <= N; ++j) {
            const double r2 = (i * i + j * j) / 4096.0;
            if (r2 <= 1.0 && r2 > (1.0 - 1.0 / 64) * (1.0 - 1.0 / 64)) ++expect;
        }
    CHECK(trace.size() == expect);
    const double predicted = 2 * std::numbers::pi * 64;
    CHECK(std::abs(static_cast<double>(trace.size()) - predicted) <= 0.02 * predicted);
    // trace values at radius ~1 follow |cos(3 theta/2)|
    for (const auto& [node, p] : trace) {
        const Vec x = f.grid.point(node);
        const double r = vnorm(x);
        const double expect_rad =
            std::pow(r, 1.5) * std::abs(std::cos(1.5 * std::atan2(x[1], x[0])));
        CHECK(p.radial == Catch::Approx(expect_rad).margin(1e-12));
    }
    // a constant field has a constant trace
    const auto g = DomainGrid::make(2, Vec{0, 0, 0}, 1.0, 1.0 / 16);
    auto cf = MapField::from_analytic(g, ConicalTarget::make(0, 3),
                                      [](const Vec&) { return make_pod_point(1, 0.5); });
    for (const auto& [node, p] : boundary_trace(cf)) CHECK(distance(cf.target, p, make_pod_point(1, 0.5)) == 0.0);
}

TEST_CASE("tripod map values") {
    SECTION("principal sector") {
        const auto p = eval_tripod(0.25, 0.0);
        CHECK(p.ray == 1);
        CHECK(p.radial == Catch::Approx(std::pow(0.25, 1.5)).margin(1e-15));  // 0.125
    }
    SECTION("sector boundary maps to the cone point") {
        const auto p = eval_tripod(0.5 * std::cos(std::numbers::pi / 3),
                                    0.5 * std::sin(std::numbers::pi / 3));
        CHECK(p.radial <= 1e-12);
    }
    SECTION("rotated sector") {
        const double th = 2 * std::numbers::pi / 3;
        const auto p = eval_tripod(0.25 * std::cos(th), 0.25 * std::sin(th));
        CHECK(p.ray == 2);
        CHECK(p.radial == Catch::Approx(0.125).margin(1e-12));
    }
}

TEST_CASE("tripod map is continuous across sector boundaries") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ur(0.05, 1.0), ueps(1e-7, 1e-5);
    const auto Y = ConicalTarget::make(0, 3);
    const double boundaries[3] = {std::numbers::pi / 3, -std::numbers::pi / 3, std::numbers::pi};
    for (int it = 0; it < 1000; ++it) {
        const double r = ur(rng), eps = ueps(rng);
        const double tb = boundaries[it % 3];
        const auto a = eval_tripod(r * std::cos(tb - eps), r * std::sin(tb - eps));
        const auto b = eval_tripod(r * std::cos(tb + eps), r * std::sin(tb + eps));
        CHECK(distance(Y, a, b) <= 4.0 * r * eps);  // both radials are O(r^{3/2} eps)
    }
}

TEST_CASE("tripod map is homogeneous of degree 3/2") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(-1.0, 1.0), ul(0.05, 1.0);
    const auto Y = ConicalTarget::make(0, 3);
    for (int it = 0; it < 500; ++it) {
        const double zx = uni(rng), zy = uni(rng), l = ul(rng);
        const auto lhs = eval_tripod(l * zx, l * zy);
        const auto rhs = cone_scale(Y, eval_tripod(zx, zy), std::pow(l, 1.5));
        CHECK(distance(Y, lhs, rhs) <= 1e-14);
    }
}

TEST_CASE("product and example3 evaluations") {
    const auto P = ConicalTarget::make(1, 3);
    SECTION("points on the singular axis") {
        const auto p = eval_product(0.7, 0.0, 0.0);
        CHECK(p.flat[0] == 0.7);
        CHECK(p.is_cone());
    }
    SECTION("slices apply the tripod map") {
        const auto p = eval_product(0.0, 0.25, 0.0);
        CHECK(p.flat[0] == 0.0);
        CHECK(p.ray == 1);
        CHECK(p.radial == Catch::Approx(0.125));
        CHECK(distance(P, eval_product(0, 0, 0), TargetPoint{}) == 0.0);
    }
    SECTION("example3 flat part is the harmonic polynomial") {
        const std::array<double, 6> e1{1, 0, 0, 0, 0, 0};
        auto p = eval_example3(std::span<const double, 6>(e1.data(), 6));
        CHECK(p.flat[0] == 1.0);
        CHECK(p.is_cone());
        const std::array<double, 6> diag{0.4, 0.4, 0.1, -0.2, 0, 0};
        p = eval_example3(std::span<const double, 6>(diag.data(), 6));
        CHECK(p.flat[0] == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("five-pod factor has exponent 5/2") {
        const std::array<double, 6> z{0, 0, 0, 0, 0.25, 0.0};
        const auto p = eval_example3(std::span<const double, 6>(z.data(), 6));
        CHECK(p.radial == Catch::Approx(std::pow(0.25, 2.5)).margin(1e-15));
    }
}

TEST_CASE("energy density") {
    SECTION("constant field vanishes") {
        const auto g = DomainGrid::make(2, Vec{0, 0, 0}, 1.0, 1.0 / 16);
        const auto f = MapField::from_analytic(g, ConicalTarget::make(0, 3),
                                               [](const Vec&) { return make_pod_point(0, 0.3); });
        CHECK(energy_density(f, g.interior.front()) == 0.0);
    }
    SECTION("linear map has unit density") {
        const auto f = testing::linear_field(1.0 / 32);
        for (int node : {f.grid.interior.front(), f.grid.interior.back()})
            CHECK(energy_density(f, node) == Catch::Approx(1.0).margin(1e-10));
    }
    SECTION("tripod density approximates (9/4)|z|") {
        const auto f = testing::tripod_field(1.0 / 128, 1.0);
        const int node = f.grid.find(64, 0, 0);  // z = (0.5, 0)
        REQUIRE(node >= 0);
        CHECK(energy_density(f, node) == Catch::Approx(1.125).margin(0.02));
    }
    SECTION("boundary nodes are rejected on solved fields") {
        const auto g = DomainGrid::make(2, Vec{0, 0, 0}, 1.0, 1.0 / 16);
        auto f = MapField::zeros(g, ConicalTarget::make(0, 3));
        CHECK_THROWS_AS(energy_density(f, g.boundary_nodes.front()), std::domain_error);
    }
}

TEST_CASE("energy density converges to the closed form as h halves") {
    const Vec probe{0.375, 0.25, 0.0};
    const double exact = 2.25 * vnorm(probe);
    double prev_err = 1e300;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        const auto f = testing::tripod_field(h, 1.0);
        const int node = f.grid.find(static_cast<int>(std::lround(probe[0] / h)),
                                     static_cast<int>(std::lround(probe[1] / h)), 0);
        REQUIRE(node >= 0);
        const double err = std::abs(energy_density(f, node) - exact);
        CHECK(err <= prev_err + 1e-12);
        prev_err = err;
    }
    CHECK(prev_err <= 0.02);
}
