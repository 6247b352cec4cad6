#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "conelab/acceptance.hpp"
#include "conelab/target.hpp"
#include "helpers.hpp"

using namespace conelab;
using conelab::testing::random_point;

TEST_CASE("target construction and normalization") {
    const auto t = ConicalTarget::make(1, 3);
    CHECK(t.total_dim() == 2);
    CHECK(ConicalTarget::make(2, 0).total_dim() == 2);
    // a 2-pod is a line: folded into the flat factor
    const auto folded = ConicalTarget::make(1, 2);
    CHECK(folded.flat_dim == 2);
    CHECK(folded.ray_count == 0);
    CHECK_THROWS_AS(ConicalTarget::make(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(ConicalTarget::make(-1, 3), std::invalid_argument);
}

TEST_CASE("distance on the tree and the product") {
    const auto Y = ConicalTarget::make(0, 3);
    CHECK(distance(Y, make_pod_point(1, 1.0), make_pod_point(1, 3.0)) == 2.0);
    CHECK(distance(Y, make_pod_point(0, 1.0), make_pod_point(1, 2.0)) == 3.0);
    const auto P = ConicalTarget::make(1, 3);
    const auto a = make_pod_point(0, 2.0, {0.0});
    const auto b = make_pod_point(1, 2.0, {3.0});
    CHECK(distance(P, a, b) == 5.0);  // 3-4-5
    CHECK_THROWS_AS(distance(Y, make_pod_point(5, 1.0), make_pod_point(0, 1.0)),
                    std::invalid_argument);
}

TEST_CASE("distance is a metric on random triples") {
    std::mt19937_64 rng(42);
    const auto t = ConicalTarget::make(2, 4);
    for (int it = 0; it < 300; ++it) {
        const auto a = random_point(t, rng), b = random_point(t, rng), c = random_point(t, rng);
        const double dab = distance(t, a, b);
        CHECK(dab >= 0.0);
        CHECK(dab == Catch::Approx(distance(t, b, a)).margin(1e-12));
        CHECK(distance(t, a, a) == 0.0);
        CHECK(dab <= distance(t, a, c) + distance(t, c, b) + 1e-12);
    }
}

TEST_CASE("geodesic endpoints, symmetry, linear interpolation") {
    const auto Y = ConicalTarget::make(0, 3);
    const auto a = make_pod_point(0, 2.0), b = make_pod_point(1, 2.0);
    CHECK(distance(Y, geodesic_point(Y, a, b, 0.0), a) == 0.0);
    CHECK(distance(Y, geodesic_point(Y, a, b, 1.0), b) == 0.0);
    CHECK(geodesic_point(Y, a, b, 0.5).is_cone());
    const auto mid = geodesic_point(Y, make_pod_point(2, 1.0), make_pod_point(2, 3.0), 0.25);
    CHECK(mid.ray == 2);
    CHECK(mid.radial == Catch::Approx(1.5));
    CHECK_THROWS_AS(geodesic_point(Y, a, b, 1.5), std::invalid_argument);
}

TEST_CASE("geodesic parameter is metrically affine") {
    std::mt19937_64 rng(5);
    const auto t = ConicalTarget::make(1, 5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int it = 0; it < 200; ++it) {
        const auto a = random_point(t, rng), b = random_point(t, rng);
        const double lam = uni(rng);
        const auto m = geodesic_point(t, a, b, lam);
        CHECK(distance(t, a, m) == Catch::Approx(lam * distance(t, a, b)).margin(1e-12));
    }
}

TEST_CASE("midpoint convexity (CAT(0) inequality)") {
    std::mt19937_64 rng(99);
    const auto t = ConicalTarget::make(1, 3);
    for (int it = 0; it < 300; ++it) {
        const auto a = random_point(t, rng), b = random_point(t, rng), c = random_point(t, rng);
        const auto m = geodesic_point(t, a, b, 0.5);
        const double lhs = distance2(t, m, c);
        const double rhs = 0.5 * distance2(t, a, c) + 0.5 * distance2(t, b, c) -
                           0.25 * distance2(t, a, b);
        CHECK(lhs <= rhs + 1e-12);
    }
}

TEST_CASE("cone scaling") {
    const auto Y = ConicalTarget::make(0, 3);
    const auto p = make_pod_point(2, 0.5);
    CHECK(cone_scale(Y, p, 0.0).is_cone());
    CHECK(distance(Y, cone_scale(Y, p, 1.0), p) == 0.0);
    const auto q = cone_scale(Y, p, 4.0);
    CHECK(q.ray == 2);
    CHECK(q.radial == 2.0);
    CHECK_THROWS_AS(cone_scale(Y, p, -1.0), std::invalid_argument);

    // composition law and distance-to-cone scaling
    std::mt19937_64 rng(7);
    const auto t = ConicalTarget::make(2, 4);
    std::uniform_real_distribution<double> pos(0.0, 2.0);
    for (int it = 0; it < 200; ++it) {
        const auto x = random_point(t, rng);
        const double l = pos(rng), m = pos(rng);
        const auto lhs = cone_scale(t, x, l * m);
        const auto rhs = cone_scale(t, cone_scale(t, x, l), m);
        CHECK(distance(t, lhs, rhs) <= 1e-12);
        CHECK(distance_to_cone(t, cone_scale(t, x, l)) ==
              Catch::Approx(l * distance_to_cone(t, x)).margin(1e-12));
    }
}

TEST_CASE("frechet mean closed form") {
    const auto Y = ConicalTarget::make(0, 3);
    SECTION("symmetric masses pull to the cone point") {
        const std::vector<TargetPoint> pts{make_pod_point(0, 1.0), make_pod_point(1, 1.0),
                                           make_pod_point(2, 1.0)};
        CHECK(frechet_mean(Y, pts, {1, 1, 1}).is_cone());
    }
    SECTION("dominant ray wins with the pull formula") {
        const std::vector<TargetPoint> pts{make_pod_point(0, 3.0), make_pod_point(1, 1.0),
                                           make_pod_point(2, 1.0)};
        const auto m = frechet_mean(Y, pts, {1, 1, 1});
        CHECK(m.ray == 0);
        CHECK(m.radial == Catch::Approx(1.0 / 3).margin(1e-12));
    }
    SECTION("all points equal") {
        const auto p = make_pod_point(1, 0.7);
        const auto m = frechet_mean(Y, {p, p, p}, {1, 2, 3});
        CHECK(distance(Y, m, p) == 0.0);
    }
    SECTION("errors") {
        CHECK_THROWS_AS(frechet_mean(Y, {}, {}), std::invalid_argument);
        CHECK_THROWS_AS(frechet_mean(Y, {make_pod_point(0, 1.0)}, {0.0}), std::invalid_argument);
    }
}

TEST_CASE("frechet mean agrees with brute-force minimization") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        const auto t = ConicalTarget::make(trial % 3, 3 + trial % 3);
        std::vector<TargetPoint> pts;
        std::vector<double> w;
        std::uniform_real_distribution<double> uw(0.1, 1.0);
        const int n = 2 + trial % 6;
        for (int i = 0; i < n; ++i) {
            pts.push_back(random_point(t, rng));
            w.push_back(uw(rng));
        }
        const auto closed = frechet_mean(t, pts, w);
        const auto brute = acceptance::oracle::frechet_mean_brute(t, pts, w);
        CHECK(distance(t, closed, brute) <= 1e-6);
    }
}

TEST_CASE("flat membership charts") {
    const auto Y = ConicalTarget::make(0, 3);
    SECTION("two rays form a line") {
        const std::vector<TargetPoint> pts{make_pod_point(0, 1.0), make_pod_point(1, 2.0),
                                           cone_point()};
        const auto chart = lies_in_flat(Y, pts);
        REQUIRE(chart.has_value());
        // the chart must preserve all pairwise distances exactly
        for (const auto& a : pts)
            for (const auto& b : pts) {
                const auto ea = chart->embed(a), eb = chart->embed(b);
                double s = 0;
                for (std::size_t i = 0; i < ea.size(); ++i) s += (ea[i] - eb[i]) * (ea[i] - eb[i]);
                CHECK(std::sqrt(s) == Catch::Approx(distance(Y, a, b)).margin(1e-12));
            }
    }
    SECTION("three rays are not flat") {
        const std::vector<TargetPoint> pts{make_pod_point(0, 1.0), make_pod_point(1, 1.0),
                                           make_pod_point(2, 1.0)};
        CHECK_FALSE(lies_in_flat(Y, pts).has_value());
    }
    SECTION("euclidean targets always embed") {
        const auto E = ConicalTarget::make(2, 0);
        CHECK(lies_in_flat(E, {make_flat_point({1.0, 2.0})}).has_value());
    }
}

TEST_CASE("two-pod points fold into the flat chart isometrically") {
    // ConicalTarget::make(0,2) is the line; the documented chart maps ray 0 to
    // +radial and ray 1 to -radial in the appended flat coordinate.
    const auto folded = ConicalTarget::make(0, 2);
    REQUIRE(folded.ray_count == 0);
    REQUIRE(folded.flat_dim == 1);
    const auto a = make_flat_point({1.5});   // was: ray 0, radial 1.5
    const auto b = make_flat_point({-0.5});  // was: ray 1, radial 0.5
    CHECK(distance(folded, a, b) == Catch::Approx(2.0));  // tree distance through the cone
}
