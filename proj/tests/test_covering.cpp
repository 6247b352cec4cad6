#include <catch2/catch_amalgamated.hpp>

#include "conelab/covering.hpp"
#include "helpers.hpp"

using namespace conelab;

namespace {
const Vec O{0, 0, 0};

std::vector<Vec> axis_points(double h, int imax) {
    std::vector<Vec> D;
    for (int i = -imax; i <= imax; ++i) D.push_back(Vec{i * h, 0, 0});
    return D;
}
}  // namespace

TEST_CASE("empty sets get the trivial cover") {
    const auto f = testing::tripod_field(1.0 / 64, 1.3);
    FieldQuadrature q(f);
    const auto cover = initial_cover(q, {}, O, 1.0 / 8, 1.0 / 64, 1.0 / 256, 0.05, 0, 1.5);
    REQUIRE(cover.balls.size() == 1);
    CHECK(cover.balls[0].label == BallLabel::terminal);
    CHECK(cover.balls[0].radius == 1.0 / 8);
    CHECK(cover.packing_ratio == 1.0);
    const auto ref = refine_cover(q, {}, O, 1.0 / 8, 1.0 / 32, 0, 0.05);
    for (const auto& b : ref.balls) CHECK(b.s_x == ref.s);
}

TEST_CASE("parameter preconditions") {
    const auto f = testing::tripod_field(1.0 / 64, 1.3);
    FieldQuadrature q(f);
    CHECK_THROWS_AS(initial_cover(q, {}, O, 1.0 / 8, 1.0 / 64, 1.0 / 128, 0.05, 0),
                    std::invalid_argument);  // rho > 1/256
    CHECK_THROWS_AS(initial_cover(q, {}, O, 1.0 / 4, 1.0 / 64, 1.0 / 256, 0.05, 0),
                    std::invalid_argument);  // tau > 1/8
    CHECK_THROWS_AS(initial_cover(q, {}, O, 1.0 / 8, 1.0 / 4, 1.0 / 256, 0.05, 0),
                    std::invalid_argument);  // sigma >= tau
    CHECK_THROWS_AS(refine_cover(q, {}, O, 1.0 / 8, 1.0 / 4, 0, 0.05), std::invalid_argument);
}

TEST_CASE("tripod k=0 cover satisfies every clause") {
    const auto f = testing::tripod_field(1.0 / 64, 1.3);
    FieldQuadrature q(f);
    const std::vector<Vec> D{O};
    const auto cover = initial_cover(q, D, O, 1.0 / 8, 1.0 / 64, 1.0 / 256, 0.05, 0);
    const auto rep = verify_initial_cover(cover, D);
    CHECK(rep.radius_floor_ok);
    CHECK(rep.tube_ok);
    CHECK(rep.coverage_ok);
    CHECK(rep.fifth_disjoint_ok);
    CHECK(rep.schedule_ok);
    CHECK(rep.pass());
    // the generation radii follow tau (10 rho)^m bit-for-bit
    for (const auto& b : cover.balls)
        CHECK(b.radius == (1.0 / 8) * std::pow(10.0 / 256, b.generation));
}

TEST_CASE("product k=1 cover on the axis representatives") {
    const auto f = testing::product_factor_field(1.0 / 32, 1.3);
    FieldQuadrature q(f);
    const auto D = axis_points(f.grid.h, 4);
    double ratios[2] = {0, 0};
    int idx = 0;
    for (double sigma : {1.0 / 32, 1.0 / 64}) {
        const auto cover = initial_cover(q, D, O, 1.0 / 8, sigma, 1.0 / 256, 0.05, 1);
        const auto rep = verify_initial_cover(cover, D);
        CHECK(rep.pass());
        ratios[idx++] = cover.packing_ratio;
    }
    CHECK(std::max(ratios[0], ratios[1]) <= 2.0 * std::min(ratios[0], ratios[1]));
}

TEST_CASE("containment violations abort with a diagnostic") {
    // a stray point far off the spanned axis violates the 2 rho r containment
    const auto f = testing::product_factor_field(1.0 / 32, 1.3);
    FieldQuadrature q(f);
    auto D = axis_points(f.grid.h, 4);
    D.push_back(Vec{0, 3.0 / 32, 0});  // inside B_{1/8}, far from the axis
    // delta=2.0 makes every point pinched, so the stray point must span or violate
    CHECK_THROWS_AS(initial_cover(q, D, O, 1.0 / 8, 1.0 / 64, 1.0 / 256, 2.0, 1), CoveringError);
}

TEST_CASE("refined cover on the product axis: clauses, rounds, packing measure") {
    const auto f = testing::product_factor_field(1.0 / 32, 1.3);
    FieldQuadrature q(f);
    const auto D = axis_points(f.grid.h, 4);
    const auto ref = refine_cover(q, D, O, 1.0 / 8, 1.0 / 32, 1, 0.05);
    const auto rep = verify_refine(q, ref, D);
    CHECK(rep.containment_ok);
    CHECK(rep.branch_ok);
    CHECK(rep.coverage_ok);
    CHECK(rep.min_radius_ok);
    const auto ic = iterate_refine(q, D, O, 1.0 / 8, 1.0 / 32, 1, 0.05);
    CHECK(ic.rounds <= static_cast<int>(std::ceil(ic.M0 / 0.05)));
    for (const auto& b : ic.balls) CHECK(b.s_x == 1.0 / 32);

    const auto mu = packing_measure(ic.balls, 1, 3);
    CHECK(mu.points.size() == ic.balls.size());
    const auto rh = reifenberg_hypothesis(mu, 0.01, 1);
    CHECK(rh.pass);  // collinear centers
}

TEST_CASE("bad balls route unpinched points through drop sets") {
    // k=1 on the tripod's zero ray: the pinched set concentrates at the origin
    // (order 3/2) while the far ray points have much lower order at the pinch
    // radius; they must land in sets carrying the order-drop property.
    const auto f = testing::tripod_field(1.0 / 64, 1.3);
    FieldQuadrature q(f);
    std::vector<Vec> D{O};
    for (int i : {5, 6, 7}) D.push_back(Vec{-i / 64.0, 0, 0});  // on the f_Y zero ray
    const double S = 1.0 / 8, s = 1.0 / 64, delta = 0.05, rho = 1.0 / 256;
    const double M = sup_order(q, D, 8.0 * S);
    CHECK(M >= 1.45);  // driven by the origin's order 1.5

    const auto cover = initial_cover(q, D, O, S, s, rho, delta, 1, M);
    bool saw_bad_with_drop = false;
    for (const auto& b : cover.balls)
        if (b.label == BallLabel::bad && b.radius > s &&
            b.pinched.size() < D.size())  // some points not pinched
            saw_bad_with_drop = true;
    CHECK(saw_bad_with_drop);

    const auto ref = refine_cover(q, D, O, S, s, 1, delta, rho, M);
    const auto rep = verify_refine(q, ref, D);
    CHECK(rep.pass());
    // the far points really do satisfy the drop inequality at the pinch radius
    for (int i : {1, 2, 3})
        CHECK(q.smoothed_ord_clamped(D[static_cast<std::size_t>(i)], rho * S) <= M - delta);
}

TEST_CASE("packing measure requires fifth-ball disjointness") {
    std::vector<RefinedBall> balls;
    balls.push_back({Vec{0, 0, 0}, 1.0, {}, false});
    balls.push_back({Vec{0.1, 0, 0}, 1.0, {}, false});
    CHECK_THROWS_AS(packing_measure(balls, 1, 2), std::invalid_argument);
    balls[1].center = Vec{0.5, 0, 0};
    const auto mu = packing_measure(balls, 1, 2);
    CHECK(mu.mass[0] == 1.0);
}

TEST_CASE("minkowski estimates") {
    SECTION("tripod point: slope ~ 2 and the cover bound bounds") {
        const auto f = testing::tripod_field(1.0 / 128, 1.03125);
        FieldQuadrature q(f);
        const std::vector<Vec> D{O};
        const auto t = minkowski_estimate(q, D, 0, {1.0 / 8, 1.0 / 16, 1.0 / 32}, 0.05);
        CHECK(std::abs(t.slope - 2.0) <= 0.2);
        for (const auto& row : t.rows) {
            CHECK(row.tube_volume > 0.0);
            CHECK(row.cover_bound >= row.tube_restricted * 0.99);
        }
    }
    SECTION("empty stratum: zero volumes") {
        const auto f = testing::tripod_field(1.0 / 128, 1.03125);
        FieldQuadrature q(f);
        const auto t = minkowski_estimate(q, {}, 0, {1.0 / 8, 1.0 / 16}, 0.05);
        for (const auto& row : t.rows) CHECK(row.tube_volume == 0.0);
    }
    SECTION("radius below the resolution floor") {
        const auto f = testing::tripod_field(1.0 / 16, 1.0);
        FieldQuadrature q(f);
        CHECK_THROWS_AS(minkowski_estimate(q, {}, 0, {1.0 / 128}, 0.05), std::invalid_argument);
    }
}
