#include <catch2/catch_amalgamated.hpp>
#include <numbers>
#include <set>

#include "conelab/homogeneity.hpp"
#include "helpers.hpp"

using namespace conelab;

namespace {
const Vec O{0, 0, 0};
}

TEST_CASE("symmetrize recovers homogeneous maps exactly") {
    SECTION("tripod map is its own symmetrization") {
        const auto f = testing::tripod_field(1.0 / 64, 1.03125);
        const auto h = symmetrize(f, O, 1.5, {});
        double sup = 0.0;
        for (std::size_t i = 0; i < f.grid.size(); ++i) {
            const Vec y = f.grid.point(static_cast<int>(i));
            if (vnorm(y) > 1.0) continue;
            sup = std::max(sup, distance(f.target, f.value(static_cast<int>(i)), h.eval(y)));
        }
        CHECK(sup <= 1e-12);
        CHECK(h.grad_ratio <= 1.1);
    }
    SECTION("linear map with one invariant direction") {
        const auto f = testing::linear_field(1.0 / 64, 1.03125);
        const auto h = symmetrize(f, O, 1.0, {Vec{0, 1, 0}});
        for (double w : {-0.8, -0.3, 0.4, 0.9}) {
            const auto v = h.eval(Vec{w, 0.5, 0});
            CHECK(v.flat[0] == Catch::Approx(w).margin(1e-12));
        }
        CHECK(h.grad_ratio <= 1.1);
    }
}

TEST_CASE("symmetrization is sup-stable under sphere perturbations") {
    // perturb the tripod profile by eps on the sphere; the homogeneous
    // extensions stay 1-Lipschitz-close in sup norm on B_1 for alpha >= 1
    const double eps = 1e-3;
    const auto g = DomainGrid::make(2, O, 1.03125, 1.0 / 64);
    const auto Y = ConicalTarget::make(0, 3);
    const auto clean = MapField::from_analytic(g, Y, [](const Vec& p) { return eval_tripod(p); });
    const auto noisy = MapField::from_analytic(g, Y, [eps](const Vec& p) {
        TargetPoint q = eval_tripod(p);
        if (q.ray >= 0) q.radial = std::max(0.0, q.radial + eps * std::sin(17 * p[0] + 5 * p[1]));
        q.canonicalize();
        return q;
    });
    const auto ha = symmetrize(clean, O, 1.5, {});
    const auto hb = symmetrize(noisy, O, 1.5, {});
    double sup = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec y = g.point(static_cast<int>(i));
        if (vnorm(y) > 1.0) continue;
        sup = std::max(sup, distance(Y, ha.eval(y), hb.eval(y)));
    }
    CHECK(sup <= eps + 1e-12);
}

TEST_CASE("every dictionary entry passes the k-homogeneity check") {
    const auto f = testing::tripod_field(1.0 / 32, 1.03125);
    FieldQuadrature q(f);
    const auto dict = competitor_dictionary(f, O, 0.5, 1, q);
    CHECK(dict.size() >= 4);
    for (const auto& h : dict) CHECK(k_homogeneity_check(h, 1e-9));
}

TEST_CASE("dictionary frames") {
    SECTION("k=0 has the pure symmetrization") {
        const auto f = testing::tripod_field(1.0 / 32, 1.03125);
        FieldQuadrature q(f);
        const auto dict = competitor_dictionary(f, O, 0.5, 0, q);
        REQUIRE_FALSE(dict.empty());
        for (const auto& h : dict) CHECK(h.frame.empty());
        bool has_measured_degree = false;
        const double ord = q.smoothed_ord(O, 0.5);
        for (const auto& h : dict) has_measured_degree |= std::abs(h.degree - ord) < 1e-12;
        CHECK(has_measured_degree);
    }
    SECTION("k=1 in n=3 has at least the three axis frames") {
        const auto f = testing::product_factor_field(1.0 / 16, 1.0);
        FieldQuadrature q(f);
        const auto dict = competitor_dictionary(f, O, 0.5, 1, q);
        std::set<std::array<int, 3>> axes;
        for (const auto& h : dict)
            if (h.frame.size() == 1)
                axes.insert({static_cast<int>(std::round(h.frame[0][0])),
                             static_cast<int>(std::round(h.frame[0][1])),
                             static_cast<int>(std::round(h.frame[0][2]))});
        CHECK(axes.size() >= 3);
    }
    SECTION("PCA frame aligns with the singular line") {
        const auto f = testing::product_factor_field(1.0 / 16, 1.0);
        FieldQuadrature q(f);
        std::vector<Vec> sing;
        for (int i = -8; i <= 8; ++i) sing.push_back(Vec{i / 16.0, 0, 0});
        const auto dict = competitor_dictionary(f, O, 0.5, 1, q, &sing);
        double best_align = 0.0;
        for (const auto& h : dict)
            if (h.frame.size() == 1) best_align = std::max(best_align, std::abs(h.frame[0][0]));
        CHECK(best_align >= std::cos(5.0 * std::numbers::pi / 180));  // within 5 degrees
    }
}

TEST_CASE("homogeneity test verdicts") {
    const auto f = testing::tripod_field(1.0 / 64, 1.03125);
    FieldQuadrature q(f);
    SECTION("self-competitor passes with zero discrepancy") {
        const auto v = homogeneity_test(f, O, 0.5, 0, 0.05, q);
        CHECK(v.passed);
        CHECK(v.best_discrepancy <= 1e-12);
        REQUIRE(v.witness.has_value());
        CHECK(v.witness->degree == Catch::Approx(1.5).margin(1e-9));
    }
    SECTION("tripod is not 1-homogeneous: dictionary fail with margin") {
        const auto v = homogeneity_test(f, O, 0.5, 1, 0.1, q, nullptr,
                                        std::numeric_limits<double>::infinity(), false);
        CHECK_FALSE(v.passed);
        CHECK(v.best_discrepancy > 2.0 * v.threshold);
    }
    SECTION("the product factor is 1-homogeneous along the axis") {
        const auto fp = testing::product_factor_field(1.0 / 16, 1.3);
        FieldQuadrature qp(fp);
        const auto v = homogeneity_test(fp, O, 0.5, 1, 0.1, qp);
        CHECK(v.passed);
        REQUIRE(v.witness.has_value());
        CHECK(std::abs(v.witness->frame[0][0]) >= 0.999);  // invariant along t
    }
}

TEST_CASE("homogeneity test is scale-consistent") {
    const auto f = testing::tripod_field(1.0 / 64, 1.0);
    FieldQuadrature q(f);
    const double r = 0.5;
    const auto v_orig = homogeneity_test(f, O, r, 0, 0.05, q, nullptr,
                                         std::numeric_limits<double>::infinity(), false);
    const auto resc = rescale(f, O, r, 1.0 / 64);
    FieldQuadrature qr(resc);
    const auto v_resc = homogeneity_test(resc, O, 1.0, 0, 0.05, qr, nullptr,
                                         std::numeric_limits<double>::infinity(), false);
    CHECK(v_orig.passed == v_resc.passed);
    // after normalization the discrepancy/threshold ratios agree
    const double ratio_orig = v_orig.best_discrepancy / v_orig.threshold;
    const double ratio_resc = v_resc.best_discrepancy / v_resc.threshold;
    CHECK(ratio_orig == Catch::Approx(ratio_resc).margin(1e-6));
}

TEST_CASE("degree bound") {
    SECTION("admits the true degree of the tripod map") {
        const auto f = testing::tripod_field(1.0 / 64, 1.03125);
        FieldQuadrature q(f);
        const auto db = degree_bound(q, O, 0.1, /*require_normalized=*/false);
        CHECK(db.A >= 1.5);
    }
    SECTION("admits degree one for the linear map") {
        const auto f = testing::linear_field(1.0 / 64, 1.03125);
        FieldQuadrature q(f);
        const auto db = degree_bound(q, O, 0.1, false);
        CHECK(db.A >= 1.0);
    }
    SECTION("nonincreasing as eta0 decreases") {
        const auto f = testing::tripod_field(1.0 / 64, 1.03125);
        FieldQuadrature q(f);
        double prev = std::numeric_limits<double>::infinity();
        for (double eta0 : {0.1, 0.05, 0.02, 0.01}) {
            const double A = degree_bound(q, O, eta0, false).A;
            CHECK(A <= prev + 1e-9);
            prev = A;
        }
    }
    SECTION("normalization is enforced") {
        const auto f = testing::tripod_field(1.0 / 64, 1.03125);
        FieldQuadrature q(f);
        CHECK_THROWS_AS(degree_bound(q, O, 0.1, true), std::invalid_argument);
        CHECK_THROWS_AS(degree_bound(q, O, 0.9, false), std::invalid_argument);  // beta >= 1
    }
}

TEST_CASE("k-homogeneity sampling check on fields") {
    const auto f = testing::tripod_field(1.0 / 64, 1.0);
    CHECK(k_homogeneity_check(f, O, {}, 1e-6));
    CHECK_FALSE(k_homogeneity_check(f, Vec{0.1, 0, 0}, {}, 1e-3));
    const auto fp = testing::product_factor_field(1.0 / 16, 1.0);
    CHECK(k_homogeneity_check(fp, O, {Vec{1, 0, 0}}, 1e-6));
    CHECK_FALSE(k_homogeneity_check(fp, O, {Vec{0, 1, 0}}, 1e-3));
}
