#include <catch2/catch_amalgamated.hpp>
#include <numbers>

#include "conelab/acceptance.hpp"
#include "conelab/solver.hpp"
#include "helpers.hpp"

using namespace conelab;

namespace {
AnalyticFn linear_bc() {
    return [](const Vec& p) {
        TargetPoint t;
        t.flat[0] = p[0];
        return t;
    };
}
}  // namespace

TEST_CASE("flat-target solve matches the classical lattice harmonic solution") {
    const auto g = DomainGrid::make(2, Vec{0, 0, 0}, 1.0, 1.0 / 16);
    const auto lin = ConicalTarget::make(1, 0);
    auto [sol, rep] = solve_dirichlet(g, lin, make_trace(g, linear_bc()), 1e-13, 20000);
    CHECK(rep.converged);
    const auto ref = acceptance::oracle::scalar_laplace(
        g, [](const Vec& p) { return p[0]; }, 1e-13, 20000);
    double sup = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        sup = std::max(sup, std::abs(sol.value(static_cast<int>(i)).flat[0] - ref[i]));
    CHECK(sup <= 1e-10);
}

TEST_CASE("constant boundary converges immediately") {
    const auto g = DomainGrid::make(2, Vec{0, 0, 0}, 1.0, 1.0 / 16);
    const auto Y = ConicalTarget::make(0, 3);
    const std::vector<TargetPoint> trace(g.boundary_nodes.size(), make_pod_point(1, 0.4));
    auto [sol, rep] = solve_dirichlet(g, Y, trace, 1e-12, 100, SolverInit::boundary_mean);
    CHECK(rep.converged);
    CHECK(rep.sweeps <= 1);
    for (int node : g.interior) CHECK(distance(Y, sol.value(node), make_pod_point(1, 0.4)) == 0.0);
}

TEST_CASE("solver errors") {
    const auto g = DomainGrid::make(2, Vec{0, 0, 0}, 1.0, 1.0 / 16);
    const auto Y = ConicalTarget::make(0, 3);
    std::vector<TargetPoint> short_trace(g.boundary_nodes.size() - 1);
    CHECK_THROWS_AS(solve_dirichlet(g, Y, short_trace, 1e-8, 10), std::invalid_argument);
    const std::vector<TargetPoint> trace(g.boundary_nodes.size());
    CHECK_THROWS_AS(solve_dirichlet(g, Y, trace, 0.0, 10), std::invalid_argument);
}

TEST_CASE("tripod solve: energy monotone, image containment, oracle error shrinks with h") {
    const auto Y = ConicalTarget::make(0, 3);
    const AnalyticFn fy = [](const Vec& p) { return eval_tripod(p); };
    double prev_sup = 1e300;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        const auto g = DomainGrid::make(2, Vec{0, 0, 0}, 1.0, h);
        const auto trace = make_trace(g, fy);
        const double diam = trace_diameter(Y, trace);
        auto [sol, rep] = solve_dirichlet(g, Y, trace, 1e-9 * diam, 60000);
        CHECK(rep.converged);
        for (std::size_t i = 1; i < rep.energy_per_sweep.size(); ++i)
            CHECK(rep.energy_per_sweep[i] <=
                  rep.energy_per_sweep[i - 1] + 1e-12 * std::max(1.0, rep.energy_per_sweep[i - 1]));

        // image containment: interior rays/radials bounded by the boundary data
        double max_bd_radial = 0.0;
        for (const auto& p : trace) max_bd_radial = std::max(max_bd_radial, p.radial);
        for (int node : g.interior) {
            const auto v = sol.value(node);
            CHECK(v.radial <= max_bd_radial + 1e-12);
        }

        double sup = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Vec x = g.point(static_cast<int>(i));
            sup = std::max(sup, distance(Y, sol.value(static_cast<int>(i)), eval_tripod(x)));
        }
        CHECK(sup < prev_sup + 1e-12);  // halving h does not worsen the oracle error
        prev_sup = sup;
        if (h == 1.0 / 64) CHECK(sup <= 0.05);
    }
}

TEST_CASE("solver results are independent of the worker count") {
    const auto Y = ConicalTarget::make(0, 3);
    const AnalyticFn fy = [](const Vec& p) { return eval_tripod(p); };
    const auto g = DomainGrid::make(2, Vec{0, 0, 0}, 1.0, 1.0 / 16);
    const auto trace = make_trace(g, fy);
    auto [a, ra] = solve_dirichlet(g, Y, trace, 1e-10, 5000, SolverInit::cone, nullptr, 1);
    auto [b, rb] = solve_dirichlet(g, Y, trace, 1e-10, 5000, SolverInit::cone, nullptr, 4);
    REQUIRE(ra.sweeps == rb.sweeps);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(a.ray[i] == b.ray[i]);
        CHECK(a.radial[i] == b.radial[i]);  // bitwise equality
    }
}

TEST_CASE("total energy quadrature") {
    SECTION("constant field") {
        const auto g = DomainGrid::make(2, Vec{0, 0, 0}, 1.0, 1.0 / 16);
        const auto f = MapField::from_analytic(g, ConicalTarget::make(0, 3),
                                               [](const Vec&) { return make_pod_point(2, 1.0); });
        CHECK(total_energy(f) == 0.0);
    }
    SECTION("linear map integrates the unit density over the disc") {
        const auto f = testing::linear_field(1.0 / 64, 1.0);
        CHECK(total_energy(f) == Catch::Approx(std::numbers::pi).epsilon(0.01));
    }
    SECTION("tripod closed form 3 pi/2") {
        const auto f = testing::tripod_field(1.0 / 128, 1.0);
        CHECK(total_energy(f) == Catch::Approx(1.5 * std::numbers::pi).epsilon(0.02));
    }
}
