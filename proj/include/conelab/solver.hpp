#pragma once

// Discrete Dirichlet solver: red-black relaxation where every interior node is
// replaced by the exact Frechet mean of its 2n axis neighbors. Each update
// minimizes the local convex energy, so the discrete edge energy is
// non-increasing sweep by sweep without a step-size parameter, and the
// red-black coloring makes results independent of the worker count.

#include <map>
#include <stdexcept>
#include <utility>

#include "field.hpp"
#include "parallel.hpp"

namespace conelab {

struct SolveReport {
    int sweeps = 0;
    double final_energy = 0.0;  // discrete edge energy sum_edges d^2
    double max_last_move = 0.0;
    bool converged = false;
    std::vector<double> energy_per_sweep;
};

enum class SolverInit { cone, boundary_mean, analytic };

// sum over lattice edges of d^2(u(a), u(b)); the solver's monotone quantity.
inline double discrete_edge_energy(const MapField& f, int workers = 0) {
    return parallel_sum(
        f.grid.size(),
        [&](std::size_t i) {
            const int node = static_cast<int>(i);
            double s = 0.0;
            const TargetPoint v = f.value(node);
            for (int d = 0; d < f.grid.n; ++d) {
                const int nb = f.grid.neighbor(node, d, +1);
                if (nb >= 0) s += distance2(f.target, v, f.value(nb));
            }
            return s;
        },
        workers);
}

// Quadrature energy: sum of energy_density * h^n over the nodes where the
// stencil is available (all nodes for analytic fields, interior otherwise).
inline double total_energy(const MapField& f, int workers = 0) {
    const double cell = std::pow(f.grid.h, f.grid.n);
    if (f.provenance == Provenance::analytic)
        return parallel_sum(
                   f.grid.size(),
                   [&](std::size_t i) { return energy_density(f, static_cast<int>(i)); }, workers) *
               cell;
    const auto& interior = f.grid.interior;
    return parallel_sum(
               interior.size(),
               [&](std::size_t i) { return energy_density(f, interior[i]); }, workers) *
           cell;
}

// Rough diameter of the trace values (max pairwise distance over a bounded
// subsample); used only to scale the default tolerance.
inline double trace_diameter(const ConicalTarget& t, const std::vector<TargetPoint>& trace) {
    const std::size_t stride = std::max<std::size_t>(1, trace.size() / 512);
    double m = 0.0;
    for (std::size_t a = 0; a < trace.size(); a += stride)
        for (std::size_t b = a + stride; b < trace.size(); b += stride)
            m = std::max(m, distance(t, trace[a], trace[b]));
    return m;
}

// trace: one TargetPoint per boundary node, in grid.boundary_nodes order.
inline std::pair<MapField, SolveReport> solve_dirichlet(
    const DomainGrid& grid, const ConicalTarget& target, const std::vector<TargetPoint>& trace,
    double tol, int max_sweeps, SolverInit init = SolverInit::cone,
    const AnalyticFn* warm_start = nullptr, int workers = 0) {
    if (tol <= 0) throw std::invalid_argument("solve_dirichlet: tol must be positive");
    if (trace.size() != grid.boundary_nodes.size())
        throw std::invalid_argument("solve_dirichlet: trace does not cover the boundary nodes");

    MapField f = MapField::zeros(grid, target);
    f.provenance = Provenance::solved;
    for (std::size_t b = 0; b < trace.size(); ++b) f.set(grid.boundary_nodes[b], trace[b]);

    if (init == SolverInit::boundary_mean) {
        std::vector<double> w(trace.size(), 1.0);
        const TargetPoint mean = frechet_mean(target, trace, w);
        for (int node : grid.interior) f.set(node, mean);
    } else if (init == SolverInit::analytic) {
        if (!warm_start) throw std::invalid_argument("solve_dirichlet: analytic init needs a closure");
        for (int node : grid.interior) f.set(node, (*warm_start)(grid.point(node)));
    }  // cone: zeros() already holds the cone point

    std::vector<int> color[2];
    for (int node : grid.interior) color[grid.parity(node)].push_back(node);

    SolveReport rep;
    rep.energy_per_sweep.reserve(std::min(max_sweeps, 1 << 20));
    double prev_energy = discrete_edge_energy(f, workers);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_move = 0.0;
        for (int phase = 0; phase < 2; ++phase) {
            const auto& nodes = color[phase];
            const double move = parallel_max(
                nodes.size(),
                [&](std::size_t i) {
                    const int node = nodes[i];
                    std::vector<TargetPoint> nb;
                    nb.reserve(static_cast<std::size_t>(2 * grid.n));
                    for (int d = 0; d < grid.n; ++d)
                        for (int s : {-1, +1}) nb.push_back(f.value(grid.neighbor(node, d, s)));
                    const std::vector<double> w(nb.size(), 1.0);
                    const TargetPoint next = frechet_mean(target, nb, w);
                    const double moved = distance(target, f.value(node), next);
                    f.set(node, next);
                    return moved;
                },
                0.0, workers);
            max_move = std::max(max_move, move);
        }
        const double energy = discrete_edge_energy(f, workers);
        if (energy > prev_energy + 1e-12 * std::max(1.0, prev_energy))
            throw std::logic_error("solve_dirichlet: energy increased within a sweep");
        prev_energy = energy;
        rep.energy_per_sweep.push_back(energy);
        rep.sweeps = sweep + 1;
        rep.max_last_move = max_move;
        if (max_move <= tol) {
            rep.converged = true;
            break;
        }
    }
    rep.final_energy = prev_energy;
    return {std::move(f), rep};
}

// Trace sampled from a closure, in boundary-node order.
inline std::vector<TargetPoint> make_trace(const DomainGrid& grid, const AnalyticFn& fn) {
    std::vector<TargetPoint> out;
    out.reserve(grid.boundary_nodes.size());
    for (int b : grid.boundary_nodes) out.push_back(fn(grid.point(b)));
    return out;
}

}  // namespace conelab
