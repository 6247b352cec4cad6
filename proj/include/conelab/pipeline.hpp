#pragma once

// Batch experiment runner: solve -> order -> strata -> flatness -> cover ->
// minkowski -> report. Every stage writes its artifacts plus a manifest with
// the parameter echo and wall-clock times. All numeric artifacts are
// byte-identical across reruns and worker counts; the manifest (which carries
// timings) is the documented exception.

#include <chrono>
#include <iostream>

#include "config.hpp"

namespace conelab {

struct ExampleField {
    bool has_grid = true;
    MapField field;        // when has_grid
    AnalyticMap analytic;  // always set for analytic examples
};

inline AnalyticFn example_closure(const std::string& name) {
    if (name == "tripod") return [](const Vec& p) { return eval_tripod(p); };
    if (name == "product") return [](const Vec& p) { return eval_product(p); };
    if (name == "product-factor") return [](const Vec& p) { return eval_product_factor(p); };
    if (name == "linear")
        return [](const Vec& p) {
            TargetPoint q;
            q.flat[0] = p[0];
            return q;
        };
    throw std::invalid_argument("unknown analytic example '" + name + "'");
}

inline ConicalTarget example_target(const std::string& name) {
    if (name == "tripod") return ConicalTarget::make(0, 3);
    if (name == "product") return ConicalTarget::make(1, 3);
    if (name == "product-factor") return ConicalTarget::make(0, 3);
    if (name == "linear") return ConicalTarget::make(1, 0);
    if (name == "example3") return ConicalTarget::make(1, 5);
    throw std::invalid_argument("unknown example '" + name + "'");
}

inline int example_domain_dim(const std::string& name) {
    if (name == "tripod" || name == "linear") return 2;
    if (name == "product" || name == "product-factor") return 3;
    if (name == "example3") return 6;
    throw std::invalid_argument("unknown example '" + name + "'");
}

class Pipeline {
  public:
    explicit Pipeline(ExperimentConfig cfg) : cfg_(std::move(cfg)), hash_(config_hash(cfg_)) {}

    // exit codes: 0 ok, 2 invalid config, 3 stage assertion, 4 I/O failure
    int run() {
        const auto errs = cfg_.validate();
        if (!errs.empty()) {
            for (const auto& e : errs) std::cerr << "config error: " << e << "\n";
            return 2;
        }
        namespace fs = std::filesystem;
        try {
            fs::create_directories(cfg_.out_dir);
        } catch (const std::exception& e) {
            std::cerr << "io error: " << e.what() << "\n";
            return 4;
        }
        default_workers() = cfg_.workers;
        try {
            for (const auto& stage : cfg_.stages) {
                const auto t0 = std::chrono::steady_clock::now();
                run_stage(stage);
                const auto t1 = std::chrono::steady_clock::now();
                timings_[stage] = std::chrono::duration<double>(t1 - t0).count();
            }
            write_manifest();
        } catch (const CoveringError& e) {
            write_diagnostic("covering assertion", e.what());
            return 3;
        } catch (const std::logic_error& e) {
            write_diagnostic("stage assertion", e.what());
            return 3;
        } catch (const std::ios_base::failure& e) {
            std::cerr << "io error: " << e.what() << "\n";
            return 4;
        } catch (const std::exception& e) {
            write_diagnostic("stage failure", e.what());
            return 3;
        }
        return 0;
    }

    const MapField& field() {
        ensure_field();
        return *field_;
    }

  private:
    std::filesystem::path out(const std::string& name) const {
        return std::filesystem::path(cfg_.out_dir) / name;
    }

    void write_diagnostic(const std::string& kind, const std::string& what) {
        try {
            write_json(out("diagnostic.json"),
                       json{{"config_hash", hash_}, {"kind", kind}, {"what", what}});
        } catch (...) {
        }
        std::cerr << kind << ": " << what << "\n";
    }

    void ensure_field() {
        if (field_) return;
        if (cfg_.example == "example3" && cfg_.trace_file.empty())
            throw std::invalid_argument(
                "example3 has a 6-dimensional domain; only the strata stage (splitting detection) "
                "supports it");
        const DomainGrid grid =
            DomainGrid::make(cfg_.grid.n, Vec{0, 0, 0}, cfg_.grid.radius, cfg_.grid.spacing);
        const ConicalTarget target = example_target(cfg_.example);
        if (cfg_.mode == "analytic" && cfg_.trace_file.empty()) {
            field_ = MapField::from_analytic(grid, target, example_closure(cfg_.example));
            return;
        }
        std::vector<TargetPoint> trace;
        AnalyticFn closure;
        if (!cfg_.trace_file.empty()) {
            const MapField src = read_field_jsonl(cfg_.trace_file);
            if (src.grid.size() != grid.size())
                throw std::invalid_argument("trace_file grid does not match the configured grid");
            for (int b : grid.boundary_nodes) trace.push_back(src.value(b));
        } else {
            closure = example_closure(cfg_.example);
            trace = make_trace(grid, closure);
        }
        const double diam = std::max(trace_diameter(target, trace), 1e-12);
        SolverInit init = SolverInit::cone;
        if (cfg_.solver.init == "boundary-mean") init = SolverInit::boundary_mean;
        if (cfg_.solver.init == "analytic") init = SolverInit::analytic;
        auto [f, rep] = solve_dirichlet(grid, target, trace, cfg_.solver.tol * diam,
                                        cfg_.solver.max_sweeps, init,
                                        closure ? &closure : nullptr, cfg_.workers);
        field_ = std::move(f);
        report_ = rep;
    }

    FieldQuadrature& quad() {
        ensure_field();
        if (!quad_) quad_.emplace(*field_, cfg_.workers);
        return *quad_;
    }

    std::vector<int>& singular() {
        if (!singular_) singular_ = detect_singular(field(), cfg_.workers);
        return *singular_;
    }

    // Deterministic analysis centers: nodes nearest the cone point in value,
    // ties by index, spread across the zero set.
    std::vector<Vec> centers(double need_radius) {
        ensure_field();
        std::vector<std::pair<double, int>> cand;
        for (std::size_t i = 0; i < field_->grid.size(); ++i) {
            const int node = static_cast<int>(i);
            const Vec x = field_->grid.point(node);
            if (quad().max_radius(x) < need_radius) continue;
            cand.emplace_back(distance_to_cone(field_->target, field_->value(node)), node);
        }
        std::sort(cand.begin(), cand.end());
        std::vector<Vec> out;
        for (const auto& [d, node] : cand) {
            if (static_cast<int>(out.size()) >= cfg_.analysis.center_count) break;
            out.push_back(field_->grid.point(node));
        }
        return out;
    }

    void run_stage(const std::string& stage) {
        if (stage == "solve") return stage_solve();
        if (stage == "order") return stage_order();
        if (stage == "strata") return stage_strata();
        if (stage == "flatness") return stage_flatness();
        if (stage == "cover") return stage_cover();
        if (stage == "minkowski") return stage_minkowski();
        if (stage == "report") return stage_report();
        if (stage == "selftest") return;  // handled by the CLI front end
    }

    void stage_solve() {
        ensure_field();
        write_field_jsonl(out("field.jsonl"), *field_, hash_);
        json j{{"config_hash", hash_},
               {"provenance", field_->provenance == Provenance::analytic ? "analytic" : "solved"}};
        if (report_) {
            j["sweeps"] = report_->sweeps;
            j["final_energy"] = report_->final_energy;
            j["max_last_move"] = report_->max_last_move;
            j["converged"] = report_->converged;
        }
        j["total_energy"] = total_energy(*field_, cfg_.workers);
        write_json(out("solve_report.json"), j);
        // energy density CSV
        CsvWriter csv(out("energy_density.csv"), hash_, {"index", "x1", "x2", "x3", "density"});
        const auto dens = density_table(*field_);
        for (std::size_t i = 0; i < dens.size(); ++i) {
            if (std::isnan(dens[i])) continue;
            const Vec p = field_->grid.point(static_cast<int>(i));
            csv.row({static_cast<double>(i), p[0], p[1], p[2], dens[i]});
        }
    }

    void stage_order() {
        auto& q = quad();
        const double h = field_->grid.h;
        const double rmin = cfg_.analysis.r_min > 0 ? cfg_.analysis.r_min : 8 * h;
        const auto ctrs = centers(rmin * 2);
        CsvWriter csv(out("order.csv"), hash_,
                      {"cx", "cy", "cz", "r", "E", "I", "Ord", "E_phi", "I_phi", "Ord_phi"});
        json residuals = json::array();
        for (const Vec& x : ctrs) {
            const double rmax = cfg_.analysis.r_max > 0
                                    ? std::min(cfg_.analysis.r_max, q.max_radius(x))
                                    : q.max_radius(x) * 0.98;
            if (rmax <= rmin) continue;
            std::vector<double> radii;
            for (int i = 0; i < cfg_.analysis.radius_count; ++i)
                radii.push_back(rmin *
                                std::pow(rmax / rmin, i / double(cfg_.analysis.radius_count - 1)));
            const FrequencyProfile p = q.profile(x, radii);
            for (std::size_t i = 0; i < p.r.size(); ++i)
                csv.row({x[0], x[1], x[2], p.r[i], p.E[i], p.I[i], p.ord[i], p.E_phi[i], p.I_phi[i],
                         p.ord_phi[i]});
            const double s = radii[radii.size() / 3], r = radii[2 * radii.size() / 3];
            json rec{{"center", {x[0], x[1], x[2]}},
                     {"s", s},
                     {"r", r},
                     {"height_identity", q.height_identity_residual(x, s, r)},
                     {"energy_derivative", q.energy_derivative_residual(x, r)}};
            residuals.push_back(rec);
        }
        write_json(out("residuals.json"), json{{"config_hash", hash_}, {"residuals", residuals}});
    }

    void stage_strata() {
        if (cfg_.example == "example3") {
            const AnalyticMap m = example3_map();
            const std::vector<double> xv(6, 0.0);
            const SplittingData sd = splitting_data(m, xv, {0.5, 0.25, 0.125});
            write_json(out("splitting.json"),
                       json{{"config_hash", hash_},
                            {"J", sd.J},
                            {"sigma", sd.sigma},
                            {"invariant_axes", sd.invariant_axes},
                            {"residual", sd.residual}});
            return;
        }
        auto& q = quad();
        const auto& sing = singular();
        {
            CsvWriter csv(out("singular.csv"), hash_, {"index", "x1", "x2", "x3"});
            for (int node : sing) {
                const Vec p = field_->grid.point(node);
                csv.row({static_cast<double>(node), p[0], p[1], p[2]});
            }
        }
        {
            const SplittingData sd = splitting_data(*field_, Vec{0, 0, 0});
            write_json(out("splitting.json"),
                       json{{"config_hash", hash_},
                            {"J", sd.J},
                            {"sigma", sd.sigma},
                            {"invariant_axes", sd.invariant_axes},
                            {"residual", sd.residual}});
        }
        for (int k : cfg_.analysis.k_list) {
            const StratumSet s =
                quantitative_stratum(*field_, k, cfg_.analysis.eta, cfg_.analysis.stratum_r, q,
                                     &sing, cfg_.workers);
            CsvWriter csv(out("stratum_k" + std::to_string(k) + ".csv"), hash_,
                          {"index", "x1", "x2", "x3"});
            for (int node : s.nodes) {
                const Vec p = field_->grid.point(node);
                csv.row({static_cast<double>(node), p[0], p[1], p[2]});
            }
            strata_[k] = s;
        }
    }

    DiscreteMeasure stratum_measure(int k) {
        if (!strata_.count(k)) {
            auto& q = quad();
            strata_[k] = quantitative_stratum(*field_, k, cfg_.analysis.eta,
                                              cfg_.analysis.stratum_r, q, &singular(), cfg_.workers);
        }
        DiscreteMeasure mu;
        mu.dim = field_->grid.n;
        for (int node : strata_[k].nodes) {
            mu.points.push_back(field_->grid.point(node));
            mu.mass.push_back(std::pow(field_->grid.h, k));
        }
        return mu;
    }

    void stage_flatness() {
        const int k = cfg_.covering.k;
        const DiscreteMeasure mu = stratum_measure(k);
        json j{{"config_hash", hash_}, {"k", k}, {"atoms", mu.points.size()}};
        if (!mu.points.empty()) {
            Vec bary{0, 0, 0};
            for (const Vec& p : mu.points) bary = vadd(bary, p);
            bary = vscale(bary, 1.0 / static_cast<double>(mu.points.size()));
            json rows = json::array();
            for (double r : {0.5, 0.25, 0.125})
                rows.push_back(json{{"r", r}, {"D", mean_flatness(mu, bary, r, k)}});
            j["mean_flatness"] = rows;
            const auto ji = jones_integral(mu, bary, 0.5, k);
            j["jones"] = {{"value", ji.value}, {"truncation", ji.truncation}, {"levels", ji.levels}};
            const auto rr = reifenberg_hypothesis(mu, cfg_.flatness.delta_R, k, cfg_.flatness.C_R);
            j["reifenberg"] = {{"pass", rr.pass},
                               {"worst_ratio", rr.worst_ratio},
                               {"packing", rr.packing},
                               {"packing_ok", rr.packing_ok}};
        }
        write_json(out("flatness.json"), j);
        write_measure_csv(out("stratum_measure.csv"), mu, hash_);
    }

    // The covering's containment scales (2 rho r) are finer than the lattice,
    // so the grid-thickened stratum is consolidated to exact representatives:
    // node positions projected onto the best-fit affine k-plane, deduplicated
    // within one cell.
    std::vector<Vec> cover_representatives(int k) {
        std::vector<Vec> raw;
        for (int node : strata_[k].nodes) {
            const Vec p = field_->grid.point(node);
            if (vnorm(p) <= 1.0 / 8 + 1e-12) raw.push_back(p);
        }
        if (raw.empty()) return raw;
        const AffineSubspace plane = affine_fit(raw, k);
        std::vector<Vec> out;
        for (const Vec& p : raw) {
            const Vec c = plane.project(p);
            bool dup = false;
            for (const Vec& o : out) dup = dup || vnorm(vsub(c, o)) < field_->grid.h * 0.5;
            if (!dup) out.push_back(c);
        }
        return out;
    }

    void stage_cover() {
        auto& q = quad();
        const int k = cfg_.covering.k;
        stratum_measure(k);  // ensure strata computed
        const std::vector<Vec> D = cover_representatives(k);
        const BallCover cover = initial_cover(q, D, Vec{0, 0, 0}, cfg_.covering.S,
                                              cfg_.covering.sigma, cfg_.covering.rho,
                                              cfg_.covering.delta, k);
        write_json(out("cover.json"), [&] {
            json j = cover_to_json(cover);
            j["config_hash"] = hash_;
            return j;
        }());
        const auto icr = verify_initial_cover(cover, D);
        const RefineResult ref = refine_cover(q, D, Vec{0, 0, 0}, cfg_.covering.S, cfg_.covering.s,
                                              k, cfg_.covering.delta, cfg_.covering.rho);
        const auto rr = verify_refine(q, ref, D);
        json verify{{"config_hash", hash_},
                    {"initial",
                     {{"radius_floor_ok", icr.radius_floor_ok},
                      {"packing_ratio", icr.packing_ratio},
                      {"tube_ok", icr.tube_ok},
                      {"coverage_ok", icr.coverage_ok},
                      {"fifth_disjoint_ok", icr.fifth_disjoint_ok},
                      {"schedule_ok", icr.schedule_ok},
                      {"pass", icr.pass()}}},
                    {"refine",
                     {{"containment_ok", rr.containment_ok},
                      {"packing_ratio", rr.packing_ratio},
                      {"branch_ok", rr.branch_ok},
                      {"coverage_ok", rr.coverage_ok},
                      {"min_radius_ok", rr.min_radius_ok},
                      {"depth", ref.depth},
                      {"M", ref.M},
                      {"pass", rr.pass()}}}};
        // packing measure + reifenberg on it
        try {
            const DiscreteMeasure pm = packing_measure(ref.balls, k, field_->grid.n);
            const auto rh = reifenberg_hypothesis(pm, cfg_.flatness.delta_R, k, cfg_.flatness.C_R);
            verify["packing_measure"] = {{"atoms", pm.points.size()},
                                         {"reifenberg_pass", rh.pass},
                                         {"worst_ratio", rh.worst_ratio},
                                         {"packing", rh.packing}};
        } catch (const std::invalid_argument& e) {
            verify["packing_measure"] = {{"error", e.what()}};
        }
        write_json(out("cover_verify.json"), verify);
    }

    void stage_minkowski() {
        auto& q = quad();
        const int k = cfg_.covering.k;
        stratum_measure(k);  // ensure strata computed
        const double h = field_->grid.h;
        std::vector<double> radii{1.0 / 8, 1.0 / 16, 1.0 / 32};
        std::erase_if(radii, [&](double r) { return r < 4 * h; });
        std::vector<Vec> stratum_pts;
        for (int node : strata_[k].nodes) stratum_pts.push_back(field_->grid.point(node));
        const MinkowskiTable t =
            minkowski_estimate(q, stratum_pts, k, radii, cfg_.covering.delta, cfg_.covering.rho);
        CsvWriter csv(out("minkowski.csv"), hash_,
                      {"r", "tube_volume", "tube_restricted", "cover_bound", "ball_count"});
        for (const auto& row : t.rows)
            csv.row({row.r, row.tube_volume, row.tube_restricted, row.cover_bound,
                     static_cast<double>(row.ball_count)});
        write_json(out("minkowski.json"),
                   json{{"config_hash", hash_}, {"slope", t.slope}, {"k", k},
                        {"expected_slope", field_->grid.n - k}});
        minkowski_slope_ = t.slope;
    }

    void stage_report() {
        json j{{"config_hash", hash_}, {"example", cfg_.example}, {"stages", cfg_.stages}};
        if (report_) j["solver_converged"] = report_->converged;
        if (minkowski_slope_) j["minkowski_slope"] = *minkowski_slope_;
        for (const auto& [k, s] : strata_)
            j["stratum_sizes"][std::to_string(k)] = s.nodes.size();
        write_json(out("report.json"), j);
    }

    void write_manifest() {
        json t;
        for (const auto& [k, v] : timings_) t[k] = v;
        write_json(out("manifest.json"), json{{"config", config_to_json(cfg_)},
                                              {"config_hash", hash_},
                                              {"stage_seconds", t}});
    }

    ExperimentConfig cfg_;
    std::string hash_;
    std::optional<MapField> field_;
    std::optional<SolveReport> report_;
    std::optional<FieldQuadrature> quad_;
    std::optional<std::vector<int>> singular_;
    std::map<int, StratumSet> strata_;
    std::optional<double> minkowski_slope_;
    std::map<std::string, double> timings_;
};

inline int run_pipeline(const ExperimentConfig& cfg) { return Pipeline(cfg).run(); }

}  // namespace conelab
