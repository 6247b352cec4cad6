#pragma once

// Experiment configuration: one JSON file drives the whole pipeline; flags
// override fields. Parameter ranges are validated before any computation and
// the config round-trips through serialization bit-exactly.

#include <set>

#include "io.hpp"

namespace conelab {

struct ExperimentConfig {
    std::string example = "tripod";  // tripod | product | product-factor | example3 | linear
    std::string trace_file;          // JSON-lines field supplying the boundary trace
    std::string mode = "analytic";   // analytic | solved

    struct {
        int n = 2;
        double radius = 1.0;
        double spacing = 1.0 / 64;
    } grid;

    struct {
        double tol = 1e-8;  // relative to the boundary diameter
        int max_sweeps = 100000;
        std::string init = "cone";  // cone | boundary-mean | analytic
    } solver;

    struct {
        double eta = 0.05;
        std::vector<int> k_list{0};
        double r_min = 0.0;  // 0: use 8h
        double r_max = 0.0;  // 0: use the largest admissible radius
        int radius_count = 20;
        double stratum_r = 1.0 / 16;
        int center_count = 10;
    } analysis;

    struct {
        double rho = 1.0 / 256;
        double delta = 0.05;
        double sigma = 1.0 / 64;
        double s = 1.0 / 32;
        double S = 1.0 / 8;
        int k = 0;
    } covering;

    struct {
        double delta_R = 0.01;
        double C_R = 40.0;
    } flatness;

    std::vector<std::string> stages{"solve", "order", "strata", "flatness", "cover", "minkowski",
                                    "report"};
    std::string out_dir = "out";
    int workers = 1;

    std::vector<std::string> validate() const {
        std::vector<std::string> errs;
        static const std::set<std::string> examples{"tripod", "product", "product-factor",
                                                    "example3", "linear"};
        if (!examples.count(example) && trace_file.empty())
            errs.push_back("unknown example '" + example + "' and no trace_file");
        if (grid.n != 2 && grid.n != 3) errs.push_back("grid.n must be 2 or 3");
        if (grid.radius <= 0) errs.push_back("grid.radius must be positive");
        if (grid.spacing <= 0) errs.push_back("grid.spacing must be positive");
        if (grid.spacing > grid.radius / 8.0) errs.push_back("grid.spacing must satisfy h <= R/8");
        if (solver.tol <= 0) errs.push_back("solver.tol must be positive");
        if (solver.max_sweeps <= 0) errs.push_back("solver.max_sweeps must be positive");
        if (!(analysis.eta > 0 && analysis.eta < 1)) errs.push_back("analysis.eta must lie in (0,1)");
        if (!(covering.rho > 0 && covering.rho <= 1.0 / 256))
            errs.push_back("covering.rho must lie in (0, 1/256]");
        if (!(covering.sigma > 0 && covering.sigma < covering.S && covering.S <= 1.0 / 8))
            errs.push_back("covering needs 0 < sigma < S <= 1/8");
        if (!(covering.s > 0 && covering.s < covering.S))
            errs.push_back("covering needs 0 < s < S");
        if (covering.delta <= 0) errs.push_back("covering.delta must be positive");
        if (flatness.delta_R <= 0) errs.push_back("flatness.delta_R must be positive");
        if (workers < 1) errs.push_back("workers must be >= 1");
        static const std::set<std::string> known{"solve",  "order",     "strata", "flatness",
                                                 "cover",  "minkowski", "report", "selftest"};
        for (const auto& s : stages)
            if (!known.count(s)) errs.push_back("unknown stage '" + s + "'");
        return errs;
    }
};

inline json config_to_json(const ExperimentConfig& c) {
    json j;
    j["example"] = c.example;
    j["trace_file"] = c.trace_file;
    j["mode"] = c.mode;
    j["grid"] = {{"n", c.grid.n}, {"radius", c.grid.radius}, {"spacing", c.grid.spacing}};
    j["solver"] = {{"tol", c.solver.tol}, {"max_sweeps", c.solver.max_sweeps}, {"init", c.solver.init}};
    j["analysis"] = {{"eta", c.analysis.eta},       {"k_list", c.analysis.k_list},
                     {"r_min", c.analysis.r_min},   {"r_max", c.analysis.r_max},
                     {"radius_count", c.analysis.radius_count},
                     {"stratum_r", c.analysis.stratum_r},
                     {"center_count", c.analysis.center_count}};
    j["covering"] = {{"rho", c.covering.rho}, {"delta", c.covering.delta},
                     {"sigma", c.covering.sigma}, {"s", c.covering.s},
                     {"S", c.covering.S},     {"k", c.covering.k}};
    j["flatness"] = {{"delta_R", c.flatness.delta_R}, {"C_R", c.flatness.C_R}};
    j["stages"] = c.stages;
    j["out_dir"] = c.out_dir;
    j["workers"] = c.workers;
    return j;
}

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    c.example = j.value("example", c.example);
    c.trace_file = j.value("trace_file", c.trace_file);
    c.mode = j.value("mode", c.mode);
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        c.grid.n = g.value("n", c.grid.n);
        c.grid.radius = g.value("radius", c.grid.radius);
        c.grid.spacing = g.value("spacing", c.grid.spacing);
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        c.solver.tol = s.value("tol", c.solver.tol);
        c.solver.max_sweeps = s.value("max_sweeps", c.solver.max_sweeps);
        c.solver.init = s.value("init", c.solver.init);
    }
    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        c.analysis.eta = a.value("eta", c.analysis.eta);
        if (a.contains("k_list")) c.analysis.k_list = a.at("k_list").get<std::vector<int>>();
        c.analysis.r_min = a.value("r_min", c.analysis.r_min);
        c.analysis.r_max = a.value("r_max", c.analysis.r_max);
        c.analysis.radius_count = a.value("radius_count", c.analysis.radius_count);
        c.analysis.stratum_r = a.value("stratum_r", c.analysis.stratum_r);
        c.analysis.center_count = a.value("center_count", c.analysis.center_count);
    }
    if (j.contains("covering")) {
        const auto& v = j.at("covering");
        c.covering.rho = v.value("rho", c.covering.rho);
        c.covering.delta = v.value("delta", c.covering.delta);
        c.covering.sigma = v.value("sigma", c.covering.sigma);
        c.covering.s = v.value("s", c.covering.s);
        c.covering.S = v.value("S", c.covering.S);
        c.covering.k = v.value("k", c.covering.k);
    }
    if (j.contains("flatness")) {
        const auto& v = j.at("flatness");
        c.flatness.delta_R = v.value("delta_R", c.flatness.delta_R);
        c.flatness.C_R = v.value("C_R", c.flatness.C_R);
    }
    if (j.contains("stages")) c.stages = j.at("stages").get<std::vector<std::string>>();
    c.out_dir = j.value("out_dir", c.out_dir);
    c.workers = j.value("workers", c.workers);
    return c;
}

inline std::string config_hash(const ExperimentConfig& c) {
    // the hash covers everything that affects numeric artifacts; workers and
    // out_dir must not
    json j = config_to_json(c);
    j.erase("workers");
    j.erase("out_dir");
    return fnv1a_hash(j.dump());
}

}  // namespace conelab
