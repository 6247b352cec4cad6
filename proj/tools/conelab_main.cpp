// Command-line front end: runs pipeline stages from a JSON config, or the
// built-in acceptance suite (selftest).

#include <CLI11.hpp>
#include <iostream>

#include "conelab/acceptance.hpp"
#include "conelab/pipeline.hpp"

using namespace conelab;

namespace {

int run_stage_command(const std::string& stage, const std::string& config_path,
                      const std::string& out_override, int workers_override) {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
        try {
            cfg = config_from_json(read_json(config_path));
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 2;
        }
    }
    if (stage != "run") cfg.stages = {stage};
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (workers_override > 0) cfg.workers = workers_override;
    return run_pipeline(cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conelab: harmonic maps into conical complexes and the stratification pipeline"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int workers = 0;

    const std::vector<std::string> stages{"solve",  "order",     "strata", "flatness",
                                          "cover",  "minkowski", "report", "run"};
    std::string chosen;
    for (const auto& s : stages) {
        auto* sub = app.add_subcommand(
            s, s == "run" ? "run every stage listed in the config" : "run the '" + s + "' stage");
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--workers", workers, "worker count (must not change outputs)");
        sub->callback([&chosen, s] { chosen = s; });
    }
    auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");
    std::string selftest_out;
    selftest->add_option("--out", selftest_out, "directory for acceptance artifacts");
    selftest->add_option("--workers", workers, "worker count");
    selftest->callback([&chosen] { chosen = "selftest"; });

    CLI11_PARSE(app, argc, argv);

    if (chosen == "selftest") {
        if (workers > 0) default_workers() = workers;
        const auto results = acceptance::run_all(selftest_out.empty() ? "acceptance_out" : selftest_out);
        return acceptance::report(results, std::cout) ? 0 : 1;
    }
    return run_stage_command(chosen, config_path, out_dir, workers);
}
