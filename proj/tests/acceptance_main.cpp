// Acceptance runner: one pass/fail line per criterion; exit 0 iff all pass.

#include <cstdlib>
#include <iostream>

#include "conelab/acceptance.hpp"

int main(int argc, char** argv) {
    std::string outdir = "acceptance_out";
    if (argc > 1) outdir = argv[1];
    if (const char* w = std::getenv("CONELAB_WORKERS"))
        conelab::default_workers() = std::max(1, std::atoi(w));
    else
        conelab::default_workers() = 4;
    const auto results = conelab::acceptance::run_all(outdir);
    const bool ok = conelab::acceptance::report(results, std::cout);
    return ok ? 0 : 1;
}
