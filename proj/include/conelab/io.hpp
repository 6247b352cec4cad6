#pragma once

// Serialization: JSON for targets, points, configs and reports; JSON-lines for
// fields; CSV for profiles, strata and tables. All floating-point output uses
// %.17g so reruns are byte-identical; every artifact carries the config hash
// in its header.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "covering.hpp"

namespace conelab {

using json = nlohmann::json;

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// FNV-1a over the canonical serialization; stable across runs and platforms.
inline std::string fnv1a_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline json target_to_json(const ConicalTarget& t) {
    return json{{"flat_dim", t.flat_dim}, {"ray_count", t.ray_count}};
}

inline ConicalTarget target_from_json(const json& j) {
    return ConicalTarget::make(j.at("flat_dim").get<int>(), j.at("ray_count").get<int>());
}

inline json point_to_json(const ConicalTarget& t, const TargetPoint& p) {
    json flat = json::array();
    for (int i = 0; i < t.flat_dim; ++i) flat.push_back(p.flat[i]);
    json j{{"flat", flat}, {"radial", p.radial}};
    if (p.ray >= 0)
        j["ray"] = p.ray;
    else
        j["ray"] = nullptr;
    return j;
}

inline TargetPoint point_from_json(const ConicalTarget& t, const json& j) {
    TargetPoint p;
    const auto& flat = j.at("flat");
    for (std::size_t i = 0; i < flat.size() && i < kMaxFlat; ++i) p.flat[i] = flat[i].get<double>();
    p.ray = j.at("ray").is_null() ? -1 : j.at("ray").get<int>();
    p.radial = j.at("radial").get<double>();
    p.canonicalize();
    check_point(t, p);
    return p;
}

// One JSON record per node: {index, flat[], ray, radial}; a header line first.
inline void write_field_jsonl(const std::filesystem::path& path, const MapField& f,
                              const std::string& config_hash) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    json header{{"type", "conelab.field"},
                {"config_hash", config_hash},
                {"target", target_to_json(f.target)},
                {"grid", {{"n", f.grid.n},
                          {"radius", f.grid.radius},
                          {"spacing", f.grid.h},
                          {"nodes", f.grid.size()}}},
                {"provenance", f.provenance == Provenance::analytic ? "analytic" : "solved"}};
    os << header.dump() << "\n";
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
        const TargetPoint p = f.value(static_cast<int>(i));
        json rec{{"index", i}};
        json flat = json::array();
        for (int a = 0; a < f.target.flat_dim; ++a) flat.push_back(p.flat[a]);
        rec["flat"] = flat;
        rec["ray"] = p.ray >= 0 ? json(p.ray) : json(nullptr);
        rec["radial"] = p.radial;
        os << rec.dump() << "\n";
    }
}

inline MapField read_field_jsonl(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty field file");
    const json header = json::parse(line);
    const ConicalTarget target = target_from_json(header.at("target"));
    const auto& g = header.at("grid");
    DomainGrid grid = DomainGrid::make(g.at("n").get<int>(), Vec{0, 0, 0},
                                       g.at("radius").get<double>(), g.at("spacing").get<double>());
    MapField f = MapField::zeros(grid, target);
    f.provenance = header.value("provenance", "solved") == std::string("analytic")
                       ? Provenance::analytic
                       : Provenance::solved;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const json rec = json::parse(line);
        const int idx = rec.at("index").get<int>();
        TargetPoint p;
        const auto& flat = rec.at("flat");
        for (std::size_t a = 0; a < flat.size() && a < kMaxFlat; ++a) p.flat[a] = flat[a].get<double>();
        p.ray = rec.at("ray").is_null() ? -1 : rec.at("ray").get<int>();
        p.radial = rec.at("radial").get<double>();
        p.canonicalize();
        f.set(idx, p);
    }
    if (f.provenance == Provenance::analytic) f.provenance = Provenance::solved;  // closures do not survive
    return f;
}

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::string& config_hash,
              const std::vector<std::string>& columns)
        : os_(path) {
        if (!os_) throw std::runtime_error("cannot open " + path.string());
        os_ << "# config_hash=" << config_hash << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            os_ << columns[i] << (i + 1 == columns.size() ? "\n" : ",");
    }
    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i)
            os_ << fmt_double(vals[i]) << (i + 1 == vals.size() ? "\n" : ",");
    }
    void raw_row(const std::string& line) { os_ << line << "\n"; }

  private:
    std::ofstream os_;
};

inline void write_profile_csv(const std::filesystem::path& path, const FrequencyProfile& p,
                              const std::string& config_hash) {
    CsvWriter csv(path, config_hash, {"r", "E", "I", "Ord", "E_phi", "I_phi", "Ord_phi"});
    for (std::size_t i = 0; i < p.r.size(); ++i)
        csv.row({p.r[i], p.E[i], p.I[i], p.ord[i], p.E_phi[i], p.I_phi[i], p.ord_phi[i]});
}

inline json cover_to_json(const BallCover& cover) {
    json balls = json::array();
    for (const auto& b : cover.balls) {
        const char* label = b.label == BallLabel::good    ? "good"
                            : b.label == BallLabel::bad   ? "bad"
                                                          : "terminal";
        balls.push_back(json{{"center", {b.center[0], b.center[1], b.center[2]}},
                             {"radius", b.radius},
                             {"label", label},
                             {"generation", b.generation}});
    }
    return json{{"balls", balls},
                {"generations", cover.generations},
                {"packing_sum", cover.packing_sum},
                {"packing_ratio", cover.packing_ratio},
                {"params",
                 {{"rho", cover.params.rho},
                  {"delta", cover.params.delta},
                  {"sigma", cover.params.sigma},
                  {"tau", cover.params.tau},
                  {"k", cover.params.k},
                  {"M", cover.params.M}}}};
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << j.dump(2) << "\n";
}

inline json read_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    json j;
    is >> j;
    return j;
}

inline DiscreteMeasure read_measure_csv(const std::filesystem::path& path, int dim) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    DiscreteMeasure mu;
    mu.dim = dim;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
        Vec p{0, 0, 0};
        double mass = 0.0;
        std::istringstream ss(line);
        std::string tok;
        int col = 0;
        while (std::getline(ss, tok, ',')) {
            const double v = std::stod(tok);
            if (col < dim)
                p[static_cast<std::size_t>(col)] = v;
            else
                mass = v;
            ++col;
        }
        mu.points.push_back(p);
        mu.mass.push_back(mass);
    }
    return mu;
}

inline void write_measure_csv(const std::filesystem::path& path, const DiscreteMeasure& mu,
                              const std::string& config_hash) {
    std::vector<std::string> cols;
    for (int d = 0; d < mu.dim; ++d) cols.push_back("x" + std::to_string(d + 1));
    cols.push_back("mass");
    CsvWriter csv(path, config_hash, cols);
    for (std::size_t i = 0; i < mu.points.size(); ++i) {
        std::vector<double> row;
        for (int d = 0; d < mu.dim; ++d) row.push_back(mu.points[i][static_cast<std::size_t>(d)]);
        row.push_back(mu.mass[i]);
        csv.row(row);
    }
}

}  // namespace conelab
