#pragma once
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracpk/estimation.hpp"
#include "fracpk/model.hpp"
#include "fracpk/procedure.hpp"

namespace fracpk {

using json = nlohmann::json;

namespace detail {

// 17 significant digits: enough to round-trip an IEEE double exactly.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& file) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream os(file);
    if (!os) throw ValidationError("cannot open output file: " + file.string());
    return os;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) {
        // trim surrounding whitespace
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& file, std::size_t lineno,
                           const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ValidationError(file + ":" + std::to_string(lineno) + ": cannot parse " + what +
                              " value '" + s + "'");
    }
}

} // namespace detail

inline void write_sample_path_csv(const std::filesystem::path& file, const SamplePath& path,
                                  const std::string& value_header = "value") {
    auto os = detail::open_out(file);
    os << "t," << value_header << "\n";
    for (std::size_t i = 0; i < path.values.size(); ++i)
        os << detail::fmt17(path.grid[i]) << "," << detail::fmt17(path.values[i]) << "\n";
}

inline void write_bundle_csv(const std::filesystem::path& file, const ProcessBundle& b) {
    auto os = detail::open_out(file);
    os << "t,bh,bh_theta,x,c\n";
    for (std::size_t i = 0; i < b.grid.size(); ++i)
        os << detail::fmt17(b.grid[i]) << "," << detail::fmt17(b.bh.values[i]) << ","
           << detail::fmt17(b.bh_theta.values[i]) << "," << detail::fmt17(b.x.values[i]) << ","
           << detail::fmt17(b.c.values[i]) << "\n";
}

inline json params_to_json(const ModelParams& p) {
    return json{{"upsilon", p.upsilon}, {"sigma", p.sigma},     {"beta", p.beta},
                {"hurst", p.hurst},     {"c0", p.c0},           {"horizon", p.horizon}};
}

inline json bundle_sidecar(const ProcessBundle& b) {
    json j{{"params", params_to_json(b.params)},
           {"seed", b.seed.value},
           {"generator", to_string(b.generator)},
           {"steps", b.grid.steps()}};
    if (b.tau0_index) {
        j["tau0_index"] = *b.tau0_index;
        j["tau0_time"] = b.grid[*b.tau0_index];
    } else {
        j["tau0_index"] = nullptr;
    }
    return j;
}

inline void write_json(const std::filesystem::path& file, const json& j) {
    auto os = detail::open_out(file);
    os << j.dump(2) << "\n";
}

// Reads a `t,c` CSV of observed concentrations. Errors cite the offending
// line; validation (uniform grid, positive concentrations) happens here too.
inline ObservationSet load_observations(const std::filesystem::path& file, double beta) {
    std::ifstream is(file);
    if (!is) throw ValidationError("cannot open observations file: " + file.string());
    ObservationSet obs;
    obs.beta = beta;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_csv_line(line);
        if (!header_seen) {
            if (fields.size() < 2 || fields[0] != "t")
                throw ValidationError(file.string() + ":" + std::to_string(lineno) +
                                      ": expected header starting with 't,'");
            header_seen = true;
            continue;
        }
        if (fields.size() != 2)
            throw ValidationError(file.string() + ":" + std::to_string(lineno) +
                                  ": expected 2 fields, got " + std::to_string(fields.size()));
        obs.times.push_back(detail::parse_double(fields[0], file.string(), lineno, "time"));
        obs.concentrations.push_back(
            detail::parse_double(fields[1], file.string(), lineno, "concentration"));
    }
    if (!header_seen) throw ValidationError(file.string() + ": empty file");
    obs.validate();
    return obs;
}

inline void write_observations_csv(const std::filesystem::path& file, const ObservationSet& obs) {
    auto os = detail::open_out(file);
    os << "t,c\n";
    for (std::size_t i = 0; i < obs.times.size(); ++i)
        os << detail::fmt17(obs.times[i]) << "," << detail::fmt17(obs.concentrations[i]) << "\n";
}

inline json estimation_to_json(const EstimationResult& r) {
    json j{{"estimate", r.estimate}, {"warnings", r.warnings}};
    for (const auto& [k, v] : r.stats) j["stats"][k] = v;
    return j;
}

inline json budget_table_to_json(const BudgetTable& t) {
    json rows = json::array();
    for (std::size_t i = 0; i < t.radii.size(); ++i) {
        json row{{"radius", t.radii[i]}};
        for (std::size_t j = 0; j < t.lambdas.size(); ++j)
            row["budgets"].push_back(t.budgets[i][j]);
        rows.push_back(row);
    }
    return json{{"lambdas", t.lambdas}, {"rows", rows}, {"kernel_value", t.kernel_value}};
}

inline json procedure_report_to_json(const ProcedureReport& r) {
    json iters = json::array();
    for (const auto& it : r.iterations) {
        json j{{"beta", it.beta},
               {"radius_c", it.radius_c},
               {"x_radius", it.x_radius},
               {"budget", it.budget},
               {"deviation_ratio", it.deviation_ratio},
               {"action", it.action}};
        if (it.implied_hurst) j["implied_hurst"] = *it.implied_hurst;
        iters.push_back(j);
    }
    return json{{"iterations", iters},
                {"recommended_hurst", r.recommended_hurst},
                {"recommended_beta", r.recommended_beta},
                {"sigma2_max", r.sigma2_max},
                {"sigma2_interval", {0.0, r.sigma2_max}},
                {"upsilon_used", r.upsilon_used},
                {"upsilon_fitted", r.upsilon_fitted},
                {"budget_table", budget_table_to_json(r.table)},
                {"warnings", r.warnings}};
}

// Human-readable budget grid, radii as rows, lambda levels as columns.
inline std::string budget_table_text(const BudgetTable& t) {
    std::ostringstream os;
    os << "radius \\ lambda";
    for (double l : t.lambdas) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%10.2f", l);
        os << buf;
    }
    os << "\n";
    for (std::size_t i = 0; i < t.radii.size(); ++i) {
        char head[32];
        std::snprintf(head, sizeof(head), "%-15.2f", t.radii[i]);
        os << head;
        for (std::size_t j = 0; j < t.lambdas.size(); ++j) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%10.2f", t.budgets[i][j]);
            os << buf;
        }
        os << "\n";
    }
    return os.str();
}

} // namespace fracpk
