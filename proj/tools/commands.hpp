#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace cli {

/// Columnar data written as CSV and, for reports, as gnuplot blocks.
struct Series {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Analysis {
    json result;
    std::vector<Series> series;
    bool violated = false;  // a hypothesis failed: reported, not an error
};

Analysis analyze_surface(const Scenario& sc);
Analysis ft_surface(const Scenario& sc);
Analysis fio_decay(const Scenario& sc);
Analysis evolve_model(const Scenario& sc);
Analysis check_hyp(const Scenario& sc);
Analysis check_l2(const Scenario& sc);
Analysis vdc_table(const Scenario& sc);
Analysis invariants(const Scenario& sc);

/// Runs every analysis block present and checks the expectations.
Analysis report(const Scenario& sc);

struct OutputContext {
    std::string command;
    std::string scenario_path;
    std::string sha256;
    std::filesystem::path directory;
};

/// Writes <id>.<command>.json, one CSV per series and, for reports, a .dat
/// file; returns the JSON document.
json write_outputs(const Scenario& sc, const Analysis& a, const OutputContext& ctx);

/// Envelope shared by results and error reports.
json envelope(const Scenario* sc, const OutputContext& ctx, const std::string& status);

inline constexpr int kSchemaVersion = 1;

}  // namespace cli
