#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "mrp/engine.hpp"
#include "mrp/sim.hpp"

namespace mrp {

inline constexpr const char* kReportVersion = "1.0.0";

using Json = nlohmann::ordered_json;

Json to_json(const MrpTestResult& r);
Json to_json(const SimConfig& cfg);
Json to_json(const ExperimentReport& r, bool include_q_stats = false);

/// CSV layout of one experiment cell.
std::string experiment_csv_header();
std::string experiment_csv_row(const ExperimentReport& r);

/// Appends a row, writing the header first when the file is new or empty.
void append_experiment_csv(const std::filesystem::path& path, const ExperimentReport& r);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace mrp
