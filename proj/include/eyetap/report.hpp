#pragma once

// Metrics over SessionLogs: per-log facts, then aggregates per technique,
// task and Fitts condition. Output depends only on the logs and their names.

#include "eyetap/metrics.hpp"
#include "eyetap/session_log.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eyetap {

struct NamedLog {
    std::string name;
    SessionLog log;
};

/// Every *.jsonl file in dir, sorted by file name. Throws ParseError naming the file.
std::vector<NamedLog> load_logs(const std::filesystem::path& dir);

/// end_t - start_t of the block's level_complete record.
std::optional<Millis> completion_time(const SessionLog& log, int block = 0);
/// Endpoints of matrix selections judged as errors.
std::vector<Point> error_locations(const SessionLog& log);
/// Gaze path from the first correct matrix selection to completion vs. the target polyline.
std::optional<PathCostResult> matrix_path_cost(const SessionLog& log);
std::vector<TrialOutcome> fitts_trials(const SessionLog& log);
std::vector<double> dart_distances(const SessionLog& log);

struct Report {
    nlohmann::json summary;
    std::string trials_csv;
    std::string conditions_csv;
};

Report analyze_logs(const std::vector<NamedLog>& logs);

/// Writes report.json, trials.csv and conditions.csv into out_dir.
void write_report(const Report& report, const std::filesystem::path& out_dir);

}  // namespace eyetap
