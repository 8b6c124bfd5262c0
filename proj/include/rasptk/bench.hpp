#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rasptk {

// Count of RASP constructor call sites plus tokens/indices references in the
// program text. Errors: propagated parse errors.
int difficulty_score(std::string_view program);

enum class Outcome { kPass, kFail, kError };
std::string_view outcome_name(Outcome o);

struct ResultRecord {
  std::string task;
  int difficulty = 1;
  Outcome outcome = Outcome::kFail;
  int failed_stage = 0;  // 0 when passed or not attributable
  int attempts = 0;
  std::string model;
  std::string prompt_variant;
};

nlohmann::json result_to_json(const ResultRecord& r);
ResultRecord result_from_json(const nlohmann::json& j);

struct DifficultyBin {
  int passed = 0;
  int failed = 0;  // includes errors
};

struct Metrics {
  int total = 0;
  int passed = 0;
  int errors = 0;
  double pass_rate = 0;
  double weighted_score = 0;
  long passed_difficulty = 0;
  long total_difficulty = 0;
  std::map<int, DifficultyBin> by_difficulty;
};

// Errors: EmptyResults.
Metrics compute_metrics(const std::vector<ResultRecord>& results);

nlohmann::json metrics_to_json(const Metrics& m);

enum class ReportFormat { kJson, kCsv, kSvg };

std::string render_report_json(const Metrics& m, std::vector<ResultRecord> results);
std::string render_report_csv(std::vector<ResultRecord> results);
// Stacked bars per difficulty: passed (bottom) and failed (top).
std::string render_histogram_svg(const std::map<int, DifficultyBin>& bins, std::string_view title);

// Writes report.json / report.csv / histogram.svg into `dir` for the formats
// requested and returns the written paths. Errors: IoError.
std::vector<std::filesystem::path> emit_report(const Metrics& m, const std::vector<ResultRecord>& results,
                                               const std::vector<ReportFormat>& formats,
                                               const std::filesystem::path& dir);

// Reads every *.json under `dir` holding either one record, an array of
// records, or an object with a "results" array. Errors: IoError, SchemaError.
std::vector<ResultRecord> load_results(const std::filesystem::path& dir);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace rasptk
