#include "rasptk/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rasptk/error.hpp"
#include "rasptk/surface.hpp"

namespace rasptk {

using nlohmann::json;

int difficulty_score(std::string_view program) { return count_call_sites(parse_program(program)); }

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kPass: return "pass";
    case Outcome::kFail: return "fail";
    case Outcome::kError: return "error";
  }
  return "?";
}

json result_to_json(const ResultRecord& r) {
  return {{"task", r.task},
          {"difficulty", r.difficulty},
          {"outcome", std::string(outcome_name(r.outcome))},
          {"failed_stage", r.failed_stage == 0 ? json(nullptr) : json(r.failed_stage)},
          {"attempts", r.attempts},
          {"model", r.model},
          {"prompt_variant", r.prompt_variant}};
}

ResultRecord result_from_json(const json& j) {
  try {
    ResultRecord r;
    r.task = j.at("task").get<std::string>();
    r.difficulty = j.at("difficulty").get<int>();
    std::string outcome = j.at("outcome").get<std::string>();
    if (outcome == "pass") r.outcome = Outcome::kPass;
    else if (outcome == "fail") r.outcome = Outcome::kFail;
    else if (outcome == "error") r.outcome = Outcome::kError;
    else throw Error(ErrorCode::kSchemaError, "unknown outcome '" + outcome + "'");
    if (j.contains("failed_stage") && !j["failed_stage"].is_null()) r.failed_stage = j["failed_stage"].get<int>();
    r.attempts = j.value("attempts", 0);
    r.model = j.value("model", "");
    r.prompt_variant = j.value("prompt_variant", "");
    if (r.difficulty < 1) throw Error(ErrorCode::kSchemaError, "difficulty must be at least 1");
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("malformed result record: ") + e.what());
  }
}

Metrics compute_metrics(const std::vector<ResultRecord>& results) {
  if (results.empty()) throw Error(ErrorCode::kEmptyResults, "no result records to score");
  Metrics m;
  for (const auto& r : results) {
    ++m.total;
    m.total_difficulty += r.difficulty;
    auto& bin = m.by_difficulty[r.difficulty];
    if (r.outcome == Outcome::kPass) {
      ++m.passed;
      m.passed_difficulty += r.difficulty;
      ++bin.passed;
    } else {
      ++bin.failed;
      if (r.outcome == Outcome::kError) ++m.errors;
    }
  }
  m.pass_rate = static_cast<double>(m.passed) / m.total;
  m.weighted_score = m.total_difficulty == 0 ? 0.0
                                             : static_cast<double>(m.passed_difficulty) / m.total_difficulty;
  return m;
}

json metrics_to_json(const Metrics& m) {
  json bins = json::array();
  for (const auto& [d, b] : m.by_difficulty) {
    bins.push_back({{"difficulty", d}, {"passed", b.passed}, {"failed", b.failed}});
  }
  return {{"total", m.total},
          {"passed", m.passed},
          {"errors", m.errors},
          {"pass_rate", m.pass_rate},
          {"weighted_score", m.weighted_score},
          {"passed_difficulty", m.passed_difficulty},
          {"total_difficulty", m.total_difficulty},
          {"by_difficulty", std::move(bins)}};
}

namespace {

void sort_by_name(std::vector<ResultRecord>& results) {
  std::stable_sort(results.begin(), results.end(),
                   [](const ResultRecord& a, const ResultRecord& b) { return a.task < b.task; });
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_report_json(const Metrics& m, std::vector<ResultRecord> results) {
  sort_by_name(results);
  json list = json::array();
  for (const auto& r : results) list.push_back(result_to_json(r));
  json doc = {{"metrics", metrics_to_json(m)}, {"results", std::move(list)}};
  return doc.dump(2) + "\n";
}

std::string render_report_csv(std::vector<ResultRecord> results) {
  sort_by_name(results);
  std::string out = "task,difficulty,outcome,failed_stage,attempts,model,prompt_variant\n";
  for (const auto& r : results) {
    out += csv_field(r.task) + "," + std::to_string(r.difficulty) + "," + std::string(outcome_name(r.outcome)) +
           "," + (r.failed_stage ? std::to_string(r.failed_stage) : "") + "," + std::to_string(r.attempts) + "," +
           csv_field(r.model) + "," + csv_field(r.prompt_variant) + "\n";
  }
  return out;
}

std::string render_histogram_svg(const std::map<int, DifficultyBin>& bins, std::string_view title) {
  const int bar = 24, gap = 6, height = 200, left = 40, top = 30, bottom = 40;
  int lo = bins.empty() ? 1 : bins.begin()->first;
  int hi = bins.empty() ? 1 : bins.rbegin()->first;
  int peak = 1;
  for (const auto& [d, b] : bins) peak = std::max(peak, b.passed + b.failed);
  int count = hi - lo + 1;
  int width = left + count * (bar + gap) + gap + 10;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << (top + height + bottom) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<title>" << xml_escape(title) << "</title>\n";
  svg << "<text x=\"" << left << "\" y=\"18\" font-size=\"13\">" << xml_escape(title) << "</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + height << "\" x2=\"" << width - 10 << "\" y2=\""
      << top + height << "\" stroke=\"#333\"/>\n";
  svg << "<text x=\"4\" y=\"" << top + 10 << "\">" << peak << "</text>\n";
  for (int d = lo; d <= hi; ++d) {
    DifficultyBin b;
    if (auto it = bins.find(d); it != bins.end()) b = it->second;
    int x = left + gap + (d - lo) * (bar + gap);
    int hp = height * b.passed / peak;
    int hf = height * b.failed / peak;
    int y = top + height;
    if (hp > 0) {
      svg << "<rect class=\"pass\" x=\"" << x << "\" y=\"" << y - hp << "\" width=\"" << bar << "\" height=\"" << hp
          << "\" fill=\"#4c9a2a\"><title>difficulty " << d << ": " << b.passed << " passed</title></rect>\n";
    }
    if (hf > 0) {
      svg << "<rect class=\"fail\" x=\"" << x << "\" y=\"" << y - hp - hf << "\" width=\"" << bar
          << "\" height=\"" << hf << "\" fill=\"#c0392b\"><title>difficulty " << d << ": " << b.failed
          << " failed</title></rect>\n";
    }
    svg << "<text x=\"" << x + bar / 2 << "\" y=\"" << y + 14 << "\" text-anchor=\"middle\">" << d << "</text>\n";
    if (b.passed + b.failed > 0) {
      svg << "<text x=\"" << x + bar / 2 << "\" y=\"" << y - hp - hf - 3 << "\" text-anchor=\"middle\">"
          << b.passed + b.failed << "</text>\n";
    }
  }
  svg << "<text x=\"" << left + (width - left) / 2 << "\" y=\"" << top + height + 32
      << "\" text-anchor=\"middle\">RASP function calls</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<std::filesystem::path> emit_report(const Metrics& m, const std::vector<ResultRecord>& results,
                                               const std::vector<ReportFormat>& formats,
                                               const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  for (auto f : formats) {
    std::filesystem::path p;
    switch (f) {
      case ReportFormat::kJson:
        p = dir / "report.json";
        write_text_file(p, render_report_json(m, results));
        break;
      case ReportFormat::kCsv:
        p = dir / "report.csv";
        write_text_file(p, render_report_csv(results));
        break;
      case ReportFormat::kSvg:
        p = dir / "histogram.svg";
        write_text_file(p, render_histogram_svg(m.by_difficulty, "Results by difficulty"));
        break;
    }
    written.push_back(p);
  }
  return written;
}

std::vector<ResultRecord> load_results(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIoError, dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json" &&
        entry.path().filename() != "report.json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<ResultRecord> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kSchemaError, f.string() + ": " + e.what());
    }
    const json* list = &doc;
    if (doc.is_object() && doc.contains("results")) list = &doc["results"];
    if (list->is_array()) {
      for (const auto& r : *list) out.push_back(result_from_json(r));
    } else if (doc.is_object() && doc.contains("task") && doc.contains("outcome") && doc.contains("difficulty")) {
      out.push_back(result_from_json(doc));
    }
  }
  return out;
}

}  // namespace rasptk
