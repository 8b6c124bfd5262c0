#include <gtest/gtest.h>

#include <regex>

#include "rasptk/bench.hpp"
#include "rasptk/surface.hpp"
#include "rasptk/task.hpp"
#include "test_util.hpp"

using namespace rasptk;
using namespace rasptk::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json task_json(const std::string& name) {
  return {{"name", name},
          {"description", "sorts"},
          {"function", "make_sort"},
          {"split", "test"},
          {"vocab", {{"range", {0, 5}}}},
          {"oracle", {{"builtin", "sort_ascending"}}},
          {"examples", {{{"input", {3, 1, 2}}, {"output", {1, 2, 3}}}}}};
}

ErrorCode load_error(const json& doc, std::string* message = nullptr) {
  try {
    parse_taskset(doc, ".");
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "loaded";
  return ErrorCode::kInternal;
}

ResultRecord record(const std::string& name, int d, bool pass) {
  ResultRecord r;
  r.task = name;
  r.difficulty = d;
  r.outcome = pass ? Outcome::kPass : Outcome::kFail;
  r.failed_stage = pass ? 0 : 2;
  r.attempts = pass ? 1 : 5;
  r.model = "m";
  r.prompt_variant = "0-shot";
  return r;
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("rasptk_bench_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(TaskSet, SeedSetLoads) {
  TaskSet set = load_taskset(data_path("seed_tasks.json"));
  EXPECT_EQ(set.tasks.size(), 31u);
  EXPECT_EQ(set.split(Split::kPromptExamples).size(), 20u);
  EXPECT_EQ(set.split(Split::kTest).size(), 11u);
  EXPECT_TRUE(set.metadata.contains("composition"));
  for (const auto& t : set.tasks) {
    EXPECT_FALSE(t.reference_program.empty()) << t.name;
    EXPECT_EQ(t.max_len, 10) << t.name;
  }
  for (const char* core : {"index_parity", "sort", "sort_unique", "check_prime", "max", "identity", "reverse",
                           "shift_right_1", "count_smaller", "histogram", "token_parity", "length"}) {
    EXPECT_NE(set.find(core), nullptr) << core;
  }
}

TEST(TaskSet, DuplicateNames) {
  EXPECT_EQ(load_error({{"schema_version", 1}, {"tasks", {task_json("sort"), task_json("sort")}}}),
            ErrorCode::kDuplicateName);
}

TEST(TaskSet, ExampleMismatchNamesThePair) {
  json t = task_json("sort");
  t["examples"][0]["output"] = {3, 2, 1};
  std::string msg;
  EXPECT_EQ(load_error({{"schema_version", 1}, {"tasks", {t}}}, &msg), ErrorCode::kExampleMismatch);
  EXPECT_NE(msg.find("[3, 1, 2] --> [3, 2, 1]"), std::string::npos) << msg;
}

TEST(TaskSet, FieldLevelDiagnostics) {
  json t = task_json("sort");
  t.erase("vocab");
  std::string msg;
  EXPECT_EQ(load_error({{"schema_version", 1}, {"tasks", {task_json("a"), t}}}, &msg), ErrorCode::kSchemaError);
  EXPECT_NE(msg.find("$.tasks[1].vocab"), std::string::npos) << msg;
  EXPECT_EQ(load_error({{"schema_version", 2}, {"tasks", json::array()}}), ErrorCode::kSchemaError);
  json bad_split = task_json("x");
  bad_split["split"] = "train";
  EXPECT_EQ(load_error({{"schema_version", 1}, {"tasks", {bad_split}}}), ErrorCode::kSchemaError);
  json bad_oracle = task_json("x");
  bad_oracle["oracle"] = {{"builtin", "no_such"}};
  EXPECT_EQ(load_error({{"schema_version", 1}, {"tasks", {bad_oracle}}}), ErrorCode::kUnknownOracle);
}

TEST(Oracle, Builtins) {
  TaskSet set = load_taskset(data_path("seed_tasks.json"));
  EXPECT_EQ(eval_oracle(*set.find("index_parity"), ints({5, 5, 5, 5})), ints({0, 1, 0, 1}));
  EXPECT_EQ(eval_oracle(*set.find("sort"), ints({3, 1, 2})), ints({1, 2, 3}));
  EXPECT_EQ(eval_oracle(*set.find("check_prime"), ints({2, 3, 4})), ints({1, 1, 0}));
  EXPECT_EQ(eval_oracle(*set.find("shift_right_1"), ints({1, 2, 3})), (std::vector<Value>{none(), Value::integer(1), Value::integer(2)}));
  EXPECT_EQ(eval_oracle(*set.find("frac_ones"), ints({1, 0, 1})), (std::vector<Value>{Value::integer(1), rat(1, 2), rat(2, 3)}));
}

TEST(Oracle, ExpressionGrammar) {
  auto run = [](const std::string& src, const std::vector<Value>& xs) {
    TaskSpec t;
    t.oracle = compile_expression_oracle(src);
    return eval_oracle(t, xs);
  };
  EXPECT_EQ(run("xs[i] + i", ints({3, 3, 3})), ints({3, 4, 5}));
  EXPECT_EQ(run("n - i", ints({0, 0})), ints({2, 1}));
  EXPECT_EQ(run("sorted(xs)[i]", ints({3, 1, 2})), ints({1, 2, 3}));
  EXPECT_EQ(run("xs[-1 - i]", ints({1, 2, 3})), ints({3, 2, 1}));
  EXPECT_EQ(run("sum(xs[:i + 1])", ints({1, 2, 3})), ints({1, 3, 6}));
  EXPECT_EQ(run("count(xs, xs[i])", ints({4, 4, 1})), ints({2, 2, 1}));
  EXPECT_EQ(run("xs[i - 1] if i > 0 else None", ints({7, 8})), (std::vector<Value>{none(), Value::integer(7)}));
  EXPECT_EQ(run("1 if is_prime(xs[i]) and not xs[i] == 3 else 0", ints({2, 3, 9})), ints({1, 0, 0}));
  EXPECT_EQ(run("xs[i] / 2", ints({3})), (std::vector<Value>{rat(3, 2)}));
  EXPECT_EQ(run("max(xs) - min(xs)", ints({3, 9, 4})), ints({6, 6, 6}));
  EXPECT_EQ(run("0 < xs[i] < 3", ints({0, 2})), (std::vector<Value>{Value::boolean(false), Value::boolean(true)}));
}

TEST(Oracle, PartialOracleIsAnOracleError) {
  TaskSpec t;
  t.oracle = compile_expression_oracle("xs[i + 1]");
  try {
    eval_oracle(t, ints({1, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOracleError);
  }
  EXPECT_THROW(compile_expression_oracle("xs[i"), Error);
  EXPECT_THROW(compile_expression_oracle("open('x')"), Error);
}

TEST(Difficulty, Examples) {
  EXPECT_EQ(difficulty_score(kSortListing), 7);
  EXPECT_EQ(difficulty_score(kCheckPrimeListing), 2);
  EXPECT_EQ(difficulty_score("def make_id():\n    return rasp.Map(lambda x: x, rasp.tokens)\n"), 2);
  EXPECT_THROW(difficulty_score("def broken(:\n"), Error);
}

TEST(Metrics, PassRate) {
  std::vector<ResultRecord> rs;
  for (int i = 0; i < 101; ++i) rs.push_back(record("t" + std::to_string(i), 3, i < 57));
  Metrics m = compute_metrics(rs);
  EXPECT_NEAR(m.pass_rate, 57.0 / 101.0, 1e-12);
  EXPECT_NEAR(m.weighted_score, m.pass_rate, 1e-12);  // equal difficulties
}

TEST(Metrics, Weighted) {
  Metrics m = compute_metrics({record("a", 2, true), record("b", 7, false), record("c", 5, true)});
  EXPECT_EQ(m.weighted_score, 0.5);
  EXPECT_EQ(m.passed_difficulty, 7);
  EXPECT_EQ(m.total_difficulty, 14);
  EXPECT_EQ(m.by_difficulty.at(7).failed, 1);
}

TEST(Metrics, AllPass) {
  Metrics m = compute_metrics({record("a", 2, true), record("b", 9, true)});
  EXPECT_EQ(m.pass_rate, 1.0);
  EXPECT_EQ(m.weighted_score, 1.0);
}

TEST(Metrics, ErrorsCountAsFailures) {
  ResultRecord e = record("e", 4, false);
  e.outcome = Outcome::kError;
  Metrics m = compute_metrics({record("a", 4, true), e});
  EXPECT_EQ(m.errors, 1);
  EXPECT_EQ(m.pass_rate, 0.5);
}

TEST(Metrics, Empty) {
  try {
    compute_metrics({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyResults);
  }
}

TEST(Report, CsvOneRowPerTask) {
  std::string csv = render_report_csv({record("b", 2, false), record("a", 3, true)});
  EXPECT_EQ(csv,
            "task,difficulty,outcome,failed_stage,attempts,model,prompt_variant\n"
            "a,3,pass,,1,m,0-shot\n"
            "b,2,fail,2,5,m,0-shot\n");
}

TEST(Report, JsonRoundTripAndStability) {
  std::vector<ResultRecord> rs = {record("a", 2, true), record("b", 7, false), record("c", 5, true)};
  fs::path dir = fresh_dir("roundtrip");
  Metrics m = compute_metrics(rs);
  emit_report(m, rs, {ReportFormat::kJson, ReportFormat::kCsv, ReportFormat::kSvg}, dir);
  std::string first = slurp(dir / "report.json");
  json doc = json::parse(first);
  std::vector<ResultRecord> back;
  for (const auto& r : doc["results"]) back.push_back(result_from_json(r));
  Metrics again = compute_metrics(back);
  EXPECT_EQ(metrics_to_json(again), metrics_to_json(m));
  EXPECT_EQ(doc["metrics"], metrics_to_json(m));
  // byte-stable regardless of input order
  std::vector<ResultRecord> shuffled = {rs[2], rs[0], rs[1]};
  emit_report(compute_metrics(shuffled), shuffled, {ReportFormat::kJson, ReportFormat::kCsv, ReportFormat::kSvg}, dir);
  EXPECT_EQ(slurp(dir / "report.json"), first);
  // report.json itself is ignored when loading a results directory
  write_text_file(dir / "results.json", json{{"results", doc["results"]}}.dump());
  EXPECT_EQ(load_results(dir).size(), 3u);
}

TEST(Report, HistogramTotals) {
  TaskSet set = load_taskset(data_path("seed_tasks.json"));
  std::map<int, DifficultyBin> bins;
  for (const auto& t : set.tasks) bins[difficulty_score(t.reference_program)].passed++;
  std::string svg = render_histogram_svg(bins, "seed");
  std::regex bar(R"(<title>difficulty (\d+): (\d+) (passed|failed)</title>)");
  int total = 0;
  std::set<int> seen;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), bar); it != std::sregex_iterator(); ++it) {
    total += std::stoi((*it)[2]);
    seen.insert(std::stoi((*it)[1]));
  }
  EXPECT_EQ(total, static_cast<int>(set.tasks.size()));
  EXPECT_EQ(seen.size(), bins.size());
  EXPECT_EQ(*seen.begin(), bins.begin()->first);
  EXPECT_EQ(*seen.rbegin(), bins.rbegin()->first);
}

TEST(Report, LoadErrors) {
  EXPECT_THROW(load_results("/nonexistent/rasptk"), Error);
  fs::path dir = fresh_dir("bad");
  write_text_file(dir / "x.json", "{not json");
  EXPECT_THROW(load_results(dir), Error);
}
