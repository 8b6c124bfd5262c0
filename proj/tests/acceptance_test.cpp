// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "rasptk/bench.hpp"
#include "rasptk/elaborate.hpp"
#include "rasptk/harness.hpp"
#include "rasptk/interp.hpp"
#include "rasptk/lower.hpp"
#include "rasptk/provider.hpp"
#include "rasptk/task.hpp"
#include "rasptk/verify.hpp"
#include "test_util.hpp"

using namespace rasptk;
using namespace rasptk::testing;
using nlohmann::json;

namespace {

struct Failure {
  std::string what;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

const TaskSet& seed_set() {
  static const TaskSet set = load_taskset(data_path("seed_tasks.json"));
  return set;
}

const TaskSpec& task(const std::string& name) {
  const TaskSpec* t = seed_set().find(name);
  check(t != nullptr, "missing task " + name);
  return *t;
}

const char* kWorked = R"(def make_worked():
    gt = rasp.Select(rasp.tokens, rasp.tokens, rasp.Comparison.GT)
    mean_above = rasp.Aggregate(gt, rasp.tokens)
    width = rasp.SelectorWidth(gt)
    return rasp.SequenceMap(lambda x, y: x * y + x, width, mean_above)
)";

void criterion1() {
  ProgramGraph g = compile_program(kWorked, "make_worked");
  Trace t = eval_trace(g, ints({1, 2, 3, 4}));
  std::map<NodeKind, std::vector<Value>> by_kind;
  for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
    if (!g.node(id).is_selector()) by_kind[g.node(id).kind] = t.sequences[static_cast<size_t>(id)];
  }
  check(by_kind[NodeKind::kAggregate] == std::vector<Value>{Value::integer(3), rat(7, 2), Value::integer(4), none()},
        "aggregate " + repr_sequence(by_kind[NodeKind::kAggregate]));
  check(by_kind[NodeKind::kSelectorWidth] == ints({3, 2, 1, 0}), "width");
  check(t.output(g) == std::vector<Value>{Value::integer(12), Value::integer(9), Value::integer(5), none()},
        "output " + repr_sequence(t.output(g)));
}

void criterion2() {
  const TaskSpec& t = task("index_parity");
  PipelineOptions opts;
  opts.n_inputs = 1000;
  VerdictRecord good = run_pipeline(t.reference_program, t, derive_seed(0, t.name, 1), opts);
  check(good.passed, "reference failed: " + good.diagnostic);
  std::string wrong = "def make_index_parity():\n    return rasp.Map(lambda i: i % 3, rasp.indices)\n";
  VerdictRecord bad = run_pipeline(wrong, t, derive_seed(0, t.name, 1), opts);
  check(!bad.passed && bad.failed_stage == 2, "x%3 variant not rejected at stage 2");
  check(bad.counterexample.has_value(), "no counterexample");
  // The counterexample must really be one.
  const auto& ce = *bad.counterexample;
  check(ce.input.size() >= 3, "counterexample too short to separate %2 and %3");
  check(ce.expected != ce.actual, "counterexample agrees");
}

void criterion3() {
  const TaskSpec& t = task("sort");
  PipelineOptions opts;
  opts.n_inputs = 1000;
  VerdictRecord v = run_pipeline(t.reference_program, t, derive_seed(0, t.name, 1), opts);
  for (const auto& s : v.stages) check(s.status == StageStatus::kPass, "stage " + std::to_string(s.stage) + " " + s.detail);
  check(v.passed, "sort reference failed");
  ProgramGraph g = compile_program(t.reference_program, t.function);
  InputBatch batch = generate_inputs(t, 1000, derive_seed(0, t.name, 1));
  for (const auto& in : batch.inputs) {
    std::vector<long> xs;
    for (const auto& x : in) xs.push_back(x.int_value().get_si());
    std::sort(xs.begin(), xs.end());
    std::vector<Value> expected;
    for (long x : xs) expected.push_back(Value::integer(x));
    check(eval_program(g, in) == expected, "sort disagrees on " + repr_sequence(in));
  }
}

void criterion4() {
  for (const auto& t : seed_set().tasks) {
    ProgramGraph g = compile_program(t.reference_program, t.function);
    std::vector<Value> vocab(t.vocab.begin(), t.vocab.begin() + std::min<size_t>(4, t.vocab.size()));
    LoweredModel small = lower_program(g, vocab, 4);
    for (const auto& in : all_sequences(vocab, 4)) {
      if (t.input_constraint == InputConstraint::kDistinct) {
        std::set<Value, ValueLess> seen(in.begin(), in.end());
        if (seen.size() != in.size()) continue;
      }
      check(run_lowered(small, in) == eval_program(g, in), t.name + " exhaustive " + repr_sequence(in));
    }
    LoweredModel full = lower_program(g, t.vocab, t.max_len);
    InputBatch batch = generate_inputs(t, 1000, derive_seed(0, t.name, 1));
    for (const auto& in : batch.inputs) {
      check(run_lowered(full, in) == eval_program(g, in), t.name + " batch " + repr_sequence(in));
    }
  }
}

void criterion5() {
  json doc = {{"schema_version", 1},
              {"tasks",
               {{{"name", "shifted_reciprocal"},
                 {"description", "1 / (2x - 5) for each token x"},
                 {"function", "make_shifted_reciprocal"},
                 {"split", "test"},
                 {"vocab", {{"range", {0, 9}}}},
                 {"max_len", 6},
                 {"oracle", {{"expr", "1 / (2 * xs[i] - 5)"}}},
                 {"examples", {{{"input", {3}}, {"output", {1}}}}}}}}};
  TaskSet set = parse_taskset(doc, ".");
  const TaskSpec& t = set.tasks.front();
  std::string program = R"(def make_shifted_reciprocal():
    doubled = rasp.SequenceMap(lambda a, b: a + b, rasp.tokens, rasp.tokens)
    return rasp.Map(lambda x: 1 / (x - 5), doubled)
)";
  VerdictRecord v = run_pipeline(program, t, derive_seed(0, t.name, 1), {});
  check(v.stages[0].status == StageStatus::kPass && v.stages[1].status == StageStatus::kPass &&
            v.stages[2].status == StageStatus::kPass,
        "stages 1-3 should pass: " + v.diagnostic);
  check(v.failed_stage == 4, "failed at stage " + std::to_string(v.failed_stage));
  check(v.error_code == "DivisionByZero", "error code " + v.error_code);
  check(v.witness == ints({5}), "witness " + repr_sequence(v.witness));
}

ResultRecord record(const std::string& name, int difficulty, bool pass) {
  ResultRecord r;
  r.task = name;
  r.difficulty = difficulty;
  r.outcome = pass ? Outcome::kPass : Outcome::kFail;
  return r;
}

void criterion6() {
  std::vector<ResultRecord> rs;
  for (int i = 0; i < 101; ++i) rs.push_back(record("t" + std::to_string(i), 1, i < 57));
  Metrics m = compute_metrics(rs);
  check(std::abs(m.pass_rate - 57.0 / 101.0) <= 1e-12, "pass rate");
  Metrics w = compute_metrics({record("a", 2, true), record("b", 7, false), record("c", 5, true)});
  check(w.weighted_score == 0.5, "weighted score");
  Metrics all = compute_metrics({record("a", 3, true), record("b", 8, true)});
  check(all.pass_rate == 1.0 && all.weighted_score == 1.0, "all pass");
}

void criterion7() {
  check(difficulty_score(kSortListing) == 7, "sort difficulty");
  check(difficulty_score(kCheckPrimeListing) == 2, "check_prime difficulty");
  std::map<int, DifficultyBin> bins;
  for (const auto& t : seed_set().tasks) bins[difficulty_score(t.reference_program)].passed++;
  int total = 0;
  for (const auto& [d, b] : bins) total += b.passed + b.failed;
  check(total == static_cast<int>(seed_set().tasks.size()), "histogram total");
  std::string svg = render_histogram_svg(bins, "difficulty");
  check(svg.find("<svg") != std::string::npos, "svg");
}

std::string fenced(const std::string& code) { return "Sure.\n```python\n" + code + "```\n"; }

void criterion8() {
  const TaskSpec& t = task("max");
  PromptSpec spec;
  spec.shots = 20;
  spec.template_text = load_prompt_template();
  spec.example_bank = seed_set().split(Split::kPromptExamples);
  std::string wrong = "def make_max():\n    return rasp.Map(lambda x: x, rasp.tokens)\n";
  ScriptedProvider provider({"thinking...", fenced(wrong), fenced(t.reference_program), fenced(wrong)});
  BestOfKOptions opts;
  opts.k = 5;
  opts.pipeline.n_inputs = 300;
  auto logs = best_of_k(provider, spec, t, opts);
  check(logs.size() == 3 && provider.requests().size() == 3, "attempts " + std::to_string(logs.size()));
  check(!logs[0].code && logs[0].verdict.failed_stage == 1, "attempt 1");
  check(logs[1].verdict.failed_stage == 2, "attempt 2");
  check(logs[2].verdict.passed, "attempt 3");
  const std::vector<std::string> sent = {"thinking...", fenced(wrong), fenced(t.reference_program)};
  for (size_t i = 0; i < logs.size(); ++i) {
    json j = attempt_to_json(logs[i]);
    check(j["attempt"] == static_cast<int>(i + 1), "attempt log index");
    check(j["raw_response"] == sent[i], "raw response of attempt " + std::to_string(i + 1));
  }
  std::string prompt = provider.requests().front().messages.back().content;
  int headers = 0;
  for (size_t p = prompt.find("### Reference program"); p != std::string::npos; p = prompt.find("### Reference program", p + 1)) {
    ++headers;
  }
  check(headers == 20, "example programs in prompt: " + std::to_string(headers));
  for (const TaskSpec* test : seed_set().split(Split::kTest)) {
    check(prompt.find(test->reference_program) == std::string::npos, "leak of " + test->name);
    check(prompt.find("def " + test->function + "(") == std::string::npos, "leak of " + test->name);
  }
}

void criterion9() {
  const TaskSpec& t = task("histogram");
  PipelineOptions opts;
  opts.n_inputs = 500;
  std::string a = verdict_to_json(run_pipeline(t.reference_program, t, derive_seed(11, t.name, 1), opts)).dump(2);
  std::string b = verdict_to_json(run_pipeline(t.reference_program, t, derive_seed(11, t.name, 1), opts)).dump(2);
  check(a == b, "verdict records differ");
  std::string wrong = "def make_hist():\n    return rasp.Map(lambda x: 1, rasp.tokens)\n";
  std::string c = verdict_to_json(run_pipeline(wrong, t, derive_seed(11, t.name, 1), opts)).dump(2);
  std::string d = verdict_to_json(run_pipeline(wrong, t, derive_seed(11, t.name, 1), opts)).dump(2);
  check(c == d, "failing verdict records differ");
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<void()> body;
  };
  std::vector<Criterion> criteria = {
      {1, "worked example values", 1, criterion1},
      {2, "index_parity accepted, x%3 variant rejected at stage 2", 5, criterion2},
      {3, "sort reference passes all stages and matches an independent sort", 30, criterion3},
      {4, "lowered models agree with the interpreter on every seed task", 120, criterion4},
      {5, "stage-4 DivisionByZero with witness 5", 5, criterion5},
      {6, "pass rate and weighted score", 1, criterion6},
      {7, "difficulty scores and histogram totals", 1, criterion7},
      {8, "best-of-k stops at first pass with a clean 20-shot prompt", 10, criterion8},
      {9, "verdict records are byte-identical across runs", 10, criterion9},
  };
  int failures = 0;
  auto suite_start = clock::now();
  for (const auto& c : criteria) {
    auto start = clock::now();
    std::string problem;
    try {
      c.body();
    } catch (const Failure& f) {
      problem = f.what;
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(clock::now() - start).count();
    if (problem.empty() && secs > c.budget_s) {
      std::ostringstream os;
      os << "took " << secs << " s, budget " << c.budget_s << " s";
      problem = os.str();
    }
    std::printf("%s criterion %d: %s (%.2f s)%s%s\n", problem.empty() ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                problem.empty() ? "" : " -- ", problem.c_str());
    if (!problem.empty()) ++failures;
  }
  double total = std::chrono::duration<double>(clock::now() - suite_start).count();
  bool total_ok = total < 300;
  std::printf("%s criterion 10: offline suite under 5 minutes (%.2f s)\n", total_ok ? "PASS" : "FAIL", total);
  if (!total_ok) ++failures;
  return failures == 0 ? 0 : 1;
}
