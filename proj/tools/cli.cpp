#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "rasptk/bench.hpp"
#include "rasptk/elaborate.hpp"
#include "rasptk/harness.hpp"
#include "rasptk/interp.hpp"
#include "rasptk/lower.hpp"
#include "rasptk/provider.hpp"
#include "rasptk/surface.hpp"
#include "rasptk/task.hpp"
#include "rasptk/verify.hpp"

#ifndef RASPTK_DATA_DIR
#define RASPTK_DATA_DIR "data"
#endif

namespace rasptk {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path data_dir() {
  if (const char* dir = std::getenv("RASPTK_DATA_DIR")) return dir;
  return RASPTK_DATA_DIR;
}

fs::path default_taskset() { return data_dir() / "seed_tasks.json"; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Errors that come from the caller's files or flags rather than from the
// program under test.
bool is_config_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchemaError:
    case ErrorCode::kDuplicateName:
    case ErrorCode::kUnknownOracle:
    case ErrorCode::kExampleMismatch:
    case ErrorCode::kIoError:
    case ErrorCode::kConfigError:
    case ErrorCode::kInsufficientExamples:
    case ErrorCode::kEmptyResults:
      return true;
    default:
      return false;
  }
}

// 3 -> Int, 7/2 -> Rat, True/False/None, "quoted" or bare words -> Token.
Value parse_cli_value(const std::string& text) {
  if (text == "None" || text == "null") return Value::null();
  if (text == "True" || text == "true") return Value::boolean(true);
  if (text == "False" || text == "false") return Value::boolean(false);
  if (text.size() >= 2 && (text.front() == '"' || text.front() == '\'') && text.back() == text.front()) {
    return Value::token(text.substr(1, text.size() - 2));
  }
  static const std::string kNumeric = "+-0123456789./";
  if (!text.empty() && text.find_first_not_of(kNumeric) == std::string::npos &&
      text.find_first_of("0123456789") != std::string::npos) {
    try {
      if (text.find('/') != std::string::npos) {
        mpq_class q(text, 10);
        if (q.get_den() == 0) throw std::invalid_argument("zero denominator");
        q.canonicalize();
        return Value::rational(q);
      }
      if (text.find('.') != std::string::npos) return Value::rational(parse_decimal(text));
      return Value::integer(mpz_class(text.front() == '+' ? text.substr(1) : text, 10));
    } catch (const std::exception&) {
      // fall through: treat as a token
    }
  }
  return Value::token(text);
}

// "0..9" is an inclusive integer range; anything else is a comma list.
std::vector<Value> parse_vocab(const std::string& text) {
  std::vector<Value> out;
  size_t dots = text.find("..");
  if (dots != std::string::npos) {
    try {
      long lo = std::stol(text.substr(0, dots));
      long hi = std::stol(text.substr(dots + 2));
      if (hi < lo || hi - lo > 4096) throw UsageError("--vocab: bad range '" + text + "'");
      for (long v = lo; v <= hi; ++v) out.push_back(Value::integer(v));
      return out;
    } catch (const std::logic_error&) {
      throw UsageError("--vocab: bad range '" + text + "'");
    }
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_cli_value(item));
  }
  if (out.empty()) throw UsageError("--vocab: empty vocabulary");
  return out;
}

std::string resolve_entry(const std::string& text, const std::string& requested) {
  if (!requested.empty()) return requested;
  return default_entry_function(parse_program(text));
}

const TaskSpec& require_task(const TaskSet& set, const std::string& name) {
  const TaskSpec* t = set.find(name);
  if (!t) throw UsageError("--task: no task named '" + name + "'");
  return *t;
}

std::string paint(bool color, const char* code, std::string_view text) {
  if (!color) return std::string(text);
  return std::string("\033[") + code + "m" + std::string(text) + "\033[0m";
}

std::string status_cell(StageStatus s, bool color) {
  switch (s) {
    case StageStatus::kPass: return paint(color, "32", "PASS");
    case StageStatus::kFail: return paint(color, "31", "FAIL");
    case StageStatus::kNotRun: return paint(color, "2", "-");
  }
  return "?";
}

void print_verdict(std::ostream& out, const VerdictRecord& v, bool color) {
  out << "task " << v.task << "  attempt " << v.attempt << "  seed " << v.seed << "\n";
  for (const auto& s : v.stages) {
    std::string cell = status_cell(s.status, color);
    out << "  " << s.stage << "  " << std::left << std::setw(12) << stage_name(s.stage) << cell
        << std::string(cell.size() < 6 ? 6 - cell.size() : 1, ' ') << s.detail << "\n";
  }
  if (v.counterexample) {
    out << "counterexample:\n"
        << "  input    " << repr_sequence(v.counterexample->input) << "\n"
        << "  expected " << repr_sequence(v.counterexample->expected) << "\n";
    if (!v.counterexample->actual.empty()) out << "  actual   " << repr_sequence(v.counterexample->actual) << "\n";
  }
  if (!v.witness.empty()) out << "witness: " << repr_sequence(v.witness) << "\n";
  for (const auto& viol : v.violations) {
    out << "violation " << rule_id(viol.rule) << ": " << viol.message;
    if (viol.witness) out << " (input " << repr_sequence(viol.witness->input) << ", row " << viol.witness->row << ")";
    out << "\n";
  }
  if (v.infrastructure_failure) out << "note: infrastructure failure, not attributable to the program\n";
  out << "result: "
      << (v.passed ? paint(color, "32", "PASS")
                   : paint(color, "31", "FAIL") + " at stage " + std::to_string(v.failed_stage) + " (" +
                         std::string(stage_name(v.failed_stage)) + ")")
      << "\n";
}

void write_json_file(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

struct InterpretArgs {
  std::string program;
  std::vector<std::string> input;
  std::string function;
  bool trace = false;
};

int cmd_interpret(const InterpretArgs& a, std::ostream& out) {
  std::string text = read_file(a.program);
  ProgramGraph graph = compile_program(text, resolve_entry(text, a.function));
  std::vector<Value> input;
  for (const auto& s : a.input) input.push_back(parse_cli_value(s));
  if (input.empty()) throw UsageError("interpret: at least one input value is required");
  Trace trace = eval_trace(graph, input);
  if (a.trace) {
    for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
      if (trace.selectors[static_cast<size_t>(id)]) continue;
      out << std::left << std::setw(24) << graph.describe(id) << repr_sequence(trace.sequences[static_cast<size_t>(id)])
          << "\n";
    }
  }
  out << repr_sequence(trace.output(graph)) << "\n";
  return kExitOk;
}

struct VerifyArgs {
  std::string taskset;
  std::string task;
  std::string program;
  uint64_t seed = 0;
  size_t n_inputs = 1000;
  bool forensic = false;
  bool timing = false;
  size_t cap = 512;
  std::string output;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, const CliEnv& env) {
  TaskSet set = load_taskset(a.taskset.empty() ? default_taskset() : fs::path(a.taskset));
  const TaskSpec& task = require_task(set, a.task);
  std::string candidate;
  if (!a.program.empty()) candidate = read_file(a.program);
  else if (!task.reference_program.empty()) candidate = task.reference_program;
  else throw UsageError("--program is required: task '" + task.name + "' has no reference program");

  PipelineOptions opts;
  opts.n_inputs = a.n_inputs;
  opts.forensic = a.forensic;
  opts.timing = a.timing;
  opts.lower.cardinality_cap = a.cap;
  VerdictRecord v = run_pipeline(candidate, task, derive_seed(a.seed, task.name, 1), opts);
  print_verdict(out, v, env.color);
  if (!a.output.empty()) write_json_file(a.output, verdict_to_json(v, a.timing));
  return v.passed ? kExitOk : kExitFail;
}

struct LowerArgs {
  std::string program;
  std::string function;
  std::string vocab;
  int max_len = 0;
  std::string taskset;
  std::string task;
  size_t cap = 512;
  std::string output;
};

int cmd_lower(const LowerArgs& a, std::ostream& out) {
  std::vector<Value> vocab;
  int max_len = a.max_len;
  if (!a.task.empty()) {
    TaskSet set = load_taskset(a.taskset.empty() ? default_taskset() : fs::path(a.taskset));
    const TaskSpec& task = require_task(set, a.task);
    vocab = task.vocab;
    if (max_len == 0) max_len = task.max_len;
  }
  if (!a.vocab.empty()) vocab = parse_vocab(a.vocab);
  if (vocab.empty()) throw UsageError("lower: --vocab or --task is required");
  if (max_len < 1 || max_len > 64) throw UsageError("--max-len: expected an integer in [1, 64]");

  std::string text = read_file(a.program);
  ProgramGraph graph = compile_program(text, resolve_entry(text, a.function));
  LowerOptions opts;
  opts.cardinality_cap = a.cap;
  LoweredModel model = lower_program(graph, vocab, max_len, opts);
  out << model.layers.size() << " layers, " << model.op_count() << " ops, residual width " << model.residual_width()
      << "\n";
  if (!a.output.empty()) {
    write_json_file(a.output, model_to_json(model));
    out << "wrote " << a.output << "\n";
  }
  return kExitOk;
}

struct GenerateArgs {
  std::string taskset;
  std::string provider;
  int shots = 0;
  int k = 5;
  uint64_t seed = 0;
  std::string output = "rasptk-run";
  int workers = 1;
  std::vector<std::string> tasks;
  std::string template_path;
  size_t n_inputs = 1000;
  size_t cap = 512;
  bool forensic = false;
};

int task_difficulty(const TaskSpec& task, const std::vector<AttemptLog>& logs) {
  try {
    if (!task.reference_program.empty()) return difficulty_score(task.reference_program);
  } catch (const Error&) {
  }
  for (auto it = logs.rbegin(); it != logs.rend(); ++it) {
    if (!it->code) continue;
    try {
      return difficulty_score(*it->code);
    } catch (const Error&) {
    }
  }
  return 1;
}

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.shots != 0 && a.shots != 1 && a.shots != 20) throw UsageError("--shots: expected 0, 1 or 20");
  if (a.k < 1) throw UsageError("--k: must be at least 1");
  if (a.workers < 1) throw UsageError("--workers: must be at least 1");

  // Everything local is loaded and checked before the first request.
  TaskSet set = load_taskset(a.taskset.empty() ? default_taskset() : fs::path(a.taskset));
  ProviderConfig config = load_provider_config(a.provider);
  PromptSpec prompt;
  prompt.shots = a.shots;
  prompt.template_text = load_prompt_template(a.template_path.empty() ? default_template_path() : fs::path(a.template_path));
  prompt.example_bank = set.split(Split::kPromptExamples);

  std::vector<const TaskSpec*> targets;
  if (a.tasks.empty()) {
    targets = set.split(Split::kTest);
  } else {
    for (const auto& name : a.tasks) {
      const TaskSpec& t = require_task(set, name);
      if (t.split != Split::kTest) throw UsageError("--tasks: '" + name + "' is a prompt example, not a test task");
      targets.push_back(&t);
    }
  }
  if (targets.empty()) throw UsageError("no test tasks selected");
  for (const auto* t : targets) assemble_prompt(prompt, *t);  // surfaces InsufficientExamples early

  fs::path dir = a.output;
  fs::create_directories(dir / "logs");

  std::shared_ptr<ChatProvider> provider = make_provider(config);
  BestOfKOptions opts;
  opts.k = a.k;
  opts.seed = a.seed;
  opts.sampling = config.sampling;
  opts.sampling.model = config.model;
  opts.system_message = config.system_message;
  opts.pipeline.n_inputs = a.n_inputs;
  opts.pipeline.forensic = a.forensic;
  opts.pipeline.lower.cardinality_cap = a.cap;
  const std::string variant = std::to_string(a.shots) + "-shot";

  std::vector<ResultRecord> results(targets.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> aborted{false};
  std::mutex log_mu;
  std::string abort_message;
  auto worker = [&] {
    for (;;) {
      size_t i = next++;
      if (i >= targets.size() || aborted) return;
      const TaskSpec& task = *targets[i];
      ResultRecord r;
      r.task = task.name;
      r.model = config.model;
      r.prompt_variant = variant;
      json log = {{"task", task.name}, {"model", config.model}, {"prompt_variant", variant},
                  {"prompt", assemble_prompt(prompt, task)}};
      std::vector<AttemptLog> logs;
      try {
        logs = best_of_k(*provider, prompt, task, opts);
        const VerdictRecord& last = logs.back().verdict;
        r.outcome = last.passed ? Outcome::kPass : last.infrastructure_failure ? Outcome::kError : Outcome::kFail;
        r.failed_stage = last.failed_stage;
        r.attempts = static_cast<int>(logs.size());
      } catch (const Error& e) {
        r.outcome = Outcome::kError;
        r.attempts = static_cast<int>(logs.size());
        log["error"] = {{"code", std::string(error_code_name(e.code()))}, {"message", e.detail()}};
        if (e.code() == ErrorCode::kBudgetExceeded) {
          aborted = true;
          std::lock_guard<std::mutex> lock(log_mu);
          abort_message = e.what();
        }
      }
      r.difficulty = task_difficulty(task, logs);
      log["attempts"] = json::array();
      for (const auto& l : logs) log["attempts"].push_back(attempt_to_json(l));
      log["result"] = result_to_json(r);
      write_json_file(dir / "logs" / (task.name + ".json"), log);
      {
        std::lock_guard<std::mutex> lock(log_mu);
        err << "[" << task.name << "] " << outcome_name(r.outcome) << " after " << r.attempts << " attempt"
            << (r.attempts == 1 ? "" : "s") << "\n";
      }
      results[i] = std::move(r);
    }
  };
  std::vector<std::thread> pool;
  int n_workers = std::min<int>(a.workers, static_cast<int>(targets.size()));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // Tasks skipped after a budget stop are scored as errors.
  for (size_t i = 0; i < targets.size(); ++i) {
    if (results[i].task.empty()) {
      results[i].task = targets[i]->name;
      results[i].outcome = Outcome::kError;
      results[i].model = config.model;
      results[i].prompt_variant = variant;
      results[i].difficulty = task_difficulty(*targets[i], {});
    }
  }
  std::sort(results.begin(), results.end(), [](const auto& x, const auto& y) { return x.task < y.task; });
  json list = json::array();
  for (const auto& r : results) list.push_back(result_to_json(r));
  write_json_file(dir / "results.json", json{{"results", list}});
  Metrics m = compute_metrics(results);
  emit_report(m, results, {ReportFormat::kJson, ReportFormat::kCsv, ReportFormat::kSvg}, dir);
  out << std::fixed << std::setprecision(4) << "pass_rate " << m.pass_rate << " (" << m.passed << "/" << m.total
      << ")\nweighted_score " << m.weighted_score << "\nreports in " << dir.string() << "\n";
  if (aborted) {
    err << "stopped early: " << abort_message << "\n";
    return kExitFail;
  }
  return kExitOk;
}

struct ScoreArgs {
  std::string results;
  std::string output;
  std::vector<std::string> formats;
};

int cmd_bench_score(const ScoreArgs& a, std::ostream& out) {
  std::vector<ResultRecord> results = load_results(a.results);
  Metrics m = compute_metrics(results);
  std::vector<ReportFormat> formats;
  for (const auto& f : a.formats) {
    if (f == "json") formats.push_back(ReportFormat::kJson);
    else if (f == "csv") formats.push_back(ReportFormat::kCsv);
    else if (f == "svg") formats.push_back(ReportFormat::kSvg);
    else throw UsageError("--format: unknown format '" + f + "'");
  }
  if (formats.empty()) formats = {ReportFormat::kJson, ReportFormat::kCsv, ReportFormat::kSvg};
  fs::path dir = a.output.empty() ? fs::path(a.results) : fs::path(a.output);
  fs::create_directories(dir);
  auto written = emit_report(m, results, formats, dir);
  out << std::fixed << std::setprecision(4) << "tasks " << m.total << "\npassed " << m.passed << "\nerrors "
      << m.errors << "\npass_rate " << m.pass_rate << "\nweighted_score " << m.weighted_score << " ("
      << m.passed_difficulty << "/" << m.total_difficulty << ")\n";
  for (const auto& p : written) out << "wrote " << p.string() << "\n";
  return kExitOk;
}

struct DatasetArgs {
  std::string file;
  std::string histogram;
  bool self_check = false;
  uint64_t seed = 0;
  size_t n_inputs = 1000;
};

int cmd_dataset_validate(const DatasetArgs& a, std::ostream& out, const CliEnv& env) {
  TaskSet set = load_taskset(a.file);
  out << set.tasks.size() << " tasks (prompt_examples " << set.split(Split::kPromptExamples).size() << ", test "
      << set.split(Split::kTest).size() << ")\n";
  bool ok = true;
  std::map<int, DifficultyBin> bins;
  for (const auto& task : set.tasks) {
    if (task.reference_program.empty()) continue;
    int d = difficulty_score(task.reference_program);
    bool passed = true;
    if (a.self_check) {
      PipelineOptions opts;
      opts.n_inputs = a.n_inputs;
      VerdictRecord v = run_pipeline(task.reference_program, task, derive_seed(a.seed, task.name, 1), opts);
      passed = v.passed;
      out << "  " << std::left << std::setw(20) << task.name << (passed ? paint(env.color, "32", "PASS") : paint(env.color, "31", "FAIL"));
      if (!passed) out << "  stage " << v.failed_stage << ": " << v.diagnostic;
      out << "\n";
      ok = ok && passed;
    }
    (passed ? bins[d].passed : bins[d].failed) += 1;
  }
  if (!a.histogram.empty()) {
    fs::path p = a.histogram;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_text_file(p, render_histogram_svg(bins, "reference program difficulty"));
    int total = 0;
    for (const auto& [d, b] : bins) total += b.passed + b.failed;
    out << "histogram: " << total << " programs in " << bins.size() << " bins -> " << p.string() << "\n";
  }
  out << (ok ? "dataset ok" : "dataset has failing reference programs") << "\n";
  return ok ? kExitOk : kExitFail;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliEnv& env) {
  CLI::App app{"rasptk: RASP program toolkit", "rasptk"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  InterpretArgs ia;
  auto* interpret = app.add_subcommand("interpret", "Run a program on one input and print the output sequence");
  interpret->add_option("program", ia.program, "Program file")->required();
  interpret->add_option("input", ia.input, "Input values (3, 7/2, True, None, words)");
  interpret->add_option("--function", ia.function, "Entry function (default: last make_* function)");
  interpret->add_flag("--trace", ia.trace, "Print every intermediate sequence");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run the five-stage pipeline on a candidate program");
  verify->add_option("--task", va.task, "Task name")->required();
  verify->add_option("--program", va.program, "Candidate file (default: the task's reference program)");
  verify->add_option("--taskset", va.taskset, "Task-set file (default: bundled seed set)");
  verify->add_option("--seed", va.seed, "Global seed");
  verify->add_option("--n", va.n_inputs, "Random inputs for stage 2")->check(CLI::Range(size_t{1}, size_t{1000000}));
  verify->add_option("--cardinality-cap", va.cap, "Largest value set allowed per node");
  verify->add_flag("--forensic", va.forensic, "Keep running later stages after a failure");
  verify->add_flag("--timing", va.timing, "Include stage durations in the JSON record");
  verify->add_option("--output,-o", va.output, "Write the verdict record as JSON");

  LowerArgs la;
  auto* lower = app.add_subcommand("lower", "Lower a program to the layered model form");
  lower->add_option("program", la.program, "Program file")->required();
  lower->add_option("--function", la.function, "Entry function");
  lower->add_option("--vocab", la.vocab, "Vocabulary: 0..9 or a,b,c");
  lower->add_option("--max-len", la.max_len, "Maximum input length");
  lower->add_option("--task", la.task, "Take vocabulary and max length from a task");
  lower->add_option("--taskset", la.taskset, "Task-set file");
  lower->add_option("--cardinality-cap", la.cap, "Largest value set allowed per node");
  lower->add_option("--output,-o", la.output, "Write the model as JSON");

  GenerateArgs ga;
  auto* generate = app.add_subcommand("generate", "Ask a chat model for programs and verify them (network)");
  generate->add_option("--taskset", ga.taskset, "Task-set file");
  generate->add_option("--provider", ga.provider, "Provider config file")->required();
  generate->add_option("--shots", ga.shots, "Example programs in the prompt: 0, 1 or 20");
  generate->add_option("--k", ga.k, "Attempts per task");
  generate->add_option("--seed", ga.seed, "Global seed");
  generate->add_option("--output,-o", ga.output, "Output directory");
  generate->add_option("--workers", ga.workers, "Tasks generated concurrently");
  generate->add_option("--tasks", ga.tasks, "Only these test tasks")->delimiter(',');
  generate->add_option("--template", ga.template_path, "Prompt template file");
  generate->add_option("--n", ga.n_inputs, "Random inputs for stage 2");
  generate->add_option("--cardinality-cap", ga.cap, "Largest value set allowed per node");
  generate->add_flag("--forensic", ga.forensic, "Keep running later stages after a failure");

  ScoreArgs sa;
  auto* bench = app.add_subcommand("bench", "Benchmark results");
  bench->require_subcommand(1);
  auto* score = bench->add_subcommand("score", "Compute metrics and write reports");
  score->add_option("--results", sa.results, "Directory of result JSON files")->required();
  score->add_option("--output,-o", sa.output, "Report directory (default: the results directory)");
  score->add_option("--format", sa.formats, "json, csv, svg (default: all)")->delimiter(',');

  DatasetArgs da;
  auto* dataset = app.add_subcommand("dataset", "Task-set maintenance");
  dataset->require_subcommand(1);
  auto* validate = dataset->add_subcommand("validate", "Load and check a task-set file");
  validate->add_option("file", da.file, "Task-set file")->required();
  validate->add_option("--histogram", da.histogram, "Write an SVG histogram of reference difficulties");
  validate->add_flag("--self-check", da.self_check, "Run every reference program through the pipeline");
  validate->add_option("--seed", da.seed, "Global seed for the self-check");
  validate->add_option("--n", da.n_inputs, "Random inputs per task for the self-check");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);  // --help, --help-all
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // Name an unknown flag before complaining about a missing one.
    std::vector<std::string> stray;
    std::function<void(const CLI::App*)> collect = [&](const CLI::App* a) {
      for (const auto& r : a->remaining()) {
        if (r.size() > 1 && r[0] == '-' && !std::isdigit(static_cast<unsigned char>(r[1]))) stray.push_back(r);
      }
      for (const auto* sub : a->get_subcommands({})) collect(sub);
    };
    collect(&app);
    if (!stray.empty()) err << "error: unrecognized flag " << stray.front() << "\n";
    else err << "error: " << e.what() << "\n";
    err << "run 'rasptk --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (*interpret) return cmd_interpret(ia, out);
    if (*verify) return cmd_verify(va, out, env);
    if (*lower) return cmd_lower(la, out);
    if (*generate) return cmd_generate(ga, out, err);
    if (*score) return cmd_bench_score(sa, out);
    if (*validate) return cmd_dataset_validate(da, out, env);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_config_error(e.code()) ? kExitUsage : kExitFail;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}

}  // namespace rasptk
