#include <gtest/gtest.h>

#include "rasptk/harness.hpp"
#include "rasptk/provider.hpp"
#include "test_util.hpp"

using namespace rasptk;
using namespace rasptk::testing;

namespace {

const TaskSet& seed_set() {
  static const TaskSet set = load_taskset(data_path("seed_tasks.json"));
  return set;
}

PromptSpec spec(int shots) {
  PromptSpec s;
  s.shots = shots;
  s.template_text = load_prompt_template();
  s.example_bank = seed_set().split(Split::kPromptExamples);
  return s;
}

int count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (size_t p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

// Fences the template carries on its own (operation snippets, answer format,
// format illustration).
int template_fences() { return count(load_prompt_template(), "```python"); }

std::string fenced(const std::string& code) { return "Here you go.\n```python\n" + code + "```\n"; }

}  // namespace

TEST(Prompt, ZeroShotAddsNoPrograms) {
  std::string p = assemble_prompt(spec(0), *seed_set().find("sort"));
  EXPECT_EQ(count(p, "```python"), template_fences());
  EXPECT_EQ(count(p, "### Reference program"), 0);
  EXPECT_EQ(count(p, "{{"), 0);
}

TEST(Prompt, TwentyShot) {
  std::string p = assemble_prompt(spec(20), *seed_set().find("sort"));
  EXPECT_EQ(count(p, "### Reference program"), 20);
  EXPECT_EQ(count(p, "```python"), template_fences() + 20);
  for (const TaskSpec* ex : seed_set().split(Split::kPromptExamples)) {
    EXPECT_NE(p.find(ex->reference_program.substr(0, ex->reference_program.find('\n'))), std::string::npos) << ex->name;
  }
}

TEST(Prompt, OneShot) {
  std::string p = assemble_prompt(spec(1), *seed_set().find("max"));
  EXPECT_EQ(count(p, "### Reference program"), 1);
  EXPECT_EQ(count(p, "```python"), template_fences() + 1);
}

TEST(Prompt, TaskBlock) {
  const TaskSpec& t = *seed_set().find("index_parity");
  std::string p = assemble_prompt(spec(0), t);
  EXPECT_NE(p.find("Entry point: 'make_index_parity()'\n"), std::string::npos);
  EXPECT_NE(p.find("Example: [5, 5, 5, 5] --> [0, 1, 0, 1]\n"), std::string::npos);
  EXPECT_NE(p.find(t.description), std::string::npos);
  EXPECT_NE(p.find("<Review>"), std::string::npos);
}

TEST(Prompt, Deterministic) {
  const TaskSpec& t = *seed_set().find("histogram");
  EXPECT_EQ(assemble_prompt(spec(20), t), assemble_prompt(spec(20), t));
}

TEST(Prompt, NoTestProgramsLeak) {
  for (const TaskSpec* target : seed_set().split(Split::kTest)) {
    for (int shots : {0, 1, 20}) {
      std::string p = assemble_prompt(spec(shots), *target);
      for (const TaskSpec* test : seed_set().split(Split::kTest)) {
        EXPECT_EQ(p.find(test->reference_program), std::string::npos) << test->name;
        EXPECT_EQ(p.find("def " + test->function + "("), std::string::npos) << test->name << " in " << target->name;
      }
    }
  }
}

TEST(Prompt, BankChecks) {
  PromptSpec s = spec(20);
  s.example_bank.resize(19);
  try {
    assemble_prompt(s, *seed_set().find("sort"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientExamples);
  }
  PromptSpec leaky = spec(1);
  leaky.example_bank = {seed_set().find("sort")};
  EXPECT_THROW(assemble_prompt(leaky, *seed_set().find("max")), Error);
}

TEST(Extract, SingleBlock) {
  EXPECT_EQ(extract_program_text(fenced("def make_x():\n    return rasp.tokens\n")),
            "def make_x():\n    return rasp.tokens\n");
}

TEST(Extract, LastBlockWins) {
  std::string r =
      "<Plan>\n```\nstep one\n```\n</Plan>\n"
      "```python\ndef make_a():\n    return rasp.tokens\n```\n"
      "Final:\n```python\ndef make_b():\n    return rasp.indices\n```\nDone.";
  EXPECT_EQ(extract_program_text(r), "def make_b():\n    return rasp.indices\n");
}

TEST(Extract, OtherLanguagesIgnored) {
  std::string r = "```python\nA\n```\n```json\n{}\n```\n";
  EXPECT_EQ(extract_program_text(r), "A\n");
}

TEST(Extract, Failures) {
  try {
    extract_program_text("I think the answer is to use Select.");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoCodeBlock);
  }
  try {
    extract_program_text("```python\ndef make_x():\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnterminatedFence);
  }
}

TEST(BestOfK, StopsAtFirstPass) {
  const TaskSpec& t = *seed_set().find("index_parity");
  std::string wrong = "def make_index_parity():\n    return rasp.Map(lambda i: i % 3, rasp.indices)\n";
  ScriptedProvider provider({fenced(wrong), "no code, sorry", fenced(t.reference_program), fenced(wrong)});
  BestOfKOptions opts;
  opts.seed = 5;
  auto logs = best_of_k(provider, spec(0), t, opts);
  ASSERT_EQ(logs.size(), 3u);
  EXPECT_EQ(provider.requests().size(), 3u);
  for (size_t i = 0; i < logs.size(); ++i) EXPECT_EQ(logs[i].attempt, static_cast<int>(i + 1));
  EXPECT_EQ(logs[0].verdict.failed_stage, 2);
  EXPECT_EQ(logs[1].verdict.failed_stage, 1);
  EXPECT_FALSE(logs[1].code);
  EXPECT_EQ(logs[1].verdict.error_code, "NoCodeBlock");
  EXPECT_TRUE(logs[2].verdict.passed);
  EXPECT_NE(logs[0].verdict.seed, logs[2].verdict.seed);
  EXPECT_EQ(logs[2].verdict.seed, derive_seed(5, t.name, 3));
  // from scratch: every request is the same prompt
  for (const auto& r : provider.requests()) EXPECT_EQ(r.messages.back().content, provider.requests().front().messages.back().content);
}

TEST(BestOfK, ExhaustsOnProse) {
  const TaskSpec& t = *seed_set().find("sort");
  ScriptedProvider provider({"Let me think about sorting."});
  auto logs = best_of_k(provider, spec(1), t, {});
  ASSERT_EQ(logs.size(), 5u);
  for (const auto& l : logs) {
    EXPECT_EQ(l.verdict.failed_stage, 1);
    EXPECT_FALSE(l.verdict.passed);
  }
}

TEST(BestOfK, SingleAttempt) {
  const TaskSpec& t = *seed_set().find("max");
  ScriptedProvider provider({fenced(t.reference_program)});
  BestOfKOptions opts;
  opts.k = 1;
  auto logs = best_of_k(provider, spec(20), t, opts);
  ASSERT_EQ(logs.size(), 1u);
  EXPECT_TRUE(logs[0].verdict.passed);
  nlohmann::json j = attempt_to_json(logs[0]);
  EXPECT_EQ(j["attempt"], 1);
  EXPECT_EQ(j["verdict"]["outcome"], "pass");
}

TEST(BestOfK, SamplingAndSystemMessage) {
  const TaskSpec& t = *seed_set().find("max");
  ScriptedProvider provider({fenced(t.reference_program)});
  BestOfKOptions opts;
  opts.sampling.model = "m-1";
  opts.system_message = "be brief";
  best_of_k(provider, spec(0), t, opts);
  const ChatRequest& r = provider.requests().at(0);
  EXPECT_EQ(r.model, "m-1");
  EXPECT_EQ(r.temperature, 0.9);
  EXPECT_EQ(r.top_p, 0.95);
  ASSERT_EQ(r.messages.size(), 2u);
  EXPECT_EQ(r.messages[0].role, "system");
}

namespace {

class AlwaysDown : public ChatProvider {
 public:
  ChatResponse complete(const ChatRequest&) override { throw ProviderCallError(503, true, std::nullopt, "down"); }
  std::string name() const override { return "down"; }
};

}  // namespace

TEST(BestOfK, ProviderErrorsPropagate) {
  auto inner = std::make_shared<AlwaysDown>();
  int sleeps = 0;
  RetryingProvider provider(inner, RetryPolicy{3, 0.01, 0.02}, [&](double) { ++sleeps; });
  try {
    best_of_k(provider, spec(0), *seed_set().find("max"), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderError);
  }
  EXPECT_EQ(sleeps, 3);
}
