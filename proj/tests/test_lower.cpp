#include <gtest/gtest.h>

#include <set>

#include "rasptk/elaborate.hpp"
#include "rasptk/interp.hpp"
#include "rasptk/lower.hpp"
#include "rasptk/task.hpp"
#include "test_util.hpp"

using namespace rasptk;
using namespace rasptk::testing;

namespace {

ProgramGraph one_liner(const std::string& body) {
  return compile_program("def make_x():\n    return " + body + "\n", "make_x");
}

std::vector<Value> range(long lo, long hi) {
  std::vector<Value> out;
  for (long v = lo; v <= hi; ++v) out.push_back(Value::integer(v));
  return out;
}

}  // namespace

TEST(Infer, MapImage) {
  ProgramGraph g = one_liner("rasp.Map(lambda x: x % 2, rasp.tokens)");
  auto sets = infer_value_sets(g, range(0, 9), 10);
  EXPECT_EQ(sets[static_cast<size_t>(g.entry())]->values, ints({0, 1}));
  EXPECT_FALSE(sets[static_cast<size_t>(g.entry())]->may_be_null);
}

TEST(Infer, Indices) {
  ProgramGraph g = one_liner("rasp.Map(lambda i: i, rasp.indices)");
  auto sets = infer_value_sets(g, range(0, 3), 10);
  EXPECT_EQ(sets[0]->values, range(0, 9));
}

TEST(Infer, DivisionByZeroWitness) {
  ProgramGraph g = one_liner("rasp.Map(lambda x: 1 / (x - 5), rasp.tokens)");
  try {
    infer_value_sets(g, range(0, 9), 10);
    FAIL();
  } catch (const LowerError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivisionByZero);
    EXPECT_EQ(e.witness(), ints({5}));
    EXPECT_EQ(e.node(), g.entry());
  }
}

TEST(Infer, SelectorWidthAndAggregates) {
  ProgramGraph g = compile_program(program_text("frac_ones"), "make_frac_ones");
  auto sets = infer_value_sets(g, ints({0, 1}), 3);
  const ValueSet& out = *sets[static_cast<size_t>(g.entry())];
  std::set<std::pair<long, long>> expected;
  for (long m = 1; m <= 3; ++m)
    for (long k = 0; k <= m; ++k) expected.insert({k, m});
  std::vector<Value> want;
  for (auto [k, m] : expected) {
    Value v = rat(k, m);
    if (std::find(want.begin(), want.end(), v) == want.end()) want.push_back(v);
  }
  std::sort(want.begin(), want.end(), ValueLess{});
  EXPECT_EQ(out.values, want);
  EXPECT_TRUE(out.may_be_null);

  ProgramGraph h = compile_program(program_text("histogram"), "make_hist");
  EXPECT_EQ(infer_value_sets(h, range(0, 3), 5)[static_cast<size_t>(h.entry())]->values, range(0, 5));
}

TEST(Infer, CardinalityCap) {
  ProgramGraph g = one_liner("rasp.SequenceMap(lambda x, i: x * 100 + i, rasp.tokens, rasp.indices)");
  LowerOptions opts;
  opts.cardinality_cap = 50;
  try {
    infer_value_sets(g, range(0, 9), 10, opts);
    FAIL();
  } catch (const LowerError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCardinalityCap);
  }
  opts.cardinality_cap = 100;
  EXPECT_NO_THROW(infer_value_sets(g, range(0, 9), 10, opts));
}

TEST(Schedule, IndexParity) {
  ProgramGraph g = compile_program(program_text("index_parity"), "make_index_parity");
  auto s = schedule_layers(g);
  ASSERT_EQ(s.layer_count(), 1);
  EXPECT_EQ(s.kinds[0], LayerKind::kTable);
}

TEST(Schedule, AttentionThenTable) {
  ProgramGraph g = one_liner(
      "rasp.Map(lambda x: x + 1, rasp.SelectorWidth(rasp.Select(rasp.tokens, rasp.tokens, rasp.Comparison.EQ)))");
  auto s = schedule_layers(g);
  ASSERT_EQ(s.layer_count(), 2);
  EXPECT_EQ(s.kinds[0], LayerKind::kAttention);
  EXPECT_EQ(s.kinds[1], LayerKind::kTable);
}

TEST(Schedule, TokensOnly) {
  ProgramGraph g = one_liner("rasp.tokens");
  EXPECT_EQ(schedule_layers(g).layer_count(), 0);
  LoweredModel m = lower_program(g, range(0, 3), 4);
  EXPECT_EQ(m.op_count(), 0);
  EXPECT_EQ(m.entry_slot, m.tokens_slot);
  EXPECT_EQ(run_lowered(m, ints({3, 0, 2})), ints({3, 0, 2}));
}

TEST(Schedule, DependenciesIncrease) {
  ProgramGraph g = compile_program(program_text("sort"), "make_sort_tokens");
  auto s = schedule_layers(g);
  for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
    const Node& n = g.node(id);
    if (n.is_selector()) {
      EXPECT_EQ(s.layer_of[static_cast<size_t>(id)], -1);
      continue;
    }
    for (NodeId c : n.children) {
      if (g.node(c).is_selector()) {
        for (NodeId cc : g.node(c).children) EXPECT_LT(s.layer_of[static_cast<size_t>(cc)], s.layer_of[static_cast<size_t>(id)]);
      } else {
        EXPECT_LT(s.layer_of[static_cast<size_t>(c)], s.layer_of[static_cast<size_t>(id)]);
      }
    }
  }
}

TEST(Lower, GreaterThanScores) {
  ProgramGraph g = one_liner("rasp.SelectorWidth(rasp.Select(rasp.tokens, rasp.tokens, rasp.Comparison.GT))");
  LoweredModel m = lower_program(g, range(1, 4), 4);
  ASSERT_EQ(m.layers.size(), 1u);
  const AttentionOp& op = m.layers[0].attention.at(0);
  // scores[k][q] = key > query; read back in query-major order it is the
  // familiar strictly-upper pattern.
  std::vector<std::vector<int>> by_query(4, std::vector<int>(4));
  for (int k = 0; k < 4; ++k)
    for (int q = 0; q < 4; ++q) by_query[q][k] = op.scores[k][q];
  EXPECT_EQ(by_query, (std::vector<std::vector<int>>{{0, 1, 1, 1}, {0, 0, 1, 1}, {0, 0, 0, 1}, {0, 0, 0, 0}}));
}

TEST(Lower, MapTable) {
  ProgramGraph g = one_liner("rasp.Map(lambda x: x * 3 + 1, rasp.tokens)");
  LoweredModel m = lower_program(g, range(0, 3), 4);
  const TableOp& t = m.layers.at(0).tables.at(0);
  const Slot& out = m.slots[static_cast<size_t>(t.output_slot)];
  const Slot& in = m.slots[static_cast<size_t>(t.input_slots[0])];
  std::map<long, long> got;
  for (size_t i = 0; i < in.basis.size(); ++i) {
    got[in.basis[i].int_value().get_si()] = out.basis[static_cast<size_t>(t.table[i])].int_value().get_si();
  }
  EXPECT_EQ(got, (std::map<long, long>{{0, 1}, {1, 4}, {2, 7}, {3, 10}}));
}

TEST(Lower, RunExamples) {
  ProgramGraph parity = compile_program(program_text("index_parity"), "make_index_parity");
  EXPECT_EQ(run_lowered(lower_program(parity, range(0, 9), 10), ints({5, 5, 5, 5})), ints({0, 1, 0, 1}));
  ProgramGraph sort = compile_program(program_text("sort"), "make_sort_tokens");
  EXPECT_EQ(run_lowered(lower_program(sort, range(0, 9), 10), ints({3, 1, 2})), ints({1, 2, 3}));
}

TEST(Lower, DomainErrors) {
  ProgramGraph g = compile_program(program_text("index_parity"), "make_index_parity");
  LoweredModel m = lower_program(g, range(0, 3), 4);
  for (const auto& bad : {ints({9}), ints({0, 0, 0, 0, 0})}) {
    try {
      run_lowered(m, bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInputOutOfDomain);
    }
  }
}

TEST(Lower, FullIsUnsupported) {
  GraphBuilder b;
  NodeId f = b.full(Value::integer(1));
  try {
    lower_program(b.build(f), range(0, 3), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedNode);
  }
}

TEST(Lower, StructuralInvariants) {
  TaskSet set = load_taskset(data_path("seed_tasks.json"));
  for (const auto& task : set.tasks) {
    ProgramGraph g = compile_program(task.reference_program, task.function);
    LoweredModel m = lower_program(g, task.vocab, task.max_len);
    // disjoint, contiguous slots
    std::vector<std::pair<int, int>> ranges;
    for (const auto& s : m.slots) ranges.push_back({s.offset, s.offset + s.width()});
    std::sort(ranges.begin(), ranges.end());
    for (size_t i = 1; i < ranges.size(); ++i) EXPECT_LE(ranges[i - 1].second, ranges[i].first) << task.name;
    // every read is written by an earlier layer (or is an embedding)
    std::set<int> written = {m.tokens_slot, m.indices_slot};
    for (const auto& layer : m.layers) {
      std::set<int> now;
      for (const auto& op : layer.attention) {
        EXPECT_TRUE(written.count(op.key_slot)) << task.name;
        EXPECT_TRUE(written.count(op.query_slot)) << task.name;
        if (op.value_slot >= 0) EXPECT_TRUE(written.count(op.value_slot)) << task.name;
        now.insert(op.output_slot);
      }
      for (const auto& op : layer.tables) {
        for (int s : op.input_slots) EXPECT_TRUE(written.count(s)) << task.name;
        now.insert(op.output_slot);
      }
      written.insert(now.begin(), now.end());
    }
    EXPECT_TRUE(written.count(m.entry_slot)) << task.name;
    EXPECT_EQ(m, lower_program(g, task.vocab, task.max_len)) << task.name;
  }
}

TEST(Lower, JsonRoundTrip) {
  ProgramGraph g = compile_program(program_text("frac_ones"), "make_frac_ones");
  LoweredModel m = lower_program(g, ints({0, 1}), 6);
  nlohmann::json j = model_to_json(m);
  EXPECT_EQ(j["format"], "rasptk-lowered-model");
  LoweredModel back = model_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back, m);
  EXPECT_EQ(run_lowered(back, ints({1, 0, 1, 1})), (std::vector<Value>{Value::integer(1), rat(1, 2), rat(2, 3), rat(3, 4)}));
}

TEST(Lower, ExhaustiveSmallDomains) {
  TaskSet set = load_taskset(data_path("seed_tasks.json"));
  for (const auto& task : set.tasks) {
    ProgramGraph g = compile_program(task.reference_program, task.function);
    std::vector<Value> vocab(task.vocab.begin(), task.vocab.begin() + std::min<size_t>(4, task.vocab.size()));
    LoweredModel m = lower_program(g, vocab, 4);
    auto sets = infer_value_sets(g, vocab, 4);
    for (const auto& in : all_sequences(vocab, 4)) {
      if (task.input_constraint == InputConstraint::kDistinct) {
        std::set<Value, ValueLess> seen(in.begin(), in.end());
        if (seen.size() != in.size()) continue;
      }
      Trace t = eval_trace(g, in);
      ASSERT_EQ(run_lowered(m, in), t.output(g)) << task.name << " " << repr_sequence(in);
      for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        if (!sets[static_cast<size_t>(id)]) continue;
        for (const auto& v : t.sequences[static_cast<size_t>(id)]) {
          if (v.is_null()) EXPECT_TRUE(sets[static_cast<size_t>(id)]->may_be_null) << task.name;
          else EXPECT_TRUE(sets[static_cast<size_t>(id)]->contains(v)) << task.name << " " << v.repr();
        }
      }
    }
  }
}
