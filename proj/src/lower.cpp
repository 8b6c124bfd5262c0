#include "rasptk/lower.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "rasptk/interp.hpp"

namespace rasptk {

using nlohmann::json;

bool ValueSet::contains(const Value& v) const {
  if (v.is_null()) return may_be_null;
  return index_of(v) >= 0;
}

namespace {

int sorted_index(const std::vector<Value>& values, const Value& v) {
  auto it = std::lower_bound(values.begin(), values.end(), v, ValueLess{});
  if (it == values.end() || compare_total(*it, v) != 0) return -1;
  return static_cast<int>(it - values.begin());
}

}  // namespace

int ValueSet::index_of(const Value& v) const { return sorted_index(values, v); }

void ValueSet::insert(const Value& v) {
  if (v.is_null()) {
    may_be_null = true;
    return;
  }
  auto it = std::lower_bound(values.begin(), values.end(), v, ValueLess{});
  if (it == values.end() || compare_total(*it, v) != 0) values.insert(it, v);
}

std::string describe_value_set(const ValueSet& set) {
  std::string out = "{";
  for (size_t i = 0; i < set.values.size(); ++i) {
    if (i) out += ", ";
    out += set.values[i].repr();
  }
  if (set.may_be_null) out += set.values.empty() ? "None" : ", None";
  return out + "}";
}

LowerError::LowerError(ErrorCode cause, NodeId node, std::vector<Value> witness,
                       const std::string& message)
    : Error(cause, message), node_(node), witness_(std::move(witness)) {}

bool is_numerical_set(const ValueSet& set) {
  if (set.may_be_null || set.values.empty()) return false;
  return std::all_of(set.values.begin(), set.values.end(), [](const Value& v) {
    return v.is_numeric() && (v == Value::integer(0) || v == Value::integer(1));
  });
}

namespace {

std::string witness_text(const std::vector<Value>& args) {
  static const char* kNames[] = {"x", "y"};
  std::string out;
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += std::string(i < 2 ? kNames[i] : "arg") + "=" + args[i].repr();
  }
  return out;
}

Value apply_checked(const ProgramGraph& graph, NodeId id, const ExprFn& fn,
                    std::vector<Value> args) {
  try {
    return eval_function(fn, args);
  } catch (const Error& err) {
    throw LowerError(err.code(), id, args,
                     graph.describe(id) + " fails on " + witness_text(args) + ": " + err.detail());
  }
}

void check_cap(const ProgramGraph& graph, NodeId id, const ValueSet& set, size_t cap) {
  if (set.values.size() > cap) {
    throw LowerError(ErrorCode::kCardinalityCap, id, {},
                     graph.describe(id) + " has " + std::to_string(set.values.size()) +
                         " possible values, more than the cap of " + std::to_string(cap));
  }
}

ValueSet range_set(long lo, long hi_inclusive) {
  ValueSet s;
  for (long i = lo; i <= hi_inclusive; ++i) s.values.push_back(Value::integer(i));
  return s;
}

}  // namespace

ValueSetMap infer_value_sets(const ProgramGraph& graph, const std::vector<Value>& vocab,
                             int max_len, const LowerOptions& options) {
  if (max_len < 1) throw Error(ErrorCode::kConfigError, "max_len must be at least 1");
  ValueSetMap sets(graph.size());
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    const Node& node = graph.node(id);
    auto input = [&](size_t i) -> const ValueSet& {
      return *sets[static_cast<size_t>(node.children[i])];
    };
    ValueSet out;
    switch (node.kind) {
      case NodeKind::kSelect: continue;
      case NodeKind::kTokens:
        for (const auto& v : vocab) out.insert(v);
        break;
      case NodeKind::kIndices: out = range_set(0, max_len - 1); break;
      case NodeKind::kFull: out.insert(node.constant); break;
      case NodeKind::kSelectorWidth: out = range_set(0, max_len); break;
      case NodeKind::kMap: {
        const ValueSet& in = input(0);
        for (const auto& x : in.values) out.insert(apply_checked(graph, id, *node.fn, {x}));
        if (in.may_be_null) out.may_be_null = true;
        break;
      }
      case NodeKind::kSequenceMap: {
        const ValueSet& a = input(0);
        const ValueSet& b = input(1);
        for (const auto& x : a.values) {
          for (const auto& y : b.values) out.insert(apply_checked(graph, id, *node.fn, {x, y}));
        }
        if (a.may_be_null || b.may_be_null) out.may_be_null = true;
        break;
      }
      case NodeKind::kAggregate: {
        const ValueSet& in = input(1);
        if (is_numerical_set(in)) {
          for (long m = 1; m <= max_len; ++m) {
            for (long k = 0; k <= m; ++k) out.insert(Value::rational(k, m));
          }
        } else {
          out = in;
        }
        out.insert(node.constant);
        out.may_be_null = true;
        break;
      }
    }
    check_cap(graph, id, out, options.cardinality_cap);
    sets[static_cast<size_t>(id)] = std::move(out);
  }
  return sets;
}

LayerSchedule schedule_layers(const ProgramGraph& graph) {
  // Raw levels alternate: odd = attention, even (>= 2) = table.
  std::vector<int> raw(graph.size(), 0);
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    const Node& node = graph.node(id);
    int dep = 0;
    for (NodeId c : node.children) dep = std::max(dep, raw[static_cast<size_t>(c)]);
    int level = 0;
    switch (node.kind) {
      case NodeKind::kTokens:
      case NodeKind::kIndices:
      case NodeKind::kFull: level = 0; break;
      case NodeKind::kSelect: level = dep; break;
      case NodeKind::kAggregate:
      case NodeKind::kSelectorWidth: level = dep % 2 == 0 ? dep + 1 : dep + 2; break;
      case NodeKind::kMap:
      case NodeKind::kSequenceMap: level = dep % 2 == 1 ? dep + 1 : dep + 2; break;
    }
    raw[static_cast<size_t>(id)] = level;
  }
  std::set<int> used;
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    if (!graph.node(id).is_selector() && raw[static_cast<size_t>(id)] > 0) {
      used.insert(raw[static_cast<size_t>(id)]);
    }
  }
  std::map<int, int> compact;
  LayerSchedule schedule;
  for (int level : used) {
    compact[level] = static_cast<int>(schedule.kinds.size()) + 1;
    schedule.kinds.push_back(level % 2 == 1 ? LayerKind::kAttention : LayerKind::kTable);
  }
  schedule.layer_of.resize(graph.size());
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    int level = raw[static_cast<size_t>(id)];
    schedule.layer_of[static_cast<size_t>(id)] =
        graph.node(id).is_selector() ? -1 : (level == 0 ? 0 : compact[level]);
  }
  return schedule;
}

int LoweredModel::residual_width() const {
  int w = 0;
  for (const auto& s : slots) w = std::max(w, s.offset + s.width());
  return w;
}

int LoweredModel::op_count() const {
  int n = 0;
  for (const auto& l : layers) n += static_cast<int>(l.attention.size() + l.tables.size());
  return n;
}

bool operator==(const LoweredModel& a, const LoweredModel& b) {
  return model_to_json(a) == model_to_json(b);
}

LoweredModel lower_program(const ProgramGraph& graph, const std::vector<Value>& vocab,
                           int max_len, const LowerOptions& options) {
  for (const auto& node : graph.nodes()) {
    if (node.kind == NodeKind::kFull) {
      throw LowerError(ErrorCode::kUnsupportedNode, -1, {}, "constant sequences cannot be lowered");
    }
  }
  ValueSetMap sets = infer_value_sets(graph, vocab, max_len, options);
  LayerSchedule schedule = schedule_layers(graph);

  LoweredModel model;
  ValueSet vocab_set;
  for (const auto& v : vocab) vocab_set.insert(v);
  model.vocab = vocab_set.values;
  model.max_len = max_len;

  std::vector<int> slot_of(graph.size(), -1);
  int offset = 0;
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    const Node& node = graph.node(id);
    if (node.is_selector()) continue;
    const ValueSet& set = *sets[static_cast<size_t>(id)];
    Slot slot;
    slot.node = id;
    slot.offset = offset;
    slot.basis = set.values;
    slot.null_lane = set.may_be_null;
    if (node.kind == NodeKind::kAggregate &&
        is_numerical_set(*sets[static_cast<size_t>(node.children[1])])) {
      slot.encoding = Slot::Encoding::kNumeric;
      slot.null_lane = true;
    }
    offset += slot.width();
    slot_of[static_cast<size_t>(id)] = static_cast<int>(model.slots.size());
    if (node.kind == NodeKind::kTokens) model.tokens_slot = static_cast<int>(model.slots.size());
    if (node.kind == NodeKind::kIndices) model.indices_slot = static_cast<int>(model.slots.size());
    model.slots.push_back(std::move(slot));
  }
  model.entry_slot = slot_of[static_cast<size_t>(graph.entry())];

  model.layers.resize(static_cast<size_t>(schedule.layer_count()));
  for (int i = 0; i < schedule.layer_count(); ++i) {
    model.layers[static_cast<size_t>(i)].kind = schedule.kinds[static_cast<size_t>(i)];
  }

  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    const Node& node = graph.node(id);
    int layer = schedule.layer_of[static_cast<size_t>(id)];
    if (layer <= 0) continue;
    Layer& target = model.layers[static_cast<size_t>(layer - 1)];
    int out_slot = slot_of[static_cast<size_t>(id)];
    const Slot& out = model.slots[static_cast<size_t>(out_slot)];

    if (node.kind == NodeKind::kAggregate || node.kind == NodeKind::kSelectorWidth) {
      const Node& select = graph.node(node.children[0]);
      AttentionOp op;
      op.node = id;
      op.kind = node.kind;
      op.comparison = select.comparison;
      op.key_slot = slot_of[static_cast<size_t>(select.children[0])];
      op.query_slot = slot_of[static_cast<size_t>(select.children[1])];
      op.output_slot = out_slot;
      if (node.kind == NodeKind::kAggregate) {
        op.value_slot = slot_of[static_cast<size_t>(node.children[1])];
        op.numerical = out.encoding == Slot::Encoding::kNumeric;
      }
      const auto& keys = model.slots[static_cast<size_t>(op.key_slot)].basis;
      const auto& queries = model.slots[static_cast<size_t>(op.query_slot)].basis;
      op.scores.assign(keys.size(), std::vector<int>(queries.size(), 0));
      for (size_t k = 0; k < keys.size(); ++k) {
        for (size_t q = 0; q < queries.size(); ++q) {
          op.scores[k][q] = evaluate_comparison(op.comparison, keys[k], queries[q]) ? 1 : 0;
        }
      }
      target.attention.push_back(std::move(op));
      continue;
    }

    TableOp op;
    op.node = id;
    op.output_slot = out_slot;
    for (NodeId c : node.children) op.input_slots.push_back(slot_of[static_cast<size_t>(c)]);
    auto domain = [&](int slot) {
      const Slot& s = model.slots[static_cast<size_t>(slot)];
      std::vector<Value> d = s.basis;
      if (s.null_lane) d.push_back(Value::null());
      return d;
    };
    auto out_index = [&](const Value& v) {
      if (v.is_null()) return -1;
      int idx = sets[static_cast<size_t>(id)]->index_of(v);
      if (idx < 0) {
        throw LowerError(ErrorCode::kInternal, id, {v}, "table output outside inferred set");
      }
      return idx;
    };
    if (node.kind == NodeKind::kMap) {
      for (const auto& x : domain(op.input_slots[0])) {
        op.table.push_back(out_index(apply_checked(graph, id, *node.fn, {x})));
      }
    } else {
      auto da = domain(op.input_slots[0]);
      auto db = domain(op.input_slots[1]);
      for (const auto& x : da) {
        for (const auto& y : db) op.table.push_back(out_index(apply_checked(graph, id, *node.fn, {x, y})));
      }
    }
    target.tables.push_back(std::move(op));
  }
  return model;
}

namespace {

class Residual {
 public:
  Residual(const LoweredModel& model, size_t n)
      : model_(model), width_(static_cast<size_t>(model.residual_width())), lanes_(n * width_) {}

  mpq_class& lane(size_t pos, int index) { return lanes_[pos * width_ + static_cast<size_t>(index)]; }

  // Decoded index in [0, index_space); the Null lane maps to basis.size().
  int read(int slot_id, size_t pos) {
    const Slot& slot = model_.slots[static_cast<size_t>(slot_id)];
    const int null_index = static_cast<int>(slot.basis.size());
    if (slot.encoding == Slot::Encoding::kNumeric) {
      const mpq_class& value = lane(pos, slot.offset);
      const mpq_class& null = lane(pos, slot.offset + 1);
      if (null == 1 && value == 0) return null_index;
      if (null == 0) {
        int idx = sorted_index(slot.basis, Value::rational(value));
        if (idx >= 0) return idx;
      }
      corrupt(slot, pos);
    }
    int hot = -1;
    for (int i = 0; i < slot.width(); ++i) {
      const mpq_class& x = lane(pos, slot.offset + i);
      if (x == 0) continue;
      if (x != 1 || hot >= 0) corrupt(slot, pos);
      hot = i;
    }
    if (hot < 0) corrupt(slot, pos);
    return hot;
  }

  void write(int slot_id, size_t pos, int index) {
    const Slot& slot = model_.slots[static_cast<size_t>(slot_id)];
    const int null_index = static_cast<int>(slot.basis.size());
    if (slot.encoding == Slot::Encoding::kNumeric) {
      bool is_null = index == null_index;
      lane(pos, slot.offset) = is_null ? mpq_class(0) : slot.basis[static_cast<size_t>(index)].to_rational();
      lane(pos, slot.offset + 1) = is_null ? 1 : 0;
      return;
    }
    for (int i = 0; i < slot.width(); ++i) lane(pos, slot.offset + i) = i == index ? 1 : 0;
  }

  Value decode(int slot_id, size_t pos) {
    const Slot& slot = model_.slots[static_cast<size_t>(slot_id)];
    int idx = read(slot_id, pos);
    return idx == static_cast<int>(slot.basis.size()) ? Value::null()
                                                      : slot.basis[static_cast<size_t>(idx)];
  }

 private:
  [[noreturn]] void corrupt(const Slot& slot, size_t pos) const {
    throw Error(ErrorCode::kStateCorruption,
                "slot of node " + std::to_string(slot.node) + " at position " +
                    std::to_string(pos) + " does not hold a basis vector");
  }

  const LoweredModel& model_;
  size_t width_;
  std::vector<mpq_class> lanes_;
};

void run_attention(const LoweredModel& model, const AttentionOp& op, Residual& state, size_t n) {
  const Slot& key_slot = model.slots[static_cast<size_t>(op.key_slot)];
  const Slot& query_slot = model.slots[static_cast<size_t>(op.query_slot)];
  const Slot& out = model.slots[static_cast<size_t>(op.output_slot)];
  std::vector<int> keys(n), queries(n);
  for (size_t i = 0; i < n; ++i) {
    keys[i] = state.read(op.key_slot, i);
    queries[i] = state.read(op.query_slot, i);
  }
  auto score = [&](size_t q, size_t k) {
    int ki = keys[k], qi = queries[q];
    if (ki >= static_cast<int>(key_slot.basis.size()) ||
        qi >= static_cast<int>(query_slot.basis.size())) {
      return 0;  // Null never matches
    }
    return op.scores[static_cast<size_t>(ki)][static_cast<size_t>(qi)];
  };

  std::vector<int> values;
  if (op.kind == NodeKind::kAggregate) {
    values.resize(n);
    for (size_t k = 0; k < n; ++k) values[k] = state.read(op.value_slot, k);
  }
  const Slot* value_slot =
      op.value_slot >= 0 ? &model.slots[static_cast<size_t>(op.value_slot)] : nullptr;

  for (size_t q = 0; q < n; ++q) {
    long width = 0;
    for (size_t k = 0; k < n; ++k) width += score(q, k);

    if (op.kind == NodeKind::kSelectorWidth) {
      state.write(op.output_slot, q, static_cast<int>(width));
      continue;
    }
    if (width == 0) {
      state.write(op.output_slot, q, static_cast<int>(out.basis.size()));
      continue;
    }
    mpq_class weight(1, width);
    if (op.numerical) {
      mpq_class sum = 0;
      for (size_t k = 0; k < n; ++k) {
        if (score(q, k)) sum += value_slot->basis[static_cast<size_t>(values[k])].to_rational();
      }
      state.lane(q, out.offset) = sum * weight;
      state.lane(q, out.offset + 1) = 0;
      continue;
    }
    for (int i = 0; i < out.width(); ++i) state.lane(q, out.offset + i) = 0;
    for (size_t k = 0; k < n; ++k) {
      if (score(q, k)) state.lane(q, out.offset + values[k]) += weight;
    }
  }
}

void run_table(const LoweredModel& model, const TableOp& op, Residual& state, size_t n) {
  const Slot& out = model.slots[static_cast<size_t>(op.output_slot)];
  for (size_t pos = 0; pos < n; ++pos) {
    size_t index = 0;
    for (int slot : op.input_slots) {
      const Slot& in = model.slots[static_cast<size_t>(slot)];
      index = index * static_cast<size_t>(in.index_space()) +
              static_cast<size_t>(state.read(slot, pos));
    }
    int result = op.table.at(index);
    state.write(op.output_slot, pos, result < 0 ? static_cast<int>(out.basis.size()) : result);
  }
}

}  // namespace

std::vector<Value> run_lowered(const LoweredModel& model, const std::vector<Value>& input) {
  const size_t n = input.size();
  if (n == 0 || n > static_cast<size_t>(model.max_len)) {
    throw Error(ErrorCode::kInputOutOfDomain,
                "input length " + std::to_string(n) + " outside [1, " +
                    std::to_string(model.max_len) + "]");
  }
  std::vector<int> token_index(n);
  for (size_t i = 0; i < n; ++i) {
    token_index[i] = input[i].is_null() ? -1 : sorted_index(model.vocab, input[i]);
    if (token_index[i] < 0) {
      throw Error(ErrorCode::kInputOutOfDomain, input[i].repr() + " is not in the vocabulary");
    }
  }

  Residual state(model, n);
  for (size_t i = 0; i < n; ++i) {
    if (model.tokens_slot >= 0) state.write(model.tokens_slot, i, token_index[i]);
    if (model.indices_slot >= 0) state.write(model.indices_slot, i, static_cast<int>(i));
  }
  for (const auto& layer : model.layers) {
    for (const auto& op : layer.attention) run_attention(model, op, state, n);
    for (const auto& op : layer.tables) run_table(model, op, state, n);
  }
  std::vector<Value> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(state.decode(model.entry_slot, i));
  return out;
}

// --- JSON container --------------------------------------------------------

namespace {

json value_to_json(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::kNull: return nullptr;
    case Value::Kind::kBool: return v.bool_value();
    case Value::Kind::kToken: return json{{"token", v.token_text()}};
    default: {
      mpq_class q = v.to_rational();
      return q.get_num().get_str() + "/" + q.get_den().get_str();
    }
  }
}

Value value_from_json(const json& j) {
  if (j.is_null()) return Value::null();
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (j.is_object()) return Value::token(j.at("token").get<std::string>());
  if (j.is_string()) {
    mpq_class q(j.get<std::string>());
    q.canonicalize();
    return Value::rational(q);
  }
  throw Error(ErrorCode::kSchemaError, "unrecognized value encoding " + j.dump());
}

json values_to_json(const std::vector<Value>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(value_to_json(v));
  return out;
}

std::vector<Value> values_from_json(const json& j) {
  std::vector<Value> out;
  for (const auto& v : j) out.push_back(value_from_json(v));
  return out;
}

}  // namespace

json model_to_json(const LoweredModel& model) {
  json slots = json::array();
  for (const auto& s : model.slots) {
    slots.push_back({{"node", s.node},
                     {"encoding", s.encoding == Slot::Encoding::kNumeric ? "numeric" : "one_hot"},
                     {"offset", s.offset},
                     {"width", s.width()},
                     {"basis", values_to_json(s.basis)},
                     {"null_lane", s.null_lane}});
  }
  json layers = json::array();
  for (const auto& layer : model.layers) {
    json ops = json::array();
    for (const auto& op : layer.attention) {
      json scores = json::array();
      for (const auto& row : op.scores) {
        json r = json::array();
        for (int x : row) r.push_back(std::to_string(x) + "/1");
        scores.push_back(std::move(r));
      }
      ops.push_back({{"type", op.kind == NodeKind::kSelectorWidth ? "selector_width" : "aggregate"},
                     {"node", op.node},
                     {"comparison", std::string(comparison_name(op.comparison))},
                     {"key_slot", op.key_slot},
                     {"query_slot", op.query_slot},
                     {"value_slot", op.value_slot},
                     {"output_slot", op.output_slot},
                     {"mode", op.numerical ? "numerical" : "categorical"},
                     {"scores", std::move(scores)}});
    }
    for (const auto& op : layer.tables) {
      ops.push_back({{"type", op.input_slots.size() == 1 ? "map" : "sequence_map"},
                     {"node", op.node},
                     {"input_slots", op.input_slots},
                     {"output_slot", op.output_slot},
                     {"table", op.table}});
    }
    layers.push_back({{"kind", layer.kind == LayerKind::kAttention ? "attention" : "table"},
                      {"ops", std::move(ops)}});
  }
  return {{"format", "rasptk-lowered-model"},
          {"version", 1},
          {"vocab", values_to_json(model.vocab)},
          {"max_len", model.max_len},
          {"residual_width", model.residual_width()},
          {"tokens_slot", model.tokens_slot},
          {"indices_slot", model.indices_slot},
          {"entry_slot", model.entry_slot},
          {"slots", std::move(slots)},
          {"layers", std::move(layers)}};
}

LoweredModel model_from_json(const json& j) {
  try {
    if (j.at("format") != "rasptk-lowered-model" || j.at("version") != 1) {
      throw Error(ErrorCode::kSchemaError, "not a version-1 lowered model");
    }
    LoweredModel model;
    model.vocab = values_from_json(j.at("vocab"));
    model.max_len = j.at("max_len").get<int>();
    model.tokens_slot = j.at("tokens_slot").get<int>();
    model.indices_slot = j.at("indices_slot").get<int>();
    model.entry_slot = j.at("entry_slot").get<int>();
    for (const auto& s : j.at("slots")) {
      Slot slot;
      slot.node = s.at("node").get<int>();
      slot.encoding = s.at("encoding") == "numeric" ? Slot::Encoding::kNumeric : Slot::Encoding::kOneHot;
      slot.offset = s.at("offset").get<int>();
      slot.basis = values_from_json(s.at("basis"));
      slot.null_lane = s.at("null_lane").get<bool>();
      model.slots.push_back(std::move(slot));
    }
    for (const auto& l : j.at("layers")) {
      Layer layer;
      layer.kind = l.at("kind") == "attention" ? LayerKind::kAttention : LayerKind::kTable;
      for (const auto& o : l.at("ops")) {
        std::string type = o.at("type");
        if (type == "aggregate" || type == "selector_width") {
          AttentionOp op;
          op.node = o.at("node").get<int>();
          op.kind = type == "aggregate" ? NodeKind::kAggregate : NodeKind::kSelectorWidth;
          if (!comparison_from_name(o.at("comparison").get<std::string>(), &op.comparison)) {
            throw Error(ErrorCode::kSchemaError, "unknown comparison " + o.at("comparison").dump());
          }
          op.key_slot = o.at("key_slot").get<int>();
          op.query_slot = o.at("query_slot").get<int>();
          op.value_slot = o.at("value_slot").get<int>();
          op.output_slot = o.at("output_slot").get<int>();
          op.numerical = o.at("mode") == "numerical";
          for (const auto& row : o.at("scores")) {
            std::vector<int> r;
            for (const auto& x : row) r.push_back(x.get<std::string>() == "1/1" ? 1 : 0);
            op.scores.push_back(std::move(r));
          }
          layer.attention.push_back(std::move(op));
        } else {
          TableOp op;
          op.node = o.at("node").get<int>();
          op.input_slots = o.at("input_slots").get<std::vector<int>>();
          op.output_slot = o.at("output_slot").get<int>();
          op.table = o.at("table").get<std::vector<int>>();
          layer.tables.push_back(std::move(op));
        }
      }
      model.layers.push_back(std::move(layer));
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("malformed model: ") + e.what());
  }
}

}  // namespace rasptk
