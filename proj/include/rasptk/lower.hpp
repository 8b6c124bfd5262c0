#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rasptk/error.hpp"
#include "rasptk/graph.hpp"
#include "rasptk/value.hpp"

namespace rasptk {

// Finite set of non-Null values in compare_total order, plus a Null flag.
struct ValueSet {
  std::vector<Value> values;
  bool may_be_null = false;

  bool contains(const Value& v) const;
  // Position in `values`, or -1.
  int index_of(const Value& v) const;
  void insert(const Value& v);
  friend bool operator==(const ValueSet&, const ValueSet&) = default;
};

std::string describe_value_set(const ValueSet& set);

// Indexed by node id; selectors have no entry.
using ValueSetMap = std::vector<std::optional<ValueSet>>;

struct LowerOptions {
  size_t cardinality_cap = 512;
};

// Failure while lowering, attributed to a node and, where one exists, the
// concrete argument values that triggered it.
class LowerError : public Error {
 public:
  LowerError(ErrorCode cause, NodeId node, std::vector<Value> witness, const std::string& message);

  NodeId node() const { return node_; }
  const std::vector<Value>& witness() const { return witness_; }

 private:
  NodeId node_;
  std::vector<Value> witness_;
};

ValueSetMap infer_value_sets(const ProgramGraph& graph, const std::vector<Value>& vocab,
                             int max_len, const LowerOptions& options = {});

// True when the aggregated SOp's set lies within {0, 1} (and excludes Null):
// the aggregate may then average. Anything else aggregates categorically.
bool is_numerical_set(const ValueSet& set);

enum class LayerKind { kAttention, kTable };

struct LayerSchedule {
  // 0 for embeddings, 1..layer_count() for ops, -1 for selectors.
  std::vector<int> layer_of;
  std::vector<LayerKind> kinds;  // kinds[i] is the kind of layer i + 1

  int layer_count() const { return static_cast<int>(kinds.size()); }
};

LayerSchedule schedule_layers(const ProgramGraph& graph);

// A contiguous range of residual lanes holding one node's value.
//   one-hot: lanes [offset, offset + |basis|) plus a trailing Null lane
//   numeric: lane offset = exact value, lane offset + 1 = Null indicator
struct Slot {
  enum class Encoding { kOneHot, kNumeric };
  NodeId node = -1;
  Encoding encoding = Encoding::kOneHot;
  int offset = 0;
  std::vector<Value> basis;
  bool null_lane = false;

  int width() const {
    return encoding == Encoding::kNumeric ? 2 : static_cast<int>(basis.size()) + (null_lane ? 1 : 0);
  }
  // Number of distinct indices a reader can decode: basis plus Null.
  int index_space() const { return static_cast<int>(basis.size()) + (null_lane ? 1 : 0); }
};

struct AttentionOp {
  NodeId node = -1;
  NodeKind kind = NodeKind::kAggregate;  // kAggregate or kSelectorWidth
  Comparison comparison = Comparison::kTrue;
  int key_slot = -1;
  int query_slot = -1;
  int value_slot = -1;  // -1 for SelectorWidth
  int output_slot = -1;
  bool numerical = false;
  // scores[k][q] is 1 iff predicate(key basis k, query basis q).
  std::vector<std::vector<int>> scores;
};

struct TableOp {
  NodeId node = -1;
  std::vector<int> input_slots;  // one (Map) or two (SequenceMap)
  int output_slot = -1;
  // Indexed by the row-major product of the inputs' index spaces (Null lane
  // last); entries are output basis indices, -1 for Null.
  std::vector<int> table;
};

struct Layer {
  LayerKind kind = LayerKind::kTable;
  std::vector<AttentionOp> attention;
  std::vector<TableOp> tables;
};

struct LoweredModel {
  std::vector<Value> vocab;
  int max_len = 0;
  std::vector<Slot> slots;
  int tokens_slot = -1;
  int indices_slot = -1;
  std::vector<Layer> layers;
  int entry_slot = -1;

  int residual_width() const;
  int op_count() const;
  friend bool operator==(const LoweredModel& a, const LoweredModel& b);
};

LoweredModel lower_program(const ProgramGraph& graph, const std::vector<Value>& vocab,
                           int max_len, const LowerOptions& options = {});

// Errors: InputOutOfDomain (token outside vocab or input too long),
// StateCorruption (a read found a non-basis vector).
std::vector<Value> run_lowered(const LoweredModel& model, const std::vector<Value>& input);

nlohmann::json model_to_json(const LoweredModel& model);
LoweredModel model_from_json(const nlohmann::json& j);

}  // namespace rasptk
