#include "rasptk/task.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "rasptk/error.hpp"

namespace rasptk {

using nlohmann::json;

json value_to_json(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::kNull: return nullptr;
    case Value::Kind::kBool: return v.bool_value();
    case Value::Kind::kToken: return v.token_text();
    case Value::Kind::kInt: {
      const mpz_class& z = v.int_value();
      if (z.fits_slong_p()) return z.get_si();
      return json{{"int", z.get_str()}};
    }
    case Value::Kind::kRat: {
      const mpq_class& q = v.rat_value();
      return json{{"frac", q.get_num().get_str() + "/" + q.get_den().get_str()}};
    }
  }
  return nullptr;
}

Value value_from_json(const json& j) {
  if (j.is_null()) return Value::null();
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (j.is_number_integer()) return Value::integer(j.get<long>());
  if (j.is_string()) return Value::token(j.get<std::string>());
  if (j.is_number_float()) {
    // Accepted for hand-written files: 3.5 means exactly 7/2.
    return Value::rational(parse_decimal(j.dump()));
  }
  if (j.is_object() && j.size() == 1) {
    if (j.contains("frac")) {
      mpq_class q;
      if (q.set_str(j["frac"].get<std::string>(), 10) != 0 || q.get_den() == 0) {
        throw Error(ErrorCode::kSchemaError, "malformed fraction " + j.dump());
      }
      q.canonicalize();
      return Value::rational(q);
    }
    if (j.contains("int")) return Value::integer(mpz_class(j["int"].get<std::string>()));
  }
  throw Error(ErrorCode::kSchemaError, "unrecognized value " + j.dump());
}

json sequence_to_json(const std::vector<Value>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(value_to_json(v));
  return out;
}

std::vector<Value> sequence_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kSchemaError, "expected an array, got " + j.dump());
  std::vector<Value> out;
  for (const auto& v : j) out.push_back(value_from_json(v));
  return out;
}

std::string_view split_name(Split split) {
  return split == Split::kPromptExamples ? "prompt_examples" : "test";
}

const TaskSpec* TaskSet::find(std::string_view name) const {
  for (const auto& t : tasks) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::vector<const TaskSpec*> TaskSet::split(Split s) const {
  std::vector<const TaskSpec*> out;
  for (const auto& t : tasks) {
    if (t.split == s) out.push_back(&t);
  }
  return out;
}

namespace {

class FieldReader {
 public:
  FieldReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw Error(ErrorCode::kSchemaError, path + ": " + msg);
  }

  const json& required(const std::string& key) const {
    if (!obj_.contains(key)) fail(path_ + "." + key, "missing required field");
    return obj_.at(key);
  }
  const json* optional(const std::string& key) const {
    return obj_.contains(key) ? &obj_.at(key) : nullptr;
  }
  std::string string(const std::string& key) const {
    const json& v = required(key);
    if (!v.is_string()) fail(path_ + "." + key, "expected a string");
    return v.get<std::string>();
  }
  std::string path(const std::string& key) const { return path_ + "." + key; }

 private:
  const json& obj_;
  std::string path_;
};

std::vector<Value> read_vocab(const json& j, const std::string& path) {
  FieldReader r(j, path);
  if (const json* range = r.optional("range")) {
    if (!range->is_array() || range->size() != 2 || !(*range)[0].is_number_integer() ||
        !(*range)[1].is_number_integer()) {
      FieldReader::fail(path + ".range", "expected [low, high] integers");
    }
    long lo = (*range)[0].get<long>(), hi = (*range)[1].get<long>();
    if (hi < lo) FieldReader::fail(path + ".range", "empty range");
    if (hi - lo > 4096) FieldReader::fail(path + ".range", "range too large");
    std::vector<Value> out;
    for (long v = lo; v <= hi; ++v) out.push_back(Value::integer(v));
    return out;
  }
  if (const json* values = r.optional("values")) {
    std::vector<Value> out;
    try {
      out = sequence_from_json(*values);
    } catch (const Error& e) {
      FieldReader::fail(path + ".values", e.detail());
    }
    if (out.empty()) FieldReader::fail(path + ".values", "vocabulary is empty");
    for (const auto& v : out) {
      if (v.is_null()) FieldReader::fail(path + ".values", "None is not a vocabulary value");
    }
    return out;
  }
  FieldReader::fail(path, "expected {\"range\": [a, b]} or {\"values\": [...]}");
}

TaskSpec read_task(const json& j, const std::string& path, const std::filesystem::path& base_dir) {
  FieldReader r(j, path);
  TaskSpec t;
  t.name = r.string("name");
  if (t.name.empty()) FieldReader::fail(r.path("name"), "must not be empty");
  t.description = r.string("description");
  t.function = r.string("function");
  if (t.function.size() > 2 && t.function.substr(t.function.size() - 2) == "()") {
    t.function.resize(t.function.size() - 2);
  }
  t.vocab = read_vocab(r.required("vocab"), r.path("vocab"));
  if (const json* m = r.optional("max_len")) {
    if (!m->is_number_integer() || m->get<int>() < 1 || m->get<int>() > 64) {
      FieldReader::fail(r.path("max_len"), "expected an integer in [1, 64]");
    }
    t.max_len = m->get<int>();
  }

  std::string split = r.string("split");
  if (split == "prompt_examples") t.split = Split::kPromptExamples;
  else if (split == "test") t.split = Split::kTest;
  else FieldReader::fail(r.path("split"), "expected \"prompt_examples\" or \"test\"");

  if (const json* c = r.optional("input_constraint")) {
    if (*c == "distinct") t.input_constraint = InputConstraint::kDistinct;
    else if (*c != "none") FieldReader::fail(r.path("input_constraint"), "expected \"distinct\" or \"none\"");
  }
  if (const json* tags = r.optional("tags")) {
    for (const auto& tag : *tags) t.tags.push_back(tag.get<std::string>());
  }

  FieldReader oracle(r.required("oracle"), r.path("oracle"));
  if (const json* id = oracle.optional("builtin")) {
    t.oracle = builtin_oracle(id->get<std::string>());
  } else if (const json* expr = oracle.optional("expr")) {
    t.oracle = compile_expression_oracle(expr->get<std::string>());
  } else {
    FieldReader::fail(r.path("oracle"), "expected {\"builtin\": id} or {\"expr\": source}");
  }

  const json& examples = r.required("examples");
  if (!examples.is_array() || examples.empty()) {
    FieldReader::fail(r.path("examples"), "expected a nonempty array");
  }
  for (size_t i = 0; i < examples.size(); ++i) {
    std::string epath = r.path("examples") + "[" + std::to_string(i) + "]";
    FieldReader er(examples[i], epath);
    Example ex;
    try {
      ex.input = sequence_from_json(er.required("input"));
      ex.output = sequence_from_json(er.required("output"));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSchemaError) throw;
      FieldReader::fail(epath, e.detail());
    }
    if (ex.input.empty() || ex.input.size() != ex.output.size()) {
      FieldReader::fail(epath, "input and output must be nonempty and of equal length");
    }
    t.examples.push_back(std::move(ex));
  }

  if (const json* text = r.optional("reference_program")) {
    t.reference_program = text->get<std::string>();
  } else if (const json* rel = r.optional("reference_program_path")) {
    std::filesystem::path p = base_dir / rel->get<std::string>();
    std::ifstream in(p);
    if (!in) throw Error(ErrorCode::kIoError, r.path("reference_program_path") + ": cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    t.reference_program = ss.str();
  }

  for (size_t i = 0; i < t.examples.size(); ++i) {
    const auto& ex = t.examples[i];
    std::vector<Value> expected = eval_oracle(t, ex.input);
    if (expected != ex.output) {
      throw Error(ErrorCode::kExampleMismatch,
                  "task '" + t.name + "' example " + std::to_string(i) + ": " +
                      repr_sequence(ex.input) + " --> " + repr_sequence(ex.output) +
                      " but the oracle gives " + repr_sequence(expected));
    }
  }
  return t;
}

}  // namespace

TaskSet parse_taskset(const json& doc, const std::filesystem::path& base_dir) {
  FieldReader root(doc, "$");
  const json& version = root.required("schema_version");
  if (version != 1) FieldReader::fail("$.schema_version", "unsupported version " + version.dump());
  TaskSet set;
  if (const json* meta = root.optional("metadata")) set.metadata = *meta;
  const json& tasks = root.required("tasks");
  if (!tasks.is_array()) FieldReader::fail("$.tasks", "expected an array");
  std::set<std::string> names;
  for (size_t i = 0; i < tasks.size(); ++i) {
    TaskSpec t = read_task(tasks[i], "$.tasks[" + std::to_string(i) + "]", base_dir);
    if (!names.insert(t.name).second) {
      throw Error(ErrorCode::kDuplicateName, "task name '" + t.name + "' appears more than once");
    }
    set.tasks.push_back(std::move(t));
  }
  return set;
}

TaskSet load_taskset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read task set " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
  return parse_taskset(doc, path.parent_path());
}

}  // namespace rasptk
