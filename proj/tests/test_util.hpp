#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "rasptk/value.hpp"

#ifndef RASPTK_DATA_DIR
#define RASPTK_DATA_DIR "data"
#endif

namespace rasptk::testing {

inline std::vector<Value> ints(std::initializer_list<long> xs) {
  std::vector<Value> out;
  for (long x : xs) out.push_back(Value::integer(x));
  return out;
}

inline Value rat(long p, long q) { return Value::rational(p, q); }
inline Value none() { return Value::null(); }

inline std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(RASPTK_DATA_DIR) / rel;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string program_text(const std::string& name) { return slurp(data_path("programs/" + name + ".rasp")); }

// Sort listing as it appears in the benchmark's reference material: two
// defs, no zero-argument wrapper.
inline const char* kSortListing = R"(def make_sort_unique(vals: rasp.SOp, keys: rasp.SOp) -> rasp.SOp:
    smaller = rasp.Select(keys, keys, rasp.Comparison.LT)
    target_pos = rasp.SelectorWidth(smaller)
    sel_new = rasp.Select(target_pos, rasp.indices, rasp.Comparison.EQ)
    return rasp.Aggregate(sel_new, vals)

def make_sort(vals: rasp.SOp, keys: rasp.SOp, *, max_seq_len: int, min_key: float) -> rasp.SOp:
    keys = rasp.SequenceMap(lambda x, i: x + min_key * i / max_seq_len, keys, rasp.indices)
    return make_sort_unique(vals, keys)
)";

inline const char* kCheckPrimeListing = R"(def make_check_prime() -> rasp.SOp:
    return rasp.Map(lambda x: is_prime(x), rasp.tokens)
)";

// Every possible sequence of length 1..max_len over `vocab`.
inline std::vector<std::vector<Value>> all_sequences(const std::vector<Value>& vocab, int max_len) {
  std::vector<std::vector<Value>> out;
  std::vector<std::vector<Value>> frontier = {{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<Value>> next;
    for (const auto& prefix : frontier) {
      for (const auto& v : vocab) {
        auto s = prefix;
        s.push_back(v);
        next.push_back(s);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

}  // namespace rasptk::testing
