#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fpp {

// 17-significant-digit decimal text; round-trips doubles exactly.
std::string fmt17(double v);
std::string fmt_int(int64_t v);
std::string fmt_u64(uint64_t v);

std::string json_escape(const std::string& s);

// Minimal deterministic JSON writer (fixed key order, fmt17 numbers).
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& k);
  JsonWriter& value(double v);
  JsonWriter& value(int64_t v);
  JsonWriter& value(uint64_t v);
  JsonWriter& value(int v) { return value(static_cast<int64_t>(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value(const char* v) { return value(std::string(v)); }
  JsonWriter& raw(const std::string& text);

  const std::string& str() const { return out_; }

 private:
  void maybe_comma();
  std::string out_;
  std::vector<bool> first_;  // per nesting level
  bool pending_key_ = false;
};

std::string csv_escape(const std::string& s);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace fpp
