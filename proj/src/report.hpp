#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"

namespace loca {

// Round-trip decimal formatting so reports are byte-stable across runs.
std::string fmt_double(double v);
std::string fmt_int(std::int64_t v);

// Comma-separated report writer; every file carries a schema_version column.
class CsvWriter {
 public:
  CsvWriter(std::filesystem::path path, std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  // Writes the accumulated rows atomically (temp file + rename).
  void finish();

 private:
  std::filesystem::path path_;
  std::string buffer_;
  std::size_t columns_ = 0;
  bool finished_ = false;
};

void write_text_file_atomic(const std::filesystem::path& path, const std::string& content);

// Flat key = value configuration with '#' comments. Values stay strings;
// typed getters validate on access. Reading an unknown key or leaving a key
// unread is reported through `unknown_keys`.
class KvConfig {
 public:
  static KvConfig from_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_real(const std::string& key, double fallback) const;
  std::optional<std::int64_t> get_int_opt(const std::string& key) const;
  // Comma-separated numeric lists.
  std::vector<std::int64_t> get_int_list(const std::string& key,
                                         const std::vector<std::int64_t>& fallback) const;
  std::vector<double> get_real_list(const std::string& key,
                                    const std::vector<double>& fallback) const;

  // Keys present in the config but never consumed by the experiment.
  std::vector<std::string> unconsumed() const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
  mutable std::map<std::string, bool> consumed_;
};

}  // namespace loca
