#include "report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace loca {

namespace fs = std::filesystem;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_int(std::int64_t v) { return std::to_string(v); }

CsvWriter::CsvWriter(fs::path path, std::vector<std::string> header)
    : path_(std::move(path)), columns_(header.size()) {
  require(!header.empty(), Errc::invalid_argument, "CsvWriter: empty header");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) buffer_ += ',';
    buffer_ += header[i];
  }
  buffer_ += '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  require(cells.size() == columns_, Errc::invalid_argument, "CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
}

void CsvWriter::finish() {
  if (finished_) return;
  write_text_file_atomic(path_, buffer_);
  finished_ = true;
}

void write_text_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), Errc::io, "cannot open " + tmp.string());
    out << content;
    require(out.good(), Errc::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  require(!ec, Errc::io, "rename failed for " + path.string() + ": " + ec.message());
}

KvConfig KvConfig::from_file(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), Errc::io, "config: cannot open " + path.string());
  KvConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    const auto a = s.find_first_not_of(ws);
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, Errc::invalid_argument,
            "config: missing '=' at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), Errc::invalid_argument,
            "config: empty key at line " + std::to_string(lineno));
    cfg.set(key, value);
  }
  return cfg;
}

void KvConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
  consumed_[key] = false;
}

bool KvConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  consumed_[key] = true;
  return it->second;
}

std::int64_t KvConfig::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  consumed_[key] = true;
  try {
    std::size_t pos = 0;
    std::int64_t v = std::stoll(it->second, &pos);
    require(pos == it->second.size(), Errc::invalid_argument, "");
    return v;
  } catch (...) {
    fail(Errc::invalid_argument, "config: key '" + key + "' is not an integer: " + it->second);
  }
}

std::optional<std::int64_t> KvConfig::get_int_opt(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return get_int(key, 0);
}

double KvConfig::get_real(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  consumed_[key] = true;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    require(pos == it->second.size(), Errc::invalid_argument, "");
    return v;
  } catch (...) {
    fail(Errc::invalid_argument, "config: key '" + key + "' is not a number: " + it->second);
  }
}

namespace {
std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}
}  // namespace

std::vector<std::int64_t> KvConfig::get_int_list(const std::string& key,
                                                 const std::vector<std::int64_t>& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  consumed_[key] = true;
  std::vector<std::int64_t> out;
  for (const std::string& part : split_commas(it->second)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoll(part, &pos));
      require(pos == part.size(), Errc::invalid_argument, "");
    } catch (...) {
      fail(Errc::invalid_argument, "config: key '" + key + "' has a bad integer: " + part);
    }
  }
  return out;
}

std::vector<double> KvConfig::get_real_list(const std::string& key,
                                            const std::vector<double>& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  consumed_[key] = true;
  std::vector<double> out;
  for (const std::string& part : split_commas(it->second)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(part, &pos));
      require(pos == part.size(), Errc::invalid_argument, "");
    } catch (...) {
      fail(Errc::invalid_argument, "config: key '" + key + "' has a bad number: " + part);
    }
  }
  return out;
}

std::vector<std::string> KvConfig::unconsumed() const {
  std::vector<std::string> out;
  for (const auto& [key, used] : consumed_)
    if (!used) out.push_back(key);
  return out;
}

}  // namespace loca
