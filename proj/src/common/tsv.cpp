#include "finevq/tsv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "finevq/error.hpp"

namespace finevq {

TsvTable::TsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

TsvTable TsvTable::Read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("cannot open '" + path.string() + "'");
  return Parse(in, path.string());
}

TsvTable TsvTable::Parse(std::istream& in, const std::string& source) {
  TsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = SplitString(line, '\t');
    if (!have_header) {
      t.header_ = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header_.size()) {
      throw ValidationError(source + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header_.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    t.rows_.push_back(std::move(fields));
    t.lines_.push_back(lineno);
  }
  return t;
}

std::size_t TsvTable::Column(std::string_view name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) {
    throw ValidationError("missing column '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - header_.begin());
}

bool TsvTable::HasColumn(std::string_view name) const {
  return std::find(header_.begin(), header_.end(), name) != header_.end();
}

void TsvTable::AddRow(std::vector<std::string> row) {
  rows_.push_back(std::move(row));
  lines_.push_back(0);
}

void TsvTable::Write(std::ostream& out) const {
  auto emit = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << '\t';
      out << fields[i];
    }
    out << '\n';
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
}

void TsvTable::Write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  Write(out);
  if (!out) throw RuntimeError("write failed for '" + path.string() + "'");
}

std::vector<std::string> SplitString(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string Trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

double ParseDouble(std::string_view s, const std::string& context) {
  std::string str = Trim(s);
  if (str.empty()) throw ValidationError(context + ": empty number");
  char* end = nullptr;
  double v = std::strtod(str.c_str(), &end);
  if (end != str.c_str() + str.size()) {
    throw ValidationError(context + ": not a number '" + str + "'");
  }
  return v;
}

long long ParseInt(std::string_view s, const std::string& context) {
  std::string str = Trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(str.data(), str.data() + str.size(), v);
  if (ec != std::errc() || ptr != str.data() + str.size() || str.empty()) {
    throw ValidationError(context + ": not an integer '" + str + "'");
  }
  return v;
}

std::string FormatDouble(double v) {
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace finevq
