#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace finevq {

// Tab-separated table with a header row. Lines starting with '#' and blank
// lines are skipped.
class TsvTable {
 public:
  TsvTable() = default;
  explicit TsvTable(std::vector<std::string> header);

  static TsvTable Read(const std::filesystem::path& path);
  static TsvTable Parse(std::istream& in, const std::string& source);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  // Column index; throws ValidationError naming the column when absent.
  std::size_t Column(std::string_view name) const;
  bool HasColumn(std::string_view name) const;

  const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }
  // 1-based source line of row i, for error messages.
  std::size_t line(std::size_t i) const { return lines_[i]; }

  void AddRow(std::vector<std::string> row);

  void Write(std::ostream& out) const;
  void Write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> lines_;
};

std::vector<std::string> SplitString(std::string_view s, char delim);
std::string Trim(std::string_view s);
std::string ToLower(std::string_view s);

// Strict numeric parsing; throw ValidationError with `context` on failure.
double ParseDouble(std::string_view s, const std::string& context);
long long ParseInt(std::string_view s, const std::string& context);

// Formats with up to 17 significant digits, shortest round-trip form.
std::string FormatDouble(double v);

}  // namespace finevq
