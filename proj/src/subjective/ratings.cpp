#include "finevq/subjective/ratings.hpp"

#include <fstream>

#include "finevq/error.hpp"
#include "finevq/tsv.hpp"

namespace finevq::subjective {

std::vector<RatingRecord> ParseRatings(std::istream& in, const std::string& source) {
  const TsvTable t = TsvTable::Parse(in, source);
  if (t.header().empty()) return {};
  const auto cs = t.Column("subject_id"), cv = t.Column("video_id"),
             cd = t.Column("dimension"), cr = t.Column("raw");
  const bool has_flag = t.HasColumn("outlier");
  const std::size_t cf = has_flag ? t.Column("outlier") : 0;
  std::vector<RatingRecord> out;
  out.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& row = t.row(i);
    const std::string where = source + ":" + std::to_string(t.line(i));
    RatingRecord r;
    r.subject_id = row[cs];
    r.video_id = row[cv];
    auto d = ParseDimension(row[cd]);
    if (!d) throw ValidationError(where + ": unknown dimension '" + row[cd] + "'");
    r.dimension = *d;
    const long long raw = ParseInt(row[cr], where);
    if (raw < 1 || raw > 5) {
      throw ValidationError(where + ": raw rating " + std::to_string(raw) +
                            " outside 1..5");
    }
    r.raw = static_cast<int>(raw);
    if (has_flag) r.outlier = ParseInt(row[cf], where) != 0;
    if (r.subject_id.empty() || r.video_id.empty()) {
      throw ValidationError(where + ": empty subject_id or video_id");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RatingRecord> ReadRatings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("cannot open ratings '" + path.string() + "'");
  return ParseRatings(in, path.string());
}

void WriteRatings(std::span<const RatingRecord> ratings, std::ostream& out,
                  bool with_flags) {
  TsvTable t(with_flags ? std::vector<std::string>{"subject_id", "video_id",
                                                   "dimension", "raw", "outlier"}
                        : std::vector<std::string>{"subject_id", "video_id",
                                                   "dimension", "raw"});
  for (const auto& r : ratings) {
    std::vector<std::string> row = {r.subject_id, r.video_id,
                                    std::string(ToString(r.dimension)),
                                    std::to_string(r.raw)};
    if (with_flags) row.push_back(r.outlier ? "1" : "0");
    t.AddRow(std::move(row));
  }
  t.Write(out);
}

void WriteRatings(std::span<const RatingRecord> ratings,
                  const std::filesystem::path& path, bool with_flags) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  WriteRatings(ratings, out, with_flags);
}

void MosTable::Set(const std::string& video_id, Dimension d, MosCell cell) {
  cells_[video_id][Index(d)] = cell;
}

bool MosTable::Has(const std::string& video_id, Dimension d) const {
  auto it = cells_.find(video_id);
  return it != cells_.end() && it->second[Index(d)].has_value();
}

const MosCell& MosTable::Get(const std::string& video_id, Dimension d) const {
  auto it = cells_.find(video_id);
  if (it == cells_.end() || !it->second[Index(d)]) {
    throw ValidationError("missing MOS cell (" + video_id + ", " +
                          std::string(ToString(d)) + ")");
  }
  return *it->second[Index(d)];
}

std::vector<std::string> MosTable::videos() const {
  std::vector<std::string> out;
  out.reserve(cells_.size());
  for (const auto& [id, _] : cells_) out.push_back(id);
  return out;
}

std::size_t MosTable::cell_count() const {
  std::size_t n = 0;
  for (const auto& [_, row] : cells_) {
    for (const auto& c : row) n += c.has_value();
  }
  return n;
}

std::vector<double> MosTable::Column(Dimension d) const {
  std::vector<double> out;
  out.reserve(cells_.size());
  for (const auto& [id, _] : cells_) out.push_back(Get(id, d).mos);
  return out;
}

MosTable ReadMos(const std::filesystem::path& path) {
  const TsvTable t = TsvTable::Read(path);
  MosTable table;
  if (t.header().empty()) return table;
  const auto cv = t.Column("video_id"), cd = t.Column("dimension"),
             cm = t.Column("mos"), cs = t.Column("std"), cn = t.Column("n_valid");
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& row = t.row(i);
    const std::string where = path.string() + ":" + std::to_string(t.line(i));
    MosCell c;
    c.mos = ParseDouble(row[cm], where);
    c.std = ParseDouble(row[cs], where);
    const long long n = ParseInt(row[cn], where);
    if (n < 0) throw ValidationError(where + ": negative n_valid");
    c.n_valid = static_cast<std::size_t>(n);
    auto d = ParseDimension(row[cd]);
    if (!d) throw ValidationError(where + ": unknown dimension '" + row[cd] + "'");
    table.Set(row[cv], *d, c);
  }
  return table;
}

void WriteMos(const MosTable& table, std::ostream& out) {
  TsvTable t({"video_id", "dimension", "mos", "std", "n_valid"});
  for (const auto& v : table.videos()) {
    for (Dimension d : kAllDimensions) {
      if (!table.Has(v, d)) continue;
      const MosCell& c = table.Get(v, d);
      t.AddRow({v, std::string(ToString(d)), FormatDouble(c.mos),
                FormatDouble(c.std), std::to_string(c.n_valid)});
    }
  }
  t.Write(out);
}

void WriteMos(const MosTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  WriteMos(table, out);
}

}  // namespace finevq::subjective
