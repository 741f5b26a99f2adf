#include "finevq/subjective/attributes.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "finevq/error.hpp"
#include "finevq/tsv.hpp"

namespace finevq::subjective {

std::string NormalizeLabel(std::string_view s) {
  std::string out;
  bool space = false;
  for (unsigned char c : Trim(s)) {
    if (std::isspace(c)) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::vector<std::string> ValidateSelection(Dimension d,
                                           std::span<const std::string> options,
                                           const std::string& other_text) {
  std::vector<std::string> errors;
  const auto named = AttributeOptions(d);
  bool has_none = false, has_other = false;
  std::set<std::string> seen;
  for (const auto& o : options) {
    if (!seen.insert(o).second) {
      errors.push_back(std::string(ToString(d)) + ": duplicate option '" + o + "'");
    }
    if (o == kOptionNone) {
      has_none = true;
    } else if (o == kOptionOther) {
      has_other = true;
    } else if (std::find(named.begin(), named.end(), o) == named.end()) {
      errors.push_back(std::string(ToString(d)) + ": unknown option '" + o + "'");
    }
  }
  if (has_none && options.size() > 1) {
    errors.push_back(std::string(ToString(d)) +
                     ": 'none' cannot be combined with other options");
  }
  const bool text = !NormalizeLabel(other_text).empty();
  if (has_other && !text) {
    errors.push_back(std::string(ToString(d)) + ": 'other' needs a description");
  }
  if (!has_other && text) {
    errors.push_back(std::string(ToString(d)) +
                     ": free text given without selecting 'other'");
  }
  return errors;
}

bool AggregatedLabels::HasDistortion() const {
  return !labels.empty() && !(labels.size() == 1 && labels[0] == kOptionNone);
}

void AttributeLabelSet::Set(const std::string& video_id, Dimension d,
                            AggregatedLabels labels) {
  cells_[{video_id, d}] = std::move(labels);
}

const AggregatedLabels& AttributeLabelSet::Get(const std::string& video_id,
                                               Dimension d) const {
  static const AggregatedLabels kEmpty;
  auto it = cells_.find({video_id, d});
  return it == cells_.end() ? kEmpty : it->second;
}

std::vector<std::string> AttributeLabelSet::videos() const {
  std::vector<std::string> out;
  for (const auto& [key, _] : cells_) {
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  }
  return out;
}

AttributeLabelSet AggregateAttributes(
    std::span<const AttributeSelection> selections,
    const std::map<std::string, SubjectRejection>& subjects) {
  struct Tally {
    std::set<std::string> voters;
    std::map<std::string, std::size_t> named;
    std::map<std::string, std::size_t> free_text;
  };
  std::map<std::pair<std::string, Dimension>, Tally> tallies;
  for (const auto& s : selections) {
    auto it = subjects.find(s.subject_id);
    if (it != subjects.end() && it->second.rejected) continue;
    auto errors = ValidateSelection(s.dimension, s.options, s.other_text);
    if (!errors.empty()) {
      throw ValidationError("selection of subject '" + s.subject_id +
                            "' for video '" + s.video_id + "': " + errors[0]);
    }
    Tally& t = tallies[{s.video_id, s.dimension}];
    if (!t.voters.insert(s.subject_id).second) {
      throw ValidationError("duplicate selection by subject '" + s.subject_id +
                            "' for video '" + s.video_id + "'");
    }
    for (const auto& o : s.options) {
      if (o == kOptionOther) {
        ++t.free_text[NormalizeLabel(s.other_text)];
      } else {
        ++t.named[o];
      }
    }
  }

  AttributeLabelSet out;
  for (auto& [key, t] : tallies) {
    AggregatedLabels agg;
    agg.n_valid = t.voters.size();
    auto keep = [&](std::size_t count) { return 2 * count > agg.n_valid; };
    const auto named = AttributeOptions(key.second);
    for (auto opt : named) {
      auto it = t.named.find(std::string(opt));
      if (it == t.named.end()) continue;
      agg.counts[it->first] = it->second;
      if (keep(it->second)) agg.labels.push_back(it->first);
    }
    if (auto it = t.named.find(std::string(kOptionNone)); it != t.named.end()) {
      agg.counts[it->first] = it->second;
      if (keep(it->second)) agg.labels.push_back(it->first);
    }
    for (const auto& [text, count] : t.free_text) {
      agg.counts[text] += count;
      if (keep(count)) agg.labels.push_back(text);
    }
    out.Set(key.first, key.second, std::move(agg));
  }
  return out;
}

namespace {

std::string JoinOptions(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += '|';
    s += v[i];
  }
  return s;
}

std::vector<std::string> SplitOptions(const std::string& s) {
  if (s.empty() || s == "-") return {};
  return SplitString(s, '|');
}

}  // namespace

std::vector<AttributeSelection> ReadSelections(const std::filesystem::path& path) {
  const TsvTable t = TsvTable::Read(path);
  std::vector<AttributeSelection> out;
  if (t.header().empty()) return out;
  const auto cs = t.Column("subject_id"), cv = t.Column("video_id"),
             cd = t.Column("dimension"), co = t.Column("options"),
             ct = t.Column("other");
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& row = t.row(i);
    AttributeSelection s;
    s.subject_id = row[cs];
    s.video_id = row[cv];
    auto d = ParseDimension(row[cd]);
    if (!d) {
      throw ValidationError(path.string() + ":" + std::to_string(t.line(i)) +
                            ": unknown dimension '" + row[cd] + "'");
    }
    s.dimension = *d;
    s.options = SplitOptions(row[co]);
    s.other_text = row[ct] == "-" ? "" : row[ct];
    out.push_back(std::move(s));
  }
  return out;
}

void WriteSelections(std::span<const AttributeSelection> sel, std::ostream& out) {
  TsvTable t({"subject_id", "video_id", "dimension", "options", "other"});
  for (const auto& s : sel) {
    t.AddRow({s.subject_id, s.video_id, std::string(ToString(s.dimension)),
              s.options.empty() ? "-" : JoinOptions(s.options),
              s.other_text.empty() ? "-" : s.other_text});
  }
  t.Write(out);
}

void WriteLabels(const AttributeLabelSet& labels, std::ostream& out) {
  TsvTable t({"video_id", "dimension", "labels", "n_valid"});
  for (const auto& v : labels.videos()) {
    for (Dimension d : kDistortionDimensions) {
      const auto& agg = labels.Get(v, d);
      if (agg.n_valid == 0) continue;
      t.AddRow({v, std::string(ToString(d)),
                agg.labels.empty() ? "-" : JoinOptions(agg.labels),
                std::to_string(agg.n_valid)});
    }
  }
  t.Write(out);
}

AttributeLabelSet ReadLabels(const std::filesystem::path& path) {
  const TsvTable t = TsvTable::Read(path);
  AttributeLabelSet out;
  if (t.header().empty()) return out;
  const auto cv = t.Column("video_id"), cd = t.Column("dimension"),
             cl = t.Column("labels"), cn = t.Column("n_valid");
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& row = t.row(i);
    AggregatedLabels agg;
    agg.labels = SplitOptions(row[cl]);
    agg.n_valid = static_cast<std::size_t>(ParseInt(row[cn], path.string()));
    out.Set(row[cv], DimensionFromString(row[cd]), std::move(agg));
  }
  return out;
}

}  // namespace finevq::subjective
