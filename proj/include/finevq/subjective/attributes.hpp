#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "finevq/dimension.hpp"
#include "finevq/subjective/screening.hpp"

namespace finevq::subjective {

// One subject's attribute choices for one (video, dimension). `options`
// holds named distortion types, "other" and/or "none".
struct AttributeSelection {
  std::string subject_id;
  std::string video_id;
  Dimension dimension = Dimension::kOverall;
  std::vector<std::string> options;
  std::string other_text;
};

// Returns the list of violated rules (empty if valid): unknown option,
// "none" combined with anything, other_text present iff "other" chosen.
std::vector<std::string> ValidateSelection(Dimension d,
                                           std::span<const std::string> options,
                                           const std::string& other_text);

// Case-folded, trimmed, inner whitespace collapsed.
std::string NormalizeLabel(std::string_view s);

struct AggregatedLabels {
  std::vector<std::string> labels;  // named options first, then free text
  std::map<std::string, std::size_t> counts;
  std::size_t n_valid = 0;

  // Non-empty and not just {"none"}.
  bool HasDistortion() const;
};

class AttributeLabelSet {
 public:
  void Set(const std::string& video_id, Dimension d, AggregatedLabels labels);
  // Missing cells yield an empty label set.
  const AggregatedLabels& Get(const std::string& video_id, Dimension d) const;
  std::vector<std::string> videos() const;

 private:
  std::map<std::pair<std::string, Dimension>, AggregatedLabels> cells_;
};

// Strict majority: an option is kept iff count > n_valid / 2, where n_valid
// counts non-rejected subjects with a selection for the cell. Free-text
// "other" entries vote under their normalized text.
AttributeLabelSet AggregateAttributes(
    std::span<const AttributeSelection> selections,
    const std::map<std::string, SubjectRejection>& subjects = {});

// Columns: subject_id, video_id, dimension, options ('|' separated), other.
std::vector<AttributeSelection> ReadSelections(const std::filesystem::path& path);
void WriteSelections(std::span<const AttributeSelection> s, std::ostream& out);
// Columns: video_id, dimension, labels ('|' separated), n_valid.
void WriteLabels(const AttributeLabelSet& labels, std::ostream& out);
AttributeLabelSet ReadLabels(const std::filesystem::path& path);

}  // namespace finevq::subjective
