#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finevq/dimension.hpp"

namespace finevq::subjective {

struct RatingRecord {
  std::string subject_id;
  std::string video_id;
  Dimension dimension = Dimension::kOverall;
  int raw = 3;  // 1..5
  bool outlier = false;

  bool operator==(const RatingRecord&) const = default;
};

// Columns: subject_id, video_id, dimension, raw [, outlier].
std::vector<RatingRecord> ReadRatings(const std::filesystem::path& path);
std::vector<RatingRecord> ParseRatings(std::istream& in, const std::string& source);
void WriteRatings(std::span<const RatingRecord> ratings,
                  const std::filesystem::path& path, bool with_flags);
void WriteRatings(std::span<const RatingRecord> ratings, std::ostream& out,
                  bool with_flags);

struct MosCell {
  double mos = 0.0;
  double std = 0.0;
  std::size_t n_valid = 0;

  bool operator==(const MosCell&) const = default;
};

// Per (video, dimension) MOS. Videos iterate in lexicographic id order.
class MosTable {
 public:
  void Set(const std::string& video_id, Dimension d, MosCell cell);
  bool Has(const std::string& video_id, Dimension d) const;
  // Throws ValidationError naming the missing cell.
  const MosCell& Get(const std::string& video_id, Dimension d) const;

  std::vector<std::string> videos() const;
  std::size_t cell_count() const;
  // MOS values of one dimension in videos() order; throws on a missing cell.
  std::vector<double> Column(Dimension d) const;

  bool operator==(const MosTable&) const = default;

 private:
  std::map<std::string, std::array<std::optional<MosCell>, kNumDimensions>> cells_;
};

// Columns: video_id, dimension, mos, std, n_valid.
MosTable ReadMos(const std::filesystem::path& path);
void WriteMos(const MosTable& table, const std::filesystem::path& path);
void WriteMos(const MosTable& table, std::ostream& out);

}  // namespace finevq::subjective
