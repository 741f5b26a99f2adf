#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "finevq/corpus/record_store.hpp"
#include "finevq/dimension.hpp"
#include "finevq/error.hpp"
#include "finevq/subjective/attributes.hpp"
#include "finevq/subjective/ratings.hpp"
#include "json.hpp"

namespace finevq::service {

// Study config (JSON):
//   {"study_id": "s1", "seed": 7, "subjects": ["a", "b"],
//    "manifest": "videos.jsonl"   or   "videos": ["v1", "v2"],
//    "store": "ratings.jsonl", "media_root": "media/"}
// Relative paths resolve against the config file's directory.
struct StudyConfig {
  std::string study_id = "study";
  std::uint64_t seed = 0;
  std::vector<std::string> subjects;
  std::vector<std::string> videos;
  // video_id -> path under media_root served at /media/...
  std::map<std::string, std::string> media;
  std::filesystem::path store;
  std::filesystem::path media_root;
};

StudyConfig LoadStudyConfig(const std::filesystem::path& path);

// Subject not registered in the study. Maps to HTTP 404.
class NotFound : public Error {
 public:
  explicit NotFound(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

// Payload validation failure carrying every failed field. Maps to HTTP 422.
class InvalidSubmission : public Error {
 public:
  explicit InvalidSubmission(std::vector<std::string> fields);
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  std::vector<std::string> fields_;
};

struct DimensionAttributes {
  std::vector<std::string> options;
  std::string other_text;
};

struct SubmittedRating {
  std::string subject_id;
  std::string video_id;
  std::array<int, kNumDimensions> scores{};
  // Distortion dimensions only; absent means no selection was made.
  std::map<Dimension, DimensionAttributes> attributes;
  std::int64_t client_ts = 0;
};

// Collects every violated rule before throwing InvalidSubmission.
SubmittedRating ParseSubmission(const nlohmann::json& body);
nlohmann::json SubmissionToJson(const SubmittedRating& r);

// Per-subject seeded shuffle; depends only on (seed, subject_id).
std::vector<std::string> AssignmentOrder(std::span<const std::string> videos,
                                         std::uint64_t seed, const std::string& subject_id);

// Latest-wins view of a record log: the last "rating" record per (subject,
// video) supersedes earlier ones. Rating records whose payload fails
// validation are skipped and described in `skipped`.
std::map<std::pair<std::string, std::string>, SubmittedRating> LatestRatings(
    std::span<const corpus::Record> records, std::vector<std::string>* skipped = nullptr);

// One row per (subject, video, dimension), sorted by subject, video, then
// dimension order; the exact table `subjective` ingests.
std::vector<subjective::RatingRecord> ExportRatings(std::span<const corpus::Record> records);
void WriteExportedRatings(std::span<const corpus::Record> records, std::ostream& out);
std::vector<subjective::AttributeSelection> ExportSelections(
    std::span<const corpus::Record> records);

class StudyService {
 public:
  StudyService(StudyConfig cfg, corpus::RecordStore store);

  const StudyConfig& config() const { return cfg_; }

  nlohmann::json Session(const std::string& subject_id) const;
  nlohmann::json NextTask(const std::string& subject_id) const;
  nlohmann::json Submit(const nlohmann::json& body);
  nlohmann::json Progress() const;

  std::vector<corpus::Record> Records() const { return store_.Snapshot(); }

 private:
  const std::vector<std::string>& Assignment(const std::string& subject_id) const;
  std::vector<std::string> CompletedBy(const std::string& subject_id,
                                       std::span<const corpus::Record> records) const;

  StudyConfig cfg_;
  corpus::RecordStore store_;
  std::map<std::string, std::vector<std::string>> assignments_;
};

// Task schema for one dimension: level words (worst first) and attribute
// options (three named types, "other", "none"; empty for overall).
nlohmann::json DimensionSchema(Dimension d);

}  // namespace finevq::service
