#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "finevq/subjective/ratings.hpp"

namespace finevq::subjective {

enum class Gaussianity { kGaussian, kNonGaussian };

// beta2 = m4 / m2^2 from central moments; 0 for zero-variance samples.
double Kurtosis(std::span<const double> samples);
// Gaussian iff 2 <= beta2 <= 4; zero variance counts as gaussian. Needs at
// least two samples.
Gaussianity KurtosisClassify(std::span<const double> samples);

inline constexpr double kGaussianStdMultiple = 2.0;
inline constexpr double kNonGaussianStdMultiple = 4.47213595499957939;  // sqrt(20)
inline constexpr double kRejectFraction = 0.05;

// Flags, per (video, dimension) group, ratings further than k sample standard
// deviations from the group mean (k = 2 gaussian, sqrt(20) otherwise).
// Every group needs at least two ratings. Existing flags are overwritten.
void FlagOutliers(std::vector<RatingRecord>& ratings);

struct SubjectRejection {
  std::size_t total = 0;
  std::size_t flagged = 0;
  double outlier_fraction = 0.0;
  bool rejected = false;  // outlier_fraction > 0.05
};

// Outlier fraction over each subject's ratings across all dimensions.
std::map<std::string, SubjectRejection> RejectSubjects(
    std::span<const RatingRecord> flagged);

// Ratings that survive: not flagged, subject not rejected.
std::vector<RatingRecord> ValidRatings(
    std::span<const RatingRecord> flagged,
    const std::map<std::string, SubjectRejection>& subjects);

struct SubjectStats {
  std::string subject_id;
  Dimension dimension = Dimension::kOverall;
  double mean = 0.0;
  double std = 0.0;  // population std over surviving ratings
  double outlier_fraction = 0.0;
  bool rejected = false;
};

// Per (subject, dimension) moments over `valid`, annotated with the
// subject-level rejection outcome. Rejected subjects appear with zero
// moments.
std::vector<SubjectStats> ComputeSubjectStats(
    std::span<const RatingRecord> valid,
    const std::map<std::string, SubjectRejection>& subjects);

struct RescaledScore {
  std::string subject_id;
  std::string video_id;
  Dimension dimension = Dimension::kOverall;
  double z = 0.0;
  double rescaled = 50.0;  // clamp((z + 3) / 6, 0, 1) * 100
};

double RescaleZ(double z);

// z = (m - mu_i) / sigma_i with per-subject, per-dimension moments; sigma 0
// gives z = 0.
std::vector<RescaledScore> ZScoreAndRescale(std::span<const RatingRecord> valid);

// Mean and sample std of rescaled scores per cell. Throws if a cell listed in
// `required_videos` has no score.
MosTable AggregateMos(std::span<const RescaledScore> scores,
                      std::span<const std::string> required_videos = {});

struct MosPipelineResult {
  std::vector<RatingRecord> flagged;
  std::map<std::string, SubjectRejection> subjects;
  std::vector<SubjectStats> subject_stats;
  std::vector<RescaledScore> scores;
  MosTable mos;
  std::size_t removed_ratings = 0;  // flagged ratings plus rejected subjects'
};

// flag -> reject subjects -> drop -> per-subject stats -> z -> rescale -> MOS.
MosPipelineResult RunMosPipeline(std::vector<RatingRecord> ratings);

// Recomputes rejection from an already-flagged table and finishes the chain.
MosPipelineResult RunMosFromFlags(std::vector<RatingRecord> flagged);

}  // namespace finevq::subjective
