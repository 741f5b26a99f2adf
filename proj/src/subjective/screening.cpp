#include "finevq/subjective/screening.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "finevq/error.hpp"

namespace finevq::subjective {

namespace {

struct Moments {
  double mean = 0.0;
  double m2 = 0.0;  // population variance
  double sample_std = 0.0;
  double population_std = 0.0;
};

// Values are sorted first so results do not depend on input order.
Moments ComputeMoments(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  Moments m;
  const auto n = static_cast<double>(v.size());
  if (v.empty()) return m;
  double sum = 0.0;
  for (double x : v) sum += x;
  m.mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.m2 = ss / n;
  m.population_std = std::sqrt(m.m2);
  m.sample_std = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return m;
}

using CellKey = std::pair<std::string, Dimension>;

}  // namespace

double Kurtosis(std::span<const double> samples) {
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  const auto n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = (x - mean) * (x - mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  if (m2 <= 0.0) return 0.0;
  return m4 / (m2 * m2);
}

Gaussianity KurtosisClassify(std::span<const double> samples) {
  if (samples.size() < 2) {
    throw ValidationError("kurtosis needs at least 2 samples");
  }
  std::vector<double> v(samples.begin(), samples.end());
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; })) {
    return Gaussianity::kGaussian;
  }
  const double b2 = Kurtosis(samples);
  return (b2 >= 2.0 && b2 <= 4.0) ? Gaussianity::kGaussian
                                  : Gaussianity::kNonGaussian;
}

void FlagOutliers(std::vector<RatingRecord>& ratings) {
  std::map<CellKey, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    groups[{ratings[i].video_id, ratings[i].dimension}].push_back(i);
  }
  std::vector<const std::vector<std::size_t>*> work;
  work.reserve(groups.size());
  for (const auto& [key, idx] : groups) {
    if (idx.size() < 2) {
      throw ValidationError("group (" + key.first + ", " +
                            std::string(ToString(key.second)) +
                            ") has fewer than 2 ratings");
    }
    work.push_back(&idx);
  }

  const auto n_groups = static_cast<std::ptrdiff_t>(work.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t g = 0; g < n_groups; ++g) {
    const auto& idx = *work[static_cast<std::size_t>(g)];
    std::vector<double> values;
    values.reserve(idx.size());
    for (std::size_t i : idx) values.push_back(ratings[i].raw);
    const Moments m = ComputeMoments(values);
    const double k = KurtosisClassify(values) == Gaussianity::kGaussian
                         ? kGaussianStdMultiple
                         : kNonGaussianStdMultiple;
    const double bound = k * m.sample_std;
    for (std::size_t i : idx) {
      ratings[i].outlier =
          m.sample_std > 0.0 && std::abs(ratings[i].raw - m.mean) > bound;
    }
  }
}

std::map<std::string, SubjectRejection> RejectSubjects(
    std::span<const RatingRecord> flagged) {
  std::map<std::string, SubjectRejection> out;
  for (const auto& r : flagged) {
    auto& s = out[r.subject_id];
    ++s.total;
    s.flagged += r.outlier;
  }
  for (auto& [_, s] : out) {
    s.outlier_fraction = static_cast<double>(s.flagged) / static_cast<double>(s.total);
    // Integer form of flagged / total > 0.05.
    s.rejected = s.flagged * 20 > s.total;
  }
  return out;
}

std::vector<RatingRecord> ValidRatings(
    std::span<const RatingRecord> flagged,
    const std::map<std::string, SubjectRejection>& subjects) {
  std::vector<RatingRecord> out;
  for (const auto& r : flagged) {
    if (r.outlier) continue;
    auto it = subjects.find(r.subject_id);
    if (it != subjects.end() && it->second.rejected) continue;
    out.push_back(r);
  }
  return out;
}

std::vector<SubjectStats> ComputeSubjectStats(
    std::span<const RatingRecord> valid,
    const std::map<std::string, SubjectRejection>& subjects) {
  std::map<CellKey, std::vector<double>> per;
  for (const auto& r : valid) per[{r.subject_id, r.dimension}].push_back(r.raw);
  std::vector<SubjectStats> out;
  for (const auto& [subject, rej] : subjects) {
    for (Dimension d : kAllDimensions) {
      auto it = per.find({subject, d});
      if (it == per.end() && !rej.rejected) continue;
      SubjectStats s;
      s.subject_id = subject;
      s.dimension = d;
      s.outlier_fraction = rej.outlier_fraction;
      s.rejected = rej.rejected;
      if (it != per.end()) {
        const Moments m = ComputeMoments(it->second);
        s.mean = m.mean;
        s.std = m.population_std;
      }
      out.push_back(s);
    }
  }
  return out;
}

double RescaleZ(double z) { return std::clamp((z + 3.0) / 6.0, 0.0, 1.0) * 100.0; }

std::vector<RescaledScore> ZScoreAndRescale(std::span<const RatingRecord> valid) {
  std::map<CellKey, std::vector<double>> per;
  for (const auto& r : valid) per[{r.subject_id, r.dimension}].push_back(r.raw);
  std::map<CellKey, Moments> moments;
  for (auto& [key, v] : per) moments[key] = ComputeMoments(std::move(v));

  std::vector<RescaledScore> out;
  out.reserve(valid.size());
  for (const auto& r : valid) {
    const Moments& m = moments.at({r.subject_id, r.dimension});
    RescaledScore s;
    s.subject_id = r.subject_id;
    s.video_id = r.video_id;
    s.dimension = r.dimension;
    s.z = m.population_std > 0.0 ? (r.raw - m.mean) / m.population_std : 0.0;
    s.rescaled = RescaleZ(s.z);
    out.push_back(std::move(s));
  }
  return out;
}

MosTable AggregateMos(std::span<const RescaledScore> scores,
                      std::span<const std::string> required_videos) {
  std::map<CellKey, std::vector<double>> cells;
  for (const auto& s : scores) cells[{s.video_id, s.dimension}].push_back(s.rescaled);
  MosTable table;
  for (auto& [key, v] : cells) {
    const std::size_t n = v.size();
    const Moments m = ComputeMoments(std::move(v));
    table.Set(key.first, key.second,
              MosCell{std::clamp(m.mean, 0.0, 100.0), m.sample_std, n});
  }
  for (const auto& video : required_videos) {
    for (Dimension d : kAllDimensions) {
      if (!table.Has(video, d)) {
        throw ValidationError("no valid ratings for cell (" + video + ", " +
                              std::string(ToString(d)) + ")");
      }
    }
  }
  return table;
}

namespace {

void CheckUnique(std::span<const RatingRecord> ratings) {
  std::set<std::tuple<std::string, std::string, Dimension>> seen;
  for (const auto& r : ratings) {
    if (!seen.insert({r.subject_id, r.video_id, r.dimension}).second) {
      throw ValidationError("duplicate rating for subject '" + r.subject_id +
                            "', video '" + r.video_id + "', dimension " +
                            std::string(ToString(r.dimension)));
    }
  }
}

}  // namespace

MosPipelineResult RunMosFromFlags(std::vector<RatingRecord> flagged) {
  CheckUnique(flagged);
  MosPipelineResult res;
  res.flagged = std::move(flagged);
  res.subjects = RejectSubjects(res.flagged);
  const auto valid = ValidRatings(res.flagged, res.subjects);
  res.removed_ratings = res.flagged.size() - valid.size();
  res.subject_stats = ComputeSubjectStats(valid, res.subjects);
  res.scores = ZScoreAndRescale(valid);

  std::set<CellKey> cells;
  for (const auto& r : res.flagged) cells.insert({r.video_id, r.dimension});
  res.mos = AggregateMos(res.scores);
  for (const auto& [video, d] : cells) {
    if (!res.mos.Has(video, d)) {
      throw ValidationError("no valid ratings left for cell (" + video + ", " +
                            std::string(ToString(d)) + ")");
    }
  }
  return res;
}

MosPipelineResult RunMosPipeline(std::vector<RatingRecord> ratings) {
  CheckUnique(ratings);
  FlagOutliers(ratings);
  return RunMosFromFlags(std::move(ratings));
}

}  // namespace finevq::subjective
