#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace oracle {

using finevq::Dimension;
using finevq::subjective::RatingRecord;

std::vector<double> MidRanks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) ++less;
      if (w == v[i]) ++equal;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

double PearsonTwoPass(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double SpearmanByRanks(const std::vector<double>& x, const std::vector<double>& y) {
  return PearsonTwoPass(MidRanks(x), MidRanks(y));
}

double SpearmanClosedForm(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = MidRanks(x), ry = MidRanks(y);
  double d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double n = static_cast<double>(x.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

double KendallTauB(const std::vector<double>& x, const std::vector<double>& y) {
  double concordant = 0, discordant = 0, tie_x = 0, tie_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++tie_x;
      } else if (dy == 0) {
        ++tie_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  return (concordant - discordant) /
         std::sqrt((concordant + discordant + tie_x) * (concordant + discordant + tie_y));
}

double Kurtosis(const std::vector<double>& s) {
  double mean = 0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  double m2 = 0, m4 = 0;
  for (double v : s) {
    m2 += std::pow(v - mean, 2);
    m4 += std::pow(v - mean, 4);
  }
  m2 /= static_cast<double>(s.size());
  m4 /= static_cast<double>(s.size());
  return m2 == 0 ? 0.0 : m4 / (m2 * m2);
}

std::set<std::size_t> FlagIndices(const std::vector<RatingRecord>& ratings) {
  std::map<std::pair<std::string, Dimension>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    groups[{ratings[i].video_id, ratings[i].dimension}].push_back(i);
  }
  std::set<std::size_t> flagged;
  for (const auto& [key, idx] : groups) {
    std::vector<double> v;
    for (auto i : idx) v.push_back(ratings[i].raw);
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    if (sd == 0) continue;
    const double b2 = Kurtosis(v);
    const double k = (b2 >= 2 && b2 <= 4) ? 2.0 : std::sqrt(20.0);
    for (auto i : idx) {
      if (std::fabs(ratings[i].raw - mean) > k * sd) flagged.insert(i);
    }
  }
  return flagged;
}

PlantedStudy MakePlantedStudy(std::uint64_t seed, std::size_t subjects, std::size_t videos,
                              std::size_t bad_groups, std::size_t other_outliers) {
  if (subjects != 22) throw std::invalid_argument("templates assume 22 subjects");
  std::mt19937_64 rng(seed);
  PlantedStudy s;
  s.subjects = subjects;
  s.videos = videos;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < subjects; ++i) {
    ids.push_back("s" + std::string(i < 10 ? "0" : "") + std::to_string(i));
  }
  s.bad_subject = ids[0];

  const std::size_t groups = videos * finevq::kNumDimensions;
  std::vector<std::size_t> order(groups);
  for (std::size_t g = 0; g < groups; ++g) order[g] = g;
  std::shuffle(order.begin(), order.end(), rng);
  // group -> subject index carrying the outlier
  std::map<std::size_t, std::size_t> outlier_owner;
  std::size_t next = 0;
  for (std::size_t i = 0; i < bad_groups; ++i) outlier_owner[order[next++]] = 0;
  for (std::size_t i = 0; i < other_outliers; ++i) {
    outlier_owner[order[next++]] = 1 + i % (subjects - 1);
  }

  std::uniform_int_distribution<int> level(2, 4);
  for (std::size_t v = 0; v < videos; ++v) {
    const std::string vid = "v" + std::string(v < 10 ? "0" : "") + std::to_string(v);
    for (std::size_t d = 0; d < finevq::kNumDimensions; ++d) {
      const std::size_t g = v * finevq::kNumDimensions + d;
      const int l = level(rng);
      std::vector<int> values;
      for (int i = 0; i < 5; ++i) values.push_back(l - 1);
      for (int i = 0; i < 5; ++i) values.push_back(l + 1);
      auto it = outlier_owner.find(g);
      const bool has_outlier = it != outlier_owner.end();
      for (int i = 0; i < (has_outlier ? 11 : 12); ++i) values.push_back(l);
      std::shuffle(values.begin(), values.end(), rng);
      // values now hold 21 or 22 normal ratings for the other subjects.
      std::size_t cursor = 0;
      for (std::size_t sub = 0; sub < subjects; ++sub) {
        RatingRecord r;
        r.subject_id = ids[sub];
        r.video_id = vid;
        r.dimension = finevq::kAllDimensions[d];
        if (has_outlier && it->second == sub) {
          r.raw = l == 4 ? 2 : (l == 2 ? 4 : (rng() % 2 ? 5 : 1));
          s.outliers.insert({r.subject_id, vid, r.dimension});
        } else {
          r.raw = values[cursor++];
        }
        s.ratings.push_back(r);
      }
    }
  }
  return s;
}

finevq::nn::Matrix DenseLora(const finevq::nn::Matrix& w, const finevq::nn::Matrix& a,
                             const finevq::nn::Matrix& b, const finevq::nn::Matrix& x) {
  const std::size_t out = w.rows(), in = w.cols(), r = a.cols();
  finevq::nn::Matrix eff(out, in);
  for (std::size_t i = 0; i < out; ++i) {
    for (std::size_t j = 0; j < in; ++j) {
      double ab = 0;
      for (std::size_t k = 0; k < r; ++k) ab += a(i, k) * b(k, j);
      eff(i, j) = w(i, j) + ab;
    }
  }
  finevq::nn::Matrix y(x.rows(), out);
  for (std::size_t n = 0; n < x.rows(); ++n) {
    for (std::size_t i = 0; i < out; ++i) {
      double acc = 0;
      for (std::size_t j = 0; j < in; ++j) acc += eff(i, j) * x(n, j);
      y(n, i) = acc;
    }
  }
  return y;
}

finevq::nn::Matrix FiniteDifference(finevq::nn::Matrix& param,
                                    const std::function<double()>& f, double h) {
  finevq::nn::Matrix g(param.rows(), param.cols());
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double saved = param[i];
    param[i] = saved + h;
    const double up = f();
    param[i] = saved - h;
    const double down = f();
    param[i] = saved;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

double RelativeError(double analytic, double numeric, double floor) {
  const double scale = std::max({std::fabs(analytic), std::fabs(numeric), floor});
  return std::fabs(analytic - numeric) / scale;
}

}  // namespace oracle
