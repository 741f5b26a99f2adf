#include "finevq/harness/split.hpp"

#include <algorithm>
#include <set>

#include "finevq/error.hpp"

namespace finevq::harness {

std::uint64_t SplitRng::Next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitRng::Below(std::uint64_t bound) {
  const std::uint64_t limit = ~0ULL - (~0ULL % bound);
  std::uint64_t x;
  do {
    x = Next();
  } while (x >= limit);
  return x % bound;
}

namespace {

std::vector<std::string> Shuffled(std::span<const std::string> ids, std::uint64_t seed) {
  std::vector<std::string> v(ids.begin(), ids.end());
  std::sort(v.begin(), v.end());
  if (std::adjacent_find(v.begin(), v.end()) != v.end()) {
    throw ValidationError("duplicate video id in split input");
  }
  SplitRng rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.Below(i)]);
  return v;
}

}  // namespace

SplitPlan MakeSplit(std::span<const std::string> ids, std::uint64_t seed, SplitMode mode) {
  const std::size_t n = ids.size();
  const std::size_t min = mode == SplitMode::kTrainValTest ? 6 : 5;
  if (n < min) {
    throw ValidationError("corpus of " + std::to_string(n) + " videos is too small (need " +
                          std::to_string(min) + ")");
  }
  const auto v = Shuffled(ids, seed);
  SplitPlan p;
  p.seed = seed;
  p.mode = mode;
  const std::size_t minor = n / (mode == SplitMode::kTrainValTest ? 6 : 5);
  const std::size_t n_val = mode == SplitMode::kTrainValTest ? minor : 0;
  const std::size_t n_train = n - n_val - minor;
  p.train.assign(v.begin(), v.begin() + n_train);
  p.val.assign(v.begin() + n_train, v.begin() + n_train + n_val);
  p.test.assign(v.begin() + n_train + n_val, v.end());
  return p;
}

std::vector<SplitPlan> CrossValidationRounds(std::span<const std::string> ids,
                                             std::uint64_t seed, int rounds) {
  if (rounds < 2) throw ValidationError("cross-validation needs at least 2 rounds");
  if (ids.size() < static_cast<std::size_t>(rounds)) {
    throw ValidationError("corpus smaller than the number of rounds");
  }
  const auto v = Shuffled(ids, seed);
  const std::size_t slice = v.size() / rounds;
  std::vector<SplitPlan> out;
  for (int r = 0; r < rounds; ++r) {
    SplitPlan p;
    p.seed = seed;
    p.mode = SplitMode::kTrainTest;
    p.round = r;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const bool in_test = i >= r * slice && i < (r + 1) * slice;
      (in_test ? p.test : p.train).push_back(v[i]);
    }
    out.push_back(std::move(p));
  }
  return out;
}

double Median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median of nothing");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string SplitToTsv(const SplitPlan& plan) {
  std::string out = "video_id\tpart\n";
  for (const auto& id : plan.train) out += id + "\ttrain\n";
  for (const auto& id : plan.val) out += id + "\tval\n";
  for (const auto& id : plan.test) out += id + "\ttest\n";
  return out;
}

}  // namespace finevq::harness
