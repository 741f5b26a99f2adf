#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace finevq::harness {

enum class SplitMode { kTrainValTest, kTrainTest };

struct SplitPlan {
  std::uint64_t seed = 0;
  SplitMode mode = SplitMode::kTrainValTest;
  int round = 0;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  bool operator==(const SplitPlan&) const = default;
};

// Deterministic for a seed on every platform (own generator and shuffle).
// Each minority part gets floor(n / 6) (4:1:1) or floor(n / 5) (4:1); the
// remainder goes to train. Ids are taken in sorted order before shuffling.
SplitPlan MakeSplit(std::span<const std::string> ids, std::uint64_t seed,
                    SplitMode mode = SplitMode::kTrainValTest);

// Multi-round 4:1 cross-validation over one shuffle: round r tests the r-th
// slice of floor(n / rounds) ids.
std::vector<SplitPlan> CrossValidationRounds(std::span<const std::string> ids,
                                             std::uint64_t seed, int rounds = 5);

double Median(std::vector<double> v);

// "train|val|test" TSV with columns video_id, part.
std::string SplitToTsv(const SplitPlan& plan);

// splitmix64-based generator with an unbiased bounded draw.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t Next();
  std::uint64_t Below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

}  // namespace finevq::harness
