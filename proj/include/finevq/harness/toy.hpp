#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "finevq/corpus/frame.hpp"
#include "finevq/dimension.hpp"
#include "finevq/subjective/attributes.hpp"
#include "finevq/subjective/ratings.hpp"

namespace finevq::harness {

// Procedural clips: drifting sinusoid textures with one distortion family
// applied at a severity k (0 = mildest, 7 = strongest for the training grid;
// fractional values interpolate).
enum class ToyFamily { kNoise, kBlur, kArtifact, kTemporal };
inline constexpr ToyFamily kToyFamilies[] = {ToyFamily::kNoise, ToyFamily::kBlur,
                                             ToyFamily::kArtifact, ToyFamily::kTemporal};

std::string_view ToString(ToyFamily f);
Dimension FamilyDimension(ToyFamily f);

struct ToyClip {
  std::string id;
  ToyFamily family = ToyFamily::kNoise;
  double severity = 0.0;
  std::vector<corpus::Frame> frames;
};

corpus::FrameClip AsClip(const ToyClip& c);

ToyClip MakeToyClip(const std::string& id, ToyFamily family, double severity,
                    std::size_t frames, std::size_t size, std::uint64_t seed);

// Planted scores, monotone decreasing in severity.
double PlantedOverall(ToyFamily f, double severity);
double PlantedFamilyMos(double severity);

struct ToyCorpusSpec {
  std::uint64_t seed = 1;
  std::vector<ToyFamily> families = {kToyFamilies, kToyFamilies + 4};
  std::vector<double> severities = {0, 1, 2, 3, 4, 5, 6, 7};
  // Per-family severity lists; a family listed here ignores `severities`.
  std::map<ToyFamily, std::vector<double>> family_severities;
  std::size_t frames = 16;
  std::size_t size = 32;
  std::string id_prefix = "toy";
};

struct ToyCorpus {
  std::vector<ToyClip> clips;
  subjective::MosTable mos;
  subjective::AttributeLabelSet labels;

  const ToyClip& Find(const std::string& id) const;
  std::vector<std::string> ids() const;
};

ToyCorpus MakeToyCorpus(const ToyCorpusSpec& spec);

// 32 training clips (4 families x 8 severities, 32x32, 16 frames).
ToyCorpusSpec AcceptanceTrainSpec(std::uint64_t seed = 1);
// 8 held-out clips with unseen content, two unseen severities per family
// staggered so the planted overall MOS values are spread over the range.
ToyCorpusSpec AcceptanceHeldOutSpec(std::uint64_t seed = 1);

}  // namespace finevq::harness
