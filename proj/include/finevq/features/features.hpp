#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "finevq/corpus/frame.hpp"
#include "finevq/corpus/manifest.hpp"
#include "finevq/tsv.hpp"

namespace finevq::features {

// Hasler-Suesstrunk colourfulness on 0..255 values:
// sqrt(var_rg + var_yb) + 0.3 sqrt(mean_rg^2 + mean_yb^2).
double Colorfulness(const corpus::Frame& frame);
// mean(Y) * 255 and std(Y) * 255, BT.601 luma.
double Brightness(const corpus::Frame& frame);
double Contrast(const corpus::Frame& frame);

struct MeanMax {
  double mean = 0.0;
  double max = 0.0;
};

// Per frame: population std of the Sobel magnitude of 255-scaled luma over
// interior pixels. Empty clip is a ValidationError.
MeanMax SpatialInformation(const corpus::FrameClip& clip);
// Per step: population std of Y_n - Y_{n-1} (255 scale). Single-frame clips
// give (0, 0).
MeanMax TemporalInformation(const corpus::FrameClip& clip);

struct FeatureVector {
  std::string video_id;
  double colorfulness = 0.0;
  double brightness = 0.0;
  double contrast = 0.0;
  MeanMax si;
  MeanMax ti;
};

// Frame-level features are averaged over the clip.
FeatureVector ExtractFeatures(const corpus::FrameClip& clip);

struct FeatureFailure {
  std::string video_id;
  std::string message;
};

struct FeatureTable {
  std::vector<FeatureVector> raw;
  std::vector<FeatureVector> normalized;  // per-column min-max; flat column -> 0
  std::vector<FeatureFailure> failures;
};

FeatureTable NormalizeFeatures(std::vector<FeatureVector> raw);

// Loads each video (optionally resized), extracts features in parallel over
// videos, and records per-video failures instead of aborting.
FeatureTable BuildFeatureTable(std::span<const corpus::VideoManifestEntry> manifest,
                               std::optional<std::size_t> resize_to = std::nullopt);

TsvTable FeaturesToTsv(std::span<const FeatureVector> rows);

}  // namespace finevq::features
