#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finevq/corpus/frame.hpp"

namespace finevq::corpus {

enum class VideoForm { kLandscape, kPortrait };

// On-demand and live-streaming content categories.
inline constexpr std::string_view kCategories[] = {
    "knowledge/news",   "music/dancing", "daily-life",
    "animation",        "fashion/entertainment",
    "animal",           "sport",       "game",
    "film/tv",          "mobile-game", "entertainment",
    "single-player-game", "online-game", "wild/daily",
    "virtual-streamer", "multi-person", "radio"};

bool IsKnownCategory(std::string_view c);

struct VideoManifestEntry {
  std::string video_id;
  std::filesystem::path frames_path;
  std::string category = "daily-life";
  VideoForm form = VideoForm::kLandscape;
  int width = 0;
  int height = 0;
  double fps = 0.0;
  double duration = 0.0;
  std::size_t frame_count = 0;
};

// One JSON object per line:
//   {"video_id": "v01", "frames_path": "v01/", "category": "animal",
//    "form": "landscape", "width": 640, "height": 360, "fps": 30,
//    "duration": 8, "frame_count": 240}
// Relative frames_path values resolve against the manifest's directory.
std::vector<VideoManifestEntry> LoadManifest(const std::filesystem::path& path);
std::vector<VideoManifestEntry> ParseManifest(std::string_view text,
                                              const std::filesystem::path& base);
std::string SerializeManifestEntry(const VideoManifestEntry& e,
                                   const std::filesystem::path& base = {});

// Frames come from either a directory of %06d.png files (numbered from 0) or
// an uncompressed YUV4MPEG2 (.y4m) file.
class FrameReader {
 public:
  explicit FrameReader(const std::filesystem::path& frames_path);

  std::size_t frame_count() const { return count_; }
  Frame Read(std::size_t index) const;

 private:
  std::filesystem::path path_;
  bool y4m_ = false;
  std::size_t count_ = 0;
  // Y4M layout.
  std::size_t width_ = 0, height_ = 0;
  std::size_t header_bytes_ = 0, frame_bytes_ = 0;
  int chroma_ = 420;  // 420, 444 or 0 (mono).
};

// Samples n frames uniformly (repeating when frame_count < n) and optionally
// resizes them. The manifest's frame_count is authoritative for indexing.
FrameClip SampleFrames(const VideoManifestEntry& entry, std::size_t n,
                       std::optional<std::size_t> resize_to = std::nullopt);

// Loads every frame of the video, optionally resized.
FrameClip LoadAllFrames(const VideoManifestEntry& entry,
                        std::optional<std::size_t> resize_to = std::nullopt);

// Writers used by tooling and tests.
void WritePng(const Frame& frame, const std::filesystem::path& path);
Frame ReadPng(const std::filesystem::path& path);
void WriteY4m(const std::vector<Frame>& frames, const std::filesystem::path& path,
              int fps = 30);
void WritePngSequence(const std::vector<Frame>& frames,
                      const std::filesystem::path& dir);

}  // namespace finevq::corpus
