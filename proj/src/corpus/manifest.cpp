#include "finevq/corpus/manifest.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "finevq/error.hpp"
#include "json.hpp"

namespace finevq::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

bool IsKnownCategory(std::string_view c) {
  return std::find(std::begin(kCategories), std::end(kCategories), c) !=
         std::end(kCategories);
}

namespace {

template <typename T>
T Required(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key)) {
    throw ValidationError("manifest line " + std::to_string(line) +
                          ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("manifest line " + std::to_string(line) +
                          ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

std::vector<VideoManifestEntry> ParseManifest(std::string_view text,
                                              const fs::path& base) {
  std::vector<VideoManifestEntry> out;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError("manifest line " + std::to_string(lineno) +
                            ": parse error: " + e.what());
    }
    if (!j.is_object()) {
      throw ValidationError("manifest line " + std::to_string(lineno) +
                            ": expected an object");
    }
    VideoManifestEntry e;
    e.video_id = Required<std::string>(j, "video_id", lineno);
    fs::path fp = Required<std::string>(j, "frames_path", lineno);
    e.frames_path = fp.is_absolute() || base.empty() ? fp : base / fp;
    e.category = j.value("category", std::string("daily-life"));
    if (!IsKnownCategory(e.category)) {
      throw ValidationError("manifest line " + std::to_string(lineno) +
                            ": unknown category '" + e.category + "'");
    }
    const std::string form = j.value("form", std::string("landscape"));
    if (form == "landscape") {
      e.form = VideoForm::kLandscape;
    } else if (form == "portrait") {
      e.form = VideoForm::kPortrait;
    } else {
      throw ValidationError("manifest line " + std::to_string(lineno) +
                            ": unknown form '" + form + "'");
    }
    e.width = Required<int>(j, "width", lineno);
    e.height = Required<int>(j, "height", lineno);
    e.fps = Required<double>(j, "fps", lineno);
    e.duration = Required<double>(j, "duration", lineno);
    const auto count = Required<long long>(j, "frame_count", lineno);
    if (e.width <= 0 || e.height <= 0 || !(e.fps > 0) || !(e.duration > 0)) {
      throw ValidationError("manifest line " + std::to_string(lineno) +
                            ": width, height, fps, duration must be positive");
    }
    if (count < 1) {
      throw ValidationError("manifest line " + std::to_string(lineno) +
                            ": frame_count must be >= 1");
    }
    e.frame_count = static_cast<std::size_t>(count);
    if (!seen.insert(e.video_id).second) {
      throw ValidationError("manifest line " + std::to_string(lineno) +
                            ": duplicate video_id '" + e.video_id + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<VideoManifestEntry> LoadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("cannot open manifest '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseManifest(ss.str(), path.parent_path());
}

std::string SerializeManifestEntry(const VideoManifestEntry& e,
                                   const fs::path& base) {
  nlohmann::ordered_json j;
  j["video_id"] = e.video_id;
  j["frames_path"] =
      base.empty() ? e.frames_path.string()
                   : e.frames_path.lexically_relative(base).string();
  j["category"] = e.category;
  j["form"] = e.form == VideoForm::kLandscape ? "landscape" : "portrait";
  j["width"] = e.width;
  j["height"] = e.height;
  j["fps"] = e.fps;
  j["duration"] = e.duration;
  j["frame_count"] = e.frame_count;
  return j.dump();
}

// --- PNG -------------------------------------------------------------------

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::string PngFrameName(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu.png", i);
  return buf;
}

std::uint8_t ToByte(double v) {
  return static_cast<std::uint8_t>(
      std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

Frame ReadPng(const fs::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw RuntimeError("cannot read frame '" + path.string() + "'");
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw RuntimeError("libpng init failed");
  }
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> buffer;
  Frame frame;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw RuntimeError("corrupt PNG '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_packing(png);
  png_set_expand(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const auto w = png_get_image_width(png, info);
  const auto h = png_get_image_height(png, info);
  const auto rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != static_cast<std::size_t>(w) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw RuntimeError("unsupported PNG layout '" + path.string() + "'");
  }
  buffer.resize(rowbytes * h);
  rows.resize(h);
  for (std::size_t r = 0; r < h; ++r) rows[r] = buffer.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  frame = Frame(h, w);
  for (std::size_t i = 0; i < buffer.size(); ++i) frame.rgb[i] = buffer[i] / 255.0;
  return frame;
}

void WritePng(const Frame& frame, const fs::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw RuntimeError("cannot write '" + path.string() + "'");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw RuntimeError("libpng init failed");
  }
  std::vector<std::uint8_t> buffer(frame.rgb.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) buffer[i] = ToByte(frame.rgb[i]);
  std::vector<png_bytep> rows(frame.height);
  for (std::size_t r = 0; r < frame.height; ++r) {
    rows[r] = buffer.data() + r * frame.width * 3;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw RuntimeError("PNG encode failed for '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(frame.width),
               static_cast<png_uint_32>(frame.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void WritePngSequence(const std::vector<Frame>& frames, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    WritePng(frames[i], dir / PngFrameName(i));
  }
}

// --- Y4M -------------------------------------------------------------------
// Supported: C444, C420 variants (chroma nearest-neighbour upsampled) and
// mono. YCbCr is treated as full-range BT.601.

namespace {

void YuvToRgb(double y, double cb, double cr, double* rgb) {
  const double u = cb - 128.0, v = cr - 128.0;
  rgb[0] = std::clamp((y + 1.402 * v) / 255.0, 0.0, 1.0);
  rgb[1] = std::clamp((y - 0.344136 * u - 0.714136 * v) / 255.0, 0.0, 1.0);
  rgb[2] = std::clamp((y + 1.772 * u) / 255.0, 0.0, 1.0);
}

}  // namespace

void WriteY4m(const std::vector<Frame>& frames, const fs::path& path, int fps) {
  if (frames.empty()) throw ValidationError("no frames to write");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  const auto h = frames[0].height, w = frames[0].width;
  out << "YUV4MPEG2 W" << w << " H" << h << " F" << fps
      << ":1 Ip A1:1 C444\n";
  std::vector<std::uint8_t> plane(h * w * 3);
  for (const Frame& f : frames) {
    for (std::size_t i = 0; i < h * w; ++i) {
      const double r = f.rgb[3 * i] * 255.0, g = f.rgb[3 * i + 1] * 255.0,
                   b = f.rgb[3 * i + 2] * 255.0;
      const double y = 0.299 * r + 0.587 * g + 0.114 * b;
      const double cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
      const double cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
      plane[i] = static_cast<std::uint8_t>(std::lround(std::clamp(y, 0.0, 255.0)));
      plane[h * w + i] =
          static_cast<std::uint8_t>(std::lround(std::clamp(cb, 0.0, 255.0)));
      plane[2 * h * w + i] =
          static_cast<std::uint8_t>(std::lround(std::clamp(cr, 0.0, 255.0)));
    }
    out << "FRAME\n";
    out.write(reinterpret_cast<const char*>(plane.data()),
              static_cast<std::streamsize>(plane.size()));
  }
  if (!out) throw RuntimeError("write failed for '" + path.string() + "'");
}

FrameReader::FrameReader(const fs::path& frames_path) : path_(frames_path) {
  std::error_code ec;
  if (!fs::exists(path_, ec)) {
    throw RuntimeError("frames not found at '" + path_.string() + "'");
  }
  if (fs::is_directory(path_)) {
    while (fs::exists(path_ / PngFrameName(count_))) ++count_;
    if (count_ == 0) {
      throw RuntimeError("no %06d.png frames in '" + path_.string() + "'");
    }
    return;
  }
  y4m_ = true;
  std::ifstream in(path_, std::ios::binary);
  std::string header;
  if (!in || !std::getline(in, header) || header.rfind("YUV4MPEG2", 0) != 0) {
    throw RuntimeError("not a YUV4MPEG2 file '" + path_.string() + "'");
  }
  header_bytes_ = header.size() + 1;
  std::istringstream tokens(header.substr(9));
  std::string tok;
  while (tokens >> tok) {
    switch (tok[0]) {
      case 'W':
        width_ = std::stoul(tok.substr(1));
        break;
      case 'H':
        height_ = std::stoul(tok.substr(1));
        break;
      case 'C':
        if (tok.rfind("C444", 0) == 0) {
          chroma_ = 444;
        } else if (tok.rfind("C420", 0) == 0) {
          chroma_ = 420;
        } else if (tok.rfind("Cmono", 0) == 0) {
          chroma_ = 0;
        } else {
          throw RuntimeError("unsupported Y4M colorspace " + tok);
        }
        break;
      default:
        break;
    }
  }
  if (width_ == 0 || height_ == 0) throw RuntimeError("Y4M header lacks size");
  std::size_t chroma_bytes = 0;
  if (chroma_ == 444) chroma_bytes = 2 * width_ * height_;
  if (chroma_ == 420) chroma_bytes = 2 * ((width_ + 1) / 2) * ((height_ + 1) / 2);
  // Frame headers are assumed to be bare "FRAME\n".
  frame_bytes_ = 6 + width_ * height_ + chroma_bytes;
  const auto size = fs::file_size(path_);
  count_ = (size - header_bytes_) / frame_bytes_;
  if (count_ == 0) throw RuntimeError("Y4M file has no frames");
}

Frame FrameReader::Read(std::size_t index) const {
  if (index >= count_) {
    throw RuntimeError("frame index " + std::to_string(index) + " out of range");
  }
  if (!y4m_) return ReadPng(path_ / PngFrameName(index));

  std::ifstream in(path_, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(header_bytes_ + index * frame_bytes_));
  std::string tag(6, '\0');
  in.read(tag.data(), 6);
  if (tag != "FRAME\n") throw RuntimeError("corrupt Y4M frame header");
  std::vector<std::uint8_t> data(frame_bytes_ - 6);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size()));
  if (!in) throw RuntimeError("truncated Y4M frame");

  Frame f(height_, width_);
  const std::size_t hw = width_ * height_;
  const std::size_t cw = (width_ + 1) / 2, chh = (height_ + 1) / 2;
  for (std::size_t r = 0; r < height_; ++r) {
    for (std::size_t c = 0; c < width_; ++c) {
      const double y = data[r * width_ + c];
      double cb = 128.0, cr = 128.0;
      if (chroma_ == 444) {
        cb = data[hw + r * width_ + c];
        cr = data[2 * hw + r * width_ + c];
      } else if (chroma_ == 420) {
        cb = data[hw + (r / 2) * cw + c / 2];
        cr = data[hw + cw * chh + (r / 2) * cw + c / 2];
      }
      YuvToRgb(y, cb, cr, &f.rgb[(r * width_ + c) * 3]);
    }
  }
  return f;
}

FrameClip SampleFrames(const VideoManifestEntry& entry, std::size_t n,
                       std::optional<std::size_t> resize_to) {
  FrameReader reader(entry.frames_path);
  FrameClip clip;
  clip.source_id = entry.video_id;
  clip.indices = UniformSampleIndices(entry.frame_count, n);
  clip.stride = n > 1 ? std::max<std::size_t>(
                            1, (entry.frame_count - 1 + (n - 1) / 2) / (n - 1))
                      : 1;
  for (std::size_t idx : clip.indices) {
    Frame f = reader.Read(std::min(idx, reader.frame_count() - 1));
    if (resize_to) f = ResizeFrame(f, *resize_to, *resize_to);
    clip.frames.push_back(std::move(f));
  }
  return clip;
}

FrameClip LoadAllFrames(const VideoManifestEntry& entry,
                        std::optional<std::size_t> resize_to) {
  FrameReader reader(entry.frames_path);
  FrameClip clip;
  clip.source_id = entry.video_id;
  const std::size_t count = std::min(entry.frame_count, reader.frame_count());
  for (std::size_t i = 0; i < count; ++i) {
    Frame f = reader.Read(i);
    if (resize_to) f = ResizeFrame(f, *resize_to, *resize_to);
    clip.frames.push_back(std::move(f));
    clip.indices.push_back(i);
  }
  return clip;
}

}  // namespace finevq::corpus
