#include "finevq/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "finevq/error.hpp"
#include "json.hpp"

namespace finevq::model {

namespace {

constexpr char kMagic[8] = {'F', 'V', 'Q', 'C', 'K', 'P', 'T', '1'};
static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

template <typename T>
void Put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T Get(std::ifstream& in, const std::string& what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw ValidationError("truncated checkpoint while reading " + what);
  }
  return v;
}

std::string GetBytes(std::ifstream& in, std::size_t n, const std::string& what) {
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw ValidationError("truncated checkpoint while reading " + what);
  }
  return s;
}

}  // namespace

void SaveCheckpoint(const FineVqModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write checkpoint '" + path.string() + "'");
  nlohmann::ordered_json header;
  header["config"] = ConfigToText(model.config());
  header["vocab"] = model.vocab().words();
  const std::string h = header.dump();
  out.write(kMagic, sizeof(kMagic));
  Put<std::uint64_t>(out, h.size());
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  const auto& params = model.params().all();
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    Put<std::uint8_t>(out, 1);
    Put<std::uint8_t>(out, p->trainable ? 1 : 0);
    Put<std::uint32_t>(out, 2);
    Put<std::uint64_t>(out, p->value.rows());
    Put<std::uint64_t>(out, p->value.cols());
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw RuntimeError("failed writing checkpoint '" + path.string() + "'");
}

FineVqModel LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput("cannot open checkpoint '" + path.string() + "'");
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw ValidationError("'" + path.string() + "' is not a checkpoint (bad magic)");
  }
  const auto hlen = Get<std::uint64_t>(in, "header length");
  if (hlen > (1u << 24)) throw ValidationError("implausible checkpoint header length");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(GetBytes(in, hlen, "header"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed checkpoint header: ") + e.what());
  }
  const ModelConfig cfg = ParseConfigText(header.at("config").get<std::string>());
  FineVqModel model(cfg, Vocab(header.at("vocab").get<std::vector<std::string>>()));
  const auto count = Get<std::uint32_t>(in, "tensor count");
  if (count != model.params().size()) {
    throw ValidationError("checkpoint holds " + std::to_string(count) + " tensors, config needs " +
                          std::to_string(model.params().size()));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto nlen = Get<std::uint32_t>(in, "name length");
    const std::string name = GetBytes(in, nlen, "tensor name");
    const auto dtype = Get<std::uint8_t>(in, name + " dtype");
    Get<std::uint8_t>(in, name + " flags");
    const auto rank = Get<std::uint32_t>(in, name + " rank");
    if (dtype != 1 || rank != 2) throw ValidationError("unsupported tensor layout for " + name);
    const auto rows = Get<std::uint64_t>(in, name + " rows");
    const auto cols = Get<std::uint64_t>(in, name + " cols");
    nn::Param& p = model.params().Get(name);
    if (p.value.rows() != rows || p.value.cols() != cols) {
      throw ValidationError("tensor " + name + " has shape " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ", expected " + p.value.ShapeString());
    }
    if (!in.read(reinterpret_cast<char*>(p.value.data()),
                 static_cast<std::streamsize>(rows * cols * sizeof(double)))) {
      throw ValidationError("truncated checkpoint in tensor " + name);
    }
  }
  return model;
}

}  // namespace finevq::model
