#include "finevq/corpus/record_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>

#include "finevq/error.hpp"

namespace finevq::corpus {

std::int64_t NowMicros() {
  using namespace std::chrono;
  return duration_cast<microseconds>(system_clock::now().time_since_epoch())
      .count();
}

std::string SerializeRecord(const Record& r) {
  nlohmann::ordered_json j;
  j["type"] = r.type;
  j["ts"] = r.ts;
  for (auto it = r.payload.begin(); it != r.payload.end(); ++it) {
    j[it.key()] = it.value();
  }
  return j.dump();
}

Record ParseRecord(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed record: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("record is not an object");
  if (!j.contains("type") || !j["type"].is_string()) {
    throw ValidationError("record lacks string field 'type'");
  }
  if (!j.contains("ts") || !j["ts"].is_number_integer()) {
    throw ValidationError("record lacks integer field 'ts'");
  }
  Record r;
  r.type = j["type"].get<std::string>();
  r.ts = j["ts"].get<std::int64_t>();
  j.erase("type");
  j.erase("ts");
  r.payload = std::move(j);
  return r;
}

ReplayResult ReplayStore(const std::filesystem::path& path) {
  ReplayResult out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  std::size_t offset = 0, lineno = 0;
  std::int64_t last_ts = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t this_offset = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    try {
      Record r = ParseRecord(line);
      if (r.ts < last_ts) throw ValidationError("timestamp goes backwards");
      last_ts = r.ts;
      out.records.push_back(std::move(r));
    } catch (const Error& e) {
      out.corrupt.push_back({this_offset, lineno, e.what()});
    }
  }
  return out;
}

RecordStore RecordStore::Open(const std::filesystem::path& path) {
  RecordStore s;
  s.path_ = path;
  auto replay = ReplayStore(path);
  s.records_ = std::move(replay.records);
  s.corrupt_ = std::move(replay.corrupt);
  if (!s.records_.empty()) s.last_ts_ = s.records_.back().ts;
  s.fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (s.fd_ < 0) {
    throw RuntimeError("cannot open record store '" + path.string() +
                       "': " + std::strerror(errno));
  }
  // A torn last line (crash mid-write) is terminated so the next record
  // starts on a line of its own.
  std::ifstream tail(path, std::ios::binary | std::ios::ate);
  if (tail && tail.tellg() > 0) {
    tail.seekg(-1, std::ios::end);
    if (tail.get() != '\n') {
      if (::write(s.fd_, "\n", 1) != 1 || ::fsync(s.fd_) != 0) {
        throw RuntimeError("cannot repair record store '" + path.string() + "'");
      }
    }
  }
  return s;
}

RecordStore::RecordStore(RecordStore&& o) noexcept
    : path_(std::move(o.path_)),
      fd_(o.fd_),
      records_(std::move(o.records_)),
      corrupt_(std::move(o.corrupt_)),
      last_ts_(o.last_ts_) {
  o.fd_ = -1;
}

RecordStore& RecordStore::operator=(RecordStore&& o) noexcept {
  if (this != &o) {
    if (fd_ >= 0) ::close(fd_);
    path_ = std::move(o.path_);
    fd_ = o.fd_;
    records_ = std::move(o.records_);
    corrupt_ = std::move(o.corrupt_);
    last_ts_ = o.last_ts_;
    o.fd_ = -1;
  }
  return *this;
}

RecordStore::~RecordStore() {
  if (fd_ >= 0) ::close(fd_);
}

Receipt RecordStore::Append(const std::string& type,
                            const nlohmann::json& payload,
                            std::optional<std::int64_t> ts) {
  if (!payload.is_object()) throw ValidationError("payload must be an object");
  if (payload.contains("type") || payload.contains("ts")) {
    throw ValidationError("payload may not define 'type' or 'ts'");
  }
  std::lock_guard<std::mutex> lock(mu_);
  Record r;
  r.type = type;
  r.ts = std::max(ts.value_or(NowMicros()), last_ts_);
  r.payload = payload;
  const std::string line = SerializeRecord(r) + "\n";

  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw RuntimeError("record store write failed: " +
                         std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    throw RuntimeError("record store fsync failed: " +
                       std::string(std::strerror(errno)));
  }
  last_ts_ = r.ts;
  records_.push_back(std::move(r));
  return {records_.size() - 1, last_ts_};
}

std::vector<Record> RecordStore::Snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return records_;
}

std::size_t RecordStore::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return records_.size();
}

}  // namespace finevq::corpus
