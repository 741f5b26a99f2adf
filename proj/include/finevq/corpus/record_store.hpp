#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace finevq::corpus {

// On disk every record is one JSON object per line: {"type": ..., "ts": ...,
// <payload fields>}. `ts` is microseconds since the Unix epoch and never
// decreases along the file.
struct Record {
  std::string type;
  std::int64_t ts = 0;
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const Record& o) const {
    return type == o.type && ts == o.ts && payload == o.payload;
  }
};

struct Receipt {
  std::size_t index = 0;
  std::int64_t ts = 0;
};

struct CorruptRecord {
  std::size_t offset = 0;  // byte offset of the bad line
  std::size_t line = 0;    // 1-based
  std::string message;
};

struct ReplayResult {
  std::vector<Record> records;
  std::vector<CorruptRecord> corrupt;
};

std::string SerializeRecord(const Record& r);
// Throws ValidationError if the line is not a well-formed record.
Record ParseRecord(const std::string& line);

// Missing file replays as empty. Corrupt lines are reported and skipped.
ReplayResult ReplayStore(const std::filesystem::path& path);

// Append-only, single-writer record log. Append returns only after the line
// has been written and fsync'd.
class RecordStore {
 public:
  static RecordStore Open(const std::filesystem::path& path);

  RecordStore(RecordStore&&) noexcept;
  RecordStore& operator=(RecordStore&&) noexcept;
  RecordStore(const RecordStore&) = delete;
  RecordStore& operator=(const RecordStore&) = delete;
  ~RecordStore();

  // Throws RuntimeError on I/O failure; in that case no receipt is issued and
  // in-memory state is unchanged. `ts` defaults to the wall clock and is
  // raised to the previous timestamp if it would go backwards.
  Receipt Append(const std::string& type, const nlohmann::json& payload,
                 std::optional<std::int64_t> ts = std::nullopt);

  std::vector<Record> Snapshot() const;
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }
  const std::vector<CorruptRecord>& corrupt() const { return corrupt_; }

 private:
  RecordStore() = default;

  std::filesystem::path path_;
  int fd_ = -1;
  std::vector<Record> records_;
  std::vector<CorruptRecord> corrupt_;
  std::int64_t last_ts_ = 0;
  mutable std::mutex mu_;
};

std::int64_t NowMicros();

}  // namespace finevq::corpus
