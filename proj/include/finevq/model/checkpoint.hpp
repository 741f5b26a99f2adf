#pragma once

#include <filesystem>

#include "finevq/model/finevq_model.hpp"

namespace finevq::model {

// Binary container, little-endian throughout:
//   "FVQCKPT1"
//   u64 header length, header bytes (JSON: {"config": "<key=value text>",
//                                           "vocab": [words...]})
//   u32 tensor count, then per tensor:
//     u32 name length, name bytes, u8 dtype (1 = f64), u8 trainable,
//     u32 rank (always 2), u64 rows, u64 cols, rows*cols f64 values
void SaveCheckpoint(const FineVqModel& model, const std::filesystem::path& path);
FineVqModel LoadCheckpoint(const std::filesystem::path& path);

}  // namespace finevq::model
