#pragma once

#include "qsan/model.hpp"

#include <filesystem>
#include <iosfwd>

namespace qsan {

inline constexpr char kCheckpointMagic[9] = "QSANCKPT";
inline constexpr int kCheckpointVersion = 1;

// Layout: 8-byte magic "QSANCKPT", a one-line JSON header terminated by '\n'
// (format version, config, vocabulary, and per tensor its name, shape,
// complex flag and byte offset into the payload), then the payload of
// little-endian float64 values. Each tensor is stored row-major, real plane
// first and, for complex tensors, the imaginary plane after it.
void write_checkpoint(std::ostream& out, const Model& model);
Model read_checkpoint(std::istream& in);

void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace qsan
