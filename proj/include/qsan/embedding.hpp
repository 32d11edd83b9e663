#pragma once

#include "qsan/cmat.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>

namespace qsan {

// Pretrained amplitude vectors: one "token v1 ... vd" entry per line.
struct EmbeddingTable {
  Eigen::Index dim = 0;
  std::unordered_map<std::string, RVec> vectors;

  const RVec* find(const std::string& token) const;
};

// `expected_dim` of 0 accepts whatever width the first entry has.
EmbeddingTable parse_embeddings(std::istream& in, Eigen::Index expected_dim = 0);
EmbeddingTable load_embeddings(const std::filesystem::path& path, Eigen::Index expected_dim = 0);

}  // namespace qsan
