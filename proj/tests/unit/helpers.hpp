#pragma once

#include "qsan/cmat.hpp"
#include "qsan/encoder.hpp"
#include "qsan/graph.hpp"
#include "qsan/ops.hpp"

#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace qsan::test {

inline RMat random_real(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  RMat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

inline CMat random_cmat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  RMat re = random_real(r, c, rng, scale);
  RMat im = random_real(r, c, rng, scale);
  return CMat(re, im);
}

inline WordState random_word(Eigen::Index d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  RVec r = random_real(d, 1, rng);
  RVec phi(d);
  for (auto& p : phi) p = angle(rng);
  return word_to_state(r, phi);
}

inline DensityMatrix random_rho(Eigen::Index d, size_t words, std::mt19937_64& rng) {
  std::vector<WordState> ws;
  for (size_t i = 0; i < words; ++i) ws.push_back(random_word(d, rng));
  return mixture(ws, random_real(static_cast<Eigen::Index>(words), 1, rng));
}

inline double max_abs(const ZMat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Reduces a node to a real scalar that depends on both planes of every entry.
inline Var probe(Var out, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xabcdefULL);
  Graph& g = *out.graph;
  const CMat& v = out.value();
  Var c = g.constant(random_cmat(v.rows(), v.cols(), rng));
  return ops::sum(ops::real_part(ops::hadamard(out, c)));
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("qsan_test_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace qsan::test
