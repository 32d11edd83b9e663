#include "qsan/embedding.hpp"

#include "qsan/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace qsan {

const RVec* EmbeddingTable::find(const std::string& token) const {
  const auto it = vectors.find(token);
  return it == vectors.end() ? nullptr : &it->second;
}

EmbeddingTable parse_embeddings(std::istream& in, Eigen::Index expected_dim) {
  EmbeddingTable table;
  table.dim = expected_dim;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;
    std::vector<double> values;
    std::string field;
    while (ls >> field) {
      try {
        size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size() || !std::isfinite(v)) throw std::invalid_argument(field);
        values.push_back(v);
      } catch (const std::exception&) {
        throw ParseError("embedding line " + std::to_string(line_no) + ": bad value '" + field +
                         "'");
      }
    }
    const auto n = static_cast<Eigen::Index>(values.size());
    // word2vec text files open with a "<count> <dim>" line.
    if (line_no == 1 && n == 1 && token.find_first_not_of("0123456789") == std::string::npos &&
        values[0] == std::floor(values[0])) {
      continue;
    }
    if (table.dim == 0) table.dim = n;
    if (n != table.dim || n == 0) {
      throw ParseError("embedding line " + std::to_string(line_no) + ": expected " +
                       std::to_string(table.dim) + " values, got " + std::to_string(n));
    }
    table.vectors[token] = Eigen::Map<const RVec>(values.data(), n);
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, Eigen::Index expected_dim) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file " + path.string());
  return parse_embeddings(in, expected_dim);
}

}  // namespace qsan
