#pragma once

#include "qsan/corpus.hpp"

#include <cstdint>
#include <vector>

namespace qsan::synthetic {

// Class-0 posts and comments draw their words from one pool, class-1 from a
// disjoint pool. Labels alternate 0, 1, 0, ...
std::vector<CorpusExample> separable_corpus(size_t count, std::uint64_t seed);

struct PlantedExample {
  CorpusExample example;
  std::vector<bool> supporting;  // per comment: reuses the post's words
};

// Half of each post's comments reuse words of the post (planted supporting),
// the other half come from a pool shared by both classes and disjoint from
// every post (planted opposing). Comment order is shuffled.
std::vector<PlantedExample> planted_stance_corpus(size_t count, std::uint64_t seed,
                                                  size_t comments_per_post = 6);

}  // namespace qsan::synthetic
