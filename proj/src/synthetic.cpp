#include "qsan/synthetic.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace qsan::synthetic {

namespace {

const std::vector<std::string> kPoolA = {
    "harbor", "lantern", "meadow", "orchard", "pebble", "quarry", "river", "saddle",
    "timber", "valley", "willow", "canyon", "marble", "thistle", "garden", "beacon"};
const std::vector<std::string> kPoolB = {
    "rocket", "signal", "vector", "plasma", "circuit", "turbine", "neutron", "quartz",
    "matrix", "photon", "reactor", "magnet", "cobalt", "sensor", "carbon", "fusion"};
const std::vector<std::string> kPoolOpposing = {
    "nonsense", "hoax", "fabricated", "bogus", "untrue", "debunked", "misleading", "rubbish",
    "fake", "denied", "wrong", "doubtful"};

std::string words(const std::vector<std::string>& pool, size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
  std::string out;
  for (size_t i = 0; i < n; ++i) {
    if (i > 0) out += ' ';
    out += pool[pick(rng)];
  }
  return out;
}

size_t between(size_t lo, size_t hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<size_t>(lo, hi)(rng);
}

}  // namespace

std::vector<CorpusExample> separable_corpus(size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CorpusExample> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    CorpusExample ex;
    ex.id = "sep-" + std::to_string(i);
    ex.label = static_cast<int>(i % 2);
    const auto& pool = ex.label == 0 ? kPoolA : kPoolB;
    const size_t n = between(1, 3, rng);
    for (size_t s = 0; s < n; ++s) ex.post.push_back(words(pool, between(4, 7, rng), rng) + ".");
    const size_t t = between(3, 5, rng);
    for (size_t c = 0; c < t; ++c) ex.comments.push_back(words(pool, between(3, 6, rng), rng));
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<PlantedExample> planted_stance_corpus(size_t count, std::uint64_t seed,
                                                  size_t comments_per_post) {
  std::mt19937_64 rng(seed);
  std::vector<PlantedExample> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    PlantedExample pe;
    CorpusExample& ex = pe.example;
    ex.id = "planted-" + std::to_string(i);
    ex.label = static_cast<int>(i % 2);
    const auto& pool = ex.label == 0 ? kPoolA : kPoolB;

    std::vector<std::string> post_words;
    for (size_t s = 0; s < 2; ++s) {
      std::string sentence = words(pool, 5, rng);
      ex.post.push_back(sentence + ".");
      size_t start = 0;
      while (start < sentence.size()) {
        const size_t end = std::min(sentence.find(' ', start), sentence.size());
        post_words.push_back(sentence.substr(start, end - start));
        start = end + 1;
      }
    }

    std::vector<std::pair<std::string, bool>> comments;
    const size_t supporting = comments_per_post / 2;
    for (size_t c = 0; c < comments_per_post; ++c) {
      if (c < supporting) {
        comments.emplace_back(words(post_words, 4, rng), true);
      } else {
        comments.emplace_back(words(kPoolOpposing, 4, rng), false);
      }
    }
    std::shuffle(comments.begin(), comments.end(), rng);
    for (auto& [text, flag] : comments) {
      ex.comments.push_back(std::move(text));
      pe.supporting.push_back(flag);
    }
    out.push_back(std::move(pe));
  }
  return out;
}

}  // namespace qsan::synthetic
