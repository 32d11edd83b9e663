#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qsan {

// One post (already split into sentences), its comments, and its label
// (1 = false information, 0 = true).
struct CorpusExample {
  std::string id;
  int label = 0;
  std::vector<std::string> post;
  std::vector<std::string> comments;

  bool operator==(const CorpusExample&) const = default;
};

struct LoadError {
  size_t line = 0;
  std::string message;
};

struct LoadResult {
  std::vector<CorpusExample> examples;
  std::vector<LoadError> errors;
};

// Line-delimited records {"id", "label", "post": [...], "comments": [...]}.
// Blank lines are skipped; malformed lines are reported and skipped.
LoadResult parse_corpus(std::istream& in);
// Throws IoError when the file cannot be opened.
LoadResult load_corpus(const std::filesystem::path& path);

nlohmann::json to_json(const CorpusExample& example);
void write_corpus(const std::filesystem::path& path, const std::vector<CorpusExample>& corpus);

struct DropReport {
  size_t posts_in = 0;
  size_t posts_out = 0;
  size_t comments_in = 0;
  size_t comments_out = 0;
  size_t duplicate_comments = 0;
  size_t short_comments = 0;
  size_t sparse_posts = 0;

  nlohmann::json to_json() const;
  bool operator==(const DropReport&) const = default;
};

struct PreprocessResult {
  std::vector<CorpusExample> corpus;
  DropReport report;
};

inline constexpr size_t kMinCommentChars = 10;
inline constexpr size_t kMinComments = 3;

// Per post: drop duplicate comments (first kept), then comments shorter than
// 10 characters, then the post itself if fewer than 3 comments remain.
PreprocessResult preprocess(std::vector<CorpusExample> corpus);

// Number of user-visible characters in UTF-8 text. Combining marks,
// variation selectors, emoji modifiers and zero-width-joiner sequences attach
// to the preceding character; a regional-indicator pair counts once.
size_t character_count(std::string_view utf8);

// Lowercase, whitespace split, ASCII punctuation stripped at token edges.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace qsan
