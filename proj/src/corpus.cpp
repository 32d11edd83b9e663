#include "qsan/corpus.hpp"

#include "qsan/errors.hpp"
#include "qsan/io_util.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <fstream>
#include <istream>
#include <unordered_set>

namespace qsan {

using nlohmann::json;

namespace {

std::vector<std::string> string_array(const json& record, const char* key) {
  const auto it = record.find(key);
  if (it == record.end()) throw ParseError(std::string("key '") + key + "': missing");
  if (!it->is_array()) throw ParseError(std::string("key '") + key + "': expected an array");
  std::vector<std::string> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw ParseError(std::string("key '") + key + "': expected an array of strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

CorpusExample parse_record(const std::string& line) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!record.is_object()) throw ParseError("record is not an object");

  CorpusExample ex;
  const auto id = record.find("id");
  if (id == record.end()) throw ParseError("key 'id': missing");
  if (id->is_string()) {
    ex.id = id->get<std::string>();
  } else if (id->is_number_integer()) {
    ex.id = std::to_string(id->get<long long>());
  } else {
    throw ParseError("key 'id': expected a string");
  }

  const auto label = record.find("label");
  if (label == record.end()) throw ParseError("key 'label': missing");
  if (!label->is_number_integer() || (label->get<long long>() != 0 && label->get<long long>() != 1)) {
    throw ParseError("key 'label': expected 0 or 1");
  }
  ex.label = static_cast<int>(label->get<long long>());
  ex.post = string_array(record, "post");
  ex.comments = string_array(record, "comments");
  return ex;
}

// Decodes one code point; invalid bytes decode as themselves, one byte each.
char32_t next_code_point(std::string_view s, size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](size_t k) {
    return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  auto byte = [&](size_t k) { return static_cast<char32_t>(static_cast<unsigned char>(s[i + k]) & 0x3F); };
  if (b0 < 0x80) {
    i += 1;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    const char32_t cp = (static_cast<char32_t>(b0 & 0x1F) << 6) | byte(1);
    i += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    const char32_t cp = (static_cast<char32_t>(b0 & 0x0F) << 12) | (byte(1) << 6) | byte(2);
    i += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    const char32_t cp = (static_cast<char32_t>(b0 & 0x07) << 18) | (byte(1) << 12) |
                        (byte(2) << 6) | byte(3);
    i += 4;
    return cp;
  }
  i += 1;
  return b0;
}

bool is_extend(char32_t cp) {
  return (cp >= 0x0300 && cp <= 0x036F) || (cp >= 0x1AB0 && cp <= 0x1AFF) ||
         (cp >= 0x1DC0 && cp <= 0x1DFF) || (cp >= 0x20D0 && cp <= 0x20FF) ||
         (cp >= 0xFE00 && cp <= 0xFE0F) || (cp >= 0xFE20 && cp <= 0xFE2F) ||
         (cp >= 0x1F3FB && cp <= 0x1F3FF) || (cp >= 0xE0020 && cp <= 0xE007F) ||
         (cp >= 0xE0100 && cp <= 0xE01EF) || cp == 0x200D;
}

bool is_regional_indicator(char32_t cp) { return cp >= 0x1F1E6 && cp <= 0x1F1FF; }

bool is_edge_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

}  // namespace

LoadResult parse_corpus(std::istream& in) {
  LoadResult result;
  std::string line;
  size_t line_no = 0;
  size_t nonblank = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++nonblank;
    try {
      result.examples.push_back(parse_record(line));
    } catch (const ParseError& e) {
      result.errors.push_back(LoadError{line_no, e.what()});
      spdlog::warn("corpus line {}: {}", line_no, e.what());
    }
  }
  if (nonblank == 0) spdlog::warn("corpus is empty");
  return result;
}

LoadResult load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path.string());
  return parse_corpus(in);
}

json to_json(const CorpusExample& example) {
  return json{{"id", example.id},
              {"label", example.label},
              {"post", example.post},
              {"comments", example.comments}};
}

void write_corpus(const std::filesystem::path& path, const std::vector<CorpusExample>& corpus) {
  write_file_atomic(path, [&](std::ostream& out) {
    for (const auto& ex : corpus) out << to_json(ex).dump() << '\n';
  });
}

json DropReport::to_json() const {
  return json{{"posts_in", posts_in},
              {"posts_out", posts_out},
              {"comments_in", comments_in},
              {"comments_out", comments_out},
              {"duplicate_comments", duplicate_comments},
              {"short_comments", short_comments},
              {"sparse_posts", sparse_posts}};
}

PreprocessResult preprocess(std::vector<CorpusExample> corpus) {
  PreprocessResult result;
  DropReport& r = result.report;
  r.posts_in = corpus.size();
  for (auto& ex : corpus) {
    r.comments_in += ex.comments.size();
    std::unordered_set<std::string> seen;
    std::vector<std::string> unique;
    for (auto& c : ex.comments) {
      if (seen.insert(c).second) {
        unique.push_back(std::move(c));
      } else {
        ++r.duplicate_comments;
      }
    }
    std::vector<std::string> kept;
    for (auto& c : unique) {
      if (character_count(c) < kMinCommentChars) {
        ++r.short_comments;
      } else {
        kept.push_back(std::move(c));
      }
    }
    if (kept.size() < kMinComments) {
      ++r.sparse_posts;
      continue;
    }
    ex.comments = std::move(kept);
    r.comments_out += ex.comments.size();
    result.corpus.push_back(std::move(ex));
  }
  r.posts_out = result.corpus.size();
  return result;
}

size_t character_count(std::string_view utf8) {
  size_t count = 0;
  size_t i = 0;
  bool join_next = false;
  bool open_flag = false;
  while (i < utf8.size()) {
    const char32_t cp = next_code_point(utf8, i);
    if (cp == 0x200D) {
      join_next = true;
      continue;
    }
    if (is_extend(cp)) continue;
    if (join_next && count > 0) {
      join_next = false;
      continue;
    }
    join_next = false;
    if (is_regional_indicator(cp)) {
      if (open_flag) {
        open_flag = false;
        continue;
      }
      open_flag = true;
    } else {
      open_flag = false;
    }
    ++count;
  }
  return count;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    size_t b = i, e = j;
    while (b < e && is_edge_punct(text[b])) ++b;
    while (e > b && is_edge_punct(text[e - 1])) --e;
    if (b < e) {
      std::string tok(text.substr(b, e - b));
      for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      tokens.push_back(std::move(tok));
    }
    i = j;
  }
  return tokens;
}

}  // namespace qsan
