#pragma once

#include "qsan/attention.hpp"
#include "qsan/corpus.hpp"
#include "qsan/embedding.hpp"
#include "qsan/graph.hpp"
#include "qsan/params.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace qsan {

enum class EmbeddingMode { complex, real };
enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  int d = 16;
  int k = 8;
  int z = 16;
  int max_tokens = 32;
  int max_sentences = 8;
  int max_comments = 32;
  double learning_rate = 1e-3;
  int epochs = 20;
  std::uint64_t seed = 0;
  AttentionMode attention_mode = AttentionMode::signed_attention;
  EmbeddingMode embedding_mode = EmbeddingMode::complex;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  int classifier_width() const;

  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig from_json(const nlohmann::json& j, TrainConfig base);
  static TrainConfig from_json(const nlohmann::json& j);

  bool operator==(const TrainConfig&) const = default;
};

inline TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  return from_json(j, TrainConfig{});
}

std::string to_string(AttentionMode m);
std::string to_string(EmbeddingMode m);
std::string to_string(OptimizerKind k);
AttentionMode parse_attention_mode(const std::string& s);
EmbeddingMode parse_embedding_mode(const std::string& s);
OptimizerKind parse_optimizer(const std::string& s);

struct Vocabulary {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> index;

  int add(const std::string& token);
  int find(const std::string& token) const;  // -1 when absent
  size_t size() const { return tokens.size(); }
};

// Token ids of one sentence or comment. Out-of-vocabulary tokens use negative
// ids -j-1 that select row j of the extra (constant) rows.
struct EncodedText {
  std::vector<int> ids;
  RMat extra_amplitude;
  RMat extra_phase;
};

struct EncodedExample {
  std::vector<EncodedText> sentences;
  std::vector<EncodedText> comments;
};

struct Prediction {
  int label = 0;
  double p_false = 0.0;
  AttentionBundle bundle;
};

// Parameter names.
namespace pname {
inline constexpr const char* amplitude = "embedding.amplitude";
inline constexpr const char* phase = "embedding.phase";
inline constexpr const char* logits = "mixture.logits";
inline constexpr const char* w_s = "attention.w_s";
inline constexpr const char* w_c = "attention.w_c";
inline constexpr const char* s_pos = "attention.s_pos";
inline constexpr const char* s_neg = "attention.s_neg";
inline constexpr const char* c_pos = "attention.c_pos";
inline constexpr const char* c_neg = "attention.c_neg";
inline constexpr const char* states = "measurement.states";
inline constexpr const char* weight = "classifier.weight";
inline constexpr const char* bias = "classifier.bias";
std::string gru(const char* stream, const char* tensor);
}  // namespace pname

class Model {
 public:
  struct Forward {
    Var logits;  // 1 x 2, index 0 = false
    Var loss;    // invalid when no label was given
    graph_attention::Output attention;
  };

  Model(TrainConfig config, Vocabulary vocab, ParamStore params);

  // Fresh parameters for a vocabulary built from `corpus`, seeded by
  // config.seed. Tokens found in `pretrained` take their amplitude from it.
  static Model initialize(const TrainConfig& config, const std::vector<CorpusExample>& corpus,
                          const EmbeddingTable* pretrained = nullptr);

  const TrainConfig& config() const { return config_; }
  TrainConfig& config() { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const ParamStore& params() const { return params_; }
  ParamStore& params() { return params_; }

  // Applies the sentence/comment/token caps. Throws if the post or the
  // comment list is empty.
  EncodedExample encode(const CorpusExample& example) const;

  Forward forward(Graph& g, const EncodedExample& example,
                  std::optional<int> label = std::nullopt) const;

  Prediction predict(const CorpusExample& example) const;
  Prediction predict(const EncodedExample& example) const;

  // Deterministic per-token initial vectors used for out-of-vocabulary words.
  RVec oov_amplitude(const std::string& token) const;
  RVec oov_phase(const std::string& token) const;

 private:
  EncodedText encode_text(const std::string& text) const;

  TrainConfig config_;
  Vocabulary vocab_;
  ParamStore params_;
};

}  // namespace qsan
