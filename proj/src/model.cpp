#include "qsan/model.hpp"

#include "qsan/encoder.hpp"
#include "qsan/errors.hpp"
#include "qsan/measurement.hpp"
#include "qsan/ops.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace qsan {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::mt19937_64 token_rng(const std::string& token, std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(fnv1a(token)),
                    static_cast<std::uint32_t>(fnv1a(token) >> 32),
                    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt)};
  return std::mt19937_64(seq);
}

constexpr const char* kEmptyToken = "<empty>";

const char* kGruTensors[] = {"wx", "wh", "bx", "bh"};

void add_gru(ParamStore& store, const char* stream, const GruWeights& w, bool trainable) {
  store.add(pname::gru(stream, "wx"), CMat(w.wx), false, trainable);
  store.add(pname::gru(stream, "wh"), CMat(w.wh), false, trainable);
  store.add(pname::gru(stream, "bx"), CMat(w.bx), false, trainable);
  store.add(pname::gru(stream, "bh"), CMat(w.bh), false, trainable);
}

graph_encoder::GruVars bind_gru(Graph& g, const ParamStore& store, const char* stream) {
  return {store.bind(g, pname::gru(stream, kGruTensors[0])),
          store.bind(g, pname::gru(stream, kGruTensors[1])),
          store.bind(g, pname::gru(stream, kGruTensors[2])),
          store.bind(g, pname::gru(stream, kGruTensors[3]))};
}

}  // namespace

std::string pname::gru(const char* stream, const char* tensor) {
  return std::string("gru_") + stream + "." + tensor;
}

// --- config -----------------------------------------------------------------

void TrainConfig::validate() const {
  auto positive = [](const char* name, double v) {
    if (!(v > 0)) throw std::invalid_argument(std::string("config: ") + name + " must be positive");
  };
  positive("d", d);
  positive("k", k);
  positive("z", z);
  positive("max_tokens", max_tokens);
  positive("max_sentences", max_sentences);
  positive("max_comments", max_comments);
  positive("learning_rate", learning_rate);
  if (epochs < 0) throw std::invalid_argument("config: epochs must be non-negative");
  if (!(beta1 >= 0 && beta1 < 1)) throw std::invalid_argument("config: beta1 must be in [0, 1)");
  if (!(beta2 >= 0 && beta2 < 1)) throw std::invalid_argument("config: beta2 must be in [0, 1)");
  positive("epsilon", epsilon);
}

int TrainConfig::classifier_width() const {
  return (attention_mode == AttentionMode::signed_attention ? 4 : 2) * z;
}

std::string to_string(AttentionMode m) {
  return m == AttentionMode::signed_attention ? "signed" : "co";
}
std::string to_string(EmbeddingMode m) { return m == EmbeddingMode::complex ? "complex" : "real"; }
std::string to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

AttentionMode parse_attention_mode(const std::string& s) {
  if (s == "signed") return AttentionMode::signed_attention;
  if (s == "co") return AttentionMode::co_attention;
  throw std::invalid_argument("attention_mode must be 'signed' or 'co', got '" + s + "'");
}

EmbeddingMode parse_embedding_mode(const std::string& s) {
  if (s == "complex") return EmbeddingMode::complex;
  if (s == "real") return EmbeddingMode::real;
  throw std::invalid_argument("embedding_mode must be 'complex' or 'real', got '" + s + "'");
}

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd") return OptimizerKind::sgd;
  throw std::invalid_argument("optimizer must be 'adam' or 'sgd', got '" + s + "'");
}

json TrainConfig::to_json() const {
  return json{{"d", d},
              {"k", k},
              {"z", z},
              {"max_tokens", max_tokens},
              {"max_sentences", max_sentences},
              {"max_comments", max_comments},
              {"learning_rate", learning_rate},
              {"epochs", epochs},
              {"seed", seed},
              {"attention_mode", to_string(attention_mode)},
              {"embedding_mode", to_string(embedding_mode)},
              {"optimizer", to_string(optimizer)},
              {"beta1", beta1},
              {"beta2", beta2},
              {"epsilon", epsilon}};
}

TrainConfig TrainConfig::from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "d") c.d = value.get<int>();
      else if (key == "k") c.k = value.get<int>();
      else if (key == "z") c.z = value.get<int>();
      else if (key == "max_tokens") c.max_tokens = value.get<int>();
      else if (key == "max_sentences") c.max_sentences = value.get<int>();
      else if (key == "max_comments") c.max_comments = value.get<int>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "attention_mode") c.attention_mode = parse_attention_mode(value.get<std::string>());
      else if (key == "embedding_mode") c.embedding_mode = parse_embedding_mode(value.get<std::string>());
      else if (key == "optimizer") c.optimizer = parse_optimizer(value.get<std::string>());
      else if (key == "beta1") c.beta1 = value.get<double>();
      else if (key == "beta2") c.beta2 = value.get<double>();
      else if (key == "epsilon") c.epsilon = value.get<double>();
      else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

// --- vocabulary -------------------------------------------------------------

int Vocabulary::add(const std::string& token) {
  const auto [it, inserted] = index.emplace(token, static_cast<int>(tokens.size()));
  if (inserted) tokens.push_back(token);
  return it->second;
}

int Vocabulary::find(const std::string& token) const {
  const auto it = index.find(token);
  return it == index.end() ? -1 : it->second;
}

// --- model ------------------------------------------------------------------

Model::Model(TrainConfig config, Vocabulary vocab, ParamStore params)
    : config_(std::move(config)), vocab_(std::move(vocab)), params_(std::move(params)) {
  config_.validate();
}

RVec Model::oov_amplitude(const std::string& token) const {
  auto rng = token_rng(token, config_.seed, 1);
  std::normal_distribution<double> dist(0.0, 0.1);
  RVec v(config_.d);
  for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = dist(rng);
  const double n = v.norm();
  return n > 0 ? RVec(v / n) : v;
}

RVec Model::oov_phase(const std::string& token) const {
  RVec v = RVec::Zero(config_.d);
  if (config_.embedding_mode == EmbeddingMode::real) return v;
  auto rng = token_rng(token, config_.seed, 2);
  std::uniform_real_distribution<double> dist(-std::numbers::pi, std::numbers::pi);
  for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = dist(rng);
  return v;
}

Model Model::initialize(const TrainConfig& config, const std::vector<CorpusExample>& corpus,
                        const EmbeddingTable* pretrained) {
  config.validate();
  if (pretrained != nullptr && pretrained->dim != 0 && pretrained->dim != config.d) {
    throw std::invalid_argument("embedding dimension " + std::to_string(pretrained->dim) +
                                " does not match d = " + std::to_string(config.d));
  }
  Vocabulary vocab;
  for (const auto& ex : corpus) {
    for (const auto& s : ex.post) {
      for (const auto& t : tokenize(s)) vocab.add(t);
    }
    for (const auto& c : ex.comments) {
      for (const auto& t : tokenize(c)) vocab.add(t);
    }
  }
  vocab.add(kEmptyToken);

  Model model(config, std::move(vocab), ParamStore{});
  const auto v = static_cast<Eigen::Index>(model.vocab_.size());
  const Eigen::Index d = config.d;
  const bool complex = config.embedding_mode == EmbeddingMode::complex;

  RMat amp(v, d), phase = RMat::Zero(v, d);
  for (Eigen::Index i = 0; i < v; ++i) {
    const std::string& tok = model.vocab_.tokens[static_cast<size_t>(i)];
    const RVec* pre = pretrained != nullptr ? pretrained->find(tok) : nullptr;
    amp.row(i) = (pre != nullptr ? *pre : model.oov_amplitude(tok)).transpose();
    phase.row(i) = model.oov_phase(tok).transpose();
  }

  std::mt19937_64 rng(config.seed);
  ParamStore& store = model.params_;
  store.add(pname::amplitude, CMat(amp), false);
  store.add(pname::phase, CMat(phase), false, complex);
  add_gru(store, "amplitude", GruWeights::random(d, rng), true);
  const GruWeights phase_gru = GruWeights::random(d, rng);
  add_gru(store, "phase", phase_gru, complex);

  std::uniform_real_distribution<double> small(-0.1, 0.1);
  RMat logits(1, config.max_tokens);
  for (Eigen::Index i = 0; i < logits.size(); ++i) logits(0, i) = small(rng);
  store.add(pname::logits, CMat(logits), false);

  const AttentionParams att = AttentionParams::random(d, config.k, rng);
  store.add(pname::w_s, att.w_s, true);
  store.add(pname::w_c, att.w_c, true);
  store.add(pname::s_pos, att.s_pos, true);
  store.add(pname::s_neg, att.s_neg, true);
  store.add(pname::c_pos, att.c_pos, true);
  store.add(pname::c_neg, att.c_neg, true);

  const MeasurementBank bank = MeasurementBank::random(d, config.z, config.classifier_width(), rng);
  store.add(pname::states, bank.states, true);
  store.add(pname::weight, CMat(bank.weight), false);
  store.add(pname::bias, CMat(RMat(bank.bias.transpose())), false);
  return model;
}

EncodedText Model::encode_text(const std::string& text) const {
  auto tokens = tokenize(text);
  if (tokens.empty()) tokens.emplace_back(kEmptyToken);
  if (tokens.size() > static_cast<size_t>(config_.max_tokens)) {
    spdlog::debug("truncating text of {} tokens to {}", tokens.size(), config_.max_tokens);
    tokens.resize(static_cast<size_t>(config_.max_tokens));
  }
  EncodedText enc;
  std::vector<const std::string*> unknown;
  for (const auto& t : tokens) {
    const int id = vocab_.find(t);
    if (id >= 0) {
      enc.ids.push_back(id);
    } else {
      unknown.push_back(&t);
      enc.ids.push_back(-static_cast<int>(unknown.size()));
    }
  }
  enc.extra_amplitude = RMat(static_cast<Eigen::Index>(unknown.size()), config_.d);
  enc.extra_phase = RMat(static_cast<Eigen::Index>(unknown.size()), config_.d);
  for (size_t i = 0; i < unknown.size(); ++i) {
    enc.extra_amplitude.row(static_cast<Eigen::Index>(i)) = oov_amplitude(*unknown[i]).transpose();
    enc.extra_phase.row(static_cast<Eigen::Index>(i)) = oov_phase(*unknown[i]).transpose();
  }
  return enc;
}

EncodedExample Model::encode(const CorpusExample& example) const {
  if (example.post.empty()) {
    throw std::invalid_argument("example '" + example.id + "' has no post sentences");
  }
  if (example.comments.empty()) {
    throw std::invalid_argument("example '" + example.id + "' has no comments");
  }
  EncodedExample enc;
  const size_t n = std::min(example.post.size(), static_cast<size_t>(config_.max_sentences));
  const size_t t = std::min(example.comments.size(), static_cast<size_t>(config_.max_comments));
  for (size_t i = 0; i < n; ++i) enc.sentences.push_back(encode_text(example.post[i]));
  for (size_t i = 0; i < t; ++i) enc.comments.push_back(encode_text(example.comments[i]));
  return enc;
}

Model::Forward Model::forward(Graph& g, const EncodedExample& example,
                              std::optional<int> label) const {
  const bool complex = config_.embedding_mode == EmbeddingMode::complex;
  Var amp_table = params_.bind(g, pname::amplitude);
  Var phase_table = params_.bind(g, pname::phase);
  const auto gru_amp = bind_gru(g, params_, "amplitude");
  const auto gru_phase = bind_gru(g, params_, "phase");
  Var logits_row = params_.bind(g, pname::logits);

  auto encode_side = [&](const std::vector<EncodedText>& texts) {
    std::vector<Var> rhos;
    rhos.reserve(texts.size());
    for (const auto& t : texts) {
      Var r = graph_encoder::contextual_amplitudes(
          ops::gather_rows(amp_table, t.ids, t.extra_amplitude), gru_amp);
      Var kets = r;
      if (complex) {
        Var phi = graph_encoder::contextual_phases(
            ops::gather_rows(phase_table, t.ids, t.extra_phase), gru_phase);
        kets = graph_encoder::kets(r, phi);
      }
      rhos.push_back(graph_encoder::mixture(kets, logits_row));
    }
    return graph_attention::stack(rhos);
  };

  const auto sentences = encode_side(example.sentences);
  const auto comments = encode_side(example.comments);
  const graph_attention::Heads heads{
      params_.bind(g, pname::w_s),   params_.bind(g, pname::w_c),
      params_.bind(g, pname::s_pos), params_.bind(g, pname::s_neg),
      params_.bind(g, pname::c_pos), params_.bind(g, pname::c_neg)};

  Forward f;
  f.attention = graph_attention::run(sentences, comments, heads, config_.attention_mode);

  Var states = params_.bind(g, pname::states);
  std::vector<Var> features{graph_measurement::measure(f.attention.s_pos, states)};
  if (f.attention.has_negative) {
    features.push_back(graph_measurement::measure(f.attention.s_neg, states));
  }
  features.push_back(graph_measurement::measure(f.attention.c_pos, states));
  if (f.attention.has_negative) {
    features.push_back(graph_measurement::measure(f.attention.c_neg, states));
  }
  f.logits = graph_measurement::classify(ops::hconcat(features), params_.bind(g, pname::weight),
                                         params_.bind(g, pname::bias));
  if (label.has_value()) f.loss = ops::softmax_xent(f.logits, class_index(*label));
  return f;
}

Prediction Model::predict(const EncodedExample& example) const {
  Graph g;
  const Forward f = forward(g, example);
  const RVec p = softmax_signed(f.logits.value().re.row(0).transpose(), Channel::pos);
  Prediction out;
  out.p_false = p(0);
  // argmax with ties to the lower index
  out.label = label_of_class(p(1) > p(0) ? 1 : 0);
  out.bundle = f.attention.bundle();
  return out;
}

Prediction Model::predict(const CorpusExample& example) const { return predict(encode(example)); }

}  // namespace qsan
