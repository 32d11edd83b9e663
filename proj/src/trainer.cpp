#include "qsan/trainer.hpp"

#include "qsan/errors.hpp"
#include "qsan/io_util.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace qsan {

using nlohmann::json;

json Metrics::to_json() const {
  return json{{"accuracy", accuracy}, {"precision", precision}, {"recall", recall},
              {"f1", f1},             {"tp", tp},               {"fp", fp},
              {"fn", fn},             {"tn", tn}};
}

Metrics compute_metrics(const std::vector<int>& predicted, const std::vector<int>& actual) {
  if (predicted.size() != actual.size()) {
    throw std::invalid_argument("compute_metrics: prediction and label counts differ");
  }
  Metrics m;
  for (size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] == 1;
    const bool a = actual[i] == 1;
    if (p && a) ++m.tp;
    else if (p && !a) ++m.fp;
    else if (!p && a) ++m.fn;
    else ++m.tn;
  }
  const auto total = static_cast<double>(predicted.size());
  m.accuracy = total > 0 ? static_cast<double>(m.tp + m.tn) / total : 0.0;
  m.precision = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
  m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

Optimizer::Optimizer(const TrainConfig& config) : config_(config) {}

void Optimizer::step(ParamStore& params, const Gradients& grads) {
  auto& items = params.items();
  if (moments_.empty() && config_.optimizer == OptimizerKind::adam) {
    for (const auto& p : items) {
      moments_.push_back({CMat::zeros(p.value.rows(), p.value.cols()),
                          CMat::zeros(p.value.rows(), p.value.cols())});
    }
  }
  ++step_count_;
  const double lr = config_.learning_rate;
  const double b1 = config_.beta1, b2 = config_.beta2, eps = config_.epsilon;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));

  for (size_t i = 0; i < items.size(); ++i) {
    Parameter& p = items[i];
    if (!p.trainable) continue;
    const auto it = grads.find(p.name);
    const int planes = p.is_complex ? 2 : 1;
    for (int plane = 0; plane < planes; ++plane) {
      RMat& w = plane == 0 ? p.value.re : p.value.im;
      const RMat zero;
      const RMat* g = nullptr;
      if (it != grads.end()) g = plane == 0 ? &it->second.re : &it->second.im;
      if (config_.optimizer == OptimizerKind::sgd) {
        if (g != nullptr) w -= lr * *g;
        continue;
      }
      RMat& m = plane == 0 ? moments_[i].m.re : moments_[i].m.im;
      RMat& v = plane == 0 ? moments_[i].v.re : moments_[i].v.im;
      m *= b1;
      v *= b2;
      if (g != nullptr) {
        m += (1.0 - b1) * *g;
        v += (1.0 - b2) * g->cwiseAbs2();
      }
      w.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }
  }
}

namespace {

std::string non_finite_groups(const ParamStore& params, const Gradients* grads) {
  std::set<std::string> groups;
  for (const auto& p : params.items()) {
    if (!p.value.all_finite()) groups.insert(parameter_group(p.name));
    if (grads != nullptr) {
      const auto it = grads->find(p.name);
      if (it != grads->end() && !it->second.all_finite()) groups.insert(parameter_group(p.name));
    }
  }
  std::string out;
  for (const auto& g : groups) out += (out.empty() ? "" : ", ") + g;
  return out.empty() ? "none identified" : out;
}

void check_corpus(const std::vector<CorpusExample>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("training corpus is empty");
  for (const auto& ex : corpus) {
    if (ex.post.empty() || ex.comments.empty()) {
      throw std::invalid_argument("example '" + ex.id +
                                  "' needs at least one sentence and one comment");
    }
  }
}

}  // namespace

std::vector<double> train(Model& model, const std::vector<CorpusExample>& corpus,
                          const EpochCallback& on_epoch) {
  check_corpus(corpus);
  const TrainConfig& cfg = model.config();
  std::vector<EncodedExample> encoded;
  encoded.reserve(corpus.size());
  for (const auto& ex : corpus) encoded.push_back(model.encode(ex));

  Optimizer optimizer(cfg);
  std::mt19937_64 rng(cfg.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> history;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (size_t idx : order) {
      Graph g;
      const auto f = model.forward(g, encoded[idx], corpus[idx].label);
      const double loss = f.loss.value().re(0, 0);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss on example '" + corpus[idx].id + "' in epoch " +
                            std::to_string(epoch + 1) + "; parameter groups: " +
                            non_finite_groups(model.params(), nullptr));
      }
      const Gradients grads = g.backward(f.loss);
      for (const auto& [name, grad] : grads) {
        if (!grad.all_finite()) {
          throw TrainingError("non-finite gradient on example '" + corpus[idx].id +
                              "'; parameter groups: " + non_finite_groups(model.params(), &grads));
        }
      }
      optimizer.step(model.params(), grads);
      total += loss;
    }
    for (const auto& p : model.params().items()) {
      if (!p.value.all_finite()) {
        throw TrainingError("non-finite parameters after epoch " + std::to_string(epoch + 1) +
                            "; parameter groups: " + non_finite_groups(model.params(), nullptr));
      }
    }
    const double mean = total / static_cast<double>(corpus.size());
    history.push_back(mean);
    spdlog::debug("epoch {} mean loss {:.6f}", epoch + 1, mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return history;
}

FitResult fit(const std::vector<CorpusExample>& corpus, const TrainConfig& config,
              const EmbeddingTable* pretrained, const EpochCallback& on_epoch) {
  check_corpus(corpus);
  Model model = Model::initialize(config, corpus, pretrained);
  auto history = train(model, corpus, on_epoch);
  return FitResult{std::move(model), std::move(history)};
}

std::vector<int> predict_labels(const Model& model, const std::vector<CorpusExample>& corpus) {
  std::vector<int> out;
  out.reserve(corpus.size());
  for (const auto& ex : corpus) out.push_back(model.predict(ex).label);
  return out;
}

Metrics evaluate(const Model& model, const std::vector<CorpusExample>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("evaluation corpus is empty");
  std::vector<int> actual;
  actual.reserve(corpus.size());
  for (const auto& ex : corpus) actual.push_back(ex.label);
  return compute_metrics(predict_labels(model, corpus), actual);
}

std::pair<std::vector<CorpusExample>, std::vector<CorpusExample>> split_corpus(
    const std::vector<CorpusExample>& corpus, std::uint64_t seed, double train_fraction) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw std::invalid_argument("train fraction must be in [0, 1]");
  }
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto cut = static_cast<size_t>(std::llround(train_fraction * static_cast<double>(corpus.size())));
  std::pair<std::vector<CorpusExample>, std::vector<CorpusExample>> out;
  for (size_t i = 0; i < order.size(); ++i) {
    (i < cut ? out.first : out.second).push_back(corpus[order[i]]);
  }
  return out;
}

void write_loss_history(const std::filesystem::path& path, const std::vector<double>& history) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << std::setprecision(17);
    for (size_t i = 0; i < history.size(); ++i) out << (i + 1) << ' ' << history[i] << '\n';
  });
}

}  // namespace qsan
