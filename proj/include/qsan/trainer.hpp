#pragma once

#include "qsan/model.hpp"

#include <filesystem>
#include <functional>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qsan {

struct Metrics {
  size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  nlohmann::json to_json() const;
};

// Label 1 (false information) is the positive class. Undefined ratios are 0.
Metrics compute_metrics(const std::vector<int>& predicted, const std::vector<int>& actual);

// First-order optimizer over a ParamStore. Real-valued parameters ignore the
// imaginary plane of their gradient; missing gradients count as zero.
class Optimizer {
 public:
  explicit Optimizer(const TrainConfig& config);
  void step(ParamStore& params, const Gradients& grads);

 private:
  struct Moments {
    CMat m, v;
  };
  TrainConfig config_;
  std::vector<Moments> moments_;
  long step_count_ = 0;
};

struct FitResult {
  Model model;
  std::vector<double> loss_history;  // mean loss per epoch
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

// Trains `model` in place for model.config().epochs epochs, one step per
// example in a seeded shuffled order. Returns the per-epoch mean loss.
std::vector<double> train(Model& model, const std::vector<CorpusExample>& corpus,
                          const EpochCallback& on_epoch = {});

FitResult fit(const std::vector<CorpusExample>& corpus, const TrainConfig& config,
              const EmbeddingTable* pretrained = nullptr, const EpochCallback& on_epoch = {});

std::vector<int> predict_labels(const Model& model, const std::vector<CorpusExample>& corpus);
Metrics evaluate(const Model& model, const std::vector<CorpusExample>& corpus);

// Seeded random split; the first part holds round(fraction * size) examples.
std::pair<std::vector<CorpusExample>, std::vector<CorpusExample>> split_corpus(
    const std::vector<CorpusExample>& corpus, std::uint64_t seed, double train_fraction = 0.75);

// Two columns per line: epoch (1-based) and mean loss.
void write_loss_history(const std::filesystem::path& path, const std::vector<double>& history);

}  // namespace qsan
