#include "qsan/diagnostics.hpp"

namespace qsan {

GradCheckFixture gradcheck_fixture(std::uint64_t seed, AttentionMode attention,
                                   EmbeddingMode embedding) {
  CorpusExample ex;
  ex.id = "gradcheck";
  ex.label = 1;
  ex.post = {"the river floods the old valley", "officials deny the report"};
  ex.comments = {"the valley is flooded again", "this report is a hoax",
                 "anyone near the river should move"};

  TrainConfig cfg;
  cfg.d = 4;
  cfg.k = 3;
  cfg.z = 4;
  cfg.max_tokens = 8;
  cfg.seed = seed;
  cfg.attention_mode = attention;
  cfg.embedding_mode = embedding;
  return GradCheckFixture{Model::initialize(cfg, {ex}), ex};
}

GradCheckReport model_grad_check(Model& model, const CorpusExample& example,
                                 const GradCheckOptions& options) {
  const EncodedExample enc = model.encode(example);
  const int label = example.label;
  const LossBuilder loss = [&model, &enc, label](Graph& g, const ParamStore&) {
    return model.forward(g, enc, label).loss;
  };
  return grad_check(loss, model.params(), options);
}

}  // namespace qsan
