#pragma once

#include "qsan/gradcheck.hpp"
#include "qsan/model.hpp"

namespace qsan {

// Two sentences, three comments, d = 4, k = 3, Z = 4.
struct GradCheckFixture {
  Model model;
  CorpusExample example;
};

GradCheckFixture gradcheck_fixture(std::uint64_t seed = 7,
                                   AttentionMode attention = AttentionMode::signed_attention,
                                   EmbeddingMode embedding = EmbeddingMode::complex);

// Finite-difference check of the full forward pass and loss of `model` on
// `example` against reverse-mode gradients, over every trainable parameter.
GradCheckReport model_grad_check(Model& model, const CorpusExample& example,
                                 const GradCheckOptions& options = {});

}  // namespace qsan
