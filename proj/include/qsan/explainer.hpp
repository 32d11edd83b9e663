#pragma once

#include "qsan/attention.hpp"
#include "qsan/corpus.hpp"
#include "qsan/model.hpp"

#include <string>
#include <vector>

#include <json.hpp>

namespace qsan {

enum class Stance { supporting, opposing, neutral };

std::string to_string(Stance s);

struct CommentSignature {
  // Unnormalized weights (re+, im+ | re-, im-) before the two softmax channels.
  double re_plus = 0.0, im_plus = 0.0, re_minus = 0.0, im_minus = 0.0;
  double s_plus = 0.0, s_minus = 0.0;    // moduli of the raw pairs
  double sn_plus = 0.0, sn_minus = 0.0;  // moduli of the normalized weights
  double imp = 0.0;                      // |sn_plus - sn_minus|
  Stance stance = Stance::neutral;
};

// Reads comment `index` from the bundle. Stance is left neutral; use
// stance_label or comment_signatures for the labelled form. Without a
// negative channel the minus components are zero.
CommentSignature comment_signature(const AttentionBundle& bundle, size_t index);

// Builds a signature straight from raw and normalized weights.
CommentSignature make_signature(double re_plus, double im_plus, double re_minus, double im_minus,
                                double sn_plus = 0.0, double sn_minus = 0.0);

// Sign rules on the raw pairs; when both the supporting and the opposing
// pattern hold, the side whose modulus has the better dense rank among all
// comments wins and a tie is neutral.
Stance stance_label(const CommentSignature& sig, const std::vector<CommentSignature>& all);

// Every comment of the bundle, stance-labelled.
std::vector<CommentSignature> comment_signatures(const AttentionBundle& bundle);

struct Rankings {
  std::vector<size_t> important;    // imp descending
  std::vector<size_t> unimportant;  // imp ascending
  std::vector<size_t> supporting;   // sn_plus descending
  std::vector<size_t> opposing;     // sn_minus descending
};

// Top-k lists, k clipped to the number of comments; ties go to the lower index.
Rankings importance_rank(const std::vector<CommentSignature>& sigs, size_t k);

struct Explanation {
  std::string id;
  int prediction = 0;
  double p_false = 0.0;
  std::vector<std::string> comments;
  std::vector<CommentSignature> signatures;
  Rankings rankings;

  nlohmann::json to_json() const;
};

Explanation explain(const CorpusExample& example, const Model& model, size_t k);

}  // namespace qsan
