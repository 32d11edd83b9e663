#include "qsan/explainer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace qsan {

using nlohmann::json;

std::string to_string(Stance s) {
  switch (s) {
    case Stance::supporting:
      return "supporting";
    case Stance::opposing:
      return "opposing";
    case Stance::neutral:
      break;
  }
  return "neutral";
}

CommentSignature make_signature(double re_plus, double im_plus, double re_minus, double im_minus,
                                double sn_plus, double sn_minus) {
  CommentSignature s;
  s.re_plus = re_plus;
  s.im_plus = im_plus;
  s.re_minus = re_minus;
  s.im_minus = im_minus;
  s.s_plus = std::hypot(re_plus, im_plus);
  s.s_minus = std::hypot(re_minus, im_minus);
  s.sn_plus = sn_plus;
  s.sn_minus = sn_minus;
  s.imp = std::abs(sn_plus - sn_minus);
  return s;
}

CommentSignature comment_signature(const AttentionBundle& bundle, size_t index) {
  const auto t = static_cast<size_t>(bundle.raw_c_pos.cols());
  if (index >= t) {
    throw std::invalid_argument("comment index " + std::to_string(index) + " out of range for " +
                                std::to_string(t) + " comments");
  }
  const auto i = static_cast<Eigen::Index>(index);
  const double sn_plus = std::hypot(bundle.a_c_pos.re(0, i), bundle.a_c_pos.im(0, i));
  if (!bundle.has_negative) {
    return make_signature(bundle.raw_c_pos.re(0, i), bundle.raw_c_pos.im(0, i), 0.0, 0.0,
                          sn_plus, 0.0);
  }
  return make_signature(bundle.raw_c_pos.re(0, i), bundle.raw_c_pos.im(0, i),
                        bundle.raw_c_neg.re(0, i), bundle.raw_c_neg.im(0, i), sn_plus,
                        std::hypot(bundle.a_c_neg.re(0, i), bundle.a_c_neg.im(0, i)));
}

namespace {

// 1 = largest; equal values share a rank.
size_t dense_rank(double value, const std::vector<double>& all) {
  std::vector<double> distinct;
  for (double v : all) {
    if (v > value) distinct.push_back(v);
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  return distinct.size() + 1;
}

std::vector<size_t> ranked(size_t n, size_t k, const std::function<double(size_t)>& key,
                           bool descending) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return descending ? key(a) > key(b) : key(a) < key(b);
  });
  idx.resize(std::min(k, n));
  return idx;
}

json item_json(size_t index, const std::string& text, const CommentSignature& s) {
  return json{{"comment_index", index}, {"text", text},         {"s_plus", s.s_plus},
              {"s_minus", s.s_minus},   {"sn_plus", s.sn_plus}, {"sn_minus", s.sn_minus},
              {"imp", s.imp},           {"stance", to_string(s.stance)}};
}

}  // namespace

Stance stance_label(const CommentSignature& sig, const std::vector<CommentSignature>& all) {
  const bool supports = sig.re_plus > 0.0 && sig.im_plus > 0.0;
  const bool opposes = sig.re_minus < 0.0 && sig.im_minus < 0.0;
  if (supports && !opposes) return Stance::supporting;
  if (opposes && !supports) return Stance::opposing;
  if (!supports && !opposes) return Stance::neutral;

  std::vector<double> plus, minus;
  plus.reserve(all.size());
  minus.reserve(all.size());
  for (const auto& s : all) {
    plus.push_back(s.s_plus);
    minus.push_back(s.s_minus);
  }
  const size_t rank_plus = dense_rank(sig.s_plus, plus);
  const size_t rank_minus = dense_rank(sig.s_minus, minus);
  if (rank_minus < rank_plus) return Stance::opposing;
  if (rank_plus < rank_minus) return Stance::supporting;
  return Stance::neutral;
}

std::vector<CommentSignature> comment_signatures(const AttentionBundle& bundle) {
  std::vector<CommentSignature> sigs;
  const auto t = static_cast<size_t>(bundle.raw_c_pos.cols());
  sigs.reserve(t);
  for (size_t i = 0; i < t; ++i) sigs.push_back(comment_signature(bundle, i));
  for (auto& s : sigs) s.stance = stance_label(s, sigs);
  return sigs;
}

Rankings importance_rank(const std::vector<CommentSignature>& sigs, size_t k) {
  if (k < 1) throw std::invalid_argument("ranking size k must be at least 1");
  const size_t n = sigs.size();
  Rankings r;
  r.important = ranked(n, k, [&](size_t i) { return sigs[i].imp; }, true);
  r.unimportant = ranked(n, k, [&](size_t i) { return sigs[i].imp; }, false);
  r.supporting = ranked(n, k, [&](size_t i) { return sigs[i].sn_plus; }, true);
  r.opposing = ranked(n, k, [&](size_t i) { return sigs[i].sn_minus; }, true);
  return r;
}

json Explanation::to_json() const {
  auto list = [&](const std::vector<size_t>& idx) {
    json arr = json::array();
    for (size_t i : idx) arr.push_back(item_json(i, comments[i], signatures[i]));
    return arr;
  };
  return json{{"id", id},
              {"prediction", prediction},
              {"p_false", p_false},
              {"important", list(rankings.important)},
              {"unimportant", list(rankings.unimportant)},
              {"supporting", list(rankings.supporting)},
              {"opposing", list(rankings.opposing)}};
}

Explanation explain(const CorpusExample& example, const Model& model, size_t k) {
  const Prediction pred = model.predict(example);
  Explanation e;
  e.id = example.id;
  e.prediction = pred.label;
  e.p_false = pred.p_false;
  e.signatures = comment_signatures(pred.bundle);
  e.comments.assign(example.comments.begin(),
                    example.comments.begin() + static_cast<std::ptrdiff_t>(e.signatures.size()));
  e.rankings = importance_rank(e.signatures, k);
  return e;
}

}  // namespace qsan
