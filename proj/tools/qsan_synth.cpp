// Writes the synthetic corpora used by the examples and smoke tests.
#include "qsan/corpus.hpp"
#include "qsan/synthetic.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"synthetic corpus generator", "qsan_synth"};
  std::string kind = "separable", out;
  size_t count = 32;
  std::uint64_t seed = 0;
  app.add_option("--kind", kind, "separable | planted")->check(CLI::IsMember({"separable", "planted"}));
  app.add_option("--count", count, "number of posts");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--out", out, "output corpus")->required();
  CLI11_PARSE(app, argc, argv);

  std::vector<qsan::CorpusExample> corpus;
  if (kind == "separable") {
    corpus = qsan::synthetic::separable_corpus(count, seed);
  } else {
    for (auto& p : qsan::synthetic::planted_stance_corpus(count, seed)) {
      corpus.push_back(std::move(p.example));
    }
  }
  qsan::write_corpus(out, corpus);
  return 0;
}
