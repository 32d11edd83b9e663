#include "qsan/cli.hpp"

#include "qsan/checkpoint.hpp"
#include "qsan/corpus.hpp"
#include "qsan/diagnostics.hpp"
#include "qsan/errors.hpp"
#include "qsan/embedding.hpp"
#include "qsan/explainer.hpp"
#include "qsan/io_util.hpp"
#include "qsan/trainer.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

namespace qsan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
  std::optional<std::string> attention;
  std::optional<std::string> embedding;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON object with training configuration keys")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "random seed (default 0)");
  cmd->add_option("--epochs", o.epochs, "training epochs (default 20)");
  cmd->add_option("--lr", o.learning_rate, "learning rate (default 1e-3)");
  cmd->add_option("--attention", o.attention, "signed | co (default signed)")
      ->check(CLI::IsMember({"signed", "co"}));
  cmd->add_option("--embedding", o.embedding, "complex | real (default complex)")
      ->check(CLI::IsMember({"complex", "real"}));
}

TrainConfig resolve_config(const Overrides& o) {
  TrainConfig cfg;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw qsan::IoError("cannot open config " + o.config_path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw qsan::ParseError("config " + o.config_path + ": " + e.what());
    }
    cfg = TrainConfig::from_json(j);
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.learning_rate) cfg.learning_rate = *o.learning_rate;
  if (o.attention) cfg.attention_mode = parse_attention_mode(*o.attention);
  if (o.embedding) cfg.embedding_mode = parse_embedding_mode(*o.embedding);
  cfg.validate();
  return cfg;
}

std::vector<CorpusExample> read_corpus_strict(const std::string& path) {
  LoadResult loaded = load_corpus(path);
  if (!loaded.errors.empty()) {
    const auto& e = loaded.errors.front();
    throw qsan::ParseError(path + ": " + std::to_string(loaded.errors.size()) +
                     " malformed line(s), first at line " + std::to_string(e.line) + ": " +
                     e.message);
  }
  return std::move(loaded.examples);
}

void write_json_file(const fs::path& path, const json& j) {
  write_file_atomic(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Signed-attention false information detection over complex density matrices",
               "qsan"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");

  // train
  Overrides train_o;
  std::string train_data, train_model, train_loss, train_embeddings, train_holdout;
  auto* train_cmd = app.add_subcommand("train", "fit a model and write a checkpoint");
  train_cmd->add_option("--data", train_data, "training corpus (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--model", train_model, "checkpoint to write")->required();
  train_cmd->add_option("--loss-history", train_loss,
                        "loss history file (default: <model>.loss.txt)");
  train_cmd->add_option("--embeddings", train_embeddings, "pretrained amplitude vectors")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--holdout", train_holdout,
                        "train on a seeded 75% split and write the other 25% here");
  add_overrides(train_cmd, train_o);

  // eval
  std::string eval_data, eval_model, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "report accuracy, precision, recall and F1");
  eval_cmd->add_option("--data", eval_data, "evaluation corpus")->required();
  eval_cmd->add_option("--model", eval_model, "checkpoint")->required();
  eval_cmd->add_option("--out", eval_out, "metrics file (JSON)");

  // explain
  std::string explain_data, explain_model, explain_out;
  size_t explain_k = 5;
  auto* explain_cmd = app.add_subcommand("explain", "rank comments by stance and importance");
  explain_cmd->add_option("--data", explain_data, "corpus")->required();
  explain_cmd->add_option("--model", explain_model, "checkpoint")->required();
  explain_cmd->add_option("--out", explain_out, "explanation records (JSON lines)")->required();
  explain_cmd->add_option("--k", explain_k, "list length (default 5)")
      ->check(CLI::PositiveNumber);

  // gradcheck
  Overrides grad_o;
  double grad_tol = 1e-4;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of all gradients");
  grad_cmd->add_option("--tolerance", grad_tol, "maximum relative error (default 1e-4)");
  add_overrides(grad_cmd, grad_o);

  // preprocess
  std::string pre_data, pre_out, pre_report;
  auto* pre_cmd = app.add_subcommand(
      "preprocess", "drop duplicate and short comments, then posts with few comments");
  pre_cmd->add_option("--data", pre_data, "input corpus")->required();
  pre_cmd->add_option("--out", pre_out, "filtered corpus")->required();
  pre_cmd->add_option("--report", pre_report, "drop report file (JSON)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 2;
  }

  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

  try {
    if (*train_cmd) {
      const TrainConfig cfg = resolve_config(train_o);
      std::vector<CorpusExample> corpus = read_corpus_strict(train_data);
      std::vector<CorpusExample> holdout;
      if (!train_holdout.empty()) {
        auto split = split_corpus(corpus, cfg.seed, 0.75);
        corpus = std::move(split.first);
        holdout = std::move(split.second);
      }
      std::optional<EmbeddingTable> table;
      if (!train_embeddings.empty()) table = load_embeddings(train_embeddings, cfg.d);
      FitResult result = fit(corpus, cfg, table ? &*table : nullptr);

      save_checkpoint(result.model, train_model);
      write_loss_history(train_loss.empty() ? train_model + ".loss.txt" : train_loss,
                         result.loss_history);
      json summary{{"examples", corpus.size()},
                   {"epochs", cfg.epochs},
                   {"final_loss", result.loss_history.empty() ? json(nullptr)
                                                              : json(result.loss_history.back())}};
      if (!train_holdout.empty()) {
        write_corpus(train_holdout, holdout);
        if (!holdout.empty()) summary["holdout"] = evaluate(result.model, holdout).to_json();
      }
      out << summary.dump() << '\n';
    } else if (*eval_cmd) {
      const Model model = load_checkpoint(eval_model);
      const auto corpus = read_corpus_strict(eval_data);
      const json metrics = evaluate(model, corpus).to_json();
      if (!eval_out.empty()) write_json_file(eval_out, metrics);
      out << metrics.dump() << '\n';
    } else if (*explain_cmd) {
      const Model model = load_checkpoint(explain_model);
      const auto corpus = read_corpus_strict(explain_data);
      std::vector<std::string> lines;
      lines.reserve(corpus.size());
      for (const auto& ex : corpus) lines.push_back(explain(ex, model, explain_k).to_json().dump());
      write_file_atomic(explain_out, [&](std::ostream& o) {
        for (const auto& l : lines) o << l << '\n';
      });
      out << json{{"explained", lines.size()}, {"out", explain_out}}.dump() << '\n';
    } else if (*grad_cmd) {
      const TrainConfig cfg = resolve_config(grad_o);
      auto fixture = gradcheck_fixture(cfg.seed, cfg.attention_mode, cfg.embedding_mode);
      const GradCheckReport report = model_grad_check(fixture.model, fixture.example);
      json groups = json::object();
      for (const auto& e : report.entries) groups[e.name] = e.max_rel_error;
      out << json{{"worst_rel_error", report.worst_rel_error},
                  {"worst_parameter", report.worst_parameter},
                  {"tolerance", grad_tol},
                  {"parameters", groups}}
                 .dump()
          << '\n';
      if (!(report.worst_rel_error < grad_tol)) {
        err << "error: gradient check failed: relative error " << report.worst_rel_error
            << " in " << report.worst_parameter << '\n';
        return 1;
      }
    } else if (*pre_cmd) {
      LoadResult loaded = load_corpus(pre_data);
      if (!loaded.errors.empty()) {
        const auto& e = loaded.errors.front();
        throw qsan::ParseError(pre_data + ": malformed line " + std::to_string(e.line) + ": " +
                         e.message);
      }
      PreprocessResult result = preprocess(std::move(loaded.examples));
      write_corpus(pre_out, result.corpus);
      if (!pre_report.empty()) write_json_file(pre_report, result.report.to_json());
      out << result.report.to_json().dump() << '\n';
    }
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}

}  // namespace qsan::cli
