#include "qsan/attention.hpp"
#include "qsan/checkpoint.hpp"
#include "qsan/corpus.hpp"
#include "qsan/diagnostics.hpp"
#include "qsan/encoder.hpp"
#include "qsan/errors.hpp"
#include "qsan/explainer.hpp"
#include "qsan/measurement.hpp"
#include "qsan/softmax.hpp"
#include "qsan/synthetic.hpp"
#include "qsan/trainer.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object to_python(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_python(const py::object& o) {
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

qsan::Channel channel_of(const std::string& s) {
  if (s == "pos") return qsan::Channel::pos;
  if (s == "neg") return qsan::Channel::neg;
  throw std::invalid_argument("channel must be 'pos' or 'neg', got '" + s + "'");
}

qsan::DensityMatrix density(const qsan::ZMat& m) {
  return qsan::DensityMatrix{qsan::CMat::from_complex(m), qsan::MatrixKind::proper};
}

std::vector<qsan::DensityMatrix> densities(const std::vector<qsan::ZMat>& ms) {
  std::vector<qsan::DensityMatrix> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.push_back(density(m));
  return out;
}

qsan::TrainConfig config_of(const py::object& cfg) {
  return cfg.is_none() ? qsan::TrainConfig{} : qsan::TrainConfig::from_json(from_python(cfg));
}

}  // namespace

PYBIND11_MODULE(_qsan, m) {
  m.doc() = "Signed attention over complex density matrices for false information detection";

  py::register_exception<qsan::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<qsan::CheckpointError>(m, "CheckpointError", PyExc_ValueError);
  py::register_exception<qsan::TrainingError>(m, "TrainingError", PyExc_RuntimeError);
  py::register_exception<qsan::IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<qsan::ShapeError>(m, "ShapeError", PyExc_ValueError);

  // Complex algebra and the encoder.
  m.def("softmax_signed",
        [](const qsan::RVec& v, const std::string& channel) {
          return qsan::softmax_signed(v, channel_of(channel));
        },
        py::arg("values"), py::arg("channel") = "pos");
  m.def("cmul",
        [](const qsan::ZMat& a, const qsan::ZMat& b) {
          return qsan::cmul(qsan::CMat::from_complex(a), qsan::CMat::from_complex(b)).to_complex();
        },
        py::arg("a"), py::arg("b"));
  m.def("word_to_state",
        [](const qsan::RVec& r, const qsan::RVec& phi) {
          const auto w = qsan::word_to_state(r, phi);
          return py::make_tuple(w.amplitude, w.phase);
        },
        py::arg("amplitude"), py::arg("phase"), "Returns (amplitude, phase) of the unit ket.");
  m.def("superpose",
        [](const qsan::RVec& r1, const qsan::RVec& p1, const qsan::RVec& r2, const qsan::RVec& p2) {
          const auto c = qsan::superpose(qsan::word_to_state(r1, p1), qsan::word_to_state(r2, p2));
          return py::make_tuple(c.amplitude, c.phase);
        },
        py::arg("r1"), py::arg("phi1"), py::arg("r2"), py::arg("phi2"));
  m.def("mixture",
        [](const qsan::RMat& amplitudes, const qsan::RMat& phases, const qsan::RVec& logits) {
          if (amplitudes.rows() != phases.rows() || amplitudes.cols() != phases.cols()) {
            throw qsan::ShapeError("mixture: amplitude and phase rows differ in shape");
          }
          std::vector<qsan::WordState> words;
          for (Eigen::Index i = 0; i < amplitudes.rows(); ++i) {
            words.push_back(qsan::word_to_state(amplitudes.row(i).transpose(), phases.row(i).transpose()));
          }
          return qsan::mixture(words, logits).mat.to_complex();
        },
        py::arg("amplitudes"), py::arg("phases"), py::arg("logits"),
        "Density matrix of m words given m x d amplitude and phase rows.");

  // Attention and measurement on explicit matrices.
  m.def("affinity",
        [](const std::vector<qsan::ZMat>& s, const std::vector<qsan::ZMat>& c) {
          auto [mm, l] = qsan::affinity(densities(s), densities(c));
          return py::make_tuple(mm, l);
        },
        py::arg("sentences"), py::arg("comments"), "Returns (M, tanh(M)).");
  m.def("measure",
        [](const qsan::ZMat& rho, const qsan::ZMat& states) {
          qsan::MeasurementBank bank;
          bank.states = qsan::CMat::from_complex(states);
          return qsan::measure(density(rho), bank);
        },
        py::arg("rho"), py::arg("states"));

  // Corpus handling.
  py::class_<qsan::CorpusExample>(m, "CorpusExample")
      .def(py::init([](std::string id, int label, std::vector<std::string> post,
                       std::vector<std::string> comments) {
             return qsan::CorpusExample{std::move(id), label, std::move(post), std::move(comments)};
           }),
           py::arg("id"), py::arg("label"), py::arg("post"), py::arg("comments"))
      .def_readwrite("id", &qsan::CorpusExample::id)
      .def_readwrite("label", &qsan::CorpusExample::label)
      .def_readwrite("post", &qsan::CorpusExample::post)
      .def_readwrite("comments", &qsan::CorpusExample::comments)
      .def("__eq__", [](const qsan::CorpusExample& a, const qsan::CorpusExample& b) { return a == b; })
      .def("__repr__", [](const qsan::CorpusExample& e) {
        return "CorpusExample(id='" + e.id + "', label=" + std::to_string(e.label) + ", " +
               std::to_string(e.comments.size()) + " comments)";
      });

  m.def("load_corpus",
        [](const std::filesystem::path& path) {
          auto r = qsan::load_corpus(path);
          py::list errors;
          for (const auto& e : r.errors) errors.append(py::make_tuple(e.line, e.message));
          return py::make_tuple(r.examples, errors);
        },
        py::arg("path"), "Returns (examples, [(line, message), ...]).");
  m.def("write_corpus", &qsan::write_corpus, py::arg("path"), py::arg("corpus"));
  m.def("preprocess",
        [](std::vector<qsan::CorpusExample> corpus) {
          auto r = qsan::preprocess(std::move(corpus));
          return py::make_tuple(r.corpus, to_python(r.report.to_json()));
        },
        py::arg("corpus"), "Returns (filtered corpus, drop report).");
  m.def("separable_corpus", &qsan::synthetic::separable_corpus, py::arg("count"), py::arg("seed") = 0);

  // Models.
  py::class_<qsan::Model>(m, "Model")
      .def_property_readonly("config", [](const qsan::Model& model) { return to_python(model.config().to_json()); })
      .def_property_readonly("vocabulary", [](const qsan::Model& model) { return model.vocab().tokens; })
      .def("parameter_names",
           [](const qsan::Model& model) {
             std::vector<std::string> names;
             for (const auto& p : model.params().items()) names.push_back(p.name);
             return names;
           })
      .def("parameter",
           [](const qsan::Model& model, const std::string& name) {
             return model.params().at(name).value.to_complex();
           },
           py::arg("name"))
      .def("predict",
           [](const qsan::Model& model, const qsan::CorpusExample& ex) {
             const auto p = model.predict(ex);
             return py::make_tuple(p.label, p.p_false);
           },
           py::arg("example"), "Returns (label, p_false).")
      .def("evaluate",
           [](const qsan::Model& model, const std::vector<qsan::CorpusExample>& corpus) {
             return to_python(qsan::evaluate(model, corpus).to_json());
           },
           py::arg("corpus"))
      .def("explain",
           [](const qsan::Model& model, const qsan::CorpusExample& ex, size_t k) {
             return to_python(qsan::explain(ex, model, k).to_json());
           },
           py::arg("example"), py::arg("k") = 5)
      .def("save", [](const qsan::Model& model, const std::filesystem::path& path) {
        qsan::save_checkpoint(model, path);
      }, py::arg("path"))
      .def_static("load", &qsan::load_checkpoint, py::arg("path"));

  m.def("fit",
        [](const std::vector<qsan::CorpusExample>& corpus, const py::object& config,
           const std::function<void(int, double)>& on_epoch) {
          const qsan::TrainConfig cfg = config_of(config);
          std::optional<qsan::FitResult> r;
          {
            py::gil_scoped_release release;
            r.emplace(qsan::fit(corpus, cfg, nullptr,
                          on_epoch ? qsan::EpochCallback([&](int e, double l) {
                            py::gil_scoped_acquire acquire;
                            on_epoch(e, l);
                          })
                                   : qsan::EpochCallback{}));
          }
          return py::make_tuple(std::move(r->model), r->loss_history);
        },
        py::arg("corpus"), py::arg("config") = py::none(), py::arg("on_epoch") = nullptr,
        "Trains a fresh model. `config` is a dict of training options. Returns (model, losses).");

  m.def("gradcheck",
        [](std::uint64_t seed, const std::string& attention, const std::string& embedding) {
          auto fx = qsan::gradcheck_fixture(seed, qsan::parse_attention_mode(attention),
                                            qsan::parse_embedding_mode(embedding));
          const auto report = qsan::model_grad_check(fx.model, fx.example);
          py::dict groups;
          for (const auto& e : report.entries) groups[py::str(e.name)] = e.max_rel_error;
          return py::make_tuple(report.worst_rel_error, groups);
        },
        py::arg("seed") = 7, py::arg("attention") = "signed", py::arg("embedding") = "complex",
        "Finite-difference check of the full model. Returns (worst, per-parameter errors).");
}
