#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hcae/classify.hpp"
#include "hcae/data.hpp"
#include "hcae/hypergraph.hpp"
#include "hcae/model.hpp"
#include "hcae/pipeline.hpp"

namespace py = pybind11;
using namespace hcae;

namespace {

HcaeConfig make_config(int hidden_dim, int latent_dim, int epochs, double lr,
                       double disc_lr, std::uint64_t seed, int k,
                       const std::string& prior, double recon_weight,
                       double gen_weight) {
  HcaeConfig cfg;
  cfg.hidden_dim = hidden_dim;
  cfg.latent_dim = latent_dim;
  cfg.epochs = epochs;
  cfg.lr = lr;
  cfg.disc_lr = disc_lr;
  cfg.seed = seed;
  cfg.k = k;
  cfg.prior = parse_prior_policy(prior);
  cfg.recon_weight = recon_weight;
  cfg.gen_weight = gen_weight;
  return cfg;
}

py::dict trace_to_dict(const TrainTrace& trace) {
  py::list recon, disc, gen;
  for (const auto& e : trace.epochs) {
    recon.append(e.recon_loss);
    disc.append(e.disc_loss);
    gen.append(e.gen_loss);
  }
  py::dict d;
  d["initial_recon_loss"] = trace.initial_recon_loss;
  d["recon_loss"] = recon;
  d["disc_loss"] = disc;
  d["gen_loss"] = gen;
  return d;
}

std::vector<Embedding> embeddings_from_arrays(const std::vector<Matrix>& zs) {
  std::vector<Embedding> out;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    out.push_back({"s" + std::to_string(i), zs[i]});
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "multi-view hyperconnectome autoencoder core";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "_ShapeError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_ValueError);

  py::class_<Cohort>(m, "Cohort")
      .def_property_readonly("n_subjects", &Cohort::n_subjects)
      .def_property_readonly("n_nodes", &Cohort::n_nodes)
      .def_property_readonly("n_views", &Cohort::n_views)
      .def_property_readonly("class_names",
                             [](const Cohort& c) { return c.class_names; })
      .def_property_readonly("subject_ids",
                             [](const Cohort& c) {
                               std::vector<std::string> ids;
                               for (const auto& s : c.subjects)
                                 ids.push_back(s.subject_id);
                               return ids;
                             })
      .def_property_readonly("labels",
                             [](const Cohort& c) {
                               std::vector<std::string> labels;
                               for (const auto& s : c.subjects)
                                 labels.push_back(s.label);
                               return labels;
                             })
      .def("view",
           [](const Cohort& c, int subject, int view) {
             if (subject < 0 || subject >= c.n_subjects())
               throw ParameterError("subject index out of range");
             if (view < 1 || view > c.n_views())
               throw ParameterError("view index out of range (1-based)");
             return c.subjects[subject].views[view - 1].values;
           },
           py::arg("subject"), py::arg("view"),
           "connectivity matrix of a subject's view (1-based view index)");

  py::class_<Hyperconnectome>(m, "Hyperconnectome")
      .def_readonly("incidence", &Hyperconnectome::incidence)
      .def_readonly("edge_weights", &Hyperconnectome::edge_weights)
      .def_readonly("vertex_degrees", &Hyperconnectome::vertex_degrees)
      .def_readonly("edge_degrees", &Hyperconnectome::edge_degrees)
      .def_readonly("k", &Hyperconnectome::k)
      .def_readonly("n_views", &Hyperconnectome::n_views);

  m.def("generate_synthetic_cohort",
        [](int n_subjects, int n_nodes, int n_views, int n_classes,
           double signal, std::uint64_t seed) {
          return generate_synthetic_cohort(
              {n_subjects, n_nodes, n_views, n_classes, signal}, seed);
        },
        py::arg("n_subjects"), py::arg("n_nodes"), py::arg("n_views"),
        py::arg("n_classes"), py::arg("signal"), py::arg("seed"));

  m.def("load_cohort",
        [](const std::string& dir, const std::string& manifest) {
          return load_cohort(dir, manifest);
        },
        py::arg("dir"), py::arg("manifest") = "manifest.csv");

  m.def("write_cohort",
        [](const Cohort& cohort, const std::string& dir) {
          write_cohort(cohort, dir);
        },
        py::arg("cohort"), py::arg("dir"));

  m.def("symmetrize",
        [](const Matrix& values) { return symmetrize(values).values; },
        py::arg("values"), "(A + A.T)/2 with zero diagonal");

  m.def("build_view_incidence",
        [](const Matrix& x, int k) {
          return build_view_incidence(
              make_connectivity(x, 1, "build_view_incidence input"), k);
        },
        py::arg("connectivity"), py::arg("k"));

  m.def("build_hyperconnectome",
        [](const Cohort& cohort, int subject, int k) {
          if (subject < 0 || subject >= cohort.n_subjects())
            throw ParameterError("subject index out of range");
          auto [h, features] = build_hyperconnectome(cohort.subjects[subject], k);
          return py::make_tuple(h, features.values);
        },
        py::arg("cohort"), py::arg("subject"), py::arg("k"),
        "returns (Hyperconnectome, stacked feature matrix)");

  m.def("propagation_operator", &propagation_operator, py::arg("hyperconnectome"));

  m.def("train_subject",
        [](const Cohort& cohort, int subject, int hidden_dim, int latent_dim,
           int epochs, double lr, double disc_lr, std::uint64_t seed, int k,
           const std::string& prior, double recon_weight, double gen_weight) {
          if (subject < 0 || subject >= cohort.n_subjects())
            throw ParameterError("subject index out of range");
          auto [params, embedding, trace] = train_subject(
              cohort.subjects[subject],
              make_config(hidden_dim, latent_dim, epochs, lr, disc_lr, seed, k,
                          prior, recon_weight, gen_weight));
          return py::make_tuple(embedding.z, trace_to_dict(trace));
        },
        py::arg("cohort"), py::arg("subject"), py::arg("hidden_dim") = 32,
        py::arg("latent_dim") = 16, py::arg("epochs") = 30,
        py::arg("lr") = 0.025, py::arg("disc_lr") = 0.001, py::arg("seed") = 0,
        py::arg("k") = 5, py::arg("prior") = "projection",
        py::arg("recon_weight") = 1.0, py::arg("gen_weight") = 0.05,
        "returns (embedding matrix, loss trace dict)");

  m.def("embed_cohort",
        [](const Cohort& cohort, int hidden_dim, int latent_dim, int epochs,
           double lr, double disc_lr, std::uint64_t seed, int k,
           const std::string& prior, double recon_weight, double gen_weight,
           int threads) {
          const auto results = embed_cohort(
              cohort,
              make_config(hidden_dim, latent_dim, epochs, lr, disc_lr, seed, k,
                          prior, recon_weight, gen_weight),
              threads);
          py::list zs, traces;
          for (const auto& [embedding, trace] : results) {
            zs.append(embedding.z);
            traces.append(trace_to_dict(trace));
          }
          return py::make_tuple(zs, traces);
        },
        py::arg("cohort"), py::arg("hidden_dim") = 32,
        py::arg("latent_dim") = 16, py::arg("epochs") = 30,
        py::arg("lr") = 0.025, py::arg("disc_lr") = 0.001, py::arg("seed") = 0,
        py::arg("k") = 5, py::arg("prior") = "projection",
        py::arg("recon_weight") = 1.0, py::arg("gen_weight") = 0.05,
        py::arg("threads") = 0,
        "returns ([embedding matrices], [loss trace dicts]) in cohort order");

  m.def("evaluate_protocol",
        [](const std::vector<Matrix>& embeddings,
           const std::vector<std::string>& labels,
           const std::vector<std::string>& class_names, int n_runs,
           double train_frac, std::uint64_t seed, double svm_reg,
           int svm_epochs) {
          const EvalReport report = evaluate_protocol(
              embeddings_from_arrays(embeddings), labels, class_names, n_runs,
              train_frac, seed, {svm_reg, svm_epochs});
          py::dict d;
          d["accuracies"] = report.accuracies;
          d["mean_accuracy"] = report.mean_accuracy;
          d["std_accuracy"] = report.std_accuracy;
          return d;
        },
        py::arg("embeddings"), py::arg("labels"), py::arg("class_names"),
        py::arg("n_runs") = 100, py::arg("train_frac") = 0.8,
        py::arg("seed") = 0, py::arg("svm_reg") = 1e-3,
        py::arg("svm_epochs") = 200);

  m.attr("__version__") = "0.1.0";
}
