#include "hcae/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "hcae/hypergraph.hpp"
#include "hcae/rng.hpp"

namespace hcae {

namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config key '" + key + "': invalid integer '" +
                         value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config key '" + key + "': invalid number '" + value +
                         "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ParameterError("config key '" + key + "': invalid bool '" + value + "'");
}

SyntheticParams parse_synthetic(const std::string& value) {
  // n_subjects,n_nodes,n_views,n_classes,signal
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string part;
  while (std::getline(ss, part, ',')) parts.push_back(part);
  if (parts.size() != 5) {
    throw ParameterError(
        "synthetic spec must be n_subjects,n_nodes,n_views,n_classes,signal: '" +
        value + "'");
  }
  SyntheticParams p;
  p.n_subjects = parse_int("synthetic.n_subjects", parts[0]);
  p.n_nodes = parse_int("synthetic.n_nodes", parts[1]);
  p.n_views = parse_int("synthetic.n_views", parts[2]);
  p.n_classes = parse_int("synthetic.n_classes", parts[3]);
  p.signal = parse_double("synthetic.signal", parts[4]);
  return p;
}

std::string synthetic_to_string(const SyntheticParams& p) {
  return std::to_string(p.n_subjects) + "," + std::to_string(p.n_nodes) + "," +
         std::to_string(p.n_views) + "," + std::to_string(p.n_classes) + "," +
         fmt_double(p.signal);
}

void write_degree_summary(const fs::path& file, const Cohort& cohort,
                          const RunConfig& cfg,
                          const std::vector<Hyperconnectome>& hypers) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write summary: " + file.string());
  out << "n_subjects = " << cohort.n_subjects() << '\n';
  out << "n_nodes = " << cohort.n_nodes() << '\n';
  out << "n_views = " << cohort.n_views() << '\n';
  out << "k = " << cfg.k << '\n';
  double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0, dsum = 0.0;
  long count = 0;
  for (const auto& h : hypers) {
    dmin = std::min(dmin, h.vertex_degrees.minCoeff());
    dmax = std::max(dmax, h.vertex_degrees.maxCoeff());
    dsum += h.vertex_degrees.sum();
    count += h.vertex_degrees.size();
  }
  out << "vertex_degree_min = " << fmt_double(dmin) << '\n';
  out << "vertex_degree_mean = " << fmt_double(dsum / static_cast<double>(count))
      << '\n';
  out << "vertex_degree_max = " << fmt_double(dmax) << '\n';
  out << "edge_degree = " << (cfg.k + 1) << '\n';
}

// cohort restricted to a single view (1-based), for the ablation axis
Cohort single_view_cohort(const Cohort& cohort, int view) {
  Cohort out;
  out.class_names = cohort.class_names;
  for (const auto& s : cohort.subjects) {
    MultiViewConnectome sub;
    sub.subject_id = s.subject_id;
    sub.label = s.label;
    sub.views.push_back(s.views[view - 1]);
    sub.views.back().view_id = 1;
    out.subjects.push_back(std::move(sub));
  }
  return out;
}

struct EmbedOutcome {
  std::vector<Embedding> embeddings;
  std::vector<std::string> labels;
  std::vector<std::pair<std::string, double>> recon_errors;
};

EmbedOutcome embed_in_memory(const Cohort& cohort, const RunConfig& cfg) {
  EmbedOutcome out;
  const auto results = embed_cohort(cohort, cfg.model_config(), cfg.threads);
  for (std::size_t i = 0; i < results.size(); ++i) {
    out.embeddings.push_back(results[i].first);
    out.labels.push_back(cohort.subjects[i].label);
    out.recon_errors.emplace_back(cohort.subjects[i].subject_id,
                                  results[i].second.final_recon_loss());
  }
  return out;
}

void write_trace(const fs::path& file, const TrainTrace& trace) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write trace: " + file.string());
  out << "epoch,recon_loss,disc_loss,gen_loss\n";
  out << "0," << fmt_double(trace.initial_recon_loss) << ",,\n";
  for (std::size_t e = 0; e < trace.epochs.size(); ++e) {
    out << (e + 1) << ',' << fmt_double(trace.epochs[e].recon_loss) << ','
        << fmt_double(trace.epochs[e].disc_loss) << ','
        << fmt_double(trace.epochs[e].gen_loss) << '\n';
  }
}

double read_final_recon(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open trace: " + file.string());
  std::string line, last;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  if (last.empty()) throw IoError("empty trace: " + file.string());
  std::stringstream ss(last);
  std::string field;
  std::getline(ss, field, ',');  // epoch
  std::getline(ss, field, ',');
  return parse_double("trace recon_loss", field);
}

}  // namespace

HcaeConfig RunConfig::model_config() const {
  HcaeConfig m;
  m.hidden_dim = hidden_dim;
  m.latent_dim = latent_dim;
  m.epochs = epochs;
  m.lr = lr;
  m.disc_lr = disc_lr;
  m.seed = seed;
  m.k = k;
  m.prior = parse_prior_policy(prior);
  m.recon_weight = recon_weight;
  m.gen_weight = gen_weight;
  return m;
}

Cohort RunConfig::load_source() const {
  if (!manifest.empty()) {
    return load_cohort(fs::path(manifest).parent_path(),
                       fs::path(manifest).filename());
  }
  return generate_synthetic_cohort(synthetic, seed);
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  return {
      {"manifest", manifest},
      {"synthetic", manifest.empty() ? synthetic_to_string(synthetic) : ""},
      {"k", std::to_string(k)},
      {"hidden_dim", std::to_string(hidden_dim)},
      {"latent_dim", std::to_string(latent_dim)},
      {"epochs", std::to_string(epochs)},
      {"lr", fmt_double(lr)},
      {"disc_lr", fmt_double(disc_lr)},
      {"prior", prior},
      {"recon_weight", fmt_double(recon_weight)},
      {"gen_weight", fmt_double(gen_weight)},
      {"n_runs", std::to_string(n_runs)},
      {"train_frac", fmt_double(train_frac)},
      {"svm_reg", fmt_double(svm_reg)},
      {"svm_epochs", std::to_string(svm_epochs)},
      {"seed", std::to_string(seed)},
      {"out", out},
      {"threads", std::to_string(threads)},
      {"ablate_views", ablate_views ? "true" : "false"},
  };
}

void apply_config_line(RunConfig& cfg, const std::string& key,
                       const std::string& value) {
  if (key == "manifest") cfg.manifest = value;
  else if (key == "synthetic") cfg.synthetic = parse_synthetic(value);
  else if (key == "k") cfg.k = parse_int(key, value);
  else if (key == "hidden_dim") cfg.hidden_dim = parse_int(key, value);
  else if (key == "latent_dim") cfg.latent_dim = parse_int(key, value);
  else if (key == "epochs") cfg.epochs = parse_int(key, value);
  else if (key == "lr") cfg.lr = parse_double(key, value);
  else if (key == "disc_lr") cfg.disc_lr = parse_double(key, value);
  else if (key == "prior") cfg.prior = value;
  else if (key == "recon_weight") cfg.recon_weight = parse_double(key, value);
  else if (key == "gen_weight") cfg.gen_weight = parse_double(key, value);
  else if (key == "n_runs") cfg.n_runs = parse_int(key, value);
  else if (key == "train_frac") cfg.train_frac = parse_double(key, value);
  else if (key == "svm_reg") cfg.svm_reg = parse_double(key, value);
  else if (key == "svm_epochs") cfg.svm_epochs = parse_int(key, value);
  else if (key == "seed") {
    try {
      std::size_t pos = 0;
      cfg.seed = std::stoull(value, &pos);
      if (pos != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ParameterError("config key 'seed': invalid integer '" + value + "'");
    }
  }
  else if (key == "out") cfg.out = value;
  else if (key == "threads") cfg.threads = parse_int(key, value);
  else if (key == "ablate_views") cfg.ablate_views = parse_bool(key, value);
  else throw ParameterError("unknown config key '" + key + "'");
}

RunConfig load_run_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config file: " + file.string());
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw ParameterError("config line " + std::to_string(line_no) +
                             ": expected key = value");
      }
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void write_resolved_config(const RunConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.resolved");
  if (!out) throw IoError("cannot write resolved config in " + dir.string());
  for (const auto& [key, value] : cfg.echo()) {
    out << key << " = " << value << '\n';
  }
}

int cmd_build(const RunConfig& cfg) {
  const Cohort cohort = cfg.load_source();
  const fs::path dir = fs::path(cfg.out) / "build";
  fs::create_directories(dir);
  std::vector<Hyperconnectome> hypers;
  for (const auto& subject : cohort.subjects) {
    auto [h, features] = build_hyperconnectome(subject, cfg.k);
    write_matrix_text(dir / ("incidence_" + subject.subject_id + ".txt"),
                      h.incidence);
    write_matrix_text(dir / ("propagation_" + subject.subject_id + ".txt"),
                      propagation_operator(h));
    hypers.push_back(std::move(h));
  }
  write_degree_summary(dir / "summary.txt", cohort, cfg, hypers);
  write_resolved_config(cfg, dir);
  return 0;
}

int cmd_embed(const RunConfig& cfg) {
  const Cohort cohort = cfg.load_source();
  const fs::path dir = fs::path(cfg.out) / "embed";
  fs::create_directories(dir);
  const auto results = embed_cohort_partial(cohort, cfg.model_config(), cfg.threads);

  std::ofstream index(dir / "cohort_index.csv");
  if (!index) throw IoError("cannot write cohort index in " + dir.string());
  index << "subject_id,label,embedding_file,trace_file\n";
  int failures = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& subject = cohort.subjects[i];
    if (!results[i].error.empty()) {
      std::cerr << "embed: subject " << subject.subject_id << " failed: "
                << results[i].error << '\n';
      ++failures;
      continue;
    }
    const std::string emb_file = "embedding_" + subject.subject_id + ".txt";
    const std::string trace_file = "trace_" + subject.subject_id + ".csv";
    write_matrix_text(dir / emb_file, results[i].embedding.z);
    write_trace(dir / trace_file, results[i].trace);
    index << subject.subject_id << ',' << subject.label << ',' << emb_file
          << ',' << trace_file << '\n';
  }
  write_resolved_config(cfg, dir);
  return failures == 0 ? 0 : 1;
}

int cmd_evaluate(const RunConfig& cfg) {
  const fs::path dir = fs::path(cfg.out) / "evaluate";
  const SvmOptions svm{cfg.svm_reg, cfg.svm_epochs};

  if (cfg.ablate_views) {
    // Fig.-2-style comparison: one row per single view plus the multi-view
    // run, all under the same seed so per-subject seeds coincide.
    const Cohort cohort = cfg.load_source();
    fs::create_directories(dir);
    std::ofstream table(dir / "ablation.csv");
    if (!table) throw IoError("cannot write ablation table in " + dir.string());
    table << "views,mean_accuracy,std_accuracy,mean_reconstruction_error\n";
    for (int view = 1; view <= cohort.n_views() + 1; ++view) {
      const bool multi = view > cohort.n_views();
      const Cohort sub = multi ? cohort : single_view_cohort(cohort, view);
      const EmbedOutcome outcome = embed_in_memory(sub, cfg);
      EvalReport report =
          evaluate_protocol(outcome.embeddings, outcome.labels, sub.class_names,
                            cfg.n_runs, cfg.train_frac, cfg.seed, svm);
      report.recon_errors = outcome.recon_errors;
      const std::string tag = multi ? "all" : "view_" + std::to_string(view);
      table << tag << ',' << fmt_double(report.mean_accuracy) << ','
            << fmt_double(report.std_accuracy) << ','
            << fmt_double(report.mean_recon_error()) << '\n';
      write_report(dir / ("report_" + tag + ".txt"), report);
      write_report_table(dir / ("runs_" + tag + ".csv"), report);
    }
    write_resolved_config(cfg, dir);
    return 0;
  }

  // plain evaluation over previously embedded subjects
  const fs::path embed_dir = fs::path(cfg.out) / "embed";
  const fs::path index_path = embed_dir / "cohort_index.csv";
  if (!fs::exists(index_path)) {
    throw IoError("missing embeddings: " + index_path.string() +
                  " (run the embed stage first)");
  }
  std::ifstream index(index_path);
  std::string line;
  std::getline(index, line);  // header
  std::vector<Embedding> embeddings;
  std::vector<std::string> labels;
  std::vector<std::string> class_names;
  std::vector<std::pair<std::string, double>> recon_errors;
  while (std::getline(index, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, label, emb_file, trace_file;
    std::getline(ss, id, ',');
    std::getline(ss, label, ',');
    std::getline(ss, emb_file, ',');
    std::getline(ss, trace_file, ',');
    Embedding e;
    e.subject_id = id;
    e.z = read_matrix_text(embed_dir / emb_file);
    embeddings.push_back(std::move(e));
    labels.push_back(label);
    if (std::find(class_names.begin(), class_names.end(), label) ==
        class_names.end()) {
      class_names.push_back(label);
    }
    recon_errors.emplace_back(id, read_final_recon(embed_dir / trace_file));
  }
  if (embeddings.empty()) {
    throw IoError("missing embeddings: empty index " + index_path.string());
  }

  EvalReport report = evaluate_protocol(embeddings, labels, class_names,
                                        cfg.n_runs, cfg.train_frac, cfg.seed, svm);
  report.recon_errors = std::move(recon_errors);
  report.config_echo = cfg.echo();
  fs::create_directories(dir);
  write_report(dir / "report.txt", report);
  write_report_table(dir / "runs.csv", report);
  write_resolved_config(cfg, dir);
  return 0;
}

int cmd_pipeline(const RunConfig& cfg) {
  if (int rc = cmd_build(cfg); rc != 0) return rc;
  if (int rc = cmd_embed(cfg); rc != 0) return rc;
  return cmd_evaluate(cfg);
}

int report_error_code(const std::exception& e) {
  std::cerr << "error: " << e.what() << '\n';
  if (dynamic_cast<const ParameterError*>(&e) ||
      dynamic_cast<const ValidationError*>(&e) ||
      dynamic_cast<const ProtocolError*>(&e) ||
      dynamic_cast<const IoError*>(&e)) {
    return 2;
  }
  return 1;
}

}  // namespace hcae
