#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "hcae/pipeline.hpp"

namespace {

struct FlagValues {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  std::optional<int> epochs;
  std::optional<int> hidden_dim;
  std::optional<int> latent_dim;
  std::optional<int> runs;
  std::optional<double> train_frac;
  std::optional<double> lr;
  std::optional<double> disc_lr;
  std::optional<std::string> prior;
  std::optional<std::string> out;
  std::optional<std::string> manifest;
  std::optional<std::string> synthetic;
  std::optional<int> threads;
  bool ablate_views = false;
};

void add_common_flags(CLI::App* cmd, FlagValues& v) {
  cmd->add_option("--config", v.config, "flat key = value config file");
  cmd->add_option("--seed", v.seed, "top-level seed; all randomness derives from it");
  cmd->add_option("--k", v.k, "neighbors per hyperedge");
  cmd->add_option("--epochs", v.epochs, "training epochs per subject");
  cmd->add_option("--hidden-dim", v.hidden_dim, "first convolution width");
  cmd->add_option("--latent-dim", v.latent_dim, "embedding width");
  cmd->add_option("--runs", v.runs, "repeated train/test splits");
  cmd->add_option("--train-frac", v.train_frac, "training fraction per split");
  cmd->add_option("--lr", v.lr, "encoder/decoder learning rate");
  cmd->add_option("--disc-lr", v.disc_lr, "discriminator learning rate");
  cmd->add_option("--prior", v.prior, "projection|gaussian");
  cmd->add_option("--out", v.out, "output directory");
  cmd->add_option("--manifest", v.manifest, "cohort manifest file");
  cmd->add_option("--synthetic", v.synthetic,
                  "n_subjects,n_nodes,n_views,n_classes,signal");
  cmd->add_option("--threads", v.threads, "worker threads (0 = auto)");
  cmd->add_flag("--ablate-views", v.ablate_views,
                "evaluate each single view and the multi-view stack");
}

hcae::RunConfig resolve(const FlagValues& v) {
  hcae::RunConfig cfg;
  if (v.config) cfg = hcae::load_run_config(*v.config);
  // flags take precedence over file values
  if (v.seed) cfg.seed = *v.seed;
  if (v.k) cfg.k = *v.k;
  if (v.epochs) cfg.epochs = *v.epochs;
  if (v.hidden_dim) cfg.hidden_dim = *v.hidden_dim;
  if (v.latent_dim) cfg.latent_dim = *v.latent_dim;
  if (v.runs) cfg.n_runs = *v.runs;
  if (v.train_frac) cfg.train_frac = *v.train_frac;
  if (v.lr) cfg.lr = *v.lr;
  if (v.disc_lr) cfg.disc_lr = *v.disc_lr;
  if (v.prior) cfg.prior = *v.prior;
  if (v.out) cfg.out = *v.out;
  if (v.manifest) cfg.manifest = *v.manifest;
  if (v.synthetic) {
    hcae::apply_config_line(cfg, "synthetic", *v.synthetic);
    cfg.manifest.clear();
  }
  if (v.threads) cfg.threads = *v.threads;
  if (v.ablate_views) cfg.ablate_views = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-view hyperconnectome autoencoder pipeline"};
  app.require_subcommand(1);

  FlagValues build_v, embed_v, eval_v, pipe_v;
  CLI::App* build = app.add_subcommand(
      "build", "construct hyperconnectomes and propagation operators");
  add_common_flags(build, build_v);
  CLI::App* embed = app.add_subcommand(
      "embed", "train one autoencoder per subject and write embeddings");
  add_common_flags(embed, embed_v);
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "SVM accuracy over repeated stratified splits");
  add_common_flags(evaluate, eval_v);
  CLI::App* pipeline = app.add_subcommand(
      "pipeline", "build, embed and evaluate in sequence");
  add_common_flags(pipeline, pipe_v);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (build->parsed()) return hcae::cmd_build(resolve(build_v));
    if (embed->parsed()) return hcae::cmd_embed(resolve(embed_v));
    if (evaluate->parsed()) return hcae::cmd_evaluate(resolve(eval_v));
    if (pipeline->parsed()) return hcae::cmd_pipeline(resolve(pipe_v));
  } catch (const std::exception& e) {
    return hcae::report_error_code(e);
  }
  return 2;
}
