#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hcae/data.hpp"
#include "hcae/hypergraph.hpp"
#include "hcae/numerics.hpp"
#include "hcae/rng.hpp"

namespace hcae {

enum class PriorPolicy {
  // real discriminator samples = stacked features through a fixed seeded
  // random projection to latent_dim, frozen per subject
  kProjection,
  // real samples = seeded standard normal draws, frozen per subject
  kGaussian,
};

PriorPolicy parse_prior_policy(const std::string& name);
std::string to_string(PriorPolicy p);

struct HcaeConfig {
  int hidden_dim = 32;
  int latent_dim = 16;
  std::vector<int> disc_hidden_dims = {64, 16};
  int epochs = 30;
  double lr = 0.025;
  double disc_lr = 0.001;
  std::uint64_t seed = 0;
  int k = 5;
  PriorPolicy prior = PriorPolicy::kProjection;
  double recon_weight = 1.0;
  // the adversarial term is mean-per-row while the reconstruction term is
  // mean-per-entry; a small weight keeps the regularizer from drowning the
  // autoencoding gradient
  double gen_weight = 0.05;

  void validate() const;  // throws ParameterError
};

// All trainable parameters. theta1/theta2 are the two hypergraph-convolution
// filters, decoder_w the dense reconstruction layer, disc the MLP layers of
// the adversarial discriminator (ReLU hidden layers, linear 1-unit output).
struct DenseLayer {
  Matrix w;  // in x out
  Matrix b;  // 1 x out
};

struct HcaeParams {
  Matrix theta1;     // (M*N) x hidden_dim
  Matrix theta2;     // hidden_dim x latent_dim
  Matrix decoder_w;  // latent_dim x (M*N)
  std::vector<DenseLayer> disc;

  ParamRefs generator_refs();          // theta1, theta2, decoder_w
  ParamRefs discriminator_refs();      // disc layer weights and biases
  ParamRefs all_refs();
  bool all_finite() const;
};

// Seeded Glorot-style uniform initialization (biases at a small constant).
HcaeParams init_params(int feature_dim, const HcaeConfig& cfg, Rng& rng);

struct Embedding {
  std::string subject_id;
  Matrix z;  // N x latent_dim

  // row-major flattening, used as the classifier feature vector
  Vector flattened() const;
};

struct EpochRecord {
  double recon_loss = 0.0;
  double disc_loss = 0.0;
  double gen_loss = 0.0;
};

struct TrainTrace {
  double initial_recon_loss = 0.0;  // at initialization, before any update
  std::vector<EpochRecord> epochs;  // state at the end of each epoch

  double final_recon_loss() const {
    return epochs.empty() ? initial_recon_loss : epochs.back().recon_loss;
  }
};

// Two-layer hypergraph-convolution encoder:
//   Y1 = relu(Delta X theta1),  Z = Delta Y1 theta2  (linear second layer)
Matrix encode(const StackedFeatures& features, const Matrix& prop,
              const HcaeParams& params);
Matrix encode(const StackedFeatures& features, const Hyperconnectome& h,
              const HcaeParams& params);

// Dense decoder; sigmoid turns logits into Bernoulli probabilities for each
// incidence entry. Output is N x (M*N).
Matrix decode(const Matrix& z, const HcaeParams& params);

// Mean binary cross-entropy between probabilities (clamped to
// [1e-7, 1-1e-7]) and the binary incidence matrix.
double reconstruction_loss(const Matrix& probs, const Matrix& incidence);

// One scalar logit per row of `samples`.
Vector discriminator_forward(const Matrix& samples, const HcaeParams& params);

struct AdversarialLosses {
  double disc_loss = 0.0;
  double gen_loss = 0.0;  // non-saturating -E[log D(z)]
};

// disc_loss = -1/2 mean[log s(D(real))] - 1/2 mean[log(1 - s(D(z)))]
// gen_loss  = -mean[log s(D(z))]
// computed from logits with stable log-sigmoids.
AdversarialLosses adversarial_losses(const Matrix& z, const Matrix& real_samples,
                                     const HcaeParams& params);

// Joint objective optimized by the encoder/decoder update:
//   recon_weight * reconstruction_loss + gen_weight * gen_loss
// with the discriminator held fixed. Gradients cover theta1, theta2 and
// decoder_w only.
GradientBundle generator_gradients(const StackedFeatures& features,
                                   const Matrix& prop, const Matrix& incidence,
                                   const Matrix& real_samples,
                                   const HcaeParams& params,
                                   double recon_weight, double gen_weight);
double generator_objective(const StackedFeatures& features, const Matrix& prop,
                           const Matrix& incidence, const Matrix& real_samples,
                           const HcaeParams& params, double recon_weight,
                           double gen_weight);

// Discriminator loss and its gradients w.r.t. the discriminator parameters
// only; z is treated as a constant (detached) batch of fake samples.
GradientBundle discriminator_gradients(const Matrix& z,
                                       const Matrix& real_samples,
                                       const HcaeParams& params);

// Trains one HCAE on one subject: per epoch, a discriminator update followed
// by a joint encoder/decoder update. Deterministic under cfg.seed.
std::tuple<HcaeParams, Embedding, TrainTrace> train_subject(
    const MultiViewConnectome& subject, const HcaeConfig& cfg);

// Per-subject training outcome; `error` is non-empty on failure.
struct SubjectResult {
  Embedding embedding;
  TrainTrace trace;
  std::string error;
};

// Independent train_subject per subject (optionally on a thread pool);
// results in cohort order regardless of scheduling. All subjects share
// cfg.seed, which keeps their latent bases aligned and the flattened
// embeddings comparable across subjects. Failures are recorded per subject
// so the remaining subjects still complete.
std::vector<SubjectResult> embed_cohort_partial(const Cohort& cohort,
                                                const HcaeConfig& cfg,
                                                int n_threads = 0);

// Same, but throws TrainingError with the subject id attached on the first
// failed subject.
std::vector<std::pair<Embedding, TrainTrace>> embed_cohort(
    const Cohort& cohort, const HcaeConfig& cfg, int n_threads = 0);

}  // namespace hcae
