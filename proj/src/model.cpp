#include "hcae/model.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace hcae {

namespace {

constexpr double kProbClamp = 1e-7;

double clamp_prob(double p) {
  return std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
}

// Running mean; exact for constant sequences, which pins the ln(2) anchor.
class RunningMean {
 public:
  void add(double x) {
    ++count_;
    mean_ += (x - mean_) / static_cast<double>(count_);
  }
  double value() const { return mean_; }

 private:
  double mean_ = 0.0;
  long count_ = 0;
};

Matrix glorot_uniform(int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  Matrix w(fan_in, fan_out);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      w(i, j) = rng.uniform(-limit, limit);
    }
  }
  return w;
}

struct DiscCache {
  std::vector<Matrix> inputs;  // input to each layer; inputs[0] = samples
  std::vector<Matrix> pre;     // preactivation per layer
  Vector logits;
};

DiscCache disc_forward_cache(const Matrix& samples, const HcaeParams& params) {
  DiscCache cache;
  Matrix a = samples;
  for (std::size_t l = 0; l < params.disc.size(); ++l) {
    const DenseLayer& layer = params.disc[l];
    if (a.cols() != layer.w.rows()) {
      throw ShapeError("discriminator: input shape " + detail::shape_str(a) +
                       " does not match layer weight " +
                       detail::shape_str(layer.w));
    }
    cache.inputs.push_back(a);
    Matrix pre = a * layer.w;
    pre.rowwise() += layer.b.row(0);
    cache.pre.push_back(pre);
    const bool last = (l + 1 == params.disc.size());
    a = last ? pre : relu(pre);
  }
  cache.logits = a.col(0);
  return cache;
}

// Backpropagates d(loss)/d(logits) through the MLP. Accumulates layer
// gradients into `accum` when non-null; returns d(loss)/d(input).
Matrix disc_backward(const DiscCache& cache, const HcaeParams& params,
                     const Vector& dlogits, GradientBundle* accum) {
  Matrix da = dlogits;
  for (std::size_t i = params.disc.size(); i-- > 0;) {
    const DenseLayer& layer = params.disc[i];
    const bool last = (i + 1 == params.disc.size());
    Matrix dpre = last
        ? da
        : hadamard(da, (cache.pre[i].array() > 0.0).cast<double>().matrix());
    if (accum) {
      const std::string tag = "disc." + std::to_string(i);
      accum->grads[tag + ".w"] += cache.inputs[i].transpose() * dpre;
      accum->grads[tag + ".b"] += dpre.colwise().sum();
    }
    da = dpre * layer.w.transpose();
  }
  return da;
}

void zero_disc_grads(const HcaeParams& params, GradientBundle& bundle) {
  for (std::size_t i = 0; i < params.disc.size(); ++i) {
    const std::string tag = "disc." + std::to_string(i);
    bundle.grads[tag + ".w"] =
        Matrix::Zero(params.disc[i].w.rows(), params.disc[i].w.cols());
    bundle.grads[tag + ".b"] =
        Matrix::Zero(params.disc[i].b.rows(), params.disc[i].b.cols());
  }
}

struct EncoderCache {
  Matrix dx;   // Delta * X
  Matrix u1;   // Delta * X * theta1 (pre-relu)
  Matrix y1;   // relu(u1)
  Matrix dy1;  // Delta * y1
  Matrix z;    // dy1 * theta2
};

EncoderCache encode_cache(const StackedFeatures& features, const Matrix& prop,
                          const HcaeParams& params) {
  EncoderCache c;
  c.dx = matmul(prop, features.values);
  c.u1 = matmul(c.dx, params.theta1);
  c.y1 = relu(c.u1);
  c.dy1 = matmul(prop, c.y1);
  c.z = matmul(c.dy1, params.theta2);
  return c;
}

// d(recon_loss)/d(logit); zero where the probability is clamped, matching
// the loss actually evaluated.
Matrix recon_logit_grad(const Matrix& probs, const Matrix& incidence) {
  const double n = static_cast<double>(probs.size());
  Matrix g(probs.rows(), probs.cols());
  for (Eigen::Index j = 0; j < probs.cols(); ++j) {
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      const double p = probs(i, j);
      g(i, j) = (p <= kProbClamp || p >= 1.0 - kProbClamp)
                    ? 0.0
                    : (p - incidence(i, j)) / n;
    }
  }
  return g;
}

Matrix make_real_samples(const StackedFeatures& features,
                         const HcaeConfig& cfg, Rng& rng) {
  const Eigen::Index n = features.values.rows();
  if (cfg.prior == PriorPolicy::kGaussian) {
    Matrix real(n, cfg.latent_dim);
    for (Eigen::Index i = 0; i < real.rows(); ++i) {
      for (Eigen::Index j = 0; j < real.cols(); ++j) real(i, j) = rng.normal();
    }
    return real;
  }
  // fixed random projection of the stacked features to latent_dim
  const Eigen::Index f = features.values.cols();
  Matrix proj(f, cfg.latent_dim);
  const double s = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
  for (Eigen::Index i = 0; i < proj.rows(); ++i) {
    for (Eigen::Index j = 0; j < proj.cols(); ++j) proj(i, j) = s * rng.normal();
  }
  return features.values * proj;
}

}  // namespace

PriorPolicy parse_prior_policy(const std::string& name) {
  if (name == "projection") return PriorPolicy::kProjection;
  if (name == "gaussian") return PriorPolicy::kGaussian;
  throw ParameterError("unknown prior policy '" + name +
                       "' (expected projection|gaussian)");
}

std::string to_string(PriorPolicy p) {
  return p == PriorPolicy::kProjection ? "projection" : "gaussian";
}

void HcaeConfig::validate() const {
  if (hidden_dim < 1 || latent_dim < 1) {
    throw ParameterError("hidden_dim and latent_dim must be >= 1");
  }
  for (int d : disc_hidden_dims) {
    if (d < 1) throw ParameterError("discriminator hidden dims must be >= 1");
  }
  if (epochs < 1) throw ParameterError("epochs must be >= 1");
  if (!(lr > 0.0) || !(disc_lr > 0.0)) {
    throw ParameterError("learning rates must be > 0");
  }
  if (k < 1) throw ParameterError("k must be >= 1");
}

ParamRefs HcaeParams::generator_refs() {
  return {{"theta1", &theta1}, {"theta2", &theta2}, {"decoder_w", &decoder_w}};
}

ParamRefs HcaeParams::discriminator_refs() {
  ParamRefs refs;
  for (std::size_t i = 0; i < disc.size(); ++i) {
    const std::string tag = "disc." + std::to_string(i);
    refs.emplace_back(tag + ".w", &disc[i].w);
    refs.emplace_back(tag + ".b", &disc[i].b);
  }
  return refs;
}

ParamRefs HcaeParams::all_refs() {
  ParamRefs refs = generator_refs();
  for (auto& r : discriminator_refs()) refs.push_back(r);
  return refs;
}

bool HcaeParams::all_finite() const {
  if (!theta1.allFinite() || !theta2.allFinite() || !decoder_w.allFinite()) {
    return false;
  }
  for (const auto& layer : disc) {
    if (!layer.w.allFinite() || !layer.b.allFinite()) return false;
  }
  return true;
}

HcaeParams init_params(int feature_dim, const HcaeConfig& cfg, Rng& rng) {
  HcaeParams p;
  p.theta1 = glorot_uniform(feature_dim, cfg.hidden_dim, rng);
  p.theta2 = glorot_uniform(cfg.hidden_dim, cfg.latent_dim, rng);
  p.decoder_w = glorot_uniform(cfg.latent_dim, feature_dim, rng);
  int in_dim = cfg.latent_dim;
  // biases start at a small positive constant, not zero: a fully dead relu
  // row would otherwise leave the next preactivation sitting exactly on the
  // kink, where the derivative is undefined
  for (int h : cfg.disc_hidden_dims) {
    p.disc.push_back({glorot_uniform(in_dim, h, rng), Matrix::Constant(1, h, 0.01)});
    in_dim = h;
  }
  p.disc.push_back({glorot_uniform(in_dim, 1, rng), Matrix::Constant(1, 1, 0.01)});
  return p;
}

Vector Embedding::flattened() const {
  Vector out(z.size());
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) out(idx++) = z(i, j);
  }
  return out;
}

Matrix encode(const StackedFeatures& features, const Matrix& prop,
              const HcaeParams& params) {
  return encode_cache(features, prop, params).z;
}

Matrix encode(const StackedFeatures& features, const Hyperconnectome& h,
              const HcaeParams& params) {
  return encode(features, propagation_operator(h), params);
}

Matrix decode(const Matrix& z, const HcaeParams& params) {
  return sigmoid(matmul(z, params.decoder_w));
}

double reconstruction_loss(const Matrix& probs, const Matrix& incidence) {
  if (probs.rows() != incidence.rows() || probs.cols() != incidence.cols()) {
    throw ShapeError("reconstruction_loss: shape mismatch " +
                     detail::shape_str(probs) + " vs " +
                     detail::shape_str(incidence));
  }
  RunningMean mean;
  for (Eigen::Index j = 0; j < probs.cols(); ++j) {
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      const double q = clamp_prob(probs(i, j));
      const double h = incidence(i, j);
      mean.add(-(h * std::log(q) + (1.0 - h) * std::log(1.0 - q)));
    }
  }
  return mean.value();
}

Vector discriminator_forward(const Matrix& samples, const HcaeParams& params) {
  return disc_forward_cache(samples, params).logits;
}

AdversarialLosses adversarial_losses(const Matrix& z, const Matrix& real_samples,
                                     const HcaeParams& params) {
  if (z.rows() == 0 || real_samples.rows() == 0) {
    throw ParameterError("adversarial_losses: empty sample set");
  }
  const Vector real_logits = discriminator_forward(real_samples, params);
  const Vector fake_logits = discriminator_forward(z, params);
  RunningMean real_term;  // -log D(real)
  for (Eigen::Index i = 0; i < real_logits.size(); ++i) {
    real_term.add(-log_sigmoid(real_logits(i)));
  }
  RunningMean fake_term;  // -log(1 - D(z))
  RunningMean gen_term;   // -log D(z)
  for (Eigen::Index i = 0; i < fake_logits.size(); ++i) {
    fake_term.add(-log_one_minus_sigmoid(fake_logits(i)));
    gen_term.add(-log_sigmoid(fake_logits(i)));
  }
  AdversarialLosses out;
  out.disc_loss = 0.5 * real_term.value() + 0.5 * fake_term.value();
  out.gen_loss = gen_term.value();
  return out;
}

double generator_objective(const StackedFeatures& features, const Matrix& prop,
                           const Matrix& incidence, const Matrix& real_samples,
                           const HcaeParams& params, double recon_weight,
                           double gen_weight) {
  const EncoderCache c = encode_cache(features, prop, params);
  const Matrix probs = decode(c.z, params);
  const double recon = reconstruction_loss(probs, incidence);
  const double gen = adversarial_losses(c.z, real_samples, params).gen_loss;
  return recon_weight * recon + gen_weight * gen;
}

GradientBundle generator_gradients(const StackedFeatures& features,
                                   const Matrix& prop, const Matrix& incidence,
                                   const Matrix& real_samples,
                                   const HcaeParams& params,
                                   double recon_weight, double gen_weight) {
  const EncoderCache c = encode_cache(features, prop, params);
  const Matrix logits = matmul(c.z, params.decoder_w);
  const Matrix probs = sigmoid(logits);

  GradientBundle bundle;
  const double recon = reconstruction_loss(probs, incidence);
  const AdversarialLosses adv = adversarial_losses(c.z, real_samples, params);
  bundle.loss = recon_weight * recon + gen_weight * adv.gen_loss;

  // reconstruction branch
  const Matrix dlogits = recon_weight * recon_logit_grad(probs, incidence);
  bundle.grads["decoder_w"] = c.z.transpose() * dlogits;
  Matrix dz = dlogits * params.decoder_w.transpose();

  // generator-fooling branch through the frozen discriminator
  const DiscCache dcache = disc_forward_cache(c.z, params);
  Vector dgen(dcache.logits.size());
  const double inv_n = 1.0 / static_cast<double>(dcache.logits.size());
  for (Eigen::Index i = 0; i < dgen.size(); ++i) {
    // d/dx of -log s(x) is s(x) - 1
    dgen(i) = gen_weight * inv_n * (sigmoid_scalar(dcache.logits(i)) - 1.0);
  }
  dz += disc_backward(dcache, params, dgen, nullptr);

  // back through the two convolution layers
  bundle.grads["theta2"] = c.dy1.transpose() * dz;
  const Matrix db = dz * params.theta2.transpose();      // d(Delta*y1)
  const Matrix dy1 = prop.transpose() * db;              // d(y1)
  const Matrix du1 =
      hadamard(dy1, (c.u1.array() > 0.0).cast<double>().matrix());
  bundle.grads["theta1"] = c.dx.transpose() * du1;
  return bundle;
}

GradientBundle discriminator_gradients(const Matrix& z,
                                       const Matrix& real_samples,
                                       const HcaeParams& params) {
  if (z.rows() == 0 || real_samples.rows() == 0) {
    throw ParameterError("discriminator_gradients: empty sample set");
  }
  GradientBundle bundle;
  zero_disc_grads(params, bundle);

  const DiscCache real_cache = disc_forward_cache(real_samples, params);
  const DiscCache fake_cache = disc_forward_cache(z, params);

  RunningMean real_term, fake_term;
  Vector dreal(real_cache.logits.size());
  const double half_inv_r = 0.5 / static_cast<double>(real_cache.logits.size());
  for (Eigen::Index i = 0; i < dreal.size(); ++i) {
    real_term.add(-log_sigmoid(real_cache.logits(i)));
    dreal(i) = half_inv_r * (sigmoid_scalar(real_cache.logits(i)) - 1.0);
  }
  Vector dfake(fake_cache.logits.size());
  const double half_inv_f = 0.5 / static_cast<double>(fake_cache.logits.size());
  for (Eigen::Index i = 0; i < dfake.size(); ++i) {
    fake_term.add(-log_one_minus_sigmoid(fake_cache.logits(i)));
    // d/dx of -log(1 - s(x)) is s(x)
    dfake(i) = half_inv_f * sigmoid_scalar(fake_cache.logits(i));
  }
  bundle.loss = 0.5 * real_term.value() + 0.5 * fake_term.value();
  disc_backward(real_cache, params, dreal, &bundle);
  disc_backward(fake_cache, params, dfake, &bundle);
  return bundle;
}

std::tuple<HcaeParams, Embedding, TrainTrace> train_subject(
    const MultiViewConnectome& subject, const HcaeConfig& cfg) {
  cfg.validate();
  const int n = subject.n_nodes();
  if (cfg.k > n - 1) {
    throw ParameterError("train_subject: k = " + std::to_string(cfg.k) +
                         " out of range for N = " + std::to_string(n));
  }
  auto [h, features] = build_hyperconnectome(subject, cfg.k);
  const Matrix prop = propagation_operator(h);
  const int feature_dim = static_cast<int>(features.values.cols());

  Rng rng(cfg.seed);
  HcaeParams params = init_params(feature_dim, cfg, rng);
  const Matrix real = make_real_samples(features, cfg, rng);

  const ParamRefs gen_refs = params.generator_refs();
  const ParamRefs disc_refs = params.discriminator_refs();
  AdamState gen_state, disc_state;

  TrainTrace trace;
  trace.initial_recon_loss =
      reconstruction_loss(decode(encode(features, prop, params), params),
                          h.incidence);
  trace.epochs.reserve(cfg.epochs);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // discriminator step on the current (detached) embedding
    const Matrix z = encode(features, prop, params);
    const GradientBundle dgrads = discriminator_gradients(z, real, params);
    adaptive_sgd_step(disc_refs, dgrads, disc_state, cfg.disc_lr);

    // joint encoder/decoder step against the updated discriminator
    const GradientBundle ggrads =
        generator_gradients(features, prop, h.incidence, real, params,
                            cfg.recon_weight, cfg.gen_weight);
    adaptive_sgd_step(gen_refs, ggrads, gen_state, cfg.lr);

    if (!params.all_finite()) {
      throw TrainingError("train_subject: non-finite parameters at epoch " +
                          std::to_string(epoch + 1));
    }

    // end-of-epoch evaluation for the trace
    const Matrix z_now = encode(features, prop, params);
    EpochRecord rec;
    rec.recon_loss = reconstruction_loss(decode(z_now, params), h.incidence);
    const AdversarialLosses adv = adversarial_losses(z_now, real, params);
    rec.disc_loss = adv.disc_loss;
    rec.gen_loss = adv.gen_loss;
    if (!std::isfinite(rec.recon_loss) || !std::isfinite(rec.disc_loss) ||
        !std::isfinite(rec.gen_loss)) {
      throw TrainingError("train_subject: non-finite loss at epoch " +
                          std::to_string(epoch + 1));
    }
    trace.epochs.push_back(rec);
  }

  Embedding embedding;
  embedding.subject_id = subject.subject_id;
  embedding.z = encode(features, prop, params);
  return {std::move(params), std::move(embedding), std::move(trace)};
}

std::vector<SubjectResult> embed_cohort_partial(const Cohort& cohort,
                                                const HcaeConfig& cfg,
                                                int n_threads) {
  cfg.validate();
  const int n = cohort.n_subjects();
  std::vector<SubjectResult> results(n);

  // Every subject trains from the same seeded initialization. Distinct
  // per-subject seeds would put each embedding in an unrelated latent basis,
  // making flattened embeddings incomparable across subjects and the
  // downstream classification meaningless.
  auto run_one = [&](int i) {
    results[i].embedding.subject_id = cohort.subjects[i].subject_id;
    try {
      auto [params, embedding, trace] = train_subject(cohort.subjects[i], cfg);
      results[i].embedding = std::move(embedding);
      results[i].trace = std::move(trace);
    } catch (const std::exception& e) {
      results[i].error = e.what();
    }
  };

  if (n_threads <= 0) {
    n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
  }
  n_threads = std::min(n_threads, n);
  if (n_threads <= 1) {
    for (int i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          run_one(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return results;
}

std::vector<std::pair<Embedding, TrainTrace>> embed_cohort(
    const Cohort& cohort, const HcaeConfig& cfg, int n_threads) {
  auto partial = embed_cohort_partial(cohort, cfg, n_threads);
  std::vector<std::pair<Embedding, TrainTrace>> results;
  results.reserve(partial.size());
  for (std::size_t i = 0; i < partial.size(); ++i) {
    if (!partial[i].error.empty()) {
      throw TrainingError("subject " + cohort.subjects[i].subject_id + ": " +
                          partial[i].error);
    }
    results.emplace_back(std::move(partial[i].embedding),
                         std::move(partial[i].trace));
  }
  return results;
}

}  // namespace hcae
