#include "cogs/vae.hpp"

#include <algorithm>
#include <cmath>

#include "cogs/errors.hpp"
#include "cogs/rng.hpp"
#include "cogs/stats.hpp"

namespace cogs {

namespace {

using RowVec = Eigen::RowVectorXd;

// Gate slices of the packed 4H pre-activation: [input, forget, cell, output].
struct LstmStep {
  RowVec i, f, g, o, c, tanh_c, h;
};

struct LstmWeights {
  Matrix wx, wh, b;
};

LstmStep lstm_forward(const LstmWeights& w, const RowVec& x,
                      const RowVec& h_prev, const RowVec& c_prev) {
  const int hd = static_cast<int>(h_prev.size());
  const RowVec a = x * w.wx + h_prev * w.wh + w.b.row(0);
  LstmStep s;
  s.i.resize(hd);
  s.f.resize(hd);
  s.g.resize(hd);
  s.o.resize(hd);
  for (int k = 0; k < hd; ++k) {
    s.i(k) = stable_sigmoid(a(k));
    s.f(k) = stable_sigmoid(a(hd + k));
    s.g(k) = std::tanh(a(2 * hd + k));
    s.o(k) = stable_sigmoid(a(3 * hd + k));
  }
  s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.g);
  s.tanh_c = s.c.array().tanh().matrix();
  s.h = s.o.cwiseProduct(s.tanh_c);
  return s;
}

struct LstmGrads {
  MatrixMap wx, wh, b;
};

// Backward through one step. dh/dc are the gradients flowing into (h_t, c_t);
// returns gradients for (h_{t-1}, c_{t-1}) and accumulates weight grads.
// dx_out, when non-null, receives the gradient w.r.t. the step input.
void lstm_backward(const LstmWeights& w, LstmGrads& g, const LstmStep& s,
                   const RowVec& x, const RowVec& h_prev, const RowVec& c_prev,
                   const RowVec& dh, const RowVec& dc_in, RowVec& dh_prev,
                   RowVec& dc_prev, RowVec* dx_out) {
  const int hd = static_cast<int>(dh.size());
  RowVec dc = dc_in + dh.cwiseProduct(s.o)
                          .cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());
  const RowVec do_ = dh.cwiseProduct(s.tanh_c);
  const RowVec di = dc.cwiseProduct(s.g);
  const RowVec dg = dc.cwiseProduct(s.i);
  const RowVec df = dc.cwiseProduct(c_prev);
  dc_prev = dc.cwiseProduct(s.f);

  RowVec da(4 * hd);
  for (int k = 0; k < hd; ++k) {
    da(k) = di(k) * s.i(k) * (1.0 - s.i(k));
    da(hd + k) = df(k) * s.f(k) * (1.0 - s.f(k));
    da(2 * hd + k) = dg(k) * (1.0 - s.g(k) * s.g(k));
    da(3 * hd + k) = do_(k) * s.o(k) * (1.0 - s.o(k));
  }
  g.wx += x.transpose() * da;
  g.wh += h_prev.transpose() * da;
  g.b.row(0) += da;
  dh_prev = da * w.wh.transpose();
  if (dx_out) *dx_out = da * w.wx.transpose();
}

LstmWeights enc_weights(const VaeModel& m) {
  return {m.params.value("enc.wx"), m.params.value("enc.wh"),
          m.params.value("enc.bias")};
}

LstmWeights dec_weights(const VaeModel& m) {
  return {m.params.value("dec.wx"), m.params.value("dec.wh"),
          m.params.value("dec.bias")};
}

RowVec point_row(const Point& p) {
  RowVec r(2);
  r << p.x, p.y;
  return r;
}

// Encoder forward over a sequence; returns all step caches.
std::vector<LstmStep> run_encoder(const VaeModel& model, const LstmWeights& w,
                                  std::span<const Point> seq) {
  const int hd = model.config.hidden_dim;
  RowVec h = RowVec::Zero(hd);
  RowVec c = RowVec::Zero(hd);
  std::vector<LstmStep> steps;
  steps.reserve(seq.size());
  for (const Point& p : seq) {
    LstmStep s = lstm_forward(w, point_row(p), h, c);
    h = s.h;
    c = s.c;
    steps.push_back(std::move(s));
  }
  return steps;
}

struct DecoderRun {
  std::vector<LstmStep> steps;
  std::vector<RowVec> inputs;  // per step: [prev point, z]
  std::vector<RowVec> outputs; // per step, 1x2 in (0,1)
  RowVec h0, c0, pre_h0, pre_c0;
};

// Each decoder step sees the previous point concatenated with z; without
// the per-step conditioning a teacher-forced sequence decoder learns to
// ignore the latent entirely (posterior collapse).
DecoderRun run_decoder(const VaeModel& model, const RowVec& z,
                       std::span<const Point> teacher) {
  const int n = model.config.n;
  const int ld = model.config.latent_dim;
  DecoderRun run;
  const Matrix z2h = model.params.value("dec.z2h.w");
  const Matrix z2hb = model.params.value("dec.z2h.bias");
  const Matrix z2c = model.params.value("dec.z2c.w");
  const Matrix z2cb = model.params.value("dec.z2c.bias");
  run.pre_h0 = z * z2h + z2hb.row(0);
  run.pre_c0 = z * z2c + z2cb.row(0);
  run.h0 = run.pre_h0.array().tanh().matrix();
  run.c0 = run.pre_c0.array().tanh().matrix();

  const LstmWeights w = dec_weights(model);
  const Matrix out_w = model.params.value("out.w");
  const Matrix out_b = model.params.value("out.bias");
  const Matrix start = model.params.value("dec.start");

  RowVec h = run.h0;
  RowVec c = run.c0;
  run.steps.reserve(n);
  run.inputs.reserve(n);
  run.outputs.reserve(n);
  for (int t = 0; t < n; ++t) {
    RowVec input(2 + ld);
    if (t == 0) {
      input << start.row(0), z;
    } else if (!teacher.empty()) {
      input << point_row(teacher[t - 1]), z;
    } else {
      input << run.outputs.back(), z;
    }
    LstmStep s = lstm_forward(w, input, h, c);
    const RowVec pre = s.h * out_w + out_b.row(0);
    RowVec y(2);
    y(0) = stable_sigmoid(pre(0));
    y(1) = stable_sigmoid(pre(1));
    h = s.h;
    c = s.c;
    run.steps.push_back(std::move(s));
    run.inputs.push_back(std::move(input));
    run.outputs.push_back(std::move(y));
  }
  return run;
}

} // namespace

void VaeConfig::validate() const {
  if (n < 2) throw InvalidArgumentError("vae config: n must be >= 2");
  if (latent_dim < 2)
    throw InvalidArgumentError("vae config: latent_dim must be >= 2");
  if (hidden_dim < 1)
    throw InvalidArgumentError("vae config: hidden_dim must be >= 1");
}

nlohmann::ordered_json VaeConfig::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["latent_dim"] = latent_dim;
  j["hidden_dim"] = hidden_dim;
  return j;
}

VaeConfig VaeConfig::from_json(const nlohmann::json& j) {
  VaeConfig c;
  c.n = j.at("n").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.validate();
  return c;
}

VaeModel VaeModel::create(const VaeConfig& config, std::uint64_t seed) {
  config.validate();
  VaeModel m;
  m.config = config;
  const int hd = config.hidden_dim;
  const int ld = config.latent_dim;
  m.params.add("enc.wx", 2, 4 * hd);
  m.params.add("enc.wh", hd, 4 * hd);
  m.params.add("enc.bias", 1, 4 * hd);
  m.params.add("mu.w", hd, ld);
  m.params.add("mu.bias", 1, ld);
  m.params.add("logvar.w", hd, ld);
  m.params.add("logvar.bias", 1, ld);
  m.params.add("dec.z2h.w", ld, hd);
  m.params.add("dec.z2h.bias", 1, hd);
  m.params.add("dec.z2c.w", ld, hd);
  m.params.add("dec.z2c.bias", 1, hd);
  m.params.add("dec.wx", 2 + ld, 4 * hd);
  m.params.add("dec.wh", hd, 4 * hd);
  m.params.add("dec.bias", 1, 4 * hd);
  m.params.add("out.w", hd, 2);
  m.params.add("out.bias", 1, 2);
  m.params.add("dec.start", 1, 2);
  m.params.init_uniform(seed);
  // Posterior variance starts small (sigma ~ 0.14) so the latent signal
  // survives the switch from the deterministic warm phase to stochastic
  // training.
  m.params.value("logvar.bias").setConstant(-4.0);
  return m;
}

std::vector<Point> canonicalize_sequence(const TspInstance& instance) {
  std::vector<Point> seq = instance.points;
  std::sort(seq.begin(), seq.end(), [](const Point& a, const Point& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  });
  return seq;
}

double gaussian_kl(std::span<const double> mu, std::span<const double> logvar) {
  if (mu.size() != logvar.size())
    throw InvalidArgumentError("gaussian_kl: dimension mismatch");
  double kl = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k)
    kl += 0.5 * (mu[k] * mu[k] + std::exp(logvar[k]) - 1.0 - logvar[k]);
  return kl;
}

double reconstruction_mse(std::span<const std::vector<Point>> targets,
                          std::span<const std::vector<Point>> recons) {
  if (targets.size() != recons.size() || targets.empty())
    throw InvalidArgumentError("reconstruction_mse: batch mismatch");
  double sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].size() != recons[i].size())
      throw InvalidArgumentError("reconstruction_mse: sequence length mismatch");
    for (std::size_t t = 0; t < targets[i].size(); ++t) {
      const double dx = targets[i][t].x - recons[i][t].x;
      const double dy = targets[i][t].y - recons[i][t].y;
      sq += dx * dx + dy * dy;
      count += 2;
    }
  }
  return sq / static_cast<double>(count);
}

ElboResult vae_elbo_loss(VaeModel& model,
                         std::span<const std::vector<Point>> sequences,
                         double kl_weight, std::uint64_t seed, bool with_grad,
                         double noise_scale, double kl_floor_per_dim) {
  if (sequences.empty())
    throw InvalidArgumentError("vae_elbo_loss: empty batch");
  const int n = model.config.n;
  for (const auto& s : sequences)
    if (static_cast<int>(s.size()) != n)
      throw InvalidArgumentError("vae_elbo_loss: sequence length differs from config n");

  const int b = static_cast<int>(sequences.size());
  const int hd = model.config.hidden_dim;
  const int ld = model.config.latent_dim;

  // Noise is drawn up front from its own stream so it never depends on the
  // parameters (finite-difference checks rely on this).
  Rng noise(derive_seed(seed, "vae.eps"));
  std::vector<RowVec> eps(b);
  for (auto& e : eps) {
    e.resize(ld);
    for (int k = 0; k < ld; ++k) e(k) = noise_scale * noise.normal();
  }

  if (with_grad) model.params.zero_grads();
  const LstmWeights enc_w = enc_weights(model);
  const Matrix mu_w = model.params.value("mu.w");
  const Matrix mu_b = model.params.value("mu.bias");
  const Matrix lv_w = model.params.value("logvar.w");
  const Matrix lv_b = model.params.value("logvar.bias");

  ElboResult res;
  double kl_floor_total = 0.0;
  const double recon_denom = static_cast<double>(b) * n * 2.0;

  for (int i = 0; i < b; ++i) {
    const auto& seq = sequences[i];
    const std::vector<LstmStep> enc_steps = run_encoder(model, enc_w, seq);
    const RowVec h_final = enc_steps.back().h;
    const RowVec mu = h_final * mu_w + mu_b.row(0);
    const RowVec lv = h_final * lv_w + lv_b.row(0);
    const RowVec sigma = (0.5 * lv.array()).exp().matrix();
    const RowVec z = mu + sigma.cwiseProduct(eps[i]);

    DecoderRun dec = run_decoder(model, z, seq);

    double sq = 0.0;
    for (int t = 0; t < n; ++t) {
      const double dx = dec.outputs[t](0) - seq[t].x;
      const double dy = dec.outputs[t](1) - seq[t].y;
      sq += dx * dx + dy * dy;
    }
    res.reconstruction += sq / recon_denom;
    double kl = 0.0;
    double kl_floored = 0.0;
    std::vector<bool> dim_active(ld);
    for (int k = 0; k < ld; ++k) {
      const double kl_dim =
          0.5 * (mu(k) * mu(k) + std::exp(lv(k)) - 1.0 - lv(k));
      kl += kl_dim;
      dim_active[k] = kl_dim > kl_floor_per_dim;
      kl_floored += std::max(kl_dim, kl_floor_per_dim);
    }
    res.kl += kl / static_cast<double>(b);
    kl_floor_total += kl_floored / static_cast<double>(b);

    if (!with_grad) continue;

    LstmGrads dec_g{model.params.grad("dec.wx"), model.params.grad("dec.wh"),
                    model.params.grad("dec.bias")};
    MatrixMap out_w_g = model.params.grad("out.w");
    MatrixMap out_b_g = model.params.grad("out.bias");
    MatrixMap start_g = model.params.grad("dec.start");
    const Matrix out_w = model.params.value("out.w");
    const LstmWeights dec_w = dec_weights(model);

    // Backward through the decoder. Teacher-forced point inputs carry no
    // gradient, but z rides along in every step input and the learned
    // start token fills step 0.
    RowVec dh = RowVec::Zero(hd);
    RowVec dc = RowVec::Zero(hd);
    RowVec dz = RowVec::Zero(ld);
    for (int t = n - 1; t >= 0; --t) {
      const RowVec& y = dec.outputs[t];
      RowVec dy(2);
      dy(0) = 2.0 * (y(0) - seq[t].x) / recon_denom;
      dy(1) = 2.0 * (y(1) - seq[t].y) / recon_denom;
      RowVec dpre(2);
      dpre(0) = dy(0) * y(0) * (1.0 - y(0));
      dpre(1) = dy(1) * y(1) * (1.0 - y(1));
      out_w_g += dec.steps[t].h.transpose() * dpre;
      out_b_g.row(0) += dpre;
      RowVec dh_t = dh + dpre * out_w.transpose();

      const RowVec& h_prev = (t == 0) ? dec.h0 : dec.steps[t - 1].h;
      const RowVec& c_prev = (t == 0) ? dec.c0 : dec.steps[t - 1].c;
      RowVec dh_prev, dc_prev, dx;
      lstm_backward(dec_w, dec_g, dec.steps[t], dec.inputs[t], h_prev, c_prev,
                    dh_t, dc, dh_prev, dc_prev, &dx);
      dz += dx.segment(2, ld);
      if (t == 0) start_g.row(0) += dx.segment(0, 2);
      dh = dh_prev;
      dc = dc_prev;
    }

    // Into the latent initializers.
    {
      const Matrix z2h = model.params.value("dec.z2h.w");
      const Matrix z2c = model.params.value("dec.z2c.w");
      const RowVec dpre_h =
          dh.cwiseProduct((1.0 - dec.h0.array().square()).matrix());
      const RowVec dpre_c =
          dc.cwiseProduct((1.0 - dec.c0.array().square()).matrix());
      model.params.grad("dec.z2h.w") += z.transpose() * dpre_h;
      model.params.grad("dec.z2h.bias").row(0) += dpre_h;
      model.params.grad("dec.z2c.w") += z.transpose() * dpre_c;
      model.params.grad("dec.z2c.bias").row(0) += dpre_c;
      dz += dpre_h * z2h.transpose() + dpre_c * z2c.transpose();
    }

    // KL and reparameterization. Dimensions under the free-bits floor
    // contribute no KL gradient.
    RowVec dmu = dz;
    RowVec dlv = dz.cwiseProduct(eps[i]).cwiseProduct(sigma) * 0.5;
    const double kl_scale = kl_weight / static_cast<double>(b);
    for (int k = 0; k < ld; ++k) {
      if (!dim_active[k]) continue;
      dmu(k) += kl_scale * mu(k);
      dlv(k) += 0.5 * kl_scale * (std::exp(lv(k)) - 1.0);
    }

    // Latent heads.
    model.params.grad("mu.w") += h_final.transpose() * dmu;
    model.params.grad("mu.bias").row(0) += dmu;
    model.params.grad("logvar.w") += h_final.transpose() * dlv;
    model.params.grad("logvar.bias").row(0) += dlv;
    RowVec dh_enc = dmu * mu_w.transpose() + dlv * lv_w.transpose();

    // Backward through the encoder.
    LstmGrads enc_g{model.params.grad("enc.wx"), model.params.grad("enc.wh"),
                    model.params.grad("enc.bias")};
    RowVec dc_enc = RowVec::Zero(hd);
    for (int t = n - 1; t >= 0; --t) {
      const RowVec h_prev =
          (t == 0) ? RowVec::Zero(hd) : enc_steps[t - 1].h;
      const RowVec c_prev =
          (t == 0) ? RowVec::Zero(hd) : enc_steps[t - 1].c;
      RowVec dh_prev, dc_prev;
      lstm_backward(enc_w, enc_g, enc_steps[t], point_row(seq[t]), h_prev,
                    c_prev, dh_enc, dc_enc, dh_prev, dc_prev, nullptr);
      dh_enc = dh_prev;
      dc_enc = dc_prev;
    }
  }

  res.loss = res.reconstruction + kl_weight * kl_floor_total;
  if (!std::isfinite(res.loss))
    throw NumericalFailureError("vae_elbo_loss: non-finite loss");
  return res;
}

std::vector<VaeEpochRow> train_vae(VaeModel& model,
                                   const GeneratorConfig& generator,
                                   const VaeTrainConfig& train,
                                   std::uint64_t seed) {
  generator.validate();
  if (generator.n != model.config.n)
    throw InvalidArgumentError("train_vae: generator n differs from model n");
  if (train.epochs < 0)
    throw InvalidArgumentError("train_vae: negative epoch count");

  AdamOptimizer adam(train.learning_rate, train.grad_clip);
  std::vector<VaeEpochRow> history;
  const int warm = static_cast<int>(
      std::floor(train.deterministic_warm_fraction * train.epochs));
  const int ramp = std::max(
      1, static_cast<int>(std::ceil(train.beta_anneal_fraction * train.epochs)));
  for (int epoch = 1; epoch <= train.epochs; ++epoch) {
    const bool warm_phase = epoch <= warm;
    const double ramp_progress =
        warm_phase ? 0.0
                   : std::min(1.0, static_cast<double>(epoch - warm) / ramp);
    const double noise_scale = ramp_progress;
    const double beta = train.beta_final * ramp_progress;
    double recon_sum = 0.0;
    double kl_sum = 0.0;
    for (int batch = 0; batch < train.batches_per_epoch; ++batch) {
      std::vector<std::vector<Point>> sequences(train.batch_size);
      for (int i = 0; i < train.batch_size; ++i) {
        const TspInstance inst = generate_instance(
            generator, derive_seed(seed, "vae.data", epoch, batch), i);
        sequences[i] = canonicalize_sequence(inst);
      }
      const ElboResult r =
          vae_elbo_loss(model, sequences, beta,
                        derive_seed(seed, "vae.noise", epoch, batch), true,
                        noise_scale, train.free_bits);
      adam.step(model.params);
      recon_sum += r.reconstruction;
      kl_sum += r.kl;
    }
    history.push_back({epoch, recon_sum / train.batches_per_epoch,
                       kl_sum / train.batches_per_epoch, beta});
  }
  return history;
}

std::vector<TspInstance> sample_instances(const VaeModel& model, int count,
                                          std::uint64_t seed) {
  if (count < 0) throw InvalidArgumentError("sample_instances: negative count");
  std::vector<TspInstance> out;
  out.reserve(count);
  const int ld = model.config.latent_dim;
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, "vae.sample", i));
    RowVec z(ld);
    for (int k = 0; k < ld; ++k) z(k) = rng.normal();
    DecoderRun run = run_decoder(model, z, {});
    TspInstance inst;
    inst.points.reserve(model.config.n);
    for (const auto& y : run.outputs) inst.points.push_back({y(0), y(1)});
    out.push_back(std::move(inst));
  }
  return out;
}

TspInstance decode_latent(const VaeModel& model, const Eigen::VectorXd& latent) {
  if (latent.size() != model.config.latent_dim)
    throw InvalidArgumentError("decode_latent: wrong latent dimension");
  DecoderRun run = run_decoder(model, latent.transpose(), {});
  TspInstance inst;
  inst.points.reserve(model.config.n);
  for (const auto& y : run.outputs) inst.points.push_back({y(0), y(1)});
  return inst;
}

Eigen::VectorXd encode_mean(const VaeModel& model, const TspInstance& instance) {
  if (instance.n() != model.config.n)
    throw InvalidArgumentError("encode_mean: instance size differs from config n");
  const std::vector<Point> seq = canonicalize_sequence(instance);
  const std::vector<LstmStep> steps = run_encoder(model, enc_weights(model), seq);
  const Matrix mu_w = model.params.value("mu.w");
  const Matrix mu_b = model.params.value("mu.bias");
  const RowVec mu = steps.back().h * mu_w + mu_b.row(0);
  return mu.transpose();
}

LatentProjection latent_pca_projection(
    const VaeModel& model,
    std::span<const std::pair<std::string, std::vector<TspInstance>>> datasets) {
  int total = 0;
  for (const auto& [label, instances] : datasets) {
    if (instances.empty())
      throw InvalidArgumentError("latent_pca_projection: empty dataset " + label);
    total += static_cast<int>(instances.size());
  }
  if (total < 3)
    throw InvalidArgumentError("latent_pca_projection: need at least 3 instances");

  Matrix pooled(total, model.config.latent_dim);
  LatentProjection out;
  out.labels.reserve(total);
  int row = 0;
  for (const auto& [label, instances] : datasets) {
    for (const auto& inst : instances) {
      pooled.row(row++) = encode_mean(model, inst).transpose();
      out.labels.push_back(label);
    }
  }
  const PcaResult pca = pca_project(pooled, 2);
  out.coordinates = pca.projected;
  out.explained_variance_ratio = pca.explained_variance_ratio;
  return out;
}

void save_vae(const std::filesystem::path& path, const VaeModel& model,
              std::int64_t epoch, const std::string& rng_state) {
  nlohmann::ordered_json hyper = model.config.to_json();
  hyper["version"] = model.version;
  save_checkpoint(path, "vae", hyper, epoch, rng_state, model.params);
}

LoadedVae load_vae(const std::filesystem::path& path) {
  const CheckpointFile ckpt = load_checkpoint(path);
  if (ckpt.kind != "vae")
    throw ParseError("checkpoint kind is '" + ckpt.kind + "', expected vae");
  LoadedVae out{VaeModel::create(VaeConfig::from_json(ckpt.hyperparameters), 0),
                ckpt.epoch, ckpt.rng_state};
  out.model.version = ckpt.hyperparameters.value("version", out.model.version);
  restore_params(ckpt, out.model.params);
  return out;
}

} // namespace cogs
