#pragma once

#include <Eigen/Core>

#include "socsim/genmodel/genmodel.hpp"
#include "socsim/numerics/adam.hpp"
#include "socsim/numerics/net.hpp"
#include "socsim/numerics/rng.hpp"

namespace socsim {

namespace detail {

// One stochastic pass through encoder -> reparameterized z -> decoder (and
// optionally the discriminator), with everything backward needs. Clamp masks
// zero the gradient outside the clamped range.
struct ModelPass {
  ForwardCache enc_cache, dec_cache, disc_cache;
  Eigen::MatrixXd mu, lv;        // 4 x B, lv clamped
  Eigen::ArrayXXd lv_mask;       // 1 inside the clamp, 0 outside
  Eigen::MatrixXd eps, std, z;   // 4 x B
  Eigen::MatrixXd ohat, resid;   // 2 x B
  Eigen::VectorXd loglik;        // per column
  Eigen::ArrayXXd d, d_mask;     // 1 x B, clamped score
};

inline ModelPass model_forward(const GenerativeModel& m,
                               const Eigen::MatrixXd& obs, RngStream& rng,
                               bool with_disc) {
  const int batch = static_cast<int>(obs.cols());
  ModelPass p;
  const Eigen::MatrixXd h = m.encoder().forward(obs, &p.enc_cache);
  p.mu = h.topRows(kRepDim);
  const Eigen::MatrixXd lv_raw = h.bottomRows(kRepDim);
  p.lv = lv_raw.array().min(kLogVarClamp).max(-kLogVarClamp).matrix();
  p.lv_mask = (lv_raw.array().abs() < kLogVarClamp).cast<double>();
  p.eps = rng.normals(kRepDim, batch);
  p.std = (p.lv.array() / 2.0).exp().matrix();
  p.z = (p.mu.array() + p.std.array() * p.eps.array()).matrix();
  p.ohat = m.decoder().forward(p.z, &p.dec_cache);
  p.resid = obs - p.ohat;
  p.loglik = (-0.5 * p.resid.array().square().colwise().sum() - kLogTwoPi)
                 .matrix().transpose();
  if (with_disc) {
    Eigen::MatrixXd din(kRepDim + kObsDim, batch);
    din << p.z, obs;
    const Eigen::MatrixXd d_raw = m.discriminator().forward(din, &p.disc_cache);
    p.d = d_raw.array().min(kDiscClamp).max(-kDiscClamp);
    p.d_mask = (d_raw.array().abs() < kDiscClamp).cast<double>();
  }
  return p;
}

}  // namespace detail

struct VfeResult {
  double value = 0.0;
  Eigen::VectorXd encoder_grad;  // packed like FeedForwardNet::pack()
  Eigen::VectorXd decoder_grad;
};

// Variational free energy, averaged over the batch:
//   F = beta * E_q[D_psi(z, o)] - E_q[log p_theta(o|z)]
// Gradients flow into phi (through the reparameterization and through the
// discriminator's z input) and into theta; psi is held constant.
inline VfeResult vfe_loss(const GenerativeModel& m, const Eigen::MatrixXd& obs,
                          RngStream& rng, int mc_samples, double beta) {
  require(obs.rows() == kObsDim && obs.cols() >= 1, "vfe_loss: obs must be 2 x B");
  require(obs.allFinite(), "vfe_loss: non-finite observation");
  require(mc_samples >= 1, "vfe_loss: mc_samples must be >= 1");

  const int batch = static_cast<int>(obs.cols());
  NetGrads enc_g = m.encoder().zero_grads();
  NetGrads dec_g = m.decoder().zero_grads();
  double value = 0.0;

  for (int s = 0; s < mc_samples; ++s) {
    auto p = detail::model_forward(m, obs, rng, /*with_disc=*/true);
    value += (beta * p.d.sum() - p.loglik.sum()) / (mc_samples * batch);
    const double cb = 1.0 / (mc_samples * batch);

    Eigen::MatrixXd up_disc = (beta * cb) * p.d_mask.matrix();
    Eigen::MatrixXd disc_in_grad;
    m.discriminator().backward(p.disc_cache, up_disc, &disc_in_grad);
    Eigen::MatrixXd gz = disc_in_grad.topRows(kRepDim);

    Eigen::MatrixXd gz_dec;
    dec_g += m.decoder().backward(p.dec_cache, cb * (p.ohat - obs), &gz_dec);
    gz += gz_dec;

    Eigen::MatrixXd up_enc(2 * kRepDim, batch);
    up_enc << gz,
        ((gz.array() * p.eps.array() * 0.5 * p.std.array()) *
         p.lv_mask).matrix();
    enc_g += m.encoder().backward(p.enc_cache, up_enc);
  }

  return {value, FeedForwardNet::pack_grads(enc_g),
          FeedForwardNet::pack_grads(dec_g)};
}

struct EfeResult {
  Eigen::VectorXd values;    // G per column
  Eigen::MatrixXd obs_grad;  // dG_b / do_b, 2 x B
};

// Expected free energy of candidate artifacts (one value per column):
//   G(o) = -E_q[D_psi(z, o)] - lambda * E_q[log p_theta(o|z)]
// The gradient is taken w.r.t. o only, flowing through the encoder, the
// discriminator's o input, and the reconstruction residual.
inline EfeResult efe(const GenerativeModel& m, const Eigen::MatrixXd& obs,
                     RngStream& rng, int mc_samples, double lambda) {
  require(obs.rows() == kObsDim && obs.cols() >= 1, "efe: obs must be 2 x B");
  require(obs.allFinite(), "efe: non-finite observation");
  require(mc_samples >= 1, "efe: mc_samples must be >= 1");

  const int batch = static_cast<int>(obs.cols());
  EfeResult r;
  r.values = Eigen::VectorXd::Zero(batch);
  r.obs_grad = Eigen::MatrixXd::Zero(kObsDim, batch);
  const double cs = 1.0 / mc_samples;

  for (int s = 0; s < mc_samples; ++s) {
    auto p = detail::model_forward(m, obs, rng, /*with_disc=*/true);
    r.values += cs * (-p.d.matrix().transpose() - lambda * p.loglik);

    Eigen::MatrixXd up_disc = (-cs) * p.d_mask.matrix();
    Eigen::MatrixXd disc_in_grad;
    m.discriminator().backward(p.disc_cache, up_disc, &disc_in_grad);
    Eigen::MatrixXd gz = disc_in_grad.topRows(kRepDim);

    Eigen::MatrixXd gz_dec;
    m.decoder().backward(p.dec_cache, (lambda * cs) * (p.ohat - obs), &gz_dec);
    gz += gz_dec;

    Eigen::MatrixXd up_enc(2 * kRepDim, batch);
    up_enc << gz,
        ((gz.array() * p.eps.array() * 0.5 * p.std.array()) *
         p.lv_mask).matrix();
    Eigen::MatrixXd g_enc_in;
    m.encoder().backward(p.enc_cache, up_enc, &g_enc_in);

    r.obs_grad += g_enc_in + disc_in_grad.bottomRows(kObsDim) +
                  (lambda * cs) * (obs - p.ohat);
  }
  return r;
}

inline double efe_value(const GenerativeModel& m, const Artifact& o,
                        RngStream& rng, int mc_samples, double lambda) {
  return efe(m, Eigen::MatrixXd(o), rng, mc_samples, lambda).values[0];
}

struct RatioLossResult {
  double value = 0.0;
  Eigen::VectorXd net_grad;  // packed
};

// f-GAN (reverse KL) density-ratio objective for a scalar-output scorer:
//   L = E_prior[exp(D(x))] - E_posterior[D(x)]
// whose pointwise minimizer is D*(x) = log q(x) / p(x). Scores are clamped
// before exponentiation.
inline RatioLossResult density_ratio_loss(const FeedForwardNet& net,
                                          const Eigen::MatrixXd& prior_inputs,
                                          const Eigen::MatrixXd& posterior_inputs,
                                          double clamp = kDiscClamp) {
  require(net.output_dim() == 1, "density_ratio_loss: scorer must be scalar");
  require(prior_inputs.cols() >= 1, "density_ratio_loss: empty prior sample");
  require(posterior_inputs.cols() >= 1, "density_ratio_loss: empty posterior sample");

  const double n = static_cast<double>(prior_inputs.cols());
  const double mcols = static_cast<double>(posterior_inputs.cols());

  ForwardCache c_prior, c_post;
  const Eigen::ArrayXXd u_raw = net.forward(prior_inputs, &c_prior).array();
  const Eigen::ArrayXXd u = u_raw.min(clamp).max(-clamp);
  const Eigen::ArrayXXd eu = u.exp();
  const Eigen::ArrayXXd v_raw = net.forward(posterior_inputs, &c_post).array();
  const Eigen::ArrayXXd v = v_raw.min(clamp).max(-clamp);

  NetGrads g = net.backward(
      c_prior, (eu * (u_raw.abs() < clamp).cast<double>() / n).matrix());
  g += net.backward(
      c_post, (-(v_raw.abs() < clamp).cast<double>() / mcols).matrix());

  return {eu.sum() / n - v.sum() / mcols, FeedForwardNet::pack_grads(g)};
}

struct DiscLossResult {
  double value = 0.0;
  Eigen::VectorXd disc_grad;  // packed
};

// Discriminator loss over the communication pair set (samples of p_social)
// and the agent's own observations (samples of q_phi). Encoder parameters
// are treated as constants.
inline DiscLossResult disc_loss(const GenerativeModel& m,
                                const Eigen::MatrixXd& pair_reps,
                                const Eigen::MatrixXd& pair_obs,
                                const Eigen::MatrixXd& own_obs, RngStream& rng,
                                int mc_samples) {
  require(pair_reps.cols() >= 1, "disc_loss: empty pair set");
  require(own_obs.cols() >= 1, "disc_loss: empty observation batch");
  require(pair_reps.rows() == kRepDim && pair_obs.rows() == kObsDim &&
              pair_reps.cols() == pair_obs.cols(),
          "disc_loss: pair set shape mismatch");
  require(mc_samples >= 1, "disc_loss: mc_samples must be >= 1");

  Eigen::MatrixXd prior_in(kRepDim + kObsDim, pair_reps.cols());
  prior_in << pair_reps, pair_obs;

  DiscLossResult out;
  out.disc_grad = Eigen::VectorXd::Zero(m.discriminator().parameter_count());
  for (int s = 0; s < mc_samples; ++s) {
    const Eigen::MatrixXd z = reparam_sample(m.encode(own_obs), rng);
    Eigen::MatrixXd post_in(kRepDim + kObsDim, own_obs.cols());
    post_in << z, own_obs;
    const RatioLossResult r =
        density_ratio_loss(m.discriminator(), prior_in, post_in);
    out.value += r.value / mc_samples;
    out.disc_grad += r.net_grad / mc_samples;
  }
  return out;
}

struct ElboResult {
  double value = 0.0;  // negative ELBO (to minimize)
  Eigen::VectorXd encoder_grad;
  Eigen::VectorXd decoder_grad;
};

// Standard VAE objective with N(0, I) prior; the KL term is analytic for
// diagonal Gaussians. Used for pretraining; the discriminator is untouched.
inline ElboResult elbo_loss(const GenerativeModel& m, const Eigen::MatrixXd& obs,
                            RngStream& rng, int mc_samples) {
  require(obs.rows() == kObsDim && obs.cols() >= 1, "elbo_loss: obs must be 2 x B");
  require(obs.allFinite(), "elbo_loss: non-finite observation");
  require(mc_samples >= 1, "elbo_loss: mc_samples must be >= 1");

  const int batch = static_cast<int>(obs.cols());
  NetGrads enc_g = m.encoder().zero_grads();
  NetGrads dec_g = m.decoder().zero_grads();
  double value = 0.0;

  for (int s = 0; s < mc_samples; ++s) {
    auto p = detail::model_forward(m, obs, rng, /*with_disc=*/false);
    const Eigen::VectorXd kl =
        (0.5 * (p.lv.array().exp() + p.mu.array().square() - 1.0 -
                p.lv.array()).colwise().sum()).matrix().transpose();
    value += (kl.sum() - p.loglik.sum()) / (mc_samples * batch);
    const double cb = 1.0 / (mc_samples * batch);

    Eigen::MatrixXd gz_dec;
    dec_g += m.decoder().backward(p.dec_cache, cb * (p.ohat - obs), &gz_dec);

    Eigen::MatrixXd gmu = cb * p.mu + gz_dec;
    Eigen::MatrixXd glv =
        ((cb * 0.5 * (p.lv.array().exp() - 1.0) +
          gz_dec.array() * p.eps.array() * 0.5 * p.std.array()) *
         p.lv_mask).matrix();
    Eigen::MatrixXd up_enc(2 * kRepDim, batch);
    up_enc << gmu, glv;
    enc_g += m.encoder().backward(p.enc_cache, up_enc);
  }

  return {value, FeedForwardNet::pack_grads(enc_g),
          FeedForwardNet::pack_grads(dec_g)};
}

struct PretrainReport {
  double loss_before = 0.0;
  double loss_after = 0.0;
};

// VAE pretraining on the initial memory. Epoch order is a Fisher-Yates
// shuffle from the given stream; incomplete trailing batches are dropped.
inline PretrainReport pretrain_vae(GenerativeModel& m, const Eigen::MatrixXd& data,
                                   const HyperParams& hp, RngStream& rng) {
  require(data.rows() == kObsDim && data.cols() >= hp.pretrain_batch,
          "pretrain: need at least one full batch");

  const int n = static_cast<int>(data.cols());
  const int batches = n / hp.pretrain_batch;

  auto eval_full = [&](RngStream& r) {
    return elbo_loss(m, data, r, 1).value;
  };
  PretrainReport report;
  {
    RngStream eval_rng = rng;  // value copy; evaluation does not advance rng
    report.loss_before = eval_full(eval_rng);
  }

  AdamConfig cfg;
  cfg.lr = hp.pretrain_lr;
  AdamState adam_enc(m.encoder().parameter_count(), cfg);
  AdamState adam_dec(m.decoder().parameter_count(), cfg);

  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;

  for (int epoch = 0; epoch < hp.pretrain_epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i) {
      const int j = rng.uniform_int(i + 1);
      std::swap(idx[i], idx[j]);
    }
    for (int b = 0; b < batches; ++b) {
      Eigen::MatrixXd batch(kObsDim, hp.pretrain_batch);
      for (int i = 0; i < hp.pretrain_batch; ++i)
        batch.col(i) = data.col(idx[b * hp.pretrain_batch + i]);
      const ElboResult r = elbo_loss(m, batch, rng, hp.mc_samples);
      Eigen::VectorXd enc_p = m.encoder().pack();
      Eigen::VectorXd dec_p = m.decoder().pack();
      adam_enc.step(enc_p, r.encoder_grad);
      adam_dec.step(dec_p, r.decoder_grad);
      m.encoder().unpack(enc_p);
      m.decoder().unpack(dec_p);
    }
  }

  {
    RngStream eval_rng = rng;
    report.loss_after = eval_full(eval_rng);
  }
  return report;
}

}  // namespace socsim
