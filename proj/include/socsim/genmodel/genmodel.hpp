#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "socsim/contracts.hpp"
#include "socsim/numerics/net.hpp"
#include "socsim/numerics/rng.hpp"

namespace socsim {

// Observations live in R^2, social representations in R^4.
inline constexpr int kObsDim = 2;
inline constexpr int kRepDim = 4;

// log-variances are clamped to +-10 so sampling and densities stay finite;
// discriminator outputs are clamped to +-15 before any exponentiation.
inline constexpr double kLogVarClamp = 10.0;
inline constexpr double kDiscClamp = 15.0;

inline constexpr double kLogTwoPi = 1.8378770664093453;

using Artifact = Eigen::Vector2d;
using SocialRep = Eigen::Vector4d;

struct GaussianPosterior {
  Eigen::Vector4d mean;
  Eigen::Vector4d log_var;  // diagonal covariance, clamped
};

// Column-aligned batch of diagonal Gaussians.
struct PosteriorBatch {
  Eigen::MatrixXd mean;     // 4 x B
  Eigen::MatrixXd log_var;  // 4 x B
};

struct HyperParams {
  double lambda = 0.1;  // EFE reconstruction weight
  double beta = 1.0;    // VFE prior weight
  double tau = 0.3;     // memorization temperature

  int model_update_iters = 5;
  double model_update_lr = 1e-5;
  int model_update_batch = 256;

  int creation_steps = 30;
  double creation_lr = 0.01;

  int mc_samples = 1;

  int pretrain_epochs = 200;
  double pretrain_lr = 1e-3;
  int pretrain_batch = 256;

  void validate() const {
    require(lambda > 0 && beta > 0 && tau > 0, "hyperparams: weights must be positive");
    require(model_update_iters > 0 && model_update_lr > 0 && model_update_batch > 0,
            "hyperparams: model update settings must be positive");
    require(creation_steps >= 0 && creation_lr > 0, "hyperparams: creation settings invalid");
    require(mc_samples > 0, "hyperparams: mc_samples must be positive");
    require(pretrain_epochs >= 0 && pretrain_lr > 0 && pretrain_batch > 0,
            "hyperparams: pretraining settings invalid");
  }
};

// Encoder q_phi(z|o), decoder p_theta(o|z) with unit-variance Gaussian
// likelihood, and discriminator D_psi(z,o) scoring log q_phi / p_social.
class GenerativeModel {
 public:
  GenerativeModel() = default;

  GenerativeModel(FeedForwardNet encoder, FeedForwardNet decoder,
                  FeedForwardNet discriminator)
      : encoder_(std::move(encoder)),
        decoder_(std::move(decoder)),
        discriminator_(std::move(discriminator)) {
    require(encoder_.input_dim() == kObsDim && encoder_.output_dim() == 2 * kRepDim,
            "model: encoder must map 2 -> 8 (mean and log-var heads)");
    require(decoder_.input_dim() == kRepDim && decoder_.output_dim() == kObsDim,
            "model: decoder must map 4 -> 2");
    require(discriminator_.input_dim() == kRepDim + kObsDim &&
                discriminator_.output_dim() == 1,
            "model: discriminator must map 6 -> 1");
  }

  static GenerativeModel random(RngStream& rng,
                                const std::vector<int>& hidden = {64, 64}) {
    auto dims = [&](int in, int out) {
      std::vector<int> d{in};
      d.insert(d.end(), hidden.begin(), hidden.end());
      d.push_back(out);
      return d;
    };
    FeedForwardNet enc = FeedForwardNet::random(
        dims(kObsDim, 2 * kRepDim), Activation::Tanh, Activation::Linear, rng);
    FeedForwardNet dec = FeedForwardNet::random(
        dims(kRepDim, kObsDim), Activation::Tanh, Activation::Linear, rng);
    FeedForwardNet dsc = FeedForwardNet::random(
        dims(kRepDim + kObsDim, 1), Activation::Tanh, Activation::Linear, rng);
    return GenerativeModel(std::move(enc), std::move(dec), std::move(dsc));
  }

  const FeedForwardNet& encoder() const { return encoder_; }
  const FeedForwardNet& decoder() const { return decoder_; }
  const FeedForwardNet& discriminator() const { return discriminator_; }
  FeedForwardNet& encoder() { return encoder_; }
  FeedForwardNet& decoder() { return decoder_; }
  FeedForwardNet& discriminator() { return discriminator_; }

  PosteriorBatch encode(const Eigen::MatrixXd& obs) const {
    require(obs.rows() == kObsDim, "encode: observations must be 2 x B");
    require(obs.allFinite(), "encode: non-finite observation");
    const Eigen::MatrixXd h = encoder_.forward(obs);
    PosteriorBatch p;
    p.mean = h.topRows(kRepDim);
    p.log_var =
        h.bottomRows(kRepDim).array().min(kLogVarClamp).max(-kLogVarClamp).matrix();
    return p;
  }

  GaussianPosterior encode(const Artifact& o) const {
    const PosteriorBatch p = encode(Eigen::MatrixXd(o));
    return {p.mean.col(0), p.log_var.col(0)};
  }

  Eigen::MatrixXd decode_mean(const Eigen::MatrixXd& reps) const {
    require(reps.rows() == kRepDim, "decode: representations must be 4 x B");
    return decoder_.forward(reps);
  }

  // log N(o; decoder(z), I) per column.
  Eigen::VectorXd decode_loglik(const Eigen::MatrixXd& obs,
                                const Eigen::MatrixXd& reps) const {
    require(obs.rows() == kObsDim && reps.rows() == kRepDim &&
                obs.cols() == reps.cols(),
            "decode_loglik: shape mismatch");
    require(obs.allFinite() && reps.allFinite(), "decode_loglik: non-finite input");
    const Eigen::MatrixXd resid = obs - decode_mean(reps);
    return (-0.5 * resid.array().square().colwise().sum() - kLogTwoPi)
        .matrix().transpose();
  }

  double decode_loglik(const Artifact& o, const SocialRep& z) const {
    return decode_loglik(Eigen::MatrixXd(o), Eigen::MatrixXd(z))[0];
  }

  // Clamped discriminator score per column.
  Eigen::VectorXd disc_score(const Eigen::MatrixXd& reps,
                             const Eigen::MatrixXd& obs) const {
    require(reps.rows() == kRepDim && obs.rows() == kObsDim &&
                reps.cols() == obs.cols(),
            "disc_score: shape mismatch");
    Eigen::MatrixXd in(kRepDim + kObsDim, reps.cols());
    in << reps, obs;
    return discriminator_.forward(in)
        .array().min(kDiscClamp).max(-kDiscClamp).matrix().transpose();
  }

  int parameter_count() const {
    return encoder_.parameter_count() + decoder_.parameter_count() +
           discriminator_.parameter_count();
  }

 private:
  FeedForwardNet encoder_, decoder_, discriminator_;
};

// z = mean + exp(log_var / 2) * eps, eps ~ N(0, I). Noise is drawn column by
// column, so batched and per-column sampling consume the stream identically.
inline Eigen::MatrixXd reparam_sample(const PosteriorBatch& post, RngStream& rng) {
  const Eigen::MatrixXd eps =
      rng.normals(static_cast<int>(post.mean.rows()),
                  static_cast<int>(post.mean.cols()));
  return (post.mean.array() + (post.log_var.array() / 2.0).exp() * eps.array())
      .matrix();
}

inline SocialRep reparam_sample(const GaussianPosterior& post, RngStream& rng) {
  PosteriorBatch b{post.mean, post.log_var};
  return reparam_sample(b, rng).col(0);
}

}  // namespace socsim
