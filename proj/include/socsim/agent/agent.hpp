#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Core>

#include "socsim/agent/memory_buffer.hpp"
#include "socsim/genmodel/genmodel.hpp"
#include "socsim/genmodel/losses.hpp"
#include "socsim/numerics/adam.hpp"
#include "socsim/numerics/rng.hpp"

namespace socsim {

struct Agent {
  int id = -1;
  GenerativeModel model;
  MemoryBuffer buffer;
  AdamState adam_encoder, adam_decoder, adam_disc;

  Agent(int id_, GenerativeModel model_, MemoryBuffer buffer_,
        const AdamConfig& update_cfg)
      : id(id_), model(std::move(model_)), buffer(std::move(buffer_)) {
    adam_encoder = AdamState(model.encoder().parameter_count(), update_cfg);
    adam_decoder = AdamState(model.decoder().parameter_count(), update_cfg);
    adam_disc = AdamState(model.discriminator().parameter_count(), update_cfg);
  }
};

// Boltzmann acceptance for selective memorization, computed in a form that
// cannot overflow: min(1, exp(-dG/tau)).
inline double boltzmann_acceptance(double delta_g, double tau) {
  return std::exp(std::min(0.0, -delta_g / tau));
}

struct CreationResult {
  Eigen::MatrixXd artifacts;  // 2 x count, already appended to the buffer
  double mean_efe = 0.0;      // G of the final artifacts
};

// Gradient-based creation: initialize each artifact from a uniformly sampled
// buffer entry and run Adam on the expected free energy w.r.t. the artifact
// coordinates. All `count` artifacts are optimized as one batch.
inline CreationResult create_artifacts(Agent& agent, int count, int steps,
                                       double lr, double lambda, int mc_samples,
                                       RngStream& rng) {
  require(!agent.buffer.empty(), "create: memory buffer is empty");
  require(count >= 1, "create: count must be >= 1");
  require(steps >= 0 && lr > 0, "create: invalid optimization settings");

  Eigen::MatrixXd artifacts(kObsDim, count);
  for (int c = 0; c < count; ++c)
    artifacts.col(c) = agent.buffer.at(agent.buffer.sample_index(rng));

  AdamConfig cfg;
  cfg.lr = lr;
  AdamState adam(kObsDim * count, cfg);
  for (int s = 0; s < steps; ++s) {
    const EfeResult r = efe(agent.model, artifacts, rng, mc_samples, lambda);
    Eigen::Map<Eigen::VectorXd> flat(artifacts.data(), artifacts.size());
    const Eigen::Map<const Eigen::VectorXd> grad(r.obs_grad.data(),
                                                 r.obs_grad.size());
    adam.step(flat, Eigen::VectorXd(grad));
  }

  CreationResult out;
  out.mean_efe =
      efe(agent.model, artifacts, rng, mc_samples, lambda).values.mean();
  out.artifacts = artifacts;
  for (int c = 0; c < count; ++c) agent.buffer.push(artifacts.col(c));
  return out;
}

inline Artifact create_artifact(Agent& agent, int steps, double lr,
                                double lambda, int mc_samples, RngStream& rng) {
  return create_artifacts(agent, 1, steps, lr, lambda, mc_samples, rng)
      .artifacts.col(0);
}

// Accept a neighbor's creation into memory with probability
// min(1, exp(-(G(incoming) - G(own)) / tau)), replacing a uniformly sampled
// entry on acceptance. Both G evaluations use fresh single-sample noise.
inline bool selective_memorize(Agent& agent, const Artifact& incoming,
                               double tau, double lambda, int mc_samples,
                               RngStream& rng) {
  require(!agent.buffer.empty(), "memorize: memory buffer is empty");
  require(tau > 0, "memorize: tau must be positive");
  require(incoming.allFinite(), "memorize: non-finite artifact");

  const int victim = agent.buffer.sample_index(rng);
  const double g_incoming =
      efe_value(agent.model, incoming, rng, mc_samples, lambda);
  const double g_own =
      efe_value(agent.model, agent.buffer.at(victim), rng, mc_samples, lambda);
  const double p = boltzmann_acceptance(g_incoming - g_own, tau);
  const bool accepted = rng.uniform() < p;
  if (accepted) agent.buffer.replace(victim, incoming);
  return accepted;
}

}  // namespace socsim
