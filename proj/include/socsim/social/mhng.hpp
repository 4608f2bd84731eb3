#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "socsim/agent/agent.hpp"
#include "socsim/contracts.hpp"
#include "socsim/genmodel/genmodel.hpp"
#include "socsim/numerics/rng.hpp"

namespace socsim {

enum class ObsKind { Creation, Memory };

struct ObsProvenance {
  ObsKind kind;
  int owner;
};

// Jointly attended observations for one edge: both agents' current-step
// creations plus memory samples, in the order
// [creations_a | memory_a | creations_b | memory_b].
struct JointObservations {
  Eigen::MatrixXd obs;  // 2 x N
  std::vector<ObsProvenance> provenance;

  int size() const { return static_cast<int>(obs.cols()); }
};

// Column-aligned (observation, representation) pairs; one agent's samples of
// its social prior for one step.
struct PairSet {
  Eigen::MatrixXd obs;   // 2 x N
  Eigen::MatrixXd reps;  // 4 x N

  int size() const { return static_cast<int>(obs.cols()); }

  static PairSet concat(const std::vector<const PairSet*>& parts) {
    int total = 0;
    for (const auto* p : parts) total += p->size();
    PairSet out;
    out.obs.resize(kObsDim, total);
    out.reps.resize(kRepDim, total);
    int at = 0;
    for (const auto* p : parts) {
      out.obs.middleCols(at, p->size()) = p->obs;
      out.reps.middleCols(at, p->size()) = p->reps;
      at += p->size();
    }
    return out;
  }
};

enum class AcceptKind { Rep, Creation };

inline const char* accept_kind_name(AcceptKind k) {
  return k == AcceptKind::Rep ? "rep" : "creation";
}

struct AcceptanceRecord {
  long step = 0;
  int receiver = -1;
  int proposer = -1;
  AcceptKind kind = AcceptKind::Rep;
  int proposals = 0;
  int acceptances = 0;
};

// min(1, exp(loglik_proposed - loglik_current)), evaluated in log space.
inline double likelihood_ratio_acceptance(double loglik_proposed,
                                          double loglik_current) {
  return std::exp(std::min(0.0, loglik_proposed - loglik_current));
}

inline JointObservations build_joint_observations(
    const Agent& a, const Agent& b, const Eigen::MatrixXd& creations_a,
    const Eigen::MatrixXd& creations_b, int d_size, RngStream& rng) {
  require(!a.buffer.empty() && !b.buffer.empty(),
          "joint observations: buffers must be nonempty");
  require(d_size >= 0, "joint observations: d_size must be >= 0");

  const int ca = static_cast<int>(creations_a.cols());
  const int cb = static_cast<int>(creations_b.cols());
  JointObservations joint;
  joint.obs.resize(kObsDim, ca + cb + 2 * d_size);
  joint.provenance.reserve(ca + cb + 2 * d_size);

  int at = 0;
  auto append = [&](const Eigen::MatrixXd& block, ObsKind kind, int owner) {
    joint.obs.middleCols(at, block.cols()) = block;
    for (int i = 0; i < block.cols(); ++i)
      joint.provenance.push_back({kind, owner});
    at += static_cast<int>(block.cols());
  };
  append(creations_a, ObsKind::Creation, a.id);
  if (d_size > 0) append(a.buffer.sample(d_size, rng), ObsKind::Memory, a.id);
  append(creations_b, ObsKind::Creation, b.id);
  if (d_size > 0) append(b.buffer.sample(d_size, rng), ObsKind::Memory, b.id);
  return joint;
}

struct ExchangeResult {
  PairSet pairs_a, pairs_b;
  AcceptanceRecord rec_a, rec_b;  // rec_a: a receiving b's proposals
};

// One Metropolis-Hastings naming-game exchange over an edge. For every joint
// observation each agent infers its own representation, receives the
// neighbor's, and accepts it with the likelihood-ratio probability under its
// own decoder; on rejection it retains its own inference.
inline ExchangeResult mhng_exchange(const Agent& a, const Agent& b,
                                    const JointObservations& joint,
                                    RngStream& rng, long step = 0) {
  require(joint.size() >= 1, "mhng: joint observation set is empty");
  const int n = joint.size();

  const Eigen::MatrixXd z_a = reparam_sample(a.model.encode(joint.obs), rng);
  const Eigen::MatrixXd z_b = reparam_sample(b.model.encode(joint.obs), rng);

  const Eigen::VectorXd ll_a_own = a.model.decode_loglik(joint.obs, z_a);
  const Eigen::VectorXd ll_a_prop = a.model.decode_loglik(joint.obs, z_b);
  const Eigen::VectorXd ll_b_own = b.model.decode_loglik(joint.obs, z_b);
  const Eigen::VectorXd ll_b_prop = b.model.decode_loglik(joint.obs, z_a);

  ExchangeResult out;
  out.pairs_a.obs = joint.obs;
  out.pairs_b.obs = joint.obs;
  out.pairs_a.reps.resize(kRepDim, n);
  out.pairs_b.reps.resize(kRepDim, n);
  out.rec_a = {step, a.id, b.id, AcceptKind::Rep, n, 0};
  out.rec_b = {step, b.id, a.id, AcceptKind::Rep, n, 0};

  for (int i = 0; i < n; ++i) {
    const bool accept =
        rng.uniform() < likelihood_ratio_acceptance(ll_a_prop[i], ll_a_own[i]);
    out.pairs_a.reps.col(i) = accept ? z_b.col(i) : z_a.col(i);
    out.rec_a.acceptances += accept ? 1 : 0;
  }
  for (int i = 0; i < n; ++i) {
    const bool accept =
        rng.uniform() < likelihood_ratio_acceptance(ll_b_prop[i], ll_b_own[i]);
    out.pairs_b.reps.col(i) = accept ? z_a.col(i) : z_b.col(i);
    out.rec_b.acceptances += accept ? 1 : 0;
  }
  return out;
}

// Concatenation of one agent's per-edge pair sets, in incident-edge order.
inline PairSet collect_pairs(const std::vector<const PairSet*>& per_edge) {
  return PairSet::concat(per_edge);
}

}  // namespace socsim
