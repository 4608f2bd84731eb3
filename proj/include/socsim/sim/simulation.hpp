#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "socsim/agent/agent.hpp"
#include "socsim/analysis/rsa.hpp"
#include "socsim/sim/config.hpp"
#include "socsim/sim/parallel.hpp"
#include "socsim/sim/run_log.hpp"
#include "socsim/social/graph.hpp"
#include "socsim/social/mhng.hpp"

namespace socsim {

struct SimState {
  SimConfig config;
  SocialGraph graph;
  std::vector<Agent> agents;
  std::vector<PretrainReport> pretrain_reports;
  long step = 0;  // completed steps

  long total_buffer_occupancy() const {
    long total = 0;
    for (const auto& a : agents) total += a.buffer.size();
    return total;
  }
};

// Build the graph, fill every buffer from its Gaussian layout (peaks evenly
// spaced on a circle), pretrain encoder/decoder as a VAE, and leave the
// discriminators at their random initialization. Adam states start zeroed.
inline SimState initialize(const SimConfig& config, int threads = 1) {
  config.validate();
  SocialGraph graph =
      SocialGraph::connected_caveman(config.n_cliques, config.clique_size);
  const int n_agents = config.agent_count();

  AdamConfig update_cfg;
  update_cfg.lr = config.hyper.model_update_lr;

  std::vector<Agent> agents;
  agents.reserve(n_agents);
  for (int k = 0; k < n_agents; ++k) {
    auto buffer_rng = RngStream::keyed(config.seed, Stage::BufferInit, 0, k);
    MemoryBuffer buffer(config.buffer_capacity);
    const double angle = 2.0 * M_PI * k / n_agents;
    const Artifact center(config.buffer_init_radius * std::cos(angle),
                          config.buffer_init_radius * std::sin(angle));
    for (int i = 0; i < config.buffer_capacity; ++i) {
      buffer.push(center + config.buffer_init_std *
                               Artifact(buffer_rng.normal(), buffer_rng.normal()));
    }
    auto param_rng = RngStream::keyed(config.seed, Stage::ParamInit, 0, k);
    agents.emplace_back(k, GenerativeModel::random(param_rng, config.hidden_dims()),
                        std::move(buffer), update_cfg);
  }

  std::vector<PretrainReport> reports(n_agents);
  parallel_for(n_agents, threads, [&](int k) {
    auto rng = RngStream::keyed(config.seed, Stage::Pretrain, 0, k);
    reports[k] = pretrain_vae(agents[k].model, agents[k].buffer.contents(),
                              config.hyper, rng);
  });

  return SimState{config, std::move(graph), std::move(agents),
                  std::move(reports), 0};
}

struct AgentStepScalars {
  double vfe = 0.0;
  double disc = 0.0;
  bool disc_skipped = false;
  std::optional<double> mean_efe;
  std::optional<double> rsa_value;
};

struct StepOutputs {
  long step = 0;
  std::vector<Eigen::MatrixXd> creations;             // per agent, 2 x |C|
  std::vector<AcceptanceRecord> creation_acceptance;  // (receiver, proposer) order
  std::vector<AcceptanceRecord> rep_acceptance;       // edge order, both directions
  std::vector<AgentStepScalars> scalars;              // per agent
};

// One simulation step: (1) creation, (2) selective memorization,
// (3) MHNG over every edge, (4) discriminator-then-generative updates.
// Stages are hard barriers; within a stage parallel units never touch each
// other's state and own keyed random streams, so any worker count produces
// identical results. Under without_creation stages 1-2 are skipped and the
// creation sets are empty.
inline StepOutputs step(SimState& state, int threads = 1) {
  const SimConfig& cfg = state.config;
  const int n_agents = cfg.agent_count();
  const long t = state.step + 1;
  const bool with_creation = cfg.with_creation();

  StepOutputs out;
  out.step = t;
  out.scalars.resize(n_agents);
  out.creations.assign(n_agents, Eigen::MatrixXd(kObsDim, 0));

  // Stage 1: creation.
  if (with_creation) {
    parallel_for(n_agents, threads, [&](int k) {
      auto rng = RngStream::keyed(cfg.seed, Stage::Create, t, k);
      CreationResult r = create_artifacts(
          state.agents[k], cfg.creations_per_step, cfg.hyper.creation_steps,
          cfg.hyper.creation_lr, cfg.hyper.lambda, cfg.hyper.mc_samples, rng);
      out.creations[k] = std::move(r.artifacts);
      out.scalars[k].mean_efe = r.mean_efe;
    });
  }

  // Stage 2: selective memorization of neighbors' creations.
  if (with_creation) {
    std::vector<std::vector<AcceptanceRecord>> records(n_agents);
    parallel_for(n_agents, threads, [&](int k) {
      auto rng = RngStream::keyed(cfg.seed, Stage::Memorize, t, k);
      for (int nb : state.graph.neighbors(k)) {
        AcceptanceRecord rec{t, k, nb, AcceptKind::Creation,
                             static_cast<int>(out.creations[nb].cols()), 0};
        for (int i = 0; i < out.creations[nb].cols(); ++i) {
          if (selective_memorize(state.agents[k], out.creations[nb].col(i),
                                 cfg.hyper.tau, cfg.hyper.lambda,
                                 cfg.hyper.mc_samples, rng))
            ++rec.acceptances;
        }
        records[k].push_back(rec);
      }
    });
    for (auto& per_agent : records)
      out.creation_acceptance.insert(out.creation_acceptance.end(),
                                     per_agent.begin(), per_agent.end());
  }

  // Stage 3: one MHNG exchange per edge over fresh joint observations.
  const auto& edges = state.graph.edges();
  const int n_edges = static_cast<int>(edges.size());
  std::vector<ExchangeResult> exchanges(n_edges);
  parallel_for(n_edges, threads, [&](int e) {
    auto rng = RngStream::keyed(cfg.seed, Stage::Exchange, t, e);
    const auto [a, b] = edges[e];
    const JointObservations joint = build_joint_observations(
        state.agents[a], state.agents[b], out.creations[a], out.creations[b],
        cfg.comm_memory_samples, rng);
    exchanges[e] = mhng_exchange(state.agents[a], state.agents[b], joint, rng, t);
  });
  std::vector<PairSet> pairs(n_agents);
  {
    std::vector<std::vector<const PairSet*>> parts(n_agents);
    for (int e = 0; e < n_edges; ++e) {
      out.rep_acceptance.push_back(exchanges[e].rec_a);
      out.rep_acceptance.push_back(exchanges[e].rec_b);
      parts[edges[e].first].push_back(&exchanges[e].pairs_a);
      parts[edges[e].second].push_back(&exchanges[e].pairs_b);
    }
    for (int k = 0; k < n_agents; ++k) pairs[k] = collect_pairs(parts[k]);
  }

  // Stage 4: model update (discriminator first, then encoder/decoder), plus
  // the per-step RSA summary used by the analysis pipeline.
  parallel_for(n_agents, threads, [&](int k) {
    Agent& agent = state.agents[k];
    auto rng = RngStream::keyed(cfg.seed, Stage::Update, t, k);
    AgentStepScalars& sc = out.scalars[k];
    sc.disc_skipped = pairs[k].size() == 0;

    for (int it = 0; it < cfg.hyper.model_update_iters; ++it) {
      if (!sc.disc_skipped) {
        const Eigen::MatrixXd own =
            agent.buffer.sample(cfg.hyper.model_update_batch, rng);
        const DiscLossResult dl =
            disc_loss(agent.model, pairs[k].reps, pairs[k].obs, own, rng,
                      cfg.hyper.mc_samples);
        Eigen::VectorXd psi = agent.model.discriminator().pack();
        agent.adam_disc.step(psi, dl.disc_grad);
        agent.model.discriminator().unpack(psi);
        sc.disc = dl.value;
      }
      const Eigen::MatrixXd batch =
          agent.buffer.sample(cfg.hyper.model_update_batch, rng);
      const VfeResult vl = vfe_loss(agent.model, batch, rng,
                                    cfg.hyper.mc_samples, cfg.hyper.beta);
      Eigen::VectorXd phi = agent.model.encoder().pack();
      agent.adam_encoder.step(phi, vl.encoder_grad);
      agent.model.encoder().unpack(phi);
      Eigen::VectorXd theta = agent.model.decoder().pack();
      agent.adam_decoder.step(theta, vl.decoder_grad);
      agent.model.decoder().unpack(theta);
      sc.vfe = vl.value;
    }

    auto rsa_rng = RngStream::keyed(cfg.seed, Stage::RsaLog, t, k);
    const Eigen::MatrixXd obs = agent.buffer.sample(cfg.rsa_log_samples, rsa_rng);
    const Eigen::MatrixXd reps = agent.model.encode(obs).mean;
    sc.rsa_value = rsa(pairwise_distances(obs), pairwise_distances(reps));
  });

  state.step = t;
  return out;
}

namespace detail {

inline void write_snapshot_files(const std::filesystem::path& run_dir,
                                 const SimState& state,
                                 const std::vector<Eigen::MatrixXd>& creations,
                                 long t, bool full_buffers) {
  const SimConfig& cfg = state.config;
  const int n_agents = cfg.agent_count();
  const auto dir = run_dir / snapshot_dir_name(t);
  std::filesystem::create_directories(dir);

  {
    std::ofstream mf(dir / "manifest.json");
    require(mf.good(), "snapshot: cannot write manifest");
    nlohmann::json manifest = model_manifest(state.agents[0].model);
    manifest["step"] = t;
    manifest["agents"] = n_agents;
    mf << manifest.dump(2) << "\n";
  }
  for (int k = 0; k < n_agents; ++k) {
    char name[40];
    std::snprintf(name, sizeof(name), "agent-%02d-params.bin", k);
    save_model_params(state.agents[k].model, dir / name);
  }

  std::vector<Eigen::MatrixXd> subsamples(n_agents);
  for (int k = 0; k < n_agents; ++k) {
    auto rng = RngStream::keyed(cfg.seed, Stage::Snapshot, t, k);
    const int n = std::min(cfg.snapshot_buffer_samples, state.agents[k].buffer.size());
    subsamples[k] = state.agents[k].buffer.sample(n, rng);
  }
  write_point_rows(dir / "buffers.csv", t, subsamples);

  if (full_buffers) {
    std::vector<Eigen::MatrixXd> all(n_agents);
    for (int k = 0; k < n_agents; ++k) all[k] = state.agents[k].buffer.contents();
    write_point_rows(dir / "buffers_full.csv", t, all);
  }

  bool any_creations = false;
  for (const auto& c : creations) any_creations |= c.cols() > 0;
  if (any_creations) write_point_rows(dir / "creations.csv", t, creations);
}

inline void require_logged_finite(double v, const char* what) {
  require(std::isfinite(v), std::string("run: non-finite logged scalar: ") + what);
}

}  // namespace detail

struct RunSummary {
  long steps = 0;
  double wall_seconds = 0.0;
  double final_mean_vfe = 0.0;
  double final_mean_disc = 0.0;
};

// Execute a full run into a directory: effective config echo, events.jsonl,
// periodic snapshots. The event stream is fully determined by (seed, config)
// on a fixed build, independent of the worker count. On I/O failure the
// partial log is preserved with a trailing {"type":"truncated"} marker.
inline RunSummary run(const SimConfig& config,
                      const std::filesystem::path& out_dir, int threads = 1,
                      std::ostream* progress = nullptr) {
  config.validate();
  std::filesystem::create_directories(out_dir);
  config.save(out_dir / "config.json");

  const auto wall_start = std::chrono::steady_clock::now();
  SimState state = initialize(config, threads);

  std::ofstream events(out_dir / "events.jsonl");
  require(events.good(), "run: cannot write events.jsonl in " + out_dir.string());
  auto emit = [&](const nlohmann::json& j) { events << j.dump() << '\n'; };
  auto flush_checked = [&]() {
    events.flush();
    if (!events.good()) throw std::runtime_error("run: events.jsonl write failure");
  };

  RunSummary summary;
  summary.steps = config.steps;
  const int n_agents = config.agent_count();

  try {
    for (int k = 0; k < n_agents; ++k) {
      detail::require_logged_finite(state.pretrain_reports[k].loss_after, "pretrain");
      emit({{"type", "pretrain"},
            {"agent", k},
            {"loss_before", state.pretrain_reports[k].loss_before},
            {"loss_after", state.pretrain_reports[k].loss_after}});
    }
    detail::write_snapshot_files(out_dir, state, {}, 0, true);
    emit({{"type", "snapshot"}, {"step", 0}, {"dir", snapshot_dir_name(0)}});
    flush_checked();

    const long progress_every = std::max<long>(1, config.steps / 20);
    for (long t = 1; t <= config.steps; ++t) {
      StepOutputs so = step(state, threads);

      for (const auto& r : so.creation_acceptance) {
        emit({{"type", "acceptance"}, {"step", r.step}, {"receiver", r.receiver},
              {"proposer", r.proposer}, {"kind", accept_kind_name(r.kind)},
              {"proposals", r.proposals}, {"acceptances", r.acceptances}});
      }
      for (const auto& r : so.rep_acceptance) {
        emit({{"type", "acceptance"}, {"step", r.step}, {"receiver", r.receiver},
              {"proposer", r.proposer}, {"kind", accept_kind_name(r.kind)},
              {"proposals", r.proposals}, {"acceptances", r.acceptances}});
      }
      for (int k = 0; k < n_agents; ++k) {
        const AgentStepScalars& sc = so.scalars[k];
        if (sc.disc_skipped) {
          emit({{"type", "warning"}, {"step", t}, {"agent", k},
                {"msg", "empty pair set; discriminator update skipped"}});
        }
        detail::require_logged_finite(sc.vfe, "vfe");
        detail::require_logged_finite(sc.disc, "disc");
        nlohmann::json j{{"type", "scalars"}, {"step", t}, {"agent", k},
                         {"vfe", sc.vfe}, {"disc", sc.disc},
                         {"disc_skipped", sc.disc_skipped}};
        if (sc.mean_efe) {
          detail::require_logged_finite(*sc.mean_efe, "mean_efe");
          j["mean_efe"] = *sc.mean_efe;
        } else {
          j["mean_efe"] = nullptr;
        }
        if (sc.rsa_value) {
          detail::require_logged_finite(*sc.rsa_value, "rsa");
          j["rsa"] = *sc.rsa_value;
        } else {
          j["rsa"] = nullptr;
        }
        emit(j);
      }

      const long total = state.total_buffer_occupancy();
      require(total == static_cast<long>(n_agents) * config.buffer_capacity,
              "run: buffer occupancy conservation violated");
      emit({{"type", "invariants"}, {"step", t}, {"buffer_total", total}});

      const bool snapshot_due =
          (t % config.snapshot_interval == 0) || t == config.steps;
      if (snapshot_due) {
        detail::write_snapshot_files(out_dir, state, so.creations, t,
                                     t % config.full_buffer_interval == 0);
        emit({{"type", "snapshot"}, {"step", t}, {"dir", snapshot_dir_name(t)}});
        flush_checked();
      }

      if (progress && (t % progress_every == 0 || t == config.steps)) {
        const double secs = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - wall_start)
                                .count();
        double mean_vfe = 0.0;
        for (const auto& sc : so.scalars) mean_vfe += sc.vfe / n_agents;
        (*progress) << "step " << t << "/" << config.steps << "  vfe="
                    << mean_vfe << "  (" << secs << "s)\n";
      }

      if (t == config.steps) {
        for (const auto& sc : so.scalars) {
          summary.final_mean_vfe += sc.vfe / n_agents;
          summary.final_mean_disc += sc.disc / n_agents;
        }
      }
    }

    emit({{"type", "run_end"}, {"steps", config.steps}});
    flush_checked();
  } catch (...) {
    emit({{"type", "truncated"}});
    events.flush();
    throw;
  }

  summary.wall_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - wall_start)
                             .count();
  {
    std::ofstream sf(out_dir / "summary.json");
    sf << nlohmann::json{{"steps", summary.steps},
                         {"wall_seconds", summary.wall_seconds},
                         {"final_mean_vfe", summary.final_mean_vfe},
                         {"final_mean_disc", summary.final_mean_disc}}
              .dump(2)
       << "\n";
  }
  return summary;
}

}  // namespace socsim
