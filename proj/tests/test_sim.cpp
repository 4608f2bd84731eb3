#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "socsim/genmodel/serialize.hpp"
#include "socsim/sim/config.hpp"
#include "socsim/sim/parallel.hpp"
#include "socsim/sim/run_log.hpp"
#include "socsim/sim/simulation.hpp"

using namespace socsim;
namespace fs = std::filesystem;

namespace {

// Small enough to run in milliseconds, structurally identical to defaults.
SimConfig tiny_config(std::uint64_t seed, long steps,
                      const std::string& condition = "with_creation") {
  SimConfig c;
  c.seed = seed;
  c.steps = steps;
  c.condition = condition;
  c.n_cliques = 2;
  c.clique_size = 3;
  c.creations_per_step = 2;
  c.comm_memory_samples = 8;
  c.buffer_capacity = 80;
  c.snapshot_interval = 2;
  c.full_buffer_interval = 4;
  c.snapshot_buffer_samples = 16;
  c.rsa_log_samples = 10;
  c.hidden_width = 8;
  c.hidden_layers = 2;
  c.hyper.model_update_iters = 2;
  c.hyper.model_update_batch = 16;
  c.hyper.creation_steps = 3;
  c.hyper.pretrain_epochs = 2;
  c.hyper.pretrain_batch = 16;
  return c;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "socsim_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("parallel_for: slot writes are complete and exceptions propagate") {
  std::vector<int> out(100, 0);
  parallel_for(100, 4, [&](int i) { out[i] = i * i; });
  for (int i = 0; i < 100; ++i) REQUIRE(out[i] == i * i);
  REQUIRE_THROWS_AS(
      parallel_for(8, 3, [](int i) {
        if (i == 5) throw std::runtime_error("boom");
      }),
      std::runtime_error);
}

TEST_CASE("config: JSON round trip and defaults") {
  const SimConfig def;
  const SimConfig back = SimConfig::from_json(def.to_json());
  REQUIRE(back.to_json() == def.to_json());
  // Key experimental-setting defaults.
  REQUIRE(def.agent_count() == 14);
  REQUIRE(def.steps == 5000);
  REQUIRE(def.creations_per_step == 6);
  REQUIRE(def.comm_memory_samples == 100);
  REQUIRE(def.buffer_capacity == 7000);
  REQUIRE(def.hyper.lambda == 0.1);
  REQUIRE(def.hyper.beta == 1.0);
  REQUIRE(def.hyper.tau == 0.3);
  REQUIRE(def.hyper.model_update_iters == 5);
  REQUIRE(def.hyper.model_update_lr == 1e-5);
  REQUIRE(def.hyper.model_update_batch == 256);
}

TEST_CASE("config: unknown keys and invalid values are rejected") {
  nlohmann::json j = SimConfig{}.to_json();
  j["not_a_key"] = 1;
  REQUIRE_THROWS_WITH(SimConfig::from_json(j),
                      Catch::Matchers::ContainsSubstring("not_a_key"));

  SimConfig c;
  c.condition = "sometimes";
  REQUIRE_THROWS_AS(c.validate(), std::invalid_argument);
  c = SimConfig{};
  c.steps = 0;
  REQUIRE_THROWS_AS(c.validate(), std::invalid_argument);
  c = SimConfig{};
  c.hyper.tau = -1.0;
  REQUIRE_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("config: file round trip") {
  const auto dir = temp_dir("config_rt");
  SimConfig c = tiny_config(9, 4);
  c.save(dir / "config.json");
  const SimConfig back = SimConfig::load(dir / "config.json");
  REQUIRE(back.to_json() == c.to_json());
}

TEST_CASE("initialize: buffers full, deterministic, pretraining improves ELBO") {
  SimConfig c = tiny_config(123, 1);
  SimState a = initialize(c, 2);
  REQUIRE(static_cast<int>(a.agents.size()) == 6);
  for (const auto& agent : a.agents)
    REQUIRE(agent.buffer.size() == c.buffer_capacity);
  REQUIRE(a.total_buffer_occupancy() == 6L * c.buffer_capacity);

  SimState b = initialize(c, 1);  // different worker count, same result
  for (int k = 0; k < 6; ++k) {
    REQUIRE(pack_model(a.agents[k].model) == pack_model(b.agents[k].model));
    REQUIRE(a.agents[k].buffer.contents() == b.agents[k].buffer.contents());
  }
  for (const auto& r : a.pretrain_reports)
    REQUIRE(r.loss_after < r.loss_before);
}

TEST_CASE("step: with_creation appends exactly |C| artifacts per agent") {
  SimConfig c = tiny_config(7, 1);
  SimState s = initialize(c, 2);
  const StepOutputs out = step(s, 2);

  REQUIRE(out.step == 1);
  for (int k = 0; k < 6; ++k) {
    REQUIRE(out.creations[k].cols() == c.creations_per_step);
    REQUIRE(s.agents[k].buffer.size() == c.buffer_capacity);  // conservation
    REQUIRE(out.scalars[k].mean_efe.has_value());
    REQUIRE(out.scalars[k].rsa_value.has_value());
  }
  // Stage 4 runs exactly model_update_iters iterations of each update.
  for (const auto& agent : s.agents) {
    REQUIRE(agent.adam_disc.step_count() == c.hyper.model_update_iters);
    REQUIRE(agent.adam_encoder.step_count() == c.hyper.model_update_iters);
    REQUIRE(agent.adam_decoder.step_count() == c.hyper.model_update_iters);
  }
  // Acceptance records: one per (receiver, neighbor) for creations and two
  // per edge for representations, all within bounds.
  std::size_t expected_dir_pairs = 0;
  for (int k = 0; k < 6; ++k)
    expected_dir_pairs += s.graph.neighbors(k).size();
  REQUIRE(out.creation_acceptance.size() == expected_dir_pairs);
  REQUIRE(out.rep_acceptance.size() == 2 * s.graph.edges().size());
  for (const auto& r : out.rep_acceptance) {
    REQUIRE(r.proposals == 2 * c.creations_per_step + 2 * c.comm_memory_samples);
    REQUIRE(r.acceptances >= 0);
    REQUIRE(r.acceptances <= r.proposals);
  }
}

TEST_CASE("step: without_creation skips stages 1-2 and leaves buffers intact") {
  SimConfig c = tiny_config(8, 2, "without_creation");
  SimState s = initialize(c, 2);
  std::vector<Eigen::MatrixXd> before;
  for (const auto& a : s.agents) before.push_back(a.buffer.contents());

  const StepOutputs out = step(s, 2);
  for (int k = 0; k < 6; ++k) {
    REQUIRE(out.creations[k].cols() == 0);
    REQUIRE_FALSE(out.scalars[k].mean_efe.has_value());
    REQUIRE(s.agents[k].buffer.contents() == before[k]);  // bit-identical
  }
  REQUIRE(out.creation_acceptance.empty());
  for (const auto& r : out.rep_acceptance)
    REQUIRE(r.proposals == 2 * c.comm_memory_samples);
}

TEST_CASE("run: smoke run produces the documented artifacts") {
  const auto dir = temp_dir("smoke");
  SimConfig c = tiny_config(11, 2);
  const RunSummary summary = run(c, dir, 2);
  REQUIRE(summary.steps == 2);

  REQUIRE(fs::exists(dir / "config.json"));
  REQUIRE(fs::exists(dir / "events.jsonl"));
  REQUIRE(fs::exists(dir / "summary.json"));
  REQUIRE(fs::exists(dir / "snapshots/step-000000/manifest.json"));
  REQUIRE(fs::exists(dir / "snapshots/step-000000/buffers_full.csv"));
  REQUIRE(fs::exists(dir / "snapshots/step-000002/agent-05-params.bin"));

  const RunEvents ev = read_events(dir);
  REQUIRE(ev.finished);
  REQUIRE_FALSE(ev.truncated);
  REQUIRE(ev.completed_steps == 2);
  REQUIRE(ev.scalars.size() == 2 * 6);
  REQUIRE(ev.invariants.size() == 2);
  for (const auto& inv : ev.invariants)
    REQUIRE(inv.buffer_total == 6L * c.buffer_capacity);
  REQUIRE(ev.snapshots.size() == 2);  // step 0 and step 2

  // Effective config echo reproduces the run configuration.
  REQUIRE(SimConfig::load(dir / "config.json").to_json() == c.to_json());
}

TEST_CASE("run: events are byte-identical across seeds/workers") {
  const auto d1 = temp_dir("det1");
  const auto d2 = temp_dir("det2");
  const auto d3 = temp_dir("det3");
  SimConfig c = tiny_config(42, 3);
  run(c, d1, 1);
  run(c, d2, 2);
  run(c, d3, 5);  // oversubscribed
  const auto l1 = read_lines(d1 / "events.jsonl");
  REQUIRE(l1 == read_lines(d2 / "events.jsonl"));
  REQUIRE(l1 == read_lines(d3 / "events.jsonl"));

  const auto d4 = temp_dir("det4");
  SimConfig c2 = c;
  c2.seed = 43;
  run(c2, d4, 2);
  REQUIRE(l1 != read_lines(d4 / "events.jsonl"));
}

TEST_CASE("run: step records are a prefix of a longer run with the same seed") {
  // Streams are keyed by step, so truncating T must not change the history.
  const auto d_short = temp_dir("prefix_short");
  const auto d_long = temp_dir("prefix_long");
  SimConfig cs = tiny_config(21, 3);
  cs.snapshot_interval = 1;
  SimConfig cl = cs;
  cl.steps = 5;
  run(cs, d_short, 2);
  run(cl, d_long, 2);

  const auto short_lines = read_lines(d_short / "events.jsonl");
  const auto long_lines = read_lines(d_long / "events.jsonl");
  REQUIRE(short_lines.size() >= 2);
  for (std::size_t i = 0; i + 1 < short_lines.size(); ++i) {  // skip run_end
    REQUIRE(short_lines[i] == long_lines[i]);
  }
}

TEST_CASE("snapshot: parameters round trip through the binary layout") {
  const auto dir = temp_dir("snapshot_rt");
  SimConfig c = tiny_config(33, 2);
  SimState s = initialize(c, 2);
  step(s, 2);
  step(s, 2);

  const RunSummary summary [[maybe_unused]] = RunSummary{};
  detail::write_snapshot_files(dir, s, {}, 2, false);

  RunEvents fake;
  const SnapshotData snap = load_snapshot(dir, {2, snapshot_dir_name(2)}, 6);
  for (int k = 0; k < 6; ++k) {
    REQUIRE(pack_model(snap.models[k]) == pack_model(s.agents[k].model));
    REQUIRE(snap.buffer_samples[k].cols() == c.snapshot_buffer_samples);
  }
  (void)fake;
}

TEST_CASE("run: truncation marker is written when output fails mid-run") {
  // Point the run directory at a location whose events file cannot grow:
  // easiest portable trigger is a directory in place of events.jsonl.
  const auto dir = temp_dir("trunc");
  fs::create_directories(dir / "events.jsonl");
  SimConfig c = tiny_config(5, 2);
  REQUIRE_THROWS(run(c, dir, 1));
}
