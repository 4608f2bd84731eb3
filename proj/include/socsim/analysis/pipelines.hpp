#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "socsim/analysis/acceptance.hpp"
#include "socsim/analysis/gw.hpp"
#include "socsim/analysis/mds.hpp"
#include "socsim/analysis/rsa.hpp"
#include "socsim/analysis/wasserstein.hpp"
#include "socsim/sim/config.hpp"
#include "socsim/sim/parallel.hpp"
#include "socsim/sim/run_log.hpp"

namespace socsim {

struct RunDirData {
  std::filesystem::path dir;
  SimConfig config;
  RunEvents events;
};

inline RunDirData load_run(const std::filesystem::path& dir) {
  return {dir, SimConfig::load(dir / "config.json"), read_events(dir)};
}

struct AnalysisOptions {
  long interval = 1000;             // step window width
  int window = 25;                  // RSA moving-average width
  std::uint64_t analysis_seed = 12345;
  int ref_per_agent = 50;           // reference draws per agent per step
  int gw_points = 100;              // reference subsample for GW structures
  int threads = 1;
  long t0 = -1, t1 = -1;            // optional step range restriction
  GwOptions gw;
};

// Reference observations at one snapshot step: per agent, `per_agent`
// uniform draws from that agent's logged buffer subsample.
struct ReferenceSet {
  long step = 0;
  Eigen::MatrixXd obs;      // 2 x (per_agent * K)
  std::vector<int> owner;
};

inline ReferenceSet build_reference_set(const SnapshotData& snap, int per_agent,
                                        std::uint64_t analysis_seed) {
  const int n_agents = static_cast<int>(snap.models.size());
  require(per_agent >= 1, "reference set: per_agent must be >= 1");
  ReferenceSet ref;
  ref.step = snap.step;
  ref.obs.resize(kObsDim, static_cast<long>(per_agent) * n_agents);
  ref.owner.reserve(per_agent * n_agents);
  for (int k = 0; k < n_agents; ++k) {
    const auto& pool = snap.buffer_samples[k];
    require(pool.cols() >= 1, "reference set: empty buffer sample");
    auto rng = RngStream::keyed(analysis_seed, Stage::Analysis, snap.step, k);
    for (int i = 0; i < per_agent; ++i) {
      ref.obs.col(static_cast<long>(k) * per_agent + i) =
          pool.col(rng.uniform_int(static_cast<int>(pool.cols())));
      ref.owner.push_back(k);
    }
  }
  return ref;
}

inline Eigen::MatrixXd wasserstein_matrix_at(const SnapshotData& snap,
                                             const ReferenceSet& ref) {
  std::vector<PosteriorBatch> posts;
  posts.reserve(snap.models.size());
  for (const auto& model : snap.models) posts.push_back(model.encode(ref.obs));
  return wasserstein_matrix(posts);
}

namespace detail {

// Inclusive step windows [i*interval + 1, (i+1)*interval].
struct StepWindow {
  long lo = 0, hi = 0;
  std::vector<SnapshotRef> snapshots;
};

inline std::vector<StepWindow> group_snapshots(const RunDirData& run,
                                               const AnalysisOptions& opt) {
  std::map<long, StepWindow> by_index;
  for (const auto& ref : run.events.snapshots) {
    if (ref.step < 1) continue;  // the initial snapshot is not part of a window
    if (opt.t0 >= 0 && ref.step < opt.t0) continue;
    if (opt.t1 >= 0 && ref.step > opt.t1) continue;
    const long idx = (ref.step - 1) / opt.interval;
    StepWindow& w = by_index[idx];
    w.lo = idx * opt.interval + 1;
    w.hi = (idx + 1) * opt.interval;
    w.snapshots.push_back(ref);
  }
  std::vector<StepWindow> out;
  for (auto& [idx, w] : by_index) {
    std::sort(w.snapshots.begin(), w.snapshots.end(),
              [](const SnapshotRef& a, const SnapshotRef& b) { return a.step < b.step; });
    out.push_back(std::move(w));
  }
  return out;
}

inline void write_matrix_csv(const std::filesystem::path& path,
                             const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  require(out.good(), "analysis: cannot write " + path.string());
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << csv::format_double(m(i, j));
    }
    out << '\n';
  }
}

}  // namespace detail

// Per-window mean Wasserstein distance matrices, one K x K CSV per window:
// wasserstein_<lo>_<hi>.csv.
inline std::vector<std::filesystem::path> analyze_wasserstein(
    const RunDirData& run, const AnalysisOptions& opt,
    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const int n_agents = run.config.agent_count();
  std::vector<std::filesystem::path> written;

  for (const auto& w : detail::group_snapshots(run, opt)) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_agents, n_agents);
    for (const auto& ref : w.snapshots) {
      const SnapshotData snap = load_snapshot(run.dir, ref, n_agents);
      const ReferenceSet obs =
          build_reference_set(snap, opt.ref_per_agent, opt.analysis_seed);
      acc += wasserstein_matrix_at(snap, obs);
    }
    acc /= static_cast<double>(w.snapshots.size());
    char name[64];
    std::snprintf(name, sizeof(name), "wasserstein_%ld_%ld.csv", w.lo, w.hi);
    detail::write_matrix_csv(out_dir / name, acc);
    written.push_back(out_dir / name);
  }
  return written;
}

struct GwMdsRow {
  long step = 0;
  int agent = -1;
  double x = 0.0, y = 0.0;
};

// Per-window GW distance matrix between agents' representation structures at
// the window's last snapshot, embedded with classical MDS and chained with
// Procrustes alignment so consecutive windows share an orientation.
inline std::vector<GwMdsRow> gw_mds_trajectory(const RunDirData& run,
                                               const AnalysisOptions& opt) {
  const int n_agents = run.config.agent_count();
  std::vector<GwMdsRow> rows;
  Eigen::MatrixXd prev;

  for (const auto& w : detail::group_snapshots(run, opt)) {
    const SnapshotRef& last = w.snapshots.back();
    const SnapshotData snap = load_snapshot(run.dir, last, n_agents);
    const ReferenceSet ref =
        build_reference_set(snap, opt.ref_per_agent, opt.analysis_seed);

    // Subsample (without replacement) down to the GW structure size.
    const int total = static_cast<int>(ref.obs.cols());
    const int n_pts = std::min(opt.gw_points, total);
    std::vector<int> idx(total);
    for (int i = 0; i < total; ++i) idx[i] = i;
    auto rng = RngStream::keyed(opt.analysis_seed, Stage::Analysis, last.step,
                                static_cast<std::uint64_t>(n_agents));
    for (int i = 0; i < n_pts; ++i) {
      const int j = i + rng.uniform_int(total - i);
      std::swap(idx[i], idx[j]);
    }
    Eigen::MatrixXd sub(kObsDim, n_pts);
    for (int i = 0; i < n_pts; ++i) sub.col(i) = ref.obs.col(idx[i]);

    std::vector<Eigen::MatrixXd> structures(n_agents);
    for (int k = 0; k < n_agents; ++k)
      structures[k] = representation_structure(snap.models[k], sub);

    // All agent pairs, parallelizable.
    std::vector<std::pair<int, int>> pair_list;
    for (int i = 0; i < n_agents; ++i)
      for (int j = i + 1; j < n_agents; ++j) pair_list.emplace_back(i, j);
    std::vector<double> values(pair_list.size());
    parallel_for(static_cast<int>(pair_list.size()), opt.threads, [&](int p) {
      const auto [i, j] = pair_list[p];
      values[p] = gw_distance(structures[i], structures[j], opt.gw).value;
    });
    Eigen::MatrixXd gw_matrix = Eigen::MatrixXd::Zero(n_agents, n_agents);
    for (std::size_t p = 0; p < pair_list.size(); ++p) {
      gw_matrix(pair_list[p].first, pair_list[p].second) = values[p];
      gw_matrix(pair_list[p].second, pair_list[p].first) = values[p];
    }

    Eigen::MatrixXd coords = classical_mds(gw_matrix, 2);
    if (prev.size() > 0) coords = procrustes_align(coords, prev);
    prev = coords;

    for (int k = 0; k < n_agents; ++k)
      rows.push_back({last.step, k, coords(k, 0), coords(k, 1)});
  }
  return rows;
}

inline std::filesystem::path analyze_gw_mds(const RunDirData& run,
                                            const AnalysisOptions& opt,
                                            const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto rows = gw_mds_trajectory(run, opt);
  const auto path = out_dir / "gw_mds.csv";
  std::ofstream out(path);
  require(out.good(), "analysis: cannot write " + path.string());
  out << "step,agent,x,y\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.agent << ',' << csv::format_double(r.x) << ','
        << csv::format_double(r.y) << '\n';
  }
  return path;
}

struct RsaSeriesRow {
  long step = 0;
  int cluster = -1;
  std::string condition;
  double mean = 0.0;
  double stddev = 0.0;
};

// Per-cluster RSA time series from the logged per-step per-agent values,
// pooled over agents and runs (seeds), then smoothed with a trailing moving
// average of `window` steps. Steps with no values are emitted as gaps (no
// row), never interpolated.
inline std::vector<RsaSeriesRow> rsa_timeseries(const std::vector<RunDirData>& runs,
                                                int window) {
  require(!runs.empty(), "rsa: no runs given");
  require(window >= 1, "rsa: window must be >= 1");

  std::vector<RsaSeriesRow> rows;
  // Group runs by condition so mixed inputs produce one series each.
  std::map<std::string, std::vector<const RunDirData*>> by_condition;
  for (const auto& r : runs) by_condition[r.config.condition].push_back(&r);

  for (const auto& [condition, group] : by_condition) {
    const SimConfig& cfg0 = group.front()->config;
    const int clusters = cfg0.n_cliques;
    // step -> cluster -> pooled values over agents x runs
    std::map<long, std::vector<std::vector<double>>> pooled;
    for (const auto* run : group) {
      require(run->config.n_cliques == cfg0.n_cliques &&
                  run->config.clique_size == cfg0.clique_size,
              "rsa: runs have mismatched topologies");
      for (const auto& s : run->events.scalars) {
        if (!s.rsa) continue;
        auto& per_cluster = pooled[s.step];
        if (per_cluster.empty()) per_cluster.resize(clusters);
        per_cluster[s.agent / cfg0.clique_size].push_back(*s.rsa);
      }
    }

    for (int c = 0; c < clusters; ++c) {
      std::vector<long> steps;
      std::vector<double> means, stds;
      for (const auto& [step, per_cluster] : pooled) {
        const auto& vals = per_cluster[c];
        if (vals.empty()) continue;
        double m = 0.0;
        for (double v : vals) m += v;
        m /= vals.size();
        double var = 0.0;
        for (double v : vals) var += (v - m) * (v - m);
        var /= vals.size();
        steps.push_back(step);
        means.push_back(m);
        stds.push_back(std::sqrt(var));
      }
      for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::size_t lo = (i + 1 >= static_cast<std::size_t>(window))
                                   ? i + 1 - window
                                   : 0;
        double m = 0.0, s = 0.0;
        for (std::size_t j = lo; j <= i; ++j) {
          m += means[j];
          s += stds[j];
        }
        const double n = static_cast<double>(i - lo + 1);
        rows.push_back({steps[i], c, condition, m / n, s / n});
      }
    }
  }
  return rows;
}

inline std::filesystem::path analyze_rsa(const std::vector<RunDirData>& runs,
                                         const AnalysisOptions& opt,
                                         const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto rows = rsa_timeseries(runs, opt.window);
  const auto path = out_dir / "rsa.csv";
  std::ofstream out(path);
  require(out.good(), "analysis: cannot write " + path.string());
  out << "step,cluster,condition,mean,std\n";
  for (const auto& r : rows) {
    if (opt.t0 >= 0 && r.step < opt.t0) continue;
    if (opt.t1 >= 0 && r.step > opt.t1) continue;
    out << r.step << ',' << r.cluster << ',' << r.condition << ','
        << csv::format_double(r.mean) << ',' << csv::format_double(r.stddev)
        << '\n';
  }
  return path;
}

inline std::filesystem::path analyze_acceptance(
    const RunDirData& run, const AnalysisOptions& opt,
    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / "acceptance.csv";
  std::ofstream out(path);
  require(out.good(), "analysis: cannot write " + path.string());
  out << "t0,t1,k,kp,kind,rate,zero_freq\n";

  long max_step = run.events.completed_steps;
  for (long lo = 1; lo <= max_step; lo += opt.interval) {
    const long hi = std::min(lo + opt.interval - 1, max_step);
    if (opt.t0 >= 0 && hi < opt.t0) continue;
    if (opt.t1 >= 0 && lo > opt.t1) continue;
    for (const auto& st : acceptance_network(run.events.acceptance, lo, hi)) {
      out << st.t0 << ',' << st.t1 << ',' << st.a << ',' << st.b << ','
          << st.kind << ',' << csv::format_double(st.rate) << ','
          << csv::format_double(st.zero_freq) << '\n';
    }
  }
  return path;
}

}  // namespace socsim
