#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "socsim/contracts.hpp"
#include "socsim/genmodel/serialize.hpp"

namespace socsim {

// Run directory layout:
//   config.json                 effective configuration echo
//   events.jsonl                one JSON record per line, append-only
//   summary.json                wall time and final losses (not deterministic)
//   snapshots/step-<t>/         parameters and buffer dumps
//     manifest.json             architecture + parameter file layout
//     agent-<k>-params.bin      raw little-endian float64
//     buffers.csv               step,agent,x,y (uniform subsample)
//     buffers_full.csv          full dumps at the coarser interval
//     creations.csv             step,agent,x,y (current-step creations)

struct ScalarsEvent {
  long step = 0;
  int agent = -1;
  double vfe = 0.0;
  double disc = 0.0;
  bool disc_skipped = false;
  std::optional<double> mean_efe;
  std::optional<double> rsa;
};

struct AcceptanceEvent {
  long step = 0;
  int receiver = -1;
  int proposer = -1;
  std::string kind;  // "rep" or "creation"
  int proposals = 0;
  int acceptances = 0;
};

struct SnapshotRef {
  long step = 0;
  std::string dir;  // relative to the run directory
};

struct InvariantsEvent {
  long step = 0;
  long buffer_total = 0;
};

struct RunEvents {
  std::vector<ScalarsEvent> scalars;
  std::vector<AcceptanceEvent> acceptance;
  std::vector<SnapshotRef> snapshots;
  std::vector<InvariantsEvent> invariants;
  std::vector<nlohmann::json> warnings;
  long completed_steps = 0;
  bool finished = false;
  bool truncated = false;
};

inline RunEvents read_events(const std::filesystem::path& run_dir) {
  const auto path = run_dir / "events.jsonl";
  std::ifstream in(path);
  require(in.good(), "run log: cannot open " + path.string());

  RunEvents out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "scalars") {
      ScalarsEvent e;
      e.step = j.at("step").get<long>();
      e.agent = j.at("agent").get<int>();
      e.vfe = j.at("vfe").get<double>();
      e.disc = j.at("disc").get<double>();
      e.disc_skipped = j.value("disc_skipped", false);
      if (j.contains("mean_efe") && !j.at("mean_efe").is_null())
        e.mean_efe = j.at("mean_efe").get<double>();
      if (j.contains("rsa") && !j.at("rsa").is_null())
        e.rsa = j.at("rsa").get<double>();
      out.scalars.push_back(std::move(e));
    } else if (type == "acceptance") {
      AcceptanceEvent e;
      e.step = j.at("step").get<long>();
      e.receiver = j.at("receiver").get<int>();
      e.proposer = j.at("proposer").get<int>();
      e.kind = j.at("kind").get<std::string>();
      e.proposals = j.at("proposals").get<int>();
      e.acceptances = j.at("acceptances").get<int>();
      out.acceptance.push_back(std::move(e));
    } else if (type == "snapshot") {
      out.snapshots.push_back(
          {j.at("step").get<long>(), j.at("dir").get<std::string>()});
    } else if (type == "invariants") {
      out.invariants.push_back(
          {j.at("step").get<long>(), j.at("buffer_total").get<long>()});
      out.completed_steps = std::max(out.completed_steps, j.at("step").get<long>());
    } else if (type == "warning") {
      out.warnings.push_back(j);
    } else if (type == "run_end") {
      out.finished = true;
    } else if (type == "truncated") {
      out.truncated = true;
    }
    // "pretrain" and any future record types are skipped by readers.
  }
  return out;
}

namespace csv {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace csv

// Rows of (step, agent, x, y). Used for buffer subsamples, full buffers and
// creation dumps.
inline void write_point_rows(const std::filesystem::path& path, long step,
                             const std::vector<Eigen::MatrixXd>& per_agent) {
  std::ofstream out(path);
  require(out.good(), "run log: cannot write " + path.string());
  out << "step,agent,x,y\n";
  for (std::size_t k = 0; k < per_agent.size(); ++k) {
    const auto& pts = per_agent[k];
    for (int i = 0; i < pts.cols(); ++i) {
      out << step << ',' << k << ',' << csv::format_double(pts(0, i)) << ','
          << csv::format_double(pts(1, i)) << '\n';
    }
  }
  require(out.good(), "run log: short write to " + path.string());
}

inline std::vector<Eigen::MatrixXd> read_point_rows(
    const std::filesystem::path& path, int agent_count) {
  std::ifstream in(path);
  require(in.good(), "run log: cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> xs(agent_count), ys(agent_count);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    require(fields.size() == 4, "run log: malformed row in " + path.string());
    const int agent = std::stoi(fields[1]);
    require(agent >= 0 && agent < agent_count,
            "run log: agent out of range in " + path.string());
    xs[agent].push_back(std::stod(fields[2]));
    ys[agent].push_back(std::stod(fields[3]));
  }
  std::vector<Eigen::MatrixXd> out(agent_count);
  for (int k = 0; k < agent_count; ++k) {
    out[k].resize(2, static_cast<long>(xs[k].size()));
    for (std::size_t i = 0; i < xs[k].size(); ++i) {
      out[k](0, static_cast<long>(i)) = xs[k][i];
      out[k](1, static_cast<long>(i)) = ys[k][i];
    }
  }
  return out;
}

inline std::string snapshot_dir_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step-%06ld", step);
  return std::string("snapshots/") + buf;
}

struct SnapshotData {
  long step = 0;
  std::vector<GenerativeModel> models;
  std::vector<Eigen::MatrixXd> buffer_samples;  // per agent, 2 x n
};

inline SnapshotData load_snapshot(const std::filesystem::path& run_dir,
                                  const SnapshotRef& ref, int agent_count) {
  const auto dir = run_dir / ref.dir;
  std::ifstream mf(dir / "manifest.json");
  require(mf.good(), "snapshot: cannot open manifest in " + dir.string());
  nlohmann::json manifest;
  mf >> manifest;

  SnapshotData data;
  data.step = ref.step;
  data.models.reserve(agent_count);
  for (int k = 0; k < agent_count; ++k) {
    char name[40];
    std::snprintf(name, sizeof(name), "agent-%02d-params.bin", k);
    data.models.push_back(load_model(manifest, dir / name));
  }
  data.buffer_samples = read_point_rows(dir / "buffers.csv", agent_count);
  return data;
}

}  // namespace socsim
