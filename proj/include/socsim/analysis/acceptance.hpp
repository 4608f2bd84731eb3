#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "socsim/sim/run_log.hpp"

namespace socsim {

struct EdgeAcceptanceStats {
  long t0 = 0, t1 = 0;  // interval [t0, t1]
  int a = -1, b = -1;   // edge endpoints, a < b
  std::string kind;     // "rep" or "creation"
  double rate = 0.0;      // direction-averaged mean acceptance rate
  double zero_freq = 0.0; // fraction of steps with zero acceptances on the edge
};

// Aggregate acceptance records over one step interval. For each edge and
// kind, the per-step rate is the mean of the two directions' acceptance
// fractions; a step counts as "zero" when the edge saw no acceptances of
// that kind at all.
inline std::vector<EdgeAcceptanceStats> acceptance_network(
    const std::vector<AcceptanceEvent>& events, long t0, long t1) {
  // (a, b, kind) -> step -> (sum of direction rates, directions, acceptances)
  struct StepAgg {
    double rate_sum = 0.0;
    int directions = 0;
    long acceptances = 0;
  };
  std::map<std::tuple<int, int, std::string>, std::map<long, StepAgg>> agg;

  for (const auto& e : events) {
    if (e.step < t0 || e.step > t1 || e.proposals <= 0) continue;
    const int a = std::min(e.receiver, e.proposer);
    const int b = std::max(e.receiver, e.proposer);
    StepAgg& s = agg[{a, b, e.kind}][e.step];
    s.rate_sum += static_cast<double>(e.acceptances) / e.proposals;
    s.directions += 1;
    s.acceptances += e.acceptances;
  }

  std::vector<EdgeAcceptanceStats> out;
  for (const auto& [key, steps] : agg) {
    EdgeAcceptanceStats st;
    st.t0 = t0;
    st.t1 = t1;
    st.a = std::get<0>(key);
    st.b = std::get<1>(key);
    st.kind = std::get<2>(key);
    long zero_steps = 0;
    for (const auto& [step, s] : steps) {
      st.rate += s.rate_sum / s.directions;
      if (s.acceptances == 0) ++zero_steps;
    }
    st.rate /= static_cast<double>(steps.size());
    st.zero_freq = static_cast<double>(zero_steps) / steps.size();
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace socsim
