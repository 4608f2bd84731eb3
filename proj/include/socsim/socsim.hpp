#pragma once

#include "socsim/agent/agent.hpp"
#include "socsim/agent/memory_buffer.hpp"
#include "socsim/analysis/acceptance.hpp"
#include "socsim/analysis/gw.hpp"
#include "socsim/analysis/mds.hpp"
#include "socsim/analysis/pipelines.hpp"
#include "socsim/analysis/rsa.hpp"
#include "socsim/analysis/wasserstein.hpp"
#include "socsim/contracts.hpp"
#include "socsim/genmodel/genmodel.hpp"
#include "socsim/genmodel/losses.hpp"
#include "socsim/genmodel/serialize.hpp"
#include "socsim/numerics/adam.hpp"
#include "socsim/numerics/net.hpp"
#include "socsim/numerics/rng.hpp"
#include "socsim/sim/config.hpp"
#include "socsim/sim/parallel.hpp"
#include "socsim/sim/run_log.hpp"
#include "socsim/sim/simulation.hpp"
#include "socsim/social/graph.hpp"
#include "socsim/social/mhng.hpp"
