#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "socsim/analysis/acceptance.hpp"
#include "socsim/analysis/gw.hpp"
#include "socsim/analysis/mds.hpp"
#include "socsim/analysis/pipelines.hpp"
#include "socsim/analysis/rsa.hpp"
#include "socsim/analysis/wasserstein.hpp"
#include "support/ot_oracle.hpp"

using namespace socsim;

namespace {

GaussianPosterior posterior(const Eigen::Vector4d& mean, const Eigen::Vector4d& sd) {
  return {mean, sd.array().square().log().matrix()};
}

Eigen::MatrixXd distance_matrix_of_points(const Eigen::MatrixXd& pts) {
  return pairwise_distances(pts);
}

}  // namespace

TEST_CASE("w2_gaussian: identical posteriors give zero") {
  const auto p = posterior(Eigen::Vector4d(1, -2, 0.5, 0), Eigen::Vector4d(1, 2, 0.5, 1));
  REQUIRE(w2_gaussian(p, p) == 0.0);
}

TEST_CASE("w2_gaussian: pure mean shift equals the shift") {
  const auto p = posterior(Eigen::Vector4d::Zero(), Eigen::Vector4d::Ones());
  const double m = 1.75;
  const auto q = posterior(Eigen::Vector4d(m, 0, 0, 0), Eigen::Vector4d::Ones());
  REQUIRE(w2_gaussian(p, q) == Catch::Approx(m).epsilon(1e-14));
}

TEST_CASE("w2_gaussian: triangle inequality on random triples") {
  auto rng = RngStream::keyed(60, Stage::Analysis, 0, 0);
  for (int i = 0; i < 50; ++i) {
    auto draw = [&]() {
      return posterior(rng.normals(4),
                       (rng.normals(4).array().abs() + 0.2).matrix());
    };
    const auto a = draw(), b = draw(), c = draw();
    REQUIRE(w2_gaussian(a, c) <= w2_gaussian(a, b) + w2_gaussian(b, c) + 1e-9);
  }
}

TEST_CASE("w2_gaussian: matches a sampled entropic OT estimate within 5%") {
  Eigen::VectorXd mu1(4), sd1(4), mu2(4), sd2(4);
  mu1 << 0.3, -0.2, 0.1, 0.0;
  sd1 << 1.0, 0.8, 1.2, 0.9;
  mu2 << 2.5, -1.5, 1.0, 2.0;
  sd2 << 0.7, 1.1, 0.9, 1.3;
  const double closed = w2_gaussian(posterior(mu1, sd1), posterior(mu2, sd2));

  auto rng = RngStream::keyed(1, Stage::Analysis, 0, 0);
  const double sampled =
      oracles::sampled_gaussian_w2(mu1, sd1, mu2, sd2, 2000, 0.3, rng);
  REQUIRE(std::abs(sampled - closed) / closed < 0.05);
}

TEST_CASE("wasserstein_matrix: shared parameters give the zero matrix") {
  auto rng = RngStream::keyed(61, Stage::ParamInit, 0, 0);
  const GenerativeModel m = GenerativeModel::random(rng, {8, 8});
  const Eigen::MatrixXd ref = rng.normals(2, 20);
  const std::vector<PosteriorBatch> posts{m.encode(ref), m.encode(ref), m.encode(ref)};
  const Eigen::MatrixXd d = wasserstein_matrix(posts);
  REQUIRE(d.norm() == 0.0);
}

TEST_CASE("wasserstein_matrix: two-agent constant posteriors, hand-computed") {
  // Agent A: N(0, I); agent B: N((2,0,0,0), diag(0.25)) for every reference
  // observation. w2 = sqrt(4 + 4 * (1 - 0.5)^2) = sqrt(5).
  PosteriorBatch a, b;
  a.mean = Eigen::MatrixXd::Zero(4, 7);
  a.log_var = Eigen::MatrixXd::Zero(4, 7);
  b.mean = Eigen::MatrixXd::Zero(4, 7);
  b.mean.row(0).setConstant(2.0);
  b.log_var = Eigen::MatrixXd::Constant(4, 7, std::log(0.25));
  const Eigen::MatrixXd d = wasserstein_matrix({a, b});
  REQUIRE(d(0, 1) == Catch::Approx(std::sqrt(5.0)).epsilon(1e-12));
  REQUIRE(d(1, 0) == d(0, 1));
  REQUIRE(d(0, 0) == 0.0);
}

TEST_CASE("wasserstein_matrix: output satisfies the distance-matrix invariants") {
  auto rng = RngStream::keyed(62, Stage::ParamInit, 0, 0);
  std::vector<PosteriorBatch> posts;
  const Eigen::MatrixXd ref = rng.normals(2, 15);
  for (int k = 0; k < 4; ++k)
    posts.push_back(GenerativeModel::random(rng, {8, 8}).encode(ref));
  const Eigen::MatrixXd d = wasserstein_matrix(posts);
  REQUIRE(d.allFinite());
  REQUIRE((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-9);
  REQUIRE(d.diagonal().cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(d.minCoeff() >= 0.0);
}

TEST_CASE("classical_mds: three points on a line") {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  const Eigen::MatrixXd x = classical_mds(d, 2);
  const Eigen::MatrixXd rec = distance_matrix_of_points(x.transpose());
  REQUIRE((rec - d).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("classical_mds: round-trips exact planar configurations") {
  auto rng = RngStream::keyed(63, Stage::Analysis, 0, 0);
  const Eigen::MatrixXd pts = rng.normals(2, 12);
  const Eigen::MatrixXd d = distance_matrix_of_points(pts);
  const Eigen::MatrixXd x = classical_mds(d, 2);
  const Eigen::MatrixXd rec = distance_matrix_of_points(x.transpose());
  REQUIRE((rec - d).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("classical_mds: zero matrix embeds everything at the origin") {
  const Eigen::MatrixXd x = classical_mds(Eigen::MatrixXd::Zero(5, 5), 2);
  REQUIRE(x.norm() == 0.0);
}

TEST_CASE("classical_mds: sign convention is deterministic") {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  const Eigen::MatrixXd a = classical_mds(d, 2);
  const Eigen::MatrixXd b = classical_mds(d, 2);
  REQUIRE(a == b);
  int argmax = 0;
  a.col(0).cwiseAbs().maxCoeff(&argmax);
  REQUIRE(a(argmax, 0) > 0.0);
}

TEST_CASE("procrustes_align: undoes a random rotation/reflection") {
  auto rng = RngStream::keyed(64, Stage::Analysis, 0, 0);
  Eigen::MatrixXd x = rng.normals(2, 9).transpose();  // 9 x 2, centered-ish
  x.rowwise() -= x.colwise().mean();
  const double a = rng.uniform() * 2 * M_PI;
  Eigen::Matrix2d rot;
  rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  Eigen::Matrix2d refl = rot;
  refl.col(1) = -refl.col(1);
  REQUIRE((procrustes_align(x * rot, x) - x).cwiseAbs().maxCoeff() < 1e-9);
  REQUIRE((procrustes_align(x * refl, x) - x).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("gw_distance: identical structures cost nothing") {
  auto rng = RngStream::keyed(65, Stage::Analysis, 0, 0);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::MatrixXd pts = rng.normals(2, 10);
    const Eigen::MatrixXd d = distance_matrix_of_points(pts);
    const GwResult r = gw_distance(d, d);
    REQUIRE(r.value <= 1e-6);
  }
}

TEST_CASE("gw_distance: permuted point sets cost (almost) nothing") {
  auto rng = RngStream::keyed(66, Stage::Analysis, 0, 0);
  const int n = 10;
  const Eigen::MatrixXd pts = rng.normals(3, n);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
  Eigen::MatrixXd permuted(3, n);
  for (int i = 0; i < n; ++i) permuted.col(i) = pts.col(perm[i]);

  const GwResult r = gw_distance(distance_matrix_of_points(pts),
                                 distance_matrix_of_points(permuted));
  REQUIRE(r.value <= 1e-4);
}

TEST_CASE("gw_distance: rotation is free, anisotropic stretch is not") {
  Eigen::MatrixXd pts(2, 4);
  pts << 0, 1, 1, 0, 0, 0, 1, 1;  // unit square
  Eigen::Matrix2d rot;
  const double a = 0.7;
  rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  const Eigen::MatrixXd rotated = rot * pts;
  Eigen::MatrixXd stretched = pts;
  stretched.row(0) *= 2.0;

  const Eigen::MatrixXd d0 = distance_matrix_of_points(pts);
  const GwResult free_case = gw_distance(d0, distance_matrix_of_points(rotated));
  REQUIRE(free_case.value <= 1e-6);

  const GwResult paid_case = gw_distance(d0, distance_matrix_of_points(stretched));
  REQUIRE(paid_case.value > 1e-3);
}

TEST_CASE("gw_distance: matches the brute-force permutation oracle on 4 points") {
  // Exhaustive search over all 4! permutation couplings gives the best
  // deterministic matching; the solver should land on (or below) it.
  auto rng = RngStream::keyed(67, Stage::Analysis, 0, 0);
  for (int trial = 0; trial < 4; ++trial) {
    const Eigen::MatrixXd p1 = rng.normals(2, 4);
    const Eigen::MatrixXd p2 = rng.normals(2, 4);
    const Eigen::MatrixXd d1 = distance_matrix_of_points(p1);
    const Eigen::MatrixXd d2 = distance_matrix_of_points(p2);

    // Oracle works on the same jointly normalized matrices the solver uses.
    const double scale = std::max(d1.maxCoeff(), d2.maxCoeff());
    const Eigen::MatrixXd a = d1 / scale, b = d2 / scale;
    std::vector<int> perm{0, 1, 2, 3};
    double best = std::numeric_limits<double>::infinity();
    do {
      double cost = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          const double diff = a(i, j) - b(perm[i], perm[j]);
          cost += diff * diff / 16.0;  // uniform coupling weights 1/4 * 1/4
        }
      best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));

    const GwResult r = gw_distance(d1, d2);
    REQUIRE(r.value <= best + 1e-3);
    REQUIRE(r.value >= -1e-12);
  }
}

TEST_CASE("gw_distance: symmetric in its arguments to solver tolerance") {
  auto rng = RngStream::keyed(68, Stage::Analysis, 0, 0);
  const Eigen::MatrixXd d1 = distance_matrix_of_points(rng.normals(2, 8));
  const Eigen::MatrixXd d2 = distance_matrix_of_points(rng.normals(2, 8));
  const double ab = gw_distance(d1, d2).value;
  const double ba = gw_distance(d2, d1).value;
  REQUIRE(std::abs(ab - ba) < 1e-6);
}

TEST_CASE("gw_distance: all-zero matrices are an exact zero") {
  const GwResult r = gw_distance(Eigen::MatrixXd::Zero(5, 5),
                                 Eigen::MatrixXd::Zero(3, 3));
  REQUIRE(r.value == 0.0);
  REQUIRE(r.converged);
}

TEST_CASE("rsa: affine relations give exactly +-1") {
  auto rng = RngStream::keyed(69, Stage::Analysis, 0, 0);
  const Eigen::MatrixXd d = distance_matrix_of_points(rng.normals(2, 6));
  REQUIRE(*rsa(d, Eigen::MatrixXd(2.0 * d)) == Catch::Approx(1.0).epsilon(1e-12));

  const double c = d.maxCoeff() + 1.0;
  Eigen::MatrixXd flipped = (c - d.array()).matrix();
  flipped.diagonal().setZero();  // keep it a valid distance-like matrix
  // Only the strict upper triangle enters, so the diagonal reset is harmless.
  REQUIRE(*rsa(d, flipped) == Catch::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("rsa: hand-computed 4x4 pair") {
  // Upper triangles: u = (1,2,3,4,5,6), v = (2,1,4,3,7,5).
  Eigen::MatrixXd d1 = Eigen::MatrixXd::Zero(4, 4);
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(4, 4);
  const double u[6] = {1, 2, 3, 4, 5, 6};
  const double v[6] = {2, 1, 4, 3, 7, 5};
  int at = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      d1(i, j) = d1(j, i) = u[at];
      d2(i, j) = d2(j, i) = v[at];
      ++at;
    }
  // Direct textbook computation.
  double mu = 0, mv = 0;
  for (int i = 0; i < 6; ++i) {
    mu += u[i] / 6;
    mv += v[i] / 6;
  }
  double num = 0, su = 0, sv = 0;
  for (int i = 0; i < 6; ++i) {
    num += (u[i] - mu) * (v[i] - mv);
    su += (u[i] - mu) * (u[i] - mu);
    sv += (v[i] - mv) * (v[i] - mv);
  }
  const double want = num / std::sqrt(su * sv);
  REQUIRE(*rsa(d1, d2) == Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("rsa: zero-variance triangle is flagged undefined") {
  const Eigen::MatrixXd constant = Eigen::MatrixXd::Ones(3, 3);
  auto rng = RngStream::keyed(70, Stage::Analysis, 0, 0);
  const Eigen::MatrixXd d = distance_matrix_of_points(rng.normals(2, 3));
  REQUIRE_FALSE(rsa(constant, d).has_value());
}

TEST_CASE("rsa: invariant under positive affine transforms") {
  auto rng = RngStream::keyed(71, Stage::Analysis, 0, 0);
  const Eigen::MatrixXd d1 = distance_matrix_of_points(rng.normals(2, 7));
  const Eigen::MatrixXd d2 = distance_matrix_of_points(rng.normals(2, 7));
  const double base = *rsa(d1, d2);
  const Eigen::MatrixXd scaled = (3.5 * d1.array() + 2.0).matrix();
  REQUIRE(*rsa(scaled, d2) == Catch::Approx(base).epsilon(1e-12));
}

TEST_CASE("rsa_timeseries: constant inputs give a flat series") {
  RunDirData run;
  run.config = SimConfig{};
  run.config.n_cliques = 2;
  run.config.clique_size = 2;
  for (long t = 1; t <= 10; ++t) {
    for (int k = 0; k < 4; ++k) {
      ScalarsEvent e;
      e.step = t;
      e.agent = k;
      e.rsa = 0.4;
      run.events.scalars.push_back(e);
    }
  }
  const auto rows = rsa_timeseries({run}, 3);
  REQUIRE(rows.size() == 20);  // 10 steps x 2 clusters
  for (const auto& r : rows) {
    REQUIRE(r.mean == Catch::Approx(0.4).epsilon(1e-12));
    REQUIRE(r.stddev == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("rsa_timeseries: window=1 is unsmoothed, larger windows average") {
  RunDirData run;
  run.config = SimConfig{};
  run.config.n_cliques = 1;
  run.config.clique_size = 2;
  // With only cluster 0: per-step values are the two agents' mean.
  const double vals[4][2] = {{0.0, 0.2}, {0.4, 0.6}, {0.8, 1.0}, {0.2, 0.4}};
  for (long t = 1; t <= 4; ++t)
    for (int k = 0; k < 2; ++k) {
      ScalarsEvent e;
      e.step = t;
      e.agent = k;
      e.rsa = vals[t - 1][k];
      run.events.scalars.push_back(e);
    }

  const auto raw = rsa_timeseries({run}, 1);
  REQUIRE(raw.size() == 4);
  REQUIRE(raw[0].mean == Catch::Approx(0.1).epsilon(1e-12));
  REQUIRE(raw[1].mean == Catch::Approx(0.5).epsilon(1e-12));

  const auto smooth = rsa_timeseries({run}, 2);
  REQUIRE(smooth[0].mean == Catch::Approx(0.1).epsilon(1e-12));   // partial window
  REQUIRE(smooth[1].mean == Catch::Approx(0.3).epsilon(1e-12));   // (0.1+0.5)/2
  REQUIRE(smooth[2].mean == Catch::Approx(0.7).epsilon(1e-12));   // (0.5+0.9)/2
  REQUIRE(smooth[3].mean == Catch::Approx(0.6).epsilon(1e-12));   // (0.9+0.3)/2
}

TEST_CASE("acceptance_network: analytic aggregations") {
  std::vector<AcceptanceEvent> events;
  auto add = [&](long step, int recv, int prop, int acc) {
    events.push_back({step, recv, prop, "rep", 10, acc});
  };
  // Edge (0,1), both directions, 4 steps: accept-all / accept-none alternating.
  for (long t = 1; t <= 4; ++t) {
    const int acc = (t % 2 == 1) ? 10 : 0;
    add(t, 0, 1, acc);
    add(t, 1, 0, acc);
  }
  const auto stats = acceptance_network(events, 1, 4);
  REQUIRE(stats.size() == 1);
  REQUIRE(stats[0].a == 0);
  REQUIRE(stats[0].b == 1);
  REQUIRE(stats[0].rate == Catch::Approx(0.5).epsilon(1e-12));
  REQUIRE(stats[0].zero_freq == Catch::Approx(0.5).epsilon(1e-12));

  const auto all_accept = acceptance_network(
      {{1, 0, 1, "creation", 6, 6}, {1, 1, 0, "creation", 6, 6}}, 1, 1);
  REQUIRE(all_accept[0].rate == 1.0);
  REQUIRE(all_accept[0].zero_freq == 0.0);

  REQUIRE(acceptance_network(events, 10, 20).empty());  // empty interval
}

TEST_CASE("acceptance_network: hand-tabulated asymmetric directions") {
  // Step 1: 0<-1 accepts 5/10, 1<-0 accepts 0/10 -> step rate 0.25, not zero.
  // Step 2: both zero -> rate 0, zero step.
  std::vector<AcceptanceEvent> events{{1, 0, 1, "rep", 10, 5},
                                      {1, 1, 0, "rep", 10, 0},
                                      {2, 0, 1, "rep", 10, 0},
                                      {2, 1, 0, "rep", 10, 0}};
  const auto stats = acceptance_network(events, 1, 2);
  REQUIRE(stats.size() == 1);
  REQUIRE(stats[0].rate == Catch::Approx(0.125).epsilon(1e-12));
  REQUIRE(stats[0].zero_freq == Catch::Approx(0.5).epsilon(1e-12));
}
