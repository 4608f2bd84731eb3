#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

#include "socsim/contracts.hpp"

namespace socsim {

// Stage tags used to derive independent random streams. Every parallel unit
// of work (an agent in a stage, an edge in an exchange) owns the stream keyed
// by (seed, stage, step, unit), so results do not depend on iteration order
// or worker count.
enum class Stage : std::uint64_t {
  BufferInit = 1,
  ParamInit = 2,
  Pretrain = 3,
  Create = 4,
  Memorize = 5,
  Exchange = 6,
  Update = 7,
  RsaLog = 8,
  Analysis = 9,
  Snapshot = 10,
};

// Splittable counter-style generator: a SplitMix64 sequence whose initial
// state is a hash of the key tuple. Identical keys give identical sequences;
// distinct keys give distinct sequences.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(mix64(seed ^ kGamma)) {}

  static RngStream keyed(std::uint64_t seed, Stage stage, std::uint64_t step,
                         std::uint64_t unit) {
    std::uint64_t h = mix64(seed ^ kGamma);
    h = mix64(h ^ (static_cast<std::uint64_t>(stage) + 0xD1B54A32D192ED03ULL));
    h = mix64(h ^ (step + 0x8CB92BA72F3D8DD7ULL));
    h = mix64(h ^ (unit + 0x2545F4914F6CDD1DULL));
    RngStream s(0);
    s.state_ = h;
    s.has_cached_normal_ = false;
    return s;
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Power-of-two rejection keeps it unbiased.
  int uniform_int(int n) {
    require(n > 0, "uniform_int: n must be positive");
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    std::uint64_t mask = un - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      const std::uint64_t v = next_u64() & mask;
      if (v < un) return static_cast<int>(v);
    }
  }

  // Standard normal via Box-Muller; the second draw is cached.
  double normal() {
    if (has_cached_normal_) {
      has_cached_normal_ = false;
      return cached_normal_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(a);
    has_cached_normal_ = true;
    return r * std::cos(a);
  }

  Eigen::VectorXd normals(int n) {
    require(n >= 1, "normals: dimension must be >= 1");
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  // Filled column by column; the fill order is part of the stream contract.
  Eigen::MatrixXd normals(int rows, int cols) {
    require(rows >= 1 && cols >= 1, "normals: dimensions must be >= 1");
    Eigen::MatrixXd m(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) m(r, c) = normal();
    return m;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace socsim
