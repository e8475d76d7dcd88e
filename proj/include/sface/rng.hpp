#pragma once

#include <cstdint>
#include <random>

namespace sface {

// Counter-spawned random streams. A master seed plus a stream counter is
// hashed through SplitMix64 into an mt19937_64 seed, so stream i is the same
// no matter which thread runs it or in which order streams are created.
// Distribution transforms are implemented here (not via <random> adaptors)
// so the produced sequences are pinned, not implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  // Uniform on [0, 1).
  double uniform();
  // Uniform on (0, 1]; never returns 0, safe for log().
  double uniform_pos();
  // Standard normal via Box-Muller; fixed two-uniform consumption per pair.
  void normal_pair(double& z0, double& z1);
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t next_u64() { return eng_(); }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t id);

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sface
