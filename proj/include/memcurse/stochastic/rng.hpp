#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace memcurse::stochastic {

/// Philox4x32-10 block function (Salmon et al. constants).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer; used to derive stream keys from (root seed, path).
std::uint64_t splitmix64(std::uint64_t x);

/// Splittable counter-based random stream.
///
/// A stream is identified by a root seed and a path of child indices. The
/// Philox key is a hash of both, so sibling streams never share a key and
/// a stream's output does not depend on which other streams were consumed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t root_seed);

  /// Independent sub-stream; the parent is not advanced.
  RngStream child(std::uint64_t index) const;

  std::uint64_t root_seed() const { return root_seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal via the polar Box-Muller method.
  double normal();
  /// Standard normal conditioned on |z| <= bound (rejection).
  double truncated_normal(double bound);

 private:
  RngStream(std::uint64_t root_seed, std::vector<std::uint64_t> path);
  void refill();

  std::uint64_t root_seed_;
  std::vector<std::uint64_t> path_;
  std::array<std::uint32_t, 2> key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int block_pos_ = 4;  // in 64-bit halves consumed: 0..2; 4 = empty
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace memcurse::stochastic
