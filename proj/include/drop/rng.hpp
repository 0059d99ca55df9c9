#pragma once

#include <cstdint>
#include <vector>

namespace drop {

/// Deterministic random stream identified by (seed, stream_id).
///
/// The generator is xoshiro256** keyed by a splitmix64 mix of both ids, so
/// distinct stream ids give statistically independent sequences and the same
/// pair always reproduces the same draws. Distribution sampling is done here
/// rather than through <random> distributions, whose output is
/// implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Independent child stream; same (parent, tag) always yields the same child.
  RngStream child(std::uint64_t tag) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  double normal();
  bool bernoulli(double prob) { return uniform() < prob; }

  /// k distinct indices from [0, n), uniformly without replacement, sorted.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix_ids(std::uint64_t a, std::uint64_t b);

}  // namespace drop
