#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace modspike::rngstat {

/// Mixes two 64-bit words into a stream id (splitmix64 finalizer over a keyed combination).
/// Used to derive per-cell / per-trial / per-sample streams from structured indices.
std::uint64_t derive_stream_id(std::uint64_t a, std::uint64_t b);

/// Counter-based random stream: Philox4x32-10 keyed by the master seed, with the
/// stream id occupying the upper half of the 128-bit counter and a call counter
/// the lower half. Two streams with different ids never share a counter value.
///
/// Gaussians use Box-Muller on pairs of open-interval uniforms; the second value
/// of each pair is cached. Sequences depend only on (master_seed, stream_id, call
/// sequence) plus the platform libm's log/cos/sin.
///
/// Not thread-safe; give each task its own stream.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double gaussian();

  /// Child stream keyed by (this stream's id, index). Does not advance this stream.
  RngStream substream(std::uint64_t index) const;

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> block_{};
  int block_pos_ = 2;
  double cached_gaussian_ = 0.0;
  bool has_cached_ = false;
};

/// Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// i.i.d. N(0,1) entries.
std::vector<double> gaussian_vector(std::size_t dim, RngStream& rng);
void fill_gaussian(std::span<double> out, RngStream& rng);

/// Uniform on the unit sphere S^{dim-1} (normalized Gaussian).
std::vector<double> uniform_sphere(std::size_t dim, RngStream& rng);

}  // namespace modspike::rngstat
