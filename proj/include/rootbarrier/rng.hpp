#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

#include <boost/random/normal_distribution.hpp>

#include "rootbarrier/errors.hpp"

namespace rootbarrier {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 64-bit seed is the key. The 128-bit counter is split into
/// [block (32) | substream (32) | stream_id (64)], so distinct
/// (seed, stream_id, substream) triples address disjoint parts of the
/// output space. Each stream yields at most 2^33 values.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t substream = 0)
      : seed_(seed), stream_id_(stream_id), substream_(substream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint32_t substream() const { return substream_; }

  /// Independent child stream sharing seed and stream_id.
  RngStream substream(std::uint32_t index) const { return RngStream(seed_, stream_id_, index); }

  result_type operator()() {
    if (lane_ == 2) refill();
    return buffer_[lane_++];
  }

  /// Uniform on [0,1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on [-1,1).
  double uniform_symmetric() { return 2.0 * uniform01() - 1.0; }

  double normal() { return normal_(*this); }

  static std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                    std::array<std::uint32_t, 2> key) {
    std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    std::uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
      const auto n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
      const auto n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
      c1 = static_cast<std::uint32_t>(p1);
      c3 = static_cast<std::uint32_t>(p0);
      c0 = n0;
      c2 = n2;
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    return {c0, c1, c2, c3};
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  void refill() {
    if (block_exhausted_) throw NumericalError("RngStream: counter space exhausted");
    const auto ctr = philox4x32_10({block_, substream_, static_cast<std::uint32_t>(stream_id_),
                                    static_cast<std::uint32_t>(stream_id_ >> 32)},
                                   {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    buffer_[0] = (static_cast<std::uint64_t>(ctr[1]) << 32) | ctr[0];
    buffer_[1] = (static_cast<std::uint64_t>(ctr[3]) << 32) | ctr[2];
    lane_ = 0;
    if (++block_ == 0) block_exhausted_ = true;
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint32_t substream_;
  std::uint32_t block_ = 0;
  bool block_exhausted_ = false;
  std::array<std::uint64_t, 2> buffer_{};
  int lane_ = 2;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};  // ziggurat
};

}  // namespace rootbarrier
