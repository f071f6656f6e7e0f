#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace rft {

/// Philox4x32-10 counter-based generator (Salmon et al.), wrapped as a
/// 32-bit UniformRandomBitGenerator.
///
/// A stream is fixed by a 64-bit key and three counter words; the fourth word
/// counts blocks within the stream. Streams with different words never overlap,
/// so draws can be assigned to (experiment, replicate, subject) independently
/// of scheduling.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;

  Philox4x32(std::uint64_t key, std::uint32_t w1, std::uint32_t w2, std::uint32_t w3);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// The raw bijection: 10 rounds of Philox on one block.
  static Block encrypt(Block counter, std::array<std::uint32_t, 2> key);

 private:
  std::array<std::uint32_t, 2> key_;
  Block counter_;
  Block buffer_{};
  int used_ = 4;
};

/// Stream for one unit of work: the seed is the key, `tag` names the experiment
/// or purpose, `a` and `b` index the work item (e.g. replicate and subject).
inline Philox4x32 make_stream(std::uint64_t seed, std::uint32_t tag, std::uint32_t a, std::uint32_t b) {
  return Philox4x32(seed, b, a, tag);
}

}  // namespace rft
