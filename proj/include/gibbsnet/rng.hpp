#pragma once

// Counter-based random streams.
//
// Every random draw the sampler makes is a pure function of
// (seed, chain, side, vertex, step, draw index), evaluated with Philox4x32-10.
// Streams therefore need no shared state: a vertex update produces the same
// numbers regardless of which thread runs it or in which order the block is
// visited.

#include <array>
#include <cstdint>
#include <span>

namespace gibbsnet {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

// One Philox4x32-10 block.
Philox4x32Counter philox4x32(Philox4x32Counter counter, Philox4x32Key key) noexcept;

enum class Side : std::uint32_t { X = 0, Y = 1, Init = 2 };

// Which per-vertex stream to open. chain and step must fit in 32 bits and
// vertex in 30 bits; CounterStream throws gibbsnet::Error otherwise.
struct StreamId {
  std::uint64_t seed = 0;
  std::uint64_t chain = 0;
  Side side = Side::X;
  std::uint64_t vertex = 0;
  std::uint64_t step = 0;
};

class CounterStream {
 public:
  explicit CounterStream(const StreamId& id);

  std::uint32_t next_u32() noexcept;
  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;
  // Standard normal via Box-Muller.
  double normal() noexcept;
  void fill_normal(std::span<double> out) noexcept;

  // 32-bit words consumed so far.
  std::uint64_t words_used() const noexcept { return words_used_; }

 private:
  void refill() noexcept;

  Philox4x32Key key_{};
  Philox4x32Counter counter_{};
  Philox4x32Counter buffer_{};
  unsigned buffer_pos_ = 4;
  std::uint64_t words_used_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gibbsnet
