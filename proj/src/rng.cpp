#include "gibbsnet/rng.hpp"

#include <cmath>
#include <numbers>

#include "gibbsnet/error.hpp"

namespace gibbsnet {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

Philox4x32Counter philox4x32(Philox4x32Counter ctr, Philox4x32Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

CounterStream::CounterStream(const StreamId& id) {
  if (id.chain > 0xFFFFFFFFull || id.step > 0xFFFFFFFFull || id.vertex >= (1ull << 30)) {
    throw Error("CounterStream: chain/step must fit in 32 bits and vertex in 30 bits");
  }
  key_ = {static_cast<std::uint32_t>(id.seed), static_cast<std::uint32_t>(id.seed >> 32)};
  counter_ = {0u,
              static_cast<std::uint32_t>(id.vertex) |
                  (static_cast<std::uint32_t>(id.side) << 30),
              static_cast<std::uint32_t>(id.step), static_cast<std::uint32_t>(id.chain)};
}

void CounterStream::refill() noexcept {
  buffer_ = philox4x32(counter_, key_);
  ++counter_[0];
  buffer_pos_ = 0;
}

std::uint32_t CounterStream::next_u32() noexcept {
  if (buffer_pos_ == 4) refill();
  ++words_used_;
  return buffer_[buffer_pos_++];
}

double CounterStream::uniform() noexcept {
  const std::uint64_t hi = next_u32() >> 5;  // 27 bits
  const std::uint64_t lo = next_u32() >> 6;  // 26 bits
  const double bits = static_cast<double>((hi << 26) | lo);
  return (bits + 0.5) * 0x1.0p-53;
}

double CounterStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

void CounterStream::fill_normal(std::span<double> out) noexcept {
  for (double& v : out) v = normal();
}

}  // namespace gibbsnet
