#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace dpolymer {

// Philox4x32-10 counter-based generator (Salmon et al., Random123). A pure
// bijection of the 128-bit counter for each 64-bit key.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

// Maps the first two output words to a double strictly inside (0, 1).
inline double to_open_unit(const PhiloxCounter& out) {
  const std::uint64_t bits =
      ((static_cast<std::uint64_t>(out[0]) << 32) | out[1]) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

struct Seed128 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  friend constexpr bool operator==(const Seed128&, const Seed128&) = default;
};

// Accepts up to 32 hex digits, optionally prefixed with 0x.
Seed128 parse_seed(const std::string& text);
std::string format_seed(const Seed128& seed);

// Independent streams derived from one seed.
enum class Stream : std::uint32_t {
  kBaseField = 1,
  kTiltedOverlay = 2,
  kSpineWalk = 3,
  kReplica = 4,
};

PhiloxKey derive_key(const Seed128& seed, Stream stream);

// Per-replica seed: Philox(counter = (index_lo, index_hi, 0, 0),
// key = derive_key(master, kReplica)) read as (hi, lo) = (w0 w1, w2 w3).
Seed128 replica_seed(const Seed128& master, std::uint64_t index);

}  // namespace dpolymer
