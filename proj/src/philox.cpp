#include "dpolymer/philox.hpp"

#include <cctype>
#include <cstdio>

#include "dpolymer/lattice.hpp"

namespace dpolymer {

Seed128 parse_seed(const std::string& text) {
  std::string digits = text;
  if (digits.size() >= 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X'))
    digits = digits.substr(2);
  if (digits.empty() || digits.size() > 32)
    throw ValidationError("seed: expected 1 to 32 hex digits, got '" + text + "'");
  Seed128 seed;
  for (char c : digits) {
    if (!std::isxdigit(static_cast<unsigned char>(c)))
      throw ValidationError("seed: invalid hex digit in '" + text + "'");
    const std::uint64_t nibble =
        std::isdigit(static_cast<unsigned char>(c))
            ? static_cast<std::uint64_t>(c - '0')
            : static_cast<std::uint64_t>(std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
    seed.hi = (seed.hi << 4) | (seed.lo >> 60);
    seed.lo = (seed.lo << 4) | nibble;
  }
  return seed;
}

std::string format_seed(const Seed128& seed) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "0x%016llx%016llx", static_cast<unsigned long long>(seed.hi),
                static_cast<unsigned long long>(seed.lo));
  return buf;
}

PhiloxKey derive_key(const Seed128& seed, Stream stream) {
  const PhiloxCounter out = philox4x32_10(
      {static_cast<std::uint32_t>(seed.lo), static_cast<std::uint32_t>(seed.lo >> 32),
       static_cast<std::uint32_t>(seed.hi), static_cast<std::uint32_t>(seed.hi >> 32)},
      {static_cast<std::uint32_t>(stream), 0x243F6A88u});
  return {out[0], out[1]};
}

Seed128 replica_seed(const Seed128& master, std::uint64_t index) {
  const PhiloxCounter out =
      philox4x32_10({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0u, 0u},
                    derive_key(master, Stream::kReplica));
  Seed128 s;
  s.hi = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  s.lo = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  return s;
}

}  // namespace dpolymer
