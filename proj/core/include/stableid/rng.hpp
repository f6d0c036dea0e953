#pragma once

#include <cstdint>

namespace stableid {

// Standard splitmix64 finalizer; bijective, good avalanche.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Derives an independent per-trial seed from a master seed, a stream tag
// and an index. Workers pulling trial i always see the same stream no
// matter how trials are scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(master ^ 0x6A09E667F3BCC909ull);
  h = splitmix64(h ^ splitmix64(stream));
  h = splitmix64(h ^ splitmix64(index * 0x9E3779B97F4A7C15ull + 1));
  return h;
}

}  // namespace stableid
