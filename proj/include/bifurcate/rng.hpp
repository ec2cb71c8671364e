#pragma once

#include <array>
#include <cstdint>

// Counter-based random number generation (Philox4x64-10, Salmon et al. SC'11).
//
// Every random quantity produced by this project is a pure function of a
// five-part address (master, replicate, unit, stream, round):
//   master    - experiment-level seed (possibly derived per component)
//   replicate - independent repetition id (tree replicate, chain id, ...)
//   unit      - node label on the tree, or step index along a chain
//   stream    - which draw at that unit (noise, coin, ...)
//   round     - rejection-sampling round, 0 for single-shot draws
// This makes results bitwise reproducible regardless of scheduling or the
// number of worker threads.

namespace bifurcate::rng {

// One 10-round Philox4x64 block: 256 bits of counter, 128 bits of key.
std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& counter,
                                        const std::array<std::uint64_t, 2>& key);

// SplitMix64 finalizer; used to derive independent component seeds.
std::uint64_t mix64(std::uint64_t x);

// Independent master seed for a named component of an experiment, so that
// e.g. tree replicates and Q-chains never share counter blocks.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose);

// Component purposes used across the project.
inline constexpr std::uint64_t kPurposeTree = 0x7472656573696dULL;        // tree simulation
inline constexpr std::uint64_t kPurposeChain = 0x71636861696eULL;         // lineage chains
inline constexpr std::uint64_t kPurposeBootstrap = 0x626f6f7473ULL;       // resampling
inline constexpr std::uint64_t kPurposeContraction = 0x636f6e7472ULL;     // two-point chains

struct DrawKey {
  std::uint64_t master = 0;
  std::uint64_t replicate = 0;
  std::uint64_t unit = 0;
  std::uint32_t stream = 0;
  std::uint32_t round = 0;
};

// Uniform on (0,1], 53-bit resolution. Never returns 0.
double uniform01(const DrawKey& key);

// Standard normal via Box-Muller on one Philox block.
double standard_normal(const DrawKey& key);

// A (master, replicate) pair bound together; what samplers receive.
class Source {
 public:
  Source(std::uint64_t master, std::uint64_t replicate)
      : master_(master), replicate_(replicate) {}

  double uniform(std::uint64_t unit, std::uint32_t stream, std::uint32_t round = 0) const {
    return uniform01({master_, replicate_, unit, stream, round});
  }
  double normal(std::uint64_t unit, std::uint32_t stream) const {
    return standard_normal({master_, replicate_, unit, stream, 0});
  }

  std::uint64_t master() const { return master_; }
  std::uint64_t replicate() const { return replicate_; }

 private:
  std::uint64_t master_;
  std::uint64_t replicate_;
};

}  // namespace bifurcate::rng
