#pragma once

#include <array>
#include <cstdint>

namespace ergconc {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3", SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

// Innovation law for the scheme noise U_k.
enum class InnovationLaw { kStandardGaussian, kSymmetrizedBernoulli };

// Independent stream for one replicate. The key is the master seed and the
// upper half of the counter is the replicate index, so replicate i's draws are
// a pure function of (seed, i) and never depend on other replicates.
class ReplicateStream {
 public:
  ReplicateStream(std::uint64_t seed, std::uint64_t replicate) noexcept;

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;
  // Standard normal by Box-Muller; draws are consumed in pairs.
  double normal() noexcept;
  // +1 or -1 with probability 1/2.
  double sign() noexcept;

  double draw(InnovationLaw law) noexcept {
    return law == InnovationLaw::kStandardGaussian ? normal() : sign();
  }

  std::uint64_t replicate() const noexcept { return replicate_; }

 private:
  std::uint32_t next_word() noexcept;
  void refill() noexcept;

  PhiloxKey key_;
  std::uint64_t replicate_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ergconc
