#pragma once

// Seeded quasi-random sampling: a Sobol sequence with a Cranley–Patterson
// rotation drawn from the seed.

#include <cstddef>
#include <cstdint>
#include <memory>

#include "kdg/geometry.hpp"

namespace kdg {

class ScrambledSobol {
 public:
  ScrambledSobol(std::size_t dim, std::uint64_t seed);
  ~ScrambledSobol();
  ScrambledSobol(ScrambledSobol&&) noexcept;
  ScrambledSobol& operator=(ScrambledSobol&&) noexcept;

  std::size_t dim() const { return dim_; }
  /// Next point in [0, 1)^dim.
  Vec next();

 private:
  struct Impl;
  std::size_t dim_;
  std::unique_ptr<Impl> impl_;
};

/// Independent stream seeds derived from a master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace kdg
