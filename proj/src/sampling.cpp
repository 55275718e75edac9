#include "kdg/sampling.hpp"

#include <cmath>
#include <random>

#include <boost/random/sobol.hpp>

#include "kdg/error.hpp"

namespace kdg {

struct ScrambledSobol::Impl {
  boost::random::sobol engine;
  Vec shift;

  explicit Impl(std::size_t dim) : engine(dim), shift(dim) {}
};

ScrambledSobol::ScrambledSobol(std::size_t dim, std::uint64_t seed) : dim_(dim) {
  require(dim >= 1, "sampling dimension must be positive");
  impl_ = std::make_unique<Impl>(dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double& c : impl_->shift) c = unit(rng);
  // Skip the origin, which every Sobol sequence starts with.
  impl_->engine.discard(dim);
}

ScrambledSobol::~ScrambledSobol() = default;
ScrambledSobol::ScrambledSobol(ScrambledSobol&&) noexcept = default;
ScrambledSobol& ScrambledSobol::operator=(ScrambledSobol&&) noexcept = default;

Vec ScrambledSobol::next() {
  Vec p(dim_);
  const double scale = 1.0 / (static_cast<double>(boost::random::sobol::max()) + 1.0);
  for (std::size_t k = 0; k < dim_; ++k) {
    double u = static_cast<double>(impl_->engine()) * scale + impl_->shift[k];
    p[k] = u - std::floor(u);
  }
  return p;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace kdg
