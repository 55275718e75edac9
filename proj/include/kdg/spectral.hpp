#pragma once

// Thin wrapper over FFTW for transforms along a subset of the axes of a
// row-major complex array. Transforms are unnormalised; the forward transform
// uses the e^{-2πi} kernel.

#include <complex>
#include <cstddef>
#include <vector>

#include "kdg/grid.hpp"

namespace kdg {

using Complex = std::complex<double>;

void fft_axes(std::vector<Complex>& data, const std::vector<std::size_t>& shape,
              const std::vector<std::size_t>& axes, bool inverse);

/// DFT frequencies j / L in the usual wrapped order (negative half last).
Vec fft_frequencies(const Axis& axis);

}  // namespace kdg
