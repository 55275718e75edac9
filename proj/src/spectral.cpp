#include "kdg/spectral.hpp"

#include <fftw3.h>

#include "kdg/error.hpp"

namespace kdg {

void fft_axes(std::vector<Complex>& data, const std::vector<std::size_t>& shape,
              const std::vector<std::size_t>& axes, bool inverse) {
  const std::size_t rank = shape.size();
  std::vector<std::size_t> stride(rank, 1);
  for (std::size_t k = rank; k-- > 1;) stride[k - 1] = stride[k] * shape[k];
  std::vector<char> chosen(rank, 0);
  for (std::size_t a : axes) {
    require(a < rank, "transform axis out of range");
    chosen[a] = 1;
  }
  std::vector<fftw_iodim> dims, loops;
  for (std::size_t k = 0; k < rank; ++k) {
    fftw_iodim io{static_cast<int>(shape[k]), static_cast<int>(stride[k]), static_cast<int>(stride[k])};
    (chosen[k] ? dims : loops).push_back(io);
  }
  if (dims.empty()) return;
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan = fftw_plan_guru_dft(static_cast<int>(dims.size()), dims.data(), static_cast<int>(loops.size()),
                                      loops.data(), ptr, ptr, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                      FFTW_ESTIMATE);
  if (plan == nullptr) throw NumericalError("FFTW could not create a plan");
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

Vec fft_frequencies(const Axis& axis) {
  const std::size_t n = axis.n;
  Vec out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = j < (n + 1) / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n);
    out[j] = k / axis.length();
  }
  return out;
}

}  // namespace kdg
