#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace prunekit::fft {

std::size_t next_pow2(std::size_t n);

// In-place iterative radix-2 Cooley-Tukey. a.size() must be a power of two.
void transform(std::vector<std::complex<double>>& a);

}  // namespace prunekit::fft
