#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace prunekit {

// Counter-based splittable random stream. A stream is keyed by
// (seed, purpose, index); two streams with different keys are independent,
// and the same key always reproduces the same sequence regardless of how
// many other streams exist or which thread draws from them.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0);

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double next_double();

  // Unbiased uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n);

  // Standard normal via Box-Muller.
  double next_gaussian();

  // Fisher-Yates; does not depend on std::shuffle's unspecified draw order.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices drawn from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t state_;
  bool have_cached_gaussian_ = false;
  double cached_gaussian_ = 0.0;
};

}  // namespace prunekit
