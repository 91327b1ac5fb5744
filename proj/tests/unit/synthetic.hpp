#ifndef STSDEP_TESTS_SYNTHETIC_HPP_
#define STSDEP_TESTS_SYNTHETIC_HPP_

// Synthetic p-value matrices for the analysis tests.

#include <random>
#include <vector>

#include "stsdep/pmatrix.hpp"

namespace stsdep::testing {

inline std::vector<std::size_t> first_items(std::size_t k) {
  std::vector<std::size_t> items(k);
  for (std::size_t i = 0; i < k; ++i) items[i] = i;
  return items;
}

// i.i.d. uniform entries; copy_of[c] >= 0 makes column c a copy of that column.
inline PValueMatrix uniform_matrix(std::size_t m, std::size_t k, std::uint64_t seed,
                                   const std::vector<int>& copy_of = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(m * k);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t c = 0; c < k; ++c) {
      const bool copy = c < copy_of.size() && copy_of[c] >= 0;
      v[j * k + c] = copy ? v[j * k + static_cast<std::size_t>(copy_of[c])] : u(rng);
    }
  }
  return PValueMatrix(first_items(k), m, std::move(v), {{"source", "synthetic"}, {"seed", seed}});
}

}  // namespace stsdep::testing

#endif  // STSDEP_TESTS_SYNTHETIC_HPP_
