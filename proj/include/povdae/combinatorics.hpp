#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace povdae {

using IndexSet = std::vector<std::size_t>;

// C(n, k), saturating at uint64 max.
inline std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    if (result > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = result * num / i;
  }
  return result;
}

// Visits every k-subset of {0..n-1} in lexicographic order.
template <class Fn>
void for_each_combination(std::size_t n, std::size_t k, Fn&& fn) {
  if (k > n) return;
  IndexSet idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    fn(static_cast<const IndexSet&>(idx));
    if (k == 0) return;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Complement of a sorted subset within {0..n-1}.
inline IndexSet complement(const IndexSet& subset, std::size_t n) {
  IndexSet out;
  out.reserve(n - subset.size());
  std::size_t s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (s < subset.size() && subset[s] == i) {
      ++s;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace povdae
