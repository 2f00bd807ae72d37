#include "hscg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

namespace hscg {

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  // Rejection sampling on the top range keeps the draw exactly uniform.
  const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
  std::uint64_t v;
  do {
    v = gen_();
  } while (v >= limit);
  return v % n;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<int> Rng::sample_without_replacement(int n, int k) {
  std::vector<int> out;
  out.reserve(k);
  if (2 * k >= n) {
    // Partial Fisher-Yates over a full index buffer.
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(uniform_int(n - i));
      std::swap(idx[i], idx[j]);
    }
    out.assign(idx.begin(), idx.begin() + k);
  } else {
    std::unordered_set<int> seen;
    seen.reserve(2 * k);
    while (static_cast<int>(out.size()) < k) {
      const int j = static_cast<int>(uniform_int(n));
      if (seen.insert(j).second) out.push_back(j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> Rng::sample_with_replacement(int n, int k) {
  std::vector<int> out(k);
  for (int i = 0; i < k; ++i) out[i] = static_cast<int>(uniform_int(n));
  std::sort(out.begin(), out.end());
  return out;
}

Rng Rng::split(std::uint64_t salt) const {
  Rng copy = *this;
  std::uint64_t s = copy.next_u64() ^ (salt * 0x9e3779b97f4a7c15ULL);
  return Rng(s);
}

}  // namespace hscg
