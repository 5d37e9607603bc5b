#include "auditplan/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace auditplan {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  // Lemire's multiply-shift rejection; exact and branch-light.
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::uint64_t mix_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t x = root ^ (0x9e3779b97f4a7c15ULL + (stream << 1));
  std::uint64_t a = splitmix64(x);
  x ^= stream;
  return a ^ splitmix64(x);
}

namespace {

double log_hyper_pmf(std::int64_t m, std::int64_t g, std::int64_t k, std::int64_t h) {
  auto lc = [](std::int64_t n, std::int64_t r) {
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(r) + 1.0) -
           std::lgamma(static_cast<double>(n - r) + 1.0);
  };
  return lc(g, h) + lc(m - g, k - h) - lc(m, k);
}

// Ratio of adjacent pmf values, p(h+1)/p(h).
double step_up(std::int64_t m, std::int64_t g, std::int64_t k, std::int64_t h) {
  return (static_cast<double>(g - h) * static_cast<double>(k - h)) /
         (static_cast<double>(h + 1) * static_cast<double>(m - g - k + h + 1));
}

}  // namespace

std::int64_t hypergeometric(Rng& rng, std::int64_t total, std::int64_t success,
                            std::int64_t draws) {
  if (total < 0 || success < 0 || success > total || draws < 0 || draws > total)
    throw std::invalid_argument("hypergeometric: inconsistent parameters");
  const std::int64_t lo = std::max<std::int64_t>(0, draws + success - total);
  const std::int64_t hi = std::min(success, draws);
  if (lo == hi) return lo;
  if (success == 1) {   // Bernoulli(draws/total), decided with one integer draw
    return rng.below(static_cast<std::uint64_t>(total)) <
                   static_cast<std::uint64_t>(draws)
               ? 1
               : 0;
  }

  const double u = rng.uniform01();
  if (hi - lo <= 64) {
    // Narrow support: linear inverse transform from the lower end.
    double p = std::exp(log_hyper_pmf(total, success, draws, lo));
    double cdf = p;
    std::int64_t h = lo;
    while (h < hi && cdf <= u) {
      p *= step_up(total, success, draws, h);
      ++h;
      cdf += p;
    }
    return h;
  }

  // Wide support: expand outward from the mode so the starting pmf is the
  // largest one and the walk length is O(sd).
  std::int64_t mode = static_cast<std::int64_t>(
      (static_cast<double>(draws) + 1.0) * (static_cast<double>(success) + 1.0) /
      (static_cast<double>(total) + 2.0));
  mode = std::clamp(mode, lo, hi);
  double p_mode = std::exp(log_hyper_pmf(total, success, draws, mode));
  double remaining = u - p_mode;
  if (remaining <= 0) return mode;
  double p_right = p_mode;
  double p_left = p_mode;
  std::int64_t right = mode;
  std::int64_t left = mode;
  while (left > lo || right < hi) {
    if (right < hi) {
      p_right *= step_up(total, success, draws, right);
      ++right;
      remaining -= p_right;
      if (remaining <= 0) return right;
    }
    if (left > lo) {
      p_left /= step_up(total, success, draws, left - 1);
      --left;
      remaining -= p_left;
      if (remaining <= 0) return left;
    }
  }
  return right;  // u landed in accumulated rounding slack; clamp to support
}

std::vector<std::int64_t> sample_group_counts(Rng& rng,
                                              std::span<const std::int64_t> group_sizes,
                                              std::int64_t draws) {
  std::int64_t population = 0;
  for (std::int64_t size : group_sizes) population += size;
  if (draws < 0 || draws > population)
    throw std::invalid_argument("sample_group_counts: draws out of range");

  std::vector<std::int64_t> counts(group_sizes.size(), 0);
  if (draws == 0) return counts;
  if (draws == population) {
    std::copy(group_sizes.begin(), group_sizes.end(), counts.begin());
    return counts;
  }

  const bool complement = draws > population / 2;
  const std::int64_t k = complement ? population - draws : draws;

  // Floyd's algorithm: k distinct indices of the expanded population.
  std::unordered_set<std::int64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(k) * 2);
  for (std::int64_t j = population - k; j < population; ++j) {
    const auto t = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(j + 1)));
    chosen.insert(chosen.contains(t) ? j : t);
  }

  std::vector<std::int64_t> cumulative(group_sizes.size());
  std::int64_t running = 0;
  for (std::size_t i = 0; i < group_sizes.size(); ++i) {
    running += group_sizes[i];
    cumulative[i] = running;
  }
  for (std::int64_t index : chosen) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), index);
    ++counts[static_cast<std::size_t>(it - cumulative.begin())];
  }
  if (complement) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] = group_sizes[i] - counts[i];
  }
  return counts;
}

}  // namespace auditplan
