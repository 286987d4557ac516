#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fairbayes {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the sub-stream identified by `path` under `master`, e.g.
/// derive_seed(seed, {run, chain}). Distinct paths give unrelated streams.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(master);
  for (auto p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path = {}) {
  return Rng(derive_seed(master, path));
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

// Beta(alpha, beta) via the ratio of two gamma draws.
inline double sample_beta(Rng& rng, double alpha, double beta) {
  const double x = std::gamma_distribution<double>(alpha, 1.0)(rng);
  const double y = std::gamma_distribution<double>(beta, 1.0)(rng);
  if (x + y == 0.0) return alpha >= beta ? 1.0 : 0.0;
  return x / (x + y);
}

// |N(0, scale)|, i.e. the normal truncated to (0, inf).
inline double sample_half_normal(Rng& rng, double scale) {
  double z = 0.0;
  do {
    z = standard_normal(rng);
  } while (z == 0.0);
  return scale * (z < 0 ? -z : z);
}

}  // namespace fairbayes
