#include "smlab/rng.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace smlab {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

} // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t block) {
  std::uint64_t x = seed;
  (void)splitmix64(x);
  x ^= 0xd2b74407b1ce6e93ULL * (tag + 1);
  (void)splitmix64(x);
  x ^= 0xca5a826395121157ULL * (block + 1);
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::next_uniform() {
  // 53 random bits in (0,1)
  return ((next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::next_normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = next_uniform();
  double u2 = next_uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::uint64_t Rng::next_poisson(double lambda) {
  if (lambda <= 0) return 0;
  if (lambda < 30.0) {
    // inversion by sequential search
    double p = std::exp(-lambda), F = p, u = next_uniform();
    std::uint64_t k = 0;
    while (u > F && k < 10000) {
      ++k;
      p *= lambda / k;
      F += p;
    }
    return k;
  }
  // PTRS transformed rejection (Hormann 1993)
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = next_uniform() - 0.5;
    double v = next_uniform();
    double us = 0.5 - std::abs(u);
    double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * std::log(lambda) - lambda - std::lgamma(k + 1.0))
      return static_cast<std::uint64_t>(k);
  }
}

void run_blocks(std::size_t n, unsigned threads,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  const std::size_t n_blocks = (n + kBlockSize - 1) / kBlockSize;
  if (threads <= 1 || n_blocks <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b)
      fn(b, b * kBlockSize, std::min(n, (b + 1) * kBlockSize));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      fn(b, b * kBlockSize, std::min(n, (b + 1) * kBlockSize));
    }
  };
  std::vector<std::thread> pool;
  unsigned t = std::min<std::size_t>(threads, n_blocks);
  pool.reserve(t);
  for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

} // namespace smlab
