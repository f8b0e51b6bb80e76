#ifndef SMLAB_RNG_HPP
#define SMLAB_RNG_HPP

#include <cstdint>
#include <functional>
#include <vector>

namespace smlab {

// Counter-based stream derivation: every (seed, tag, block) triple owns an
// independent xoshiro256++ stream. Results of block-structured sampling are
// therefore bitwise identical for any thread count.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t block);

  std::uint64_t next_u64();
  // uniform in (0,1), never exactly 0 or 1
  double next_uniform();
  // standard normal via Box-Muller (deterministic, stdlib-free)
  double next_normal();
  // Poisson(lambda); inversion for small lambda, PTRS rejection otherwise
  std::uint64_t next_poisson(double lambda);

 private:
  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Fixed block size used by every sampler in the library.
constexpr std::size_t kBlockSize = 4096;

// Runs fn(block_index, begin, end) over [0, n) split into kBlockSize blocks,
// on `threads` threads. fn must only write to disjoint slots of shared
// output arrays (indexed by the item range), never accumulate shared state.
void run_blocks(std::size_t n, unsigned threads,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

} // namespace smlab

#endif
