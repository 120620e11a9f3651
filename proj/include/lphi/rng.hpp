#pragma once

#include <cstdint>
#include <random>

namespace lphi {

// mt19937_64 keyed by (seed, stream) through seed_seq. Replication r of a
// study draws from stream r, so results do not depend on execution order.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  double uniform();  // [0, 1)
  double normal();
  std::uint64_t below(std::uint64_t n);  // uniform on {0, ..., n-1}

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_;
};

}  // namespace lphi
