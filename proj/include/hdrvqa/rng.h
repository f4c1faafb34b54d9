#ifndef HDRVQA_RNG_H_
#define HDRVQA_RNG_H_

#include <cstdint>
#include <utility>
#include <vector>

namespace hdrvqa {

// splitmix64-seeded xoshiro256** with portable bounded draws, so that
// models and splits are reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  // Uniform in [0, n).
  std::uint64_t below(std::uint64_t n);
  // Uniform in [0, 1).
  double uniform();
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::uint64_t s_[4];
};

// Standard normal draw (Box-Muller, one value per call).
double normal_draw(Rng& rng);

}  // namespace hdrvqa

#endif  // HDRVQA_RNG_H_
