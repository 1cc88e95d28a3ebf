#ifndef DPERM_RNG_HPP
#define DPERM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

namespace dperm {

// xoshiro256++ seeded through splitmix64. A (seed, stream) pair selects an
// independent sub-stream, so consumers that must not perturb each other
// (e.g. index sampling vs. noise injection) each own their own generator.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    for (auto& word : state_) word = splitmix64(x);
  }

  std::uint64_t next_u64() {
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

  // Uniform double in [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased uniform index in {0, ..., n-1} by rejection.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r = next_u64();
    while (r >= limit) r = next_u64();
    return static_cast<std::size_t>(r % n);
  }

  // Standard normal draw, Marsaglia polar method with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  Eigen::VectorXd normal_vector(Eigen::Index dim) {
    Eigen::VectorXd out(dim);
    for (Eigen::Index i = 0; i < dim; ++i) out[i] = normal();
    return out;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream tags. Fixed values keep serialized runs reproducible.
enum class RngStream : std::uint64_t {
  index_sampling = 1,
  noise = 2,
  data_synthesis = 3,
  width_mc = 4,
};

inline Xoshiro256 make_stream(std::uint64_t seed, RngStream stream) {
  return Xoshiro256(seed, static_cast<std::uint64_t>(stream));
}

// The per-run generator bundle. Index sampling and noise injection are
// separate sub-streams: turning noise off (or on) never changes which
// samples an optimizer visits.
struct RunRng {
  Xoshiro256 index;
  Xoshiro256 noise;

  explicit RunRng(std::uint64_t seed)
      : index(make_stream(seed, RngStream::index_sampling)),
        noise(make_stream(seed, RngStream::noise)) {}
};

}  // namespace dperm

#endif  // DPERM_RNG_HPP
