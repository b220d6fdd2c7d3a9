#pragma once

#include <cstdint>
#include <random>

namespace sgnmf {

// Portable random stream: std::mt19937_64 has a fully specified output
// sequence, and the conversion to doubles below is done by hand because
// std::uniform_real_distribution differs between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0, 1).
  double uniform_open() {
    double u;
    do u = uniform();
    while (u == 0.0);
    return u;
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sgnmf
