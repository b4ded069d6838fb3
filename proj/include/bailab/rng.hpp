#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bailab {

// splitmix64 output function (Steele, Lea, Flood 2014). Used both as a
// stand-alone mixer and to derive stream seeds.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic stream-seed derivation: one seed per (base_seed, index, tag)
// triple. Replication i of a batch uses tag 0; auxiliary streams (e.g. prior
// draws) use other tags. The mix is position-dependent, so seeds never
// collide across roles, and the derivation is independent of which worker
// thread ends up running the replication.
inline std::uint64_t mix_seed(std::uint64_t base_seed, std::uint64_t index,
                              std::uint64_t tag = 0) {
  std::uint64_t z = splitmix64(base_seed);
  z = splitmix64(z ^ (index * 0xD1B54A32D192ED03ULL));
  z = splitmix64(z ^ (tag * 0x8CB92BA72F3D8DD7ULL));
  return z;
}

namespace detail {

// Ziggurat tables for the standard normal (Marsaglia & Tsang 2000), 256
// layers. x[0] is the virtual base-strip width v/f(r); x[1] = r; x[i]
// decreases to x[256] = 0. y[i] = exp(-x[i]^2/2).
struct ZigguratTables {
  double x[257];
  double y[257];
  static constexpr double kR = 3.654152885361008796;
  static constexpr double kV = 4.92867323399e-3;
  ZigguratTables() {
    auto f = [](double t) { return std::exp(-0.5 * t * t); };
    x[0] = kV / f(kR);
    x[1] = kR;
    for (int i = 2; i < 256; ++i) {
      double prev = x[i - 1];
      x[i] = std::sqrt(-2.0 * std::log(kV / prev + f(prev)));
    }
    x[256] = 0.0;
    for (int i = 0; i < 257; ++i) y[i] = f(x[i]);
  }
};

inline const ZigguratTables& ziggurat() {
  static const ZigguratTables tables;
  return tables;
}

}  // namespace detail

// Seeded random stream: a std::mt19937_64 engine plus fixed, in-repo
// transforms for the uniform and normal variates. Keeping the transforms
// here (rather than in std:: distribution objects) pins the exact sample
// sequence, which the reproducibility contract of the simulation engine
// depends on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via the 256-layer ziggurat with exact tail sampling.
  double gaussian() {
    const auto& zig = detail::ziggurat();
    for (;;) {
      std::uint64_t u = engine_();
      int i = static_cast<int>(u & 255);          // strip index (bits 0..7)
      double s = (u >> 11) * 0x1.0p-52 - 1.0;     // signed fraction in [-1, 1)
      double z = s * zig.x[i];
      if (std::abs(z) < zig.x[i + 1]) return z;   // interior: surely under the pdf
      if (i == 0) {                               // base strip: exact tail beyond R
        double a, b;
        do {
          a = -std::log(uniform_positive()) / detail::ZigguratTables::kR;
          b = -std::log(uniform_positive());
        } while (b + b < a * a);
        return z > 0 ? detail::ZigguratTables::kR + a
                     : -detail::ZigguratTables::kR - a;
      }
      double fz = std::exp(-0.5 * z * z);         // wedge: accept under the pdf
      if (zig.y[i] + uniform() * (zig.y[i + 1] - zig.y[i]) < fz) return z;
    }
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_positive() { return ((engine_() >> 11) + 1.0) * 0x1.0p-53; }

  std::mt19937_64 engine_;
};

}  // namespace bailab
