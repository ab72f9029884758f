#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace boco {

using Vec = std::vector<double>;

// Bad input file or inconsistent experiment setup. Detected before round 1.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse (wrong call order, out-of-contract arguments).
struct UsageError : std::logic_error {
  explicit UsageError(const std::string& msg) : std::logic_error(msg) {}
};

// Runtime data that violates a validated bound or internal invariant.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline Vec& axpy(Vec& y, double a, const Vec& x) {
  for (size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
  return y;
}

inline Vec scaled(const Vec& x, double a) {
  Vec y(x);
  for (double& v : y) v *= a;
  return y;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec y(a);
  for (size_t i = 0; i < y.size(); ++i) y[i] -= b[i];
  return y;
}

// Seeded random stream. Hand-rolled uniform/gaussian so draws depend only on
// the mt19937_64 bit stream, not on the standard library's distribution code.
class RngStream {
 public:
  explicit RngStream(uint64_t seed, uint64_t stream = 0) {
    std::seed_seq seq{seed, stream, uint64_t{0x9e3779b97f4a7c15ull}};
    gen_.seed(seq);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; pairs are drawn together and cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace boco
