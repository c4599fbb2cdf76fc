#include "zoprox/core.hpp"

#include <cmath>
#include <limits>

namespace zoprox {

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double nrm2(const Vector& a) { return std::sqrt(dot(a, a)); }

double nrm_inf(const Vector& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

bool all_finite(const Vector& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

void axpy(double a, const Vector& x, Vector& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

Vector scaled(const Vector& x, double a) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i];
  return out;
}

Vector vec_add(const Vector& a, const Vector& b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector vec_sub(const Vector& a, const Vector& b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// ---- counter-based RNG ------------------------------------------------------

namespace {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// One Philox4x32 round with the reference multipliers.
inline void philox_round(std::uint32_t x[4], std::uint32_t k0, std::uint32_t k1) {
  const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * x[0];
  const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * x[2];
  const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
  const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
  x[0] = hi1 ^ x[1] ^ k0;
  x[1] = lo1;
  x[2] = hi0 ^ x[3] ^ k1;
  x[3] = lo0;
}

inline std::uint64_t philox_draw(std::uint64_t key, std::uint64_t block_hi,
                                 std::uint64_t block_lo) {
  std::uint32_t x[4] = {std::uint32_t(block_lo), std::uint32_t(block_lo >> 32),
                        std::uint32_t(block_hi), std::uint32_t(block_hi >> 32)};
  std::uint32_t k0 = std::uint32_t(key), k1 = std::uint32_t(key >> 32);
  for (int r = 0; r < 10; ++r) {
    philox_round(x, k0, k1);
    k0 += 0x9E3779B9u;
    k1 += 0xBB67AE85u;
  }
  return (std::uint64_t(x[1]) << 32) | x[0];
}

}  // namespace

std::uint64_t RngStream::next_u64() {
  const std::uint64_t key = splitmix64(splitmix64(seed) ^
                                       (splitmix64(stream_id ^ 0x5851F42D4C957F2Dull)));
  const std::uint64_t hi = splitmix64(stream_id + 0x14057B7EF767814Full);
  return philox_draw(key, hi, counter++);
}

double RngStream::next_uniform() {
  // 53-bit mantissa in (0, 1); zero mapped up to keep the inverse CDF finite.
  double u = double(next_u64() >> 11) * 0x1.0p-53;
  if (u <= 0.0) u = 0x1.0p-54;
  return u;
}

double RngStream::next_normal() { return inverse_normal_cdf(next_uniform()); }

RngStream make_stream(std::uint64_t seed, std::uint64_t stream_id) {
  return RngStream{seed, stream_id, 0};
}

RngStream split_stream(const RngStream& parent, std::uint64_t label) {
  return RngStream{parent.seed,
                   splitmix64(parent.stream_id ^ splitmix64(label + 0x0B5E2D30F1A9C4E7ull)),
                   0};
}

// Wichura's algorithm AS241, PPND16 variant.
double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_normal_cdf: p outside (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -val : val;
}

void record_step(RunTrace& trace, const Vector& x, double obj, double alpha) {
  if (!std::isfinite(obj)) throw std::invalid_argument("record_step: non-finite objective");
  if (!std::isfinite(alpha)) throw std::invalid_argument("record_step: non-finite step size");
  trace.iterates.push_back(x);
  trace.objectives.push_back(obj);
  trace.step_sizes.push_back(alpha);
  trace.log_iterations.push_back(trace.log_iterations.empty()
                                     ? 0
                                     : trace.log_iterations.back() + trace.stride);
}

}  // namespace zoprox
