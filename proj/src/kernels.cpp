#include "kernels.hpp"

#include <cmath>

namespace termscope::kernels {
namespace {

constexpr std::size_t kLanes = 8;

#if defined(__FMA__)
inline double mac(double acc, double x, double y) noexcept { return std::fma(x, y, acc); }
#else
inline double mac(double acc, double x, double y) noexcept { return acc + x * y; }
#endif

inline double reduce(const double* lane) noexcept {
  return ((lane[0] + lane[1]) + (lane[2] + lane[3])) + ((lane[4] + lane[5]) + (lane[6] + lane[7]));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double acc[kLanes] = {};
  const std::size_t body = n - n % kLanes;
  for (std::size_t j = 0; j < body; j += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) acc[l] = mac(acc[l], a[j + l], b[j + l]);
  }
  for (std::size_t j = body; j < n; ++j) acc[j - body] = mac(acc[j - body], a[j], b[j]);
  return reduce(acc);
}

void dot4(const double* a, const double* const rows[4], std::size_t n, double out[4]) noexcept {
  double acc0[kLanes] = {}, acc1[kLanes] = {}, acc2[kLanes] = {}, acc3[kLanes] = {};
  const double* r0 = rows[0];
  const double* r1 = rows[1];
  const double* r2 = rows[2];
  const double* r3 = rows[3];
  const std::size_t body = n - n % kLanes;
  for (std::size_t j = 0; j < body; j += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      const double x = a[j + l];
      acc0[l] = mac(acc0[l], x, r0[j + l]);
      acc1[l] = mac(acc1[l], x, r1[j + l]);
      acc2[l] = mac(acc2[l], x, r2[j + l]);
      acc3[l] = mac(acc3[l], x, r3[j + l]);
    }
  }
  for (std::size_t j = body; j < n; ++j) {
    const double x = a[j];
    acc0[j - body] = mac(acc0[j - body], x, r0[j]);
    acc1[j - body] = mac(acc1[j - body], x, r1[j]);
    acc2[j - body] = mac(acc2[j - body], x, r2[j]);
    acc3[j - body] = mac(acc3[j - body], x, r3[j]);
  }
  out[0] = reduce(acc0);
  out[1] = reduce(acc1);
  out[2] = reduce(acc2);
  out[3] = reduce(acc3);
}

double norm(const double* a, std::size_t n) noexcept { return std::sqrt(dot(a, a, n)); }

double norm(const float* a, std::size_t n) noexcept {
  double acc[kLanes] = {};
  const std::size_t body = n - n % kLanes;
  for (std::size_t j = 0; j < body; j += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      const double x = a[j + l];
      acc[l] = mac(acc[l], x, x);
    }
  }
  for (std::size_t j = body; j < n; ++j) {
    const double x = a[j];
    acc[j - body] = mac(acc[j - body], x, x);
  }
  return std::sqrt(reduce(acc));
}

}  // namespace termscope::kernels
