#pragma once

// Dot-product kernels for the retrieval hot path. dot() and dot4() perform
// the same per-row operation sequence, so a row scores bit-identically no
// matter which kernel visits it. Equal pooled windows therefore tie exactly
// and the earliest-window rule stays meaningful.

#include <cstddef>

namespace termscope::kernels {

double dot(const double* a, const double* b, std::size_t n) noexcept;

// out[r] = dot(a, rows[r]) for r in 0..3.
void dot4(const double* a, const double* const rows[4], std::size_t n, double out[4]) noexcept;

double norm(const double* a, std::size_t n) noexcept;
double norm(const float* a, std::size_t n) noexcept;  // accumulates in double

// Cosine from a precomputed dot product and norms; 0 when either norm is 0,
// clamped to [-1, 1].
inline double cosine_from_dot(double dot, double norm_a, double norm_b) noexcept {
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  const double c = dot / (norm_a * norm_b);
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

}  // namespace termscope::kernels
