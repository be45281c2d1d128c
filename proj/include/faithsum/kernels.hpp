#pragma once

#include <cstddef>

// Double-precision kernels behind the training and editing math.
// A scalar reference implementation always exists; an AVX2 variant is
// selected at runtime when the CPU supports it (override with the
// FAITHSUM_KERNELS environment variable or select()).
//
// Elementwise kernels (axpy, affine, scale) and matmul_acc produce
// bit-identical results across backends: per-element operations run in
// the same order with the same rounding. dot() reduces in a different
// order under AVX2, so it is only equivalent up to rounding.

namespace faithsum::kernels {

enum class Backend { scalar, avx2 };

const char* name(Backend b);

// Backend currently in use.
Backend active();

// Best backend this CPU supports.
Backend detect_best();

// Switch backend; returns false (and keeps the current one) if the CPU
// lacks support.
bool select(Backend b);

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

// out[i] = alpha * a[i] + beta * b[i]
void affine(double alpha, const double* a, double beta, const double* b,
            double* out, std::size_t n);

// x[i] *= a
void scale(double a, double* x, std::size_t n);

double dot(const double* a, const double* b, std::size_t n);

// C[m x n] += A[m x k] * B[k x n], all row-major contiguous.
void matmul_acc(const double* a, const double* b, double* c, std::size_t m,
                std::size_t k, std::size_t n);

}  // namespace faithsum::kernels
