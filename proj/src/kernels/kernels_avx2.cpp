// AVX2 kernel variants. This translation unit is compiled with -mavx2 (no
// -mfma: elementwise kernels must round exactly like the scalar reference,
// so multiplies and adds stay separate instructions).

#include "kernels_internal.hpp"

#if defined(__AVX2__) && defined(__x86_64__)

#include <immintrin.h>

namespace faithsum::kernels::detail {

namespace {

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, vx));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void affine_avx2(double alpha, const double* a, double beta, const double* b,
                 double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    const __m256d vb = _mm256_set1_pd(beta);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xa = _mm256_mul_pd(va, _mm256_loadu_pd(a + i));
        __m256d xb = _mm256_mul_pd(vb, _mm256_loadu_pd(b + i));
        _mm256_storeu_pd(out + i, _mm256_add_pd(xa, xb));
    }
    for (; i < n; ++i) out[i] = alpha * a[i] + beta * b[i];
}

void scale_avx2(double a, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) x[i] *= a;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc,
                            _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

// Same ikj order as the scalar reference, so each C element accumulates in
// the same sequence and the result is bit-identical.
void matmul_acc_avx2(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            axpy_avx2(a[i * k + kk], b + kk * n, crow, n);
        }
    }
}

constexpr Table kAvx2 = {axpy_avx2, affine_avx2, scale_avx2, dot_avx2,
                         matmul_acc_avx2};

}  // namespace

const Table* avx2_table() {
    return __builtin_cpu_supports("avx2") ? &kAvx2 : nullptr;
}

}  // namespace faithsum::kernels::detail

#else

namespace faithsum::kernels::detail {
const Table* avx2_table() { return nullptr; }
}  // namespace faithsum::kernels::detail

#endif
