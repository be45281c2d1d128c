#include "faithsum/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "kernels_internal.hpp"

namespace faithsum::kernels {

namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void affine_scalar(double alpha, const double* a, double beta, const double* b,
                   double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = alpha * a[i] + beta * b[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void matmul_acc_scalar(const double* a, const double* b, double* c,
                       std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            axpy_scalar(a[i * k + kk], b + kk * n, crow, n);
        }
    }
}

constexpr detail::Table kScalar = {axpy_scalar, affine_scalar, scale_scalar,
                                   dot_scalar, matmul_acc_scalar};

Backend g_backend = Backend::scalar;
const detail::Table* g_table = &kScalar;

bool apply(Backend b) {
    if (b == Backend::scalar) {
        g_table = &kScalar;
        g_backend = b;
        return true;
    }
    const detail::Table* t = detail::avx2_table();
    if (t == nullptr) return false;
    g_table = t;
    g_backend = b;
    return true;
}

struct Init {
    Init() {
        Backend want = detect_best();
        if (const char* env = std::getenv("FAITHSUM_KERNELS")) {
            if (std::strcmp(env, "scalar") == 0) want = Backend::scalar;
            if (std::strcmp(env, "avx2") == 0) want = Backend::avx2;
        }
        if (!apply(want)) apply(Backend::scalar);
    }
};
const Init g_init;

}  // namespace

const char* name(Backend b) {
    return b == Backend::scalar ? "scalar" : "avx2";
}

Backend active() { return g_backend; }

Backend detect_best() {
    return detail::avx2_table() != nullptr ? Backend::avx2 : Backend::scalar;
}

bool select(Backend b) { return apply(b); }

void axpy(double a, const double* x, double* y, std::size_t n) {
    g_table->axpy(a, x, y, n);
}

void affine(double alpha, const double* a, double beta, const double* b,
            double* out, std::size_t n) {
    g_table->affine(alpha, a, beta, b, out, n);
}

void scale(double a, double* x, std::size_t n) { g_table->scale(a, x, n); }

double dot(const double* a, const double* b, std::size_t n) {
    return g_table->dot(a, b, n);
}

void matmul_acc(const double* a, const double* b, double* c, std::size_t m,
                std::size_t k, std::size_t n) {
    g_table->matmul_acc(a, b, c, m, k, n);
}

}  // namespace faithsum::kernels
