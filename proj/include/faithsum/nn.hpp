#pragma once

// Internal dense-math building blocks for the transformer models. Row-major
// matrices over double, all heavy loops routed through the kernel layer.

#include <cstddef>
#include <vector>

namespace faithsum::nn {

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}

    double* row(std::size_t i) { return v.data() + i * cols; }
    const double* row(std::size_t i) const { return v.data() + i * cols; }
    double& at(std::size_t i, std::size_t j) { return v[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
    std::size_t size() const { return v.size(); }
};

// C = A * B
Mat matmul(const Mat& a, const Mat& b);
// C += A * B
void matmul_acc(const Mat& a, const Mat& b, Mat& c);
// C = A^T * B   (A: k x m, B: k x n, C: m x n)
Mat matmul_tA(const Mat& a, const Mat& b);
// C = A * B^T   (A: m x k, B: n x k, C: m x n)
Mat matmul_Bt(const Mat& a, const Mat& b);

void add_inplace(Mat& a, const Mat& b);

// y = x*W + b for every row of x; W is d_in x d_out, b is 1 x d_out (may be
// null). Backward fills gradients and returns dx.
Mat linear(const Mat& x, const double* w, const double* b, std::size_t d_in,
           std::size_t d_out);
Mat linear_backward(const Mat& x, const Mat& dy, const double* w, double* dw,
                    double* db, std::size_t d_in, std::size_t d_out);

// In-place row softmax. Entries equal to -inf come out as exact zeros.
void softmax_rows(Mat& m);
// ds = softmax backward given the softmax output a and da.
Mat softmax_rows_backward(const Mat& a, const Mat& da);

// Gainless RMS normalization per row: y = x / sqrt(mean(x^2) + eps).
inline constexpr double kNormEps = 1e-6;
Mat rmsnorm(const Mat& x);
Mat rmsnorm_backward(const Mat& x, const Mat& dy);

Mat relu(const Mat& x);
// dx = dy masked by x > 0
Mat relu_backward(const Mat& x, const Mat& dy);

// Numerically stable log-softmax of one row.
std::vector<double> log_softmax(const std::vector<double>& logits);
std::vector<double> softmax(const std::vector<double>& logits);

}  // namespace faithsum::nn
