#include "faithsum/nn.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "faithsum/kernels.hpp"

namespace faithsum::nn {

Mat matmul(const Mat& a, const Mat& b) {
    Mat c(a.rows, b.cols);
    matmul_acc(a, b, c);
    return c;
}

void matmul_acc(const Mat& a, const Mat& b, Mat& c) {
    assert(a.cols == b.rows && c.rows == a.rows && c.cols == b.cols);
    kernels::matmul_acc(a.v.data(), b.v.data(), c.v.data(), a.rows, a.cols, b.cols);
}

Mat matmul_tA(const Mat& a, const Mat& b) {
    assert(a.rows == b.rows);
    Mat c(a.cols, b.cols);
    // (A^T B)[i,:] accumulates A[k,i] * B[k,:]
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (std::size_t i = 0; i < a.cols; ++i) {
            kernels::axpy(arow[i], brow, c.row(i), b.cols);
        }
    }
    return c;
}

Mat matmul_Bt(const Mat& a, const Mat& b) {
    assert(a.cols == b.cols);
    Mat c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* crow = c.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            crow[j] = kernels::dot(a.row(i), b.row(j), a.cols);
        }
    }
    return c;
}

void add_inplace(Mat& a, const Mat& b) {
    assert(a.rows == b.rows && a.cols == b.cols);
    kernels::axpy(1.0, b.v.data(), a.v.data(), a.size());
}

Mat linear(const Mat& x, const double* w, const double* b, std::size_t d_in,
           std::size_t d_out) {
    assert(x.cols == d_in);
    Mat y(x.rows, d_out);
    kernels::matmul_acc(x.v.data(), w, y.v.data(), x.rows, d_in, d_out);
    if (b != nullptr) {
        for (std::size_t i = 0; i < y.rows; ++i) {
            kernels::axpy(1.0, b, y.row(i), d_out);
        }
    }
    return y;
}

Mat linear_backward(const Mat& x, const Mat& dy, const double* w, double* dw,
                    double* db, std::size_t d_in, std::size_t d_out) {
    assert(x.cols == d_in && dy.cols == d_out && x.rows == dy.rows);
    // dW += x^T dy
    for (std::size_t t = 0; t < x.rows; ++t) {
        const double* xrow = x.row(t);
        const double* dyrow = dy.row(t);
        for (std::size_t i = 0; i < d_in; ++i) {
            kernels::axpy(xrow[i], dyrow, dw + i * d_out, d_out);
        }
        if (db != nullptr) kernels::axpy(1.0, dyrow, db, d_out);
    }
    // dx = dy W^T
    Mat dx(x.rows, d_in);
    for (std::size_t t = 0; t < x.rows; ++t) {
        const double* dyrow = dy.row(t);
        double* dxrow = dx.row(t);
        for (std::size_t i = 0; i < d_in; ++i) {
            dxrow[i] = kernels::dot(dyrow, w + i * d_out, d_out);
        }
    }
    return dx;
}

void softmax_rows(Mat& m) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* row = m.row(i);
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m.cols; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) {
            row[j] = std::exp(row[j] - mx);  // exp(-inf - mx) == 0
            sum += row[j];
        }
        const double inv = 1.0 / sum;
        kernels::scale(inv, row, m.cols);
    }
}

Mat softmax_rows_backward(const Mat& a, const Mat& da) {
    Mat ds(a.rows, a.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        const double* darow = da.row(i);
        const double inner = kernels::dot(arow, darow, a.cols);
        double* dsrow = ds.row(i);
        for (std::size_t j = 0; j < a.cols; ++j) {
            dsrow[j] = arow[j] * (darow[j] - inner);
        }
    }
    return ds;
}

Mat rmsnorm(const Mat& x) {
    Mat y(x.rows, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xrow = x.row(i);
        const double ms = kernels::dot(xrow, xrow, x.cols) / static_cast<double>(x.cols);
        const double inv = 1.0 / std::sqrt(ms + kNormEps);
        kernels::affine(inv, xrow, 0.0, xrow, y.row(i), x.cols);
    }
    return y;
}

Mat rmsnorm_backward(const Mat& x, const Mat& dy) {
    Mat dx(x.rows, x.cols);
    const auto n = static_cast<double>(x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xrow = x.row(i);
        const double* dyrow = dy.row(i);
        const double ms = kernels::dot(xrow, xrow, x.cols) / n;
        const double r2 = ms + kNormEps;
        const double inv_r = 1.0 / std::sqrt(r2);
        const double inner = kernels::dot(dyrow, xrow, x.cols);
        const double coef = inner / (n * r2 * std::sqrt(r2));
        kernels::affine(inv_r, dyrow, -coef, xrow, dx.row(i), x.cols);
    }
    return dx;
}

Mat relu(const Mat& x) {
    Mat y(x.rows, x.cols);
    for (std::size_t i = 0; i < x.size(); ++i) y.v[i] = x.v[i] > 0.0 ? x.v[i] : 0.0;
    return y;
}

Mat relu_backward(const Mat& x, const Mat& dy) {
    Mat dx(x.rows, x.cols);
    for (std::size_t i = 0; i < x.size(); ++i) dx.v[i] = x.v[i] > 0.0 ? dy.v[i] : 0.0;
    return dx;
}

std::vector<double> log_softmax(const std::vector<double>& logits) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double z : logits) mx = std::max(mx, z);
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - mx);
    const double lse = mx + std::log(sum);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    std::vector<double> out = log_softmax(logits);
    for (double& z : out) z = std::exp(z);
    return out;
}

}  // namespace faithsum::nn
