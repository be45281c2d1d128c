#pragma once

#include <cstddef>

namespace faithsum::kernels::detail {

struct Table {
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*affine)(double, const double*, double, const double*, double*, std::size_t);
    void (*scale)(double, double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    void (*matmul_acc)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
};

// Null when the binary was built without AVX2 support or the CPU lacks it.
const Table* avx2_table();

}  // namespace faithsum::kernels::detail
