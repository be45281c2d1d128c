#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "faithsum/kernels.hpp"
#include "faithsum/rng.hpp"

using namespace faithsum;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-2.0, 2.0);
    return v;
}

struct BackendGuard {
    kernels::Backend saved;
    BackendGuard() : saved(kernels::active()) {}
    ~BackendGuard() { kernels::select(saved); }
};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar backend is always selectable") {
    BackendGuard guard;
    CHECK(kernels::select(kernels::Backend::scalar));
    CHECK(kernels::active() == kernels::Backend::scalar);
}

TEST_CASE("elementwise kernels match bit-for-bit across backends") {
    BackendGuard guard;
    if (!kernels::select(kernels::Backend::avx2)) {
        MESSAGE("no AVX2 on this CPU, skipping cross-backend check");
        return;
    }
    Rng rng(7);
    for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 129u}) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        const double alpha = rng.uniform(-1.5, 1.5);
        const double beta = rng.uniform(-1.5, 1.5);

        std::vector<double> out_simd(n);
        kernels::select(kernels::Backend::avx2);
        std::vector<double> y_simd = b;
        kernels::axpy(alpha, a.data(), y_simd.data(), n);
        kernels::affine(alpha, a.data(), beta, b.data(), out_simd.data(), n);
        std::vector<double> s_simd = a;
        kernels::scale(alpha, s_simd.data(), n);

        kernels::select(kernels::Backend::scalar);
        std::vector<double> y_ref = b;
        kernels::axpy(alpha, a.data(), y_ref.data(), n);
        std::vector<double> out_ref(n);
        kernels::affine(alpha, a.data(), beta, b.data(), out_ref.data(), n);
        std::vector<double> s_ref = a;
        kernels::scale(alpha, s_ref.data(), n);

        CHECK(y_simd == y_ref);
        CHECK(out_simd == out_ref);
        CHECK(s_simd == s_ref);
    }
}

TEST_CASE("matmul accumulates identically across backends") {
    BackendGuard guard;
    if (!kernels::select(kernels::Backend::avx2)) return;
    Rng rng(11);
    const std::vector<std::array<std::size_t, 3>> shapes = {
        {3, 5, 7}, {1, 1, 1}, {8, 16, 4}, {5, 2, 9}};
    for (const auto& [m, k, n] : shapes) {
        const auto a = random_vec(rng, m * k);
        const auto b = random_vec(rng, k * n);
        std::vector<double> c_simd(m * n, 0.5);
        std::vector<double> c_ref(m * n, 0.5);
        kernels::select(kernels::Backend::avx2);
        kernels::matmul_acc(a.data(), b.data(), c_simd.data(), m, k, n);
        kernels::select(kernels::Backend::scalar);
        kernels::matmul_acc(a.data(), b.data(), c_ref.data(), m, k, n);
        CHECK(c_simd == c_ref);
    }
}

TEST_CASE("dot agrees across backends within reduction tolerance") {
    BackendGuard guard;
    if (!kernels::select(kernels::Backend::avx2)) return;
    Rng rng(13);
    for (std::size_t n : {1u, 2u, 4u, 5u, 63u, 64u, 1000u}) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        kernels::select(kernels::Backend::avx2);
        const double simd = kernels::dot(a.data(), b.data(), n);
        kernels::select(kernels::Backend::scalar);
        const double ref = kernels::dot(a.data(), b.data(), n);
        CHECK(simd == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("dot of known values") {
    std::vector<double> a{1.0, 2.0, 3.0};
    std::vector<double> b{4.0, 5.0, 6.0};
    CHECK(kernels::dot(a.data(), b.data(), 3) == doctest::Approx(32.0));
}

}  // TEST_SUITE
