// SPDX-License-Identifier: Apache-2.0
//
// Scalar reference kernels. The SIMD variants mirror these loop nests exactly;
// equivalence tests assert bit-identical output, so any change here must be
// reflected in kernels_avx2.cpp.

#include "hypersindy/kernels.hpp"

#include <cstring>

namespace hypersindy::kernels {
namespace {

void add_scalar(const double* a, const double* b, double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_scalar(const double* a, const double* b, double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_scalar(const double* a, const double* b, double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

void affine_scalar(const double* x, double scale, double shift, double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = scale * x[i] + shift;
}

void axpy_scalar(double a, const double* x, double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += a * x[i];
}

void acc_scalar(const double* x, double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += x[i];
}

// C[i,j] accumulates over p in ascending order; the AVX2 variant vectorizes
// the j loop, which preserves the per-element order.
void matmul_nn_scalar(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    if (!accumulate) std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

// C[i,j] = dot(A row i, B row j); reduction runs over p in ascending order.
void matmul_nt_scalar(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                s += arow[p] * brow[p];
            }
            crow[j] = accumulate ? crow[j] + s : s;
        }
    }
}

// C[r,j] accumulates over i in ascending order.
void matmul_tn_scalar(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    if (!accumulate) std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < k; ++i) {
        const double* arow = a + i * m;
        const double* brow = b + i * n;
        for (std::size_t r = 0; r < m; ++r) {
            const double av = arow[r];
            double* crow = c + r * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

} // namespace

const Ops& scalar_ops() {
    static const Ops ops{add_scalar,    sub_scalar,       mul_scalar,
                         affine_scalar, axpy_scalar,      acc_scalar,
                         matmul_nn_scalar, matmul_nt_scalar, matmul_tn_scalar};
    return ops;
}

} // namespace hypersindy::kernels
