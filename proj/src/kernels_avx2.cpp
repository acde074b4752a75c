// SPDX-License-Identifier: Apache-2.0
//
// AVX2 kernel variants. Bit-exact with the scalar references: vector lanes
// map to independent output elements, reductions keep the scalar iteration
// order within each lane, and multiply/add stay separate instructions (this
// translation unit is built without FMA and with -ffp-contract=off).

#include "hypersindy/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define HYPERSINDY_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define HYPERSINDY_HAVE_AVX2_BUILD 0
#endif

#include "hypersindy/errors.hpp"

#include <cstring>

namespace hypersindy::kernels {

#if HYPERSINDY_HAVE_AVX2_BUILD

namespace {

void add_avx2(const double* a, const double* b, double* dst, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* dst, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_avx2(const double* a, const double* b, double* dst, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] * b[i];
}

void affine_avx2(const double* x, double scale, double shift, double* dst, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(scale);
    const __m256d vb = _mm256_set1_pd(shift);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_mul_pd(vs, _mm256_loadu_pd(x + i)), vb));
    }
    for (; i < n; ++i) dst[i] = scale * x[i] + shift;
}

void axpy_avx2(double a, const double* x, double* dst, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), prod));
    }
    for (; i < n; ++i) dst[i] += a * x[i];
}

void acc_avx2(const double* x, double* dst, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) dst[i] += x[i];
}

void matmul_nn_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    if (!accumulate) std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const __m256d av = _mm256_set1_pd(arow[p]);
            const double* brow = b + p * n;
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(brow + j));
                _mm256_storeu_pd(crow + j, _mm256_add_pd(_mm256_loadu_pd(crow + j), prod));
            }
            const double avs = arow[p];
            for (; j < n; ++j) crow[j] += avs * brow[j];
        }
    }
}

void matmul_nt_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        std::size_t j = 0;
        // Four output dots at a time; each lane reduces over p in scalar order.
        for (; j + 4 <= n; j += 4) {
            const double* b0 = b + j * k;
            const double* b1 = b + (j + 1) * k;
            const double* b2 = b + (j + 2) * k;
            const double* b3 = b + (j + 3) * k;
            __m256d acc = _mm256_setzero_pd();
            for (std::size_t p = 0; p < k; ++p) {
                const __m256d av = _mm256_set1_pd(arow[p]);
                const __m256d bv = _mm256_set_pd(b3[p], b2[p], b1[p], b0[p]);
                acc = _mm256_add_pd(acc, _mm256_mul_pd(av, bv));
            }
            if (accumulate) acc = _mm256_add_pd(_mm256_loadu_pd(crow + j), acc);
            _mm256_storeu_pd(crow + j, acc);
        }
        for (; j < n; ++j) {
            const double* brow = b + j * k;
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
            crow[j] = accumulate ? crow[j] + s : s;
        }
    }
}

void matmul_tn_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    if (!accumulate) std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < k; ++i) {
        const double* arow = a + i * m;
        const double* brow = b + i * n;
        for (std::size_t r = 0; r < m; ++r) {
            const __m256d av = _mm256_set1_pd(arow[r]);
            double* crow = c + r * n;
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(brow + j));
                _mm256_storeu_pd(crow + j, _mm256_add_pd(_mm256_loadu_pd(crow + j), prod));
            }
            const double avs = arow[r];
            for (; j < n; ++j) crow[j] += avs * brow[j];
        }
    }
}

} // namespace

bool avx2_available() { return __builtin_cpu_supports("avx2") != 0; }

const Ops& avx2_ops() {
    if (!avx2_available()) {
        throw ContractError("avx2 kernels requested but this CPU does not support AVX2");
    }
    static const Ops ops{add_avx2,    sub_avx2,       mul_avx2,
                         affine_avx2, axpy_avx2,      acc_avx2,
                         matmul_nn_avx2, matmul_nt_avx2, matmul_tn_avx2};
    return ops;
}

#else // !HYPERSINDY_HAVE_AVX2_BUILD

bool avx2_available() { return false; }

const Ops& avx2_ops() {
    throw ContractError("avx2 kernels are not compiled into this build");
}

#endif

} // namespace hypersindy::kernels
