// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

namespace hypersindy::kernels {

// Dense double-precision kernels behind the tensor ops. Every routine has a
// scalar reference implementation and, on x86-64 with AVX2, a vectorized
// variant producing bit-identical results (the SIMD loops keep the per-element
// operation order of the scalar loops and use no FMA contraction). The active
// variant is chosen once at startup from CPUID and can be overridden with the
// HYPERSINDY_KERNELS environment variable (values: "scalar", "avx2").
//
// Matmul shape conventions (C is m x n, row-major):
//   matmul_nn: A (m x k) * B (k x n)
//   matmul_nt: A (m x k) * B^T with B stored (n x k)
//   matmul_tn: A^T * B with A stored (k x m), B (k x n)
// With accumulate=true the product is added onto C instead of overwriting.
struct Ops {
    void (*add)(const double* a, const double* b, double* dst, std::size_t n);
    void (*sub)(const double* a, const double* b, double* dst, std::size_t n);
    void (*mul)(const double* a, const double* b, double* dst, std::size_t n);
    // dst[i] = scale * x[i] + shift
    void (*affine)(const double* x, double scale, double shift, double* dst, std::size_t n);
    // dst[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* dst, std::size_t n);
    // dst[i] += x[i]
    void (*acc)(const double* x, double* dst, std::size_t n);
    void (*matmul_nn)(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate);
    void (*matmul_nt)(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate);
    void (*matmul_tn)(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n, bool accumulate);
};

enum class Backend { scalar, avx2 };

const Ops& scalar_ops();
bool avx2_available();        // compiled in and supported by this CPU
const Ops& avx2_ops();        // throws ContractError when unavailable

const Ops& active();
Backend active_backend();
void set_backend(Backend);    // throws ContractError when unavailable
std::string backend_name(Backend);

} // namespace hypersindy::kernels
