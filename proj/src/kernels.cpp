// SPDX-License-Identifier: Apache-2.0

#include "hypersindy/kernels.hpp"

#include "hypersindy/errors.hpp"

#include <cstdlib>
#include <cstring>

namespace hypersindy::kernels {
namespace {

Backend select_initial_backend() {
    if (const char* env = std::getenv("HYPERSINDY_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (!avx2_available()) {
                throw ContractError("HYPERSINDY_KERNELS=avx2 but AVX2 is unavailable");
            }
            return Backend::avx2;
        }
        throw ConfigError(std::string("unknown HYPERSINDY_KERNELS value: ") + env);
    }
    return avx2_available() ? Backend::avx2 : Backend::scalar;
}

Backend& backend_slot() {
    static Backend backend = select_initial_backend();
    return backend;
}

} // namespace

const Ops& active() {
    return backend_slot() == Backend::avx2 ? avx2_ops() : scalar_ops();
}

Backend active_backend() { return backend_slot(); }

void set_backend(Backend backend) {
    if (backend == Backend::avx2 && !avx2_available()) {
        throw ContractError("cannot select avx2 kernels: unavailable on this CPU/build");
    }
    backend_slot() = backend;
}

std::string backend_name(Backend backend) {
    return backend == Backend::avx2 ? "avx2" : "scalar";
}

} // namespace hypersindy::kernels
