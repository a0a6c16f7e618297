#include "mvad/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace mvad::kernels {

#if defined(MVAD_WITH_AVX2)
const Ops* avx2_ops_table();

static bool cpu_has_avx2() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

const Ops* avx2_ops() {
#if defined(MVAD_WITH_AVX2)
    if (cpu_has_avx2()) return avx2_ops_table();
#endif
    return nullptr;
}

namespace {

std::atomic<const Ops*> g_active{nullptr};

const Ops* select_default() {
    if (const char* env = std::getenv("MVAD_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
        if (std::strcmp(env, "avx2") == 0) {
            if (const Ops* v = avx2_ops()) return v;
            throw std::invalid_argument("MVAD_KERNELS=avx2 but AVX2 is unavailable");
        }
        throw std::invalid_argument(std::string("unknown MVAD_KERNELS value: ") + env);
    }
    if (const Ops* v = avx2_ops()) return v;
    return &scalar_ops();
}

} // namespace

const Ops& active() {
    const Ops* t = g_active.load(std::memory_order_acquire);
    if (!t) {
        t = select_default();
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

void force_backend(const char* name) {
    if (std::strcmp(name, "scalar") == 0) {
        g_active.store(&scalar_ops(), std::memory_order_release);
        return;
    }
    if (std::strcmp(name, "avx2") == 0) {
        if (const Ops* v = avx2_ops()) {
            g_active.store(v, std::memory_order_release);
            return;
        }
        throw std::invalid_argument("AVX2 backend unavailable on this CPU/build");
    }
    throw std::invalid_argument(std::string("unknown kernel backend: ") + name);
}

} // namespace mvad::kernels
