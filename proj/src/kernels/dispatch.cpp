#include <cstdlib>
#include <cstring>

#include "levystop/kernels/inversion_kernel.hpp"

namespace levystop::kernels {

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
    if (isa == Isa::Scalar) return true;
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa best_isa() {
    static const Isa chosen = [] {
        const char* env = std::getenv("LEVYSTOP_SIMD");
        if (env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
        return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
    }();
    return chosen;
}

void invert_sn(Isa isa, const SnExponent& e, double shift, double q, double df0, const TalbotNodes& nodes,
               const InversionBatch& batch) {
    if (isa == Isa::Avx2 && isa_available(Isa::Avx2))
        invert_sn_avx2(e, shift, q, df0, nodes, batch);
    else
        invert_sn_scalar(e, shift, q, df0, nodes, batch);
}

}  // namespace levystop::kernels
