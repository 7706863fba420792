#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "newsfdi/kernels.hpp"

namespace newsfdi::kernels {
namespace {

bool cpu_supports(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
            __builtin_cpu_init();
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const KernelTable* compiled_table(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return &detail::scalar_table();
        case Isa::avx2:
            return detail::avx2_table();
        case Isa::neon:
            return detail::neon_table();
    }
    return nullptr;
}

const KernelTable* initial_table() {
    if (const char* env = std::getenv("NEWSFDI_ISA")) {
        const std::string want(env);
        for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
            if (want == isa_name(isa) && isa_available(isa)) return compiled_table(isa);
        }
    }
    for (Isa isa : {Isa::avx2, Isa::neon}) {
        if (isa_available(isa)) return compiled_table(isa);
    }
    return &detail::scalar_table();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
        case Isa::neon:
            return "neon";
    }
    return "unknown";
}

bool isa_available(Isa isa) { return compiled_table(isa) != nullptr && cpu_supports(isa); }

std::vector<Isa> available_isas() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
        if (isa_available(isa)) out.push_back(isa);
    }
    return out;
}

const KernelTable& table_for(Isa isa) {
    if (!isa_available(isa)) {
        throw std::invalid_argument("kernel ISA not available: " + std::string(isa_name(isa)));
    }
    return *compiled_table(isa);
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void set_active(Isa isa) { current().store(&table_for(isa), std::memory_order_release); }

}  // namespace newsfdi::kernels
