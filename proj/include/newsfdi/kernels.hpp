#pragma once

// Dense double-precision kernels used by the numeric inner loops.
//
// Every kernel has a scalar reference implementation plus vectorized
// variants (AVX2+FMA on x86-64, NEON on AArch64). The variant is picked once
// at startup from the host CPU; NEWSFDI_ISA=scalar|avx2|neon overrides it.
// Vector variants reassociate sums, so results agree with the scalar
// reference to rounding, not bit-for-bit. A given ISA is deterministic.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace newsfdi::kernels {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
    Isa isa;
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // sum_i x[i]
    double (*sum)(const double* x, std::size_t n);
    // sum_i (x[i] - center)^2
    double (*sum_sq_dev)(const double* x, std::size_t n, double center);
    // sum_i w[i] * a[i] * b[i]
    double (*weighted_dot)(const double* w, const double* a, const double* b, std::size_t n);
};

std::string_view isa_name(Isa isa);

// True when this binary carries the variant and the CPU can run it.
bool isa_available(Isa isa);

// All ISAs usable on this host, scalar first.
std::vector<Isa> available_isas();

const KernelTable& table_for(Isa isa);

// Kernel table selected for this process.
const KernelTable& active();

// Test hook; throws std::invalid_argument if the ISA is unavailable.
void set_active(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

inline double sum_sq_dev(std::span<const double> x, double center) {
    return active().sum_sq_dev(x.data(), x.size(), center);
}

inline double weighted_dot(std::span<const double> w, std::span<const double> a,
                           std::span<const double> b) {
    return active().weighted_dot(w.data(), a.data(), b.data(), w.size());
}

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();
}  // namespace detail

}  // namespace newsfdi::kernels
