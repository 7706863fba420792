#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "newsfdi/kernels.hpp"

using namespace newsfdi::kernels;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

// Bound on reassociation error for a sum of n terms with magnitudes summing to `mass`.
double bound(std::size_t n, double mass) { return 4.0 * static_cast<double>(n + 1) * 1.2e-16 * mass + 1e-300; }

}  // namespace

TEST_CASE("scalar table is always available and first") {
    auto isas = available_isas();
    REQUIRE_FALSE(isas.empty());
    CHECK(isas.front() == Isa::scalar);
    CHECK(isa_available(Isa::scalar));
    CHECK(isa_name(Isa::scalar) == "scalar");
}

TEST_CASE("every available ISA agrees with the scalar reference") {
    const auto& ref = table_for(Isa::scalar);
    std::mt19937_64 rng(7);
    for (auto isa : available_isas()) {
        CAPTURE(isa_name(isa));
        const auto& t = table_for(isa);
        for (std::size_t n = 0; n < 70; ++n) {
            for (std::size_t offset = 0; offset < 3; ++offset) {
                auto a = random_vector(rng, n + offset);
                auto b = random_vector(rng, n + offset);
                auto w = random_vector(rng, n + offset);
                for (auto& x : w) x = std::abs(x);
                const double* pa = a.data() + offset;
                const double* pb = b.data() + offset;
                const double* pw = w.data() + offset;

                double mass_dot = 0, mass_sum = 0, mass_wdot = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    mass_dot += std::abs(pa[i] * pb[i]);
                    mass_sum += std::abs(pa[i]);
                    mass_wdot += std::abs(pw[i] * pa[i] * pb[i]);
                }
                CHECK(std::abs(t.dot(pa, pb, n) - ref.dot(pa, pb, n)) <= bound(n, mass_dot));
                CHECK(std::abs(t.sum(pa, n) - ref.sum(pa, n)) <= bound(n, mass_sum));
                CHECK(std::abs(t.weighted_dot(pw, pa, pb, n) - ref.weighted_dot(pw, pa, pb, n)) <= bound(n, mass_wdot));

                const double center = 0.37;
                double mass_dev = 0;
                for (std::size_t i = 0; i < n; ++i) mass_dev += (pa[i] - center) * (pa[i] - center);
                CHECK(std::abs(t.sum_sq_dev(pa, n, center) - ref.sum_sq_dev(pa, n, center)) <= bound(n, mass_dev));

                std::vector<double> y1(b.begin() + static_cast<std::ptrdiff_t>(offset), b.end()), y2 = y1;
                ref.axpy(-1.75, pa, y1.data(), n);
                t.axpy(-1.75, pa, y2.data(), n);
                for (std::size_t i = 0; i < n; ++i)
                    CHECK(std::abs(y1[i] - y2[i]) <= 4e-16 * (std::abs(1.75 * pa[i]) + std::abs(pb[i])));
            }
        }
    }
}

TEST_CASE("kernels on exact small inputs") {
    for (auto isa : available_isas()) {
        const auto& t = table_for(isa);
        const double a[] = {1, 2, 3, 4, 5, 6, 7};
        const double b[] = {7, 6, 5, 4, 3, 2, 1};
        CHECK(t.dot(a, b, 7) == 84.0);
        CHECK(t.sum(a, 7) == 28.0);
        CHECK(t.sum_sq_dev(a, 7, 4.0) == 28.0);
        CHECK(t.weighted_dot(a, a, b, 7) == 1 * 1 * 7 + 2 * 2 * 6 + 3 * 3 * 5 + 4 * 4 * 4 + 5 * 5 * 3 + 6 * 6 * 2 + 7 * 7 * 1);
        CHECK(t.dot(a, b, 0) == 0.0);
    }
}

TEST_CASE("set_active switches the dispatched table") {
    const Isa before = active().isa;
    for (auto isa : available_isas()) {
        set_active(isa);
        CHECK(active().isa == isa);
        std::vector<double> x{1.0, 2.0, 3.0};
        CHECK(dot(x, x) == 14.0);
    }
    set_active(before);
    if (!isa_available(Isa::neon)) CHECK_THROWS_AS(set_active(Isa::neon), std::invalid_argument);
}
