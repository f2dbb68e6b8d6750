#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "levystop/kernels/inversion_kernel.hpp"

using namespace levystop::kernels;

namespace {

struct Result {
    std::vector<double> f, df, d2f, mag;
};

Result run(Isa isa, const SnExponent& e, double shift, double q, double df0, const std::vector<double>& xs,
           int n = 64) {
    TalbotNodes nodes = make_talbot_nodes(n);
    Result r{std::vector<double>(xs.size()), std::vector<double>(xs.size()), std::vector<double>(xs.size()),
             std::vector<double>(xs.size())};
    InversionBatch b{xs.data(), xs.size(), r.f.data(), r.df.data(), r.d2f.data(), r.mag.data()};
    invert_sn(isa, e, shift, q, df0, nodes, b);
    return r;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<double> grid() {
    std::vector<double> xs;
    // 4-lane blocks plus a remainder of 3.
    for (int i = 0; i < 203; ++i) xs.push_back(1e-6 + 0.0371 * i * (1 + 0.01 * i));
    return xs;
}

}  // namespace

TEST_CASE("talbot nodes are finite and conjugate-symmetric in construction") {
    for (int n : {8, 32, 64, 128}) {
        auto nodes = make_talbot_nodes(n);
        CHECK(nodes.n == n);
        CHECK(nodes.w_re.size() == static_cast<std::size_t>(n / 2));
        for (std::size_t k = 0; k < nodes.w_re.size(); ++k) {
            CHECK(std::isfinite(nodes.w_re[k]));
            CHECK(std::isfinite(nodes.c_re[k]));
            CHECK(nodes.w_im[k] > 0.0);
        }
    }
}

TEST_CASE("scalar kernel inverts the Brownian tilted transform") {
    // W_Phi(x) = (1 - e^{-2 Phi x}) / Phi for BM(0,1), Phi = sqrt(2 q).
    double q = 0.7, ph = std::sqrt(2 * q);
    SnExponent e{0.0, 0.5, 0.0, 1.0};
    auto xs = grid();
    auto r = run(Isa::Scalar, e, ph, q, 2.0, xs);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        double x = xs[i];
        CHECK(r.f[i] == doctest::Approx((1 - std::exp(-2 * ph * x)) / ph).epsilon(1e-9));
        CHECK(r.df[i] == doctest::Approx(2 * std::exp(-2 * ph * x)).epsilon(1e-7));
        CHECK(r.mag[i] >= std::abs(r.f[i]));
    }
}

TEST_CASE("avx2 kernel is bit-identical to the scalar reference") {
    if (!isa_available(Isa::Avx2)) {
        MESSAGE("avx2 not available on this CPU; equivalence test skipped");
        return;
    }
    auto xs = grid();
    for (const auto& e : {SnExponent{0.0, 0.5, 0.0, 1.0}, SnExponent{0.3, 0.125, 2.0, 1.5},
                          SnExponent{-0.4, 0.02, 0.5, 8.0}}) {
        for (double q : {0.05, 1.0, 3.0}) {
            for (double shift : {0.0, 1.0, 2.5}) {
                double df0 = 1.0 / e.half_var;
                auto s = run(Isa::Scalar, e, shift, q, df0, xs);
                auto v = run(Isa::Avx2, e, shift, q, df0, xs);
                CHECK(same_bits(s.f, v.f));
                CHECK(same_bits(s.df, v.df));
                CHECK(same_bits(s.d2f, v.d2f));
                CHECK(same_bits(s.mag, v.mag));
            }
        }
    }
}

TEST_CASE("avx2 remainder handling for short batches") {
    if (!isa_available(Isa::Avx2)) return;
    SnExponent e{0.1, 0.3, 1.0, 2.0};
    for (std::size_t n = 1; n <= 9; ++n) {
        std::vector<double> xs;
        for (std::size_t i = 0; i < n; ++i) xs.push_back(0.1 + 0.3 * i);
        auto s = run(Isa::Scalar, e, 1.2, 0.8, 1.0 / e.half_var, xs);
        auto v = run(Isa::Avx2, e, 1.2, 0.8, 1.0 / e.half_var, xs);
        CHECK(same_bits(s.f, v.f));
        CHECK(same_bits(s.df, v.df));
    }
}

TEST_CASE("isa names and dispatch") {
    CHECK(isa_name(Isa::Scalar) == "scalar");
    CHECK(isa_name(Isa::Avx2) == "avx2");
    CHECK(isa_available(Isa::Scalar));
    CHECK(isa_available(best_isa()));
}
