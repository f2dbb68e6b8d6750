#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "levystop/errors.hpp"
#include "levystop/scale_function.hpp"
#include "oracles.hpp"

using namespace levystop;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("brownian scale function matches the sinh form") {
    double q = 0.7, k = std::sqrt(2 * q);
    ScaleFunction sf(LevyModel(BrownianDrift{0.0, 1.0}), q);
    double worst = 0.0;
    for (double x = 0.0; x <= 5.0; x += 0.0137) {
        double ref = 2.0 / k * std::sinh(k * x);
        worst = std::max(worst, std::abs(sf.W(x) - ref));
        CHECK(sf.Z(x) == doctest::Approx(std::cosh(k * x)).epsilon(1e-9));
        CHECK(sf.W_prime(x) == doctest::Approx(2.0 * std::cosh(k * x)).epsilon(1e-7));
    }
    CHECK(worst < 1e-6);
    CHECK(sf.W(-1.0) == 0.0);
    CHECK(sf.Z(-1.0) == 1.0);
    CHECK(sf.accuracy_ok());
}

TEST_CASE("spectrally negative kou scale function matches partial fractions") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 6; ++i) {
        auto p = oracle::fuzz(Family::SpectNegKou, rng);
        CAPTURE(i);
        oracle::PartialFractionW pf(p.model, p.r);
        ScaleFunction sf(p.model, p.r);
        CHECK(sf.phi_q() == doctest::Approx(pf.phi()).epsilon(1e-12));
        for (double x = 0.003; x < 8.0; x += 0.0917) {
            CAPTURE(x);
            CHECK(rel(sf.W(x), pf.W(x)) < 1e-8);
            CHECK(rel(sf.W_prime(x), pf.W_prime(x)) < 1e-7);
            CHECK(rel(sf.Z(x), pf.Z(x)) < 1e-8);
            CHECK(sf.tilted_W(1.0, x) == doctest::Approx(pf.tilted_W(1.0, x)).epsilon(1e-8));
            CHECK(sf.tilted_Z(1.0, x) == doctest::Approx(pf.tilted_Z(1.0, x)).epsilon(1e-8));
        }
        CHECK(sf.accuracy_ok());
    }
}

TEST_CASE("relative accuracy beyond the cached range") {
    LevyModel m(SpectNegKou{0.1, 0.4, 1.0, 2.0});
    double q = 0.05;
    oracle::PartialFractionW pf(m, q);
    ScaleOptions o;
    o.cap = 5.0;
    o.cached_tilts = {0.0};
    ScaleFunction sf(m, q, o);
    for (double x : {5.5, 12.0, 40.0, 80.0}) {
        CHECK(sf.W(x) == doctest::Approx(pf.W(x)).epsilon(1e-8));
        CHECK(sf.Z(x) == doctest::Approx(pf.Z(x)).epsilon(1e-8));
    }
}

TEST_CASE("W'(0+) = 2 / sigma^2") {
    for (double s : {0.3, 1.0, 2.0}) {
        ScaleOptions o;
        o.cached_tilts = {0.0};
        ScaleFunction sf(LevyModel(SpectNegKou{0.2, s, 1.0, 3.0}), 0.5, o);
        CHECK(sf.W_prime_at_zero() == doctest::Approx(2.0 / (s * s)).epsilon(1e-8));
        double h = 1e-7;
        CHECK((sf.W(h) - sf.W(0.0)) / h == doctest::Approx(2.0 / (s * s)).epsilon(1e-4));
    }
}

TEST_CASE("Z' = q W and monotonicity") {
    double q = 1.3;
    ScaleFunction sf(LevyModel(SpectNegKou{-0.2, 0.6, 1.5, 2.5}), q);
    double prev = -1.0;
    for (int i = 1; i <= 1000; ++i) {
        double x = 4.0 * i / 1000.0;
        double w = sf.W(x);
        CHECK(w > prev);
        prev = w;
        double h = 1e-5;
        double dz = (sf.Z(x + h) - sf.Z(x - h)) / (2 * h);
        CHECK(std::abs(dz - q * w) < 1e-5 * std::max(1.0, q * w));
    }
}

TEST_CASE("Laplace round trip") {
    LevyModel m(SpectNegKou{0.1, 0.5, 1.0, 2.0});
    double q = 0.9;
    ScaleFunction sf(m, q);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(sf.phi_q() + 0.1, sf.phi_q() + 6.0);
    for (int i = 0; i < 20; ++i) {
        double beta = U(rng);
        // W_Phi <= 1 / psi'(Phi), so the tail past T is below 1e-9.
        double gap = beta - sf.phi_q();
        double T = std::log(1.0 / (1e-9 * gap * dpsi_formula(m, sf.phi_q()))) / gap;
        auto f = [&](double x) { return std::exp(-beta * x) * sf.W(x); };
        using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
        double cap = std::min(T, sf.options().cap);
        double integral = GK::integrate(f, 0.0, cap, 12, 1e-13);
        if (T > cap) integral += GK::integrate(f, cap, T, 12, 1e-13);
        CHECK(integral == doctest::Approx(1.0 / (psi(m, beta) - q)).epsilon(1e-6));
    }
}

TEST_CASE("Euler fallback on its own") {
    LevyModel m(SpectNegKou{0.1, 0.5, 1.0, 2.0});
    oracle::PartialFractionW pf(m, 0.9);
    ScaleOptions o;
    o.force_euler = true;
    o.cap = 2.0;
    ScaleFunction sf(m, 0.9, o);
    for (double x : {0.05, 0.5, 1.7, 3.0}) {
        auto pt = sf.invert(x);
        CHECK(pt.euler);
        CHECK(sf.W_direct(x) == doctest::Approx(pf.W(x)).epsilon(1e-7));
        CHECK(sf.W(x) == doctest::Approx(pf.W(x)).epsilon(1e-7));
    }
    CHECK(sf.talbot_warnings() == 0);
}

TEST_CASE("node count and isa options") {
    LevyModel m(SpectNegKou{0.0, 0.7, 0.5, 1.0});
    oracle::PartialFractionW pf(m, 2.0);
    for (int n : {32, 48, 64}) {
        ScaleOptions o;
        o.nodes = n;
        ScaleFunction sf(m, 2.0, o);
        CAPTURE(n);
        CHECK(sf.W_direct(1.3) == doctest::Approx(pf.W(1.3)).epsilon(1e-9));
    }
    ScaleOptions a, b;
    a.isa = kernels::Isa::Scalar;
    b.isa = kernels::isa_available(kernels::Isa::Avx2) ? kernels::Isa::Avx2 : kernels::Isa::Scalar;
    ScaleFunction sa(m, 2.0, a), sb(m, 2.0, b);
    for (double x : {0.01, 0.77, 3.3, 49.9}) {
        CHECK(sa.W(x) == sb.W(x));
        CHECK(sa.Z(x) == sb.Z(x));
    }
    ScaleOptions bad;
    bad.nodes = 7;
    CHECK_THROWS_AS(ScaleFunction(m, 2.0, bad), InputError);
}

TEST_CASE("concurrent evaluation fills the cache once") {
    LevyModel m(SpectNegKou{0.1, 0.5, 1.0, 2.0});
    ScaleFunction shared(m, 1.0);
    std::vector<double> xs;
    for (int i = 0; i < 4000; ++i) xs.push_back(0.01 * i + 0.005);
    std::vector<std::vector<double>> out(4, std::vector<double>(xs.size()));
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = 0; i < xs.size(); ++i) {
                std::size_t j = (i * 7919 + t * 1234) % xs.size();
                out[t][j] = shared.W(xs[j]);
            }
        });
    for (auto& th : pool) th.join();
    ScaleFunction alone(m, 1.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double ref = alone.W(xs[i]);
        for (int t = 0; t < 4; ++t) CHECK(out[t][i] == ref);
    }
}

TEST_CASE("W_Phi' on the short contour") {
    LevyModel m(SpectNegKou{0.1, 0.3, 1.0, 2.0});
    double q = 1.0;
    ScaleFunction sf(m, q);
    oracle::PartialFractionW pf(m, q);
    double w0 = sf.W_prime_at_zero();
    for (int i = 1; i <= 200; ++i) {
        double x = 5.0 * i / 200.0;
        CAPTURE(x);
        double ref = std::exp(-pf.phi() * x) * (pf.W_prime(x) - pf.phi() * pf.W(x));
        CHECK(std::abs(sf.W_phi_prime_direct(x) - ref) < 1e-12 * w0);
        CHECK(sf.W_phi_prime_direct(x) > -1e-13 * w0);
    }
}

TEST_CASE("first-passage combination without cancellation") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 20; ++i) {
        auto p = oracle::fuzz(Family::SpectNegKou, rng);
        CAPTURE(i);
        oracle::PartialFractionW pf(p.model, p.r);
        ScaleFunction sf(p.model, p.r);
        for (double x : {1e-6, 0.01, 0.4, 2.0, 7.5, 30.0}) {
            CAPTURE(x);
            CHECK(std::abs(sf.first_passage(0.0, x) - pf.first_passage(0.0, x)) < 1e-12);
            CHECK(std::abs(sf.first_passage(1.0, x) - pf.first_passage(1.0, x)) < 1e-12);
        }
        CHECK(sf.first_passage(0.0, 0.0) == 1.0);
        // Against the subtracted form where that is still well conditioned.
        double x = 0.5 / (sf.phi_q() + 1.0);
        CHECK(std::abs(sf.first_passage(0.0, x) - (sf.Z(x) - p.r / sf.phi_q() * sf.W(x))) < 1e-9);
        CHECK(sf.talbot_warnings() == 0);
    }
    ScaleFunction sf(LevyModel(SpectNegKou{0.1, 0.3, 1.0, 2.0}), 0.2);
    CHECK_THROWS_AS(sf.first_passage(5.0, 1.0), DomainError);
}

TEST_CASE("unsupported inputs") {
    CHECK_THROWS_AS(ScaleFunction(LevyModel(KouJD{}), 1.0), UnsupportedFamily);
    CHECK_THROWS_AS(ScaleFunction(LevyModel(NegPoisson{1.0}), 1.0), UnsupportedFamily);
    ScaleFunction sf(LevyModel(BrownianDrift{0.0, 1.0}), 1.0);
    CHECK_THROWS_AS(sf.tilted_Z(2.0, 1.0), DomainError);
    CHECK_THROWS_AS(sf.invert(0.0), DomainError);
}
