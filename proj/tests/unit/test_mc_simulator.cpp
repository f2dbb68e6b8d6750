#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "levystop/errors.hpp"
#include "levystop/hitting_transforms.hpp"
#include "levystop/mc_simulator.hpp"
#include "levystop/roots.hpp"
#include "levystop/threshold.hpp"
#include "oracles.hpp"

using namespace levystop;

namespace {

SimConfig small(std::size_t n = 20000) {
    SimConfig c;
    c.n_paths = n;
    return c;
}

bool within(const McEstimate& e, double truth, double k = 4.0) {
    return std::abs(e.mean - truth) <= k * e.std_error + 1e-12;
}

}  // namespace

TEST_CASE("exact increments reproduce the Laplace exponent") {
    std::vector<LevyModel> ms{LevyModel(BrownianDrift{0.2, 0.7}), LevyModel(KouJD{-0.1, 0.3, 1.5, 0.4, 6.0, 5.0}),
                              LevyModel(ExpJD{0.05, 0.4, 0.8, 5.5}), LevyModel(NegPoisson{1.3}),
                              LevyModel(SpectNegKou{0.3, 0.5, 2.0, 4.0})};
    for (const auto& m : ms) {
        auto xs = simulate_increments(m, 0.7, 200000, 9);
        for (double lam : {-1.0, 0.5, 1.0}) {
            double s = 0, s2 = 0;
            for (double x : xs) {
                double e = std::exp(lam * x);
                s += e;
                s2 += e * e;
            }
            double n = double(xs.size()), mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
            CAPTURE(m.name());
            CAPTURE(lam);
            CHECK(std::abs(mean - std::exp(0.7 * psi(m, lam))) < 4 * se);
        }
    }
}

TEST_CASE("hitting functionals agree with the analytic transforms") {
    std::vector<LevyModel> ms{LevyModel(BrownianDrift{-0.2, 1.0}), LevyModel(KouJD{0.1, 0.3, 1.0, 0.5, 3.0, 2.0}),
                              LevyModel(ExpJD{-0.1, 0.3, 1.0, 3.0}), LevyModel(NegPoisson{1.0}),
                              LevyModel(SpectNegKou{0.1, 0.3, 1.0, 2.0})};
    for (const auto& m : ms) {
        HittingTransforms t(m, 1.0);
        auto hits = simulate_hit(m, 1.0, std::vector<double>{-0.15, -0.6, -1.3}, small());
        for (const auto& h : hits) {
            CAPTURE(m.name());
            CAPTURE(h.level);
            CHECK(within(h.L, t.laplace_L(h.level)));
            CHECK(within(h.G, t.laplace_G(h.level)));
        }
    }
}

TEST_CASE("results do not depend on worker count or call order") {
    LevyModel m(KouJD{0.1, 0.3, 1.0, 0.5, 3.0, 2.0});
    SimConfig a = small(5000), b = a;
    a.threads = 1;
    b.threads = 3;
    b.batch_size = a.batch_size;
    auto x = simulate_hit(m, 1.0, -0.5, a);
    auto y = simulate_hit(m, 1.0, -0.5, b);
    CHECK(x.L.mean == y.L.mean);
    CHECK(x.G.std_error == y.G.std_error);
    auto many = simulate_hit(m, 1.0, std::vector<double>{-0.9, -0.5, -0.1}, a);
    CHECK(many[1].L.mean == x.L.mean);
    SimConfig c = a;
    c.seed = 2;
    CHECK(simulate_hit(m, 1.0, -0.5, c).L.mean != x.L.mean);
}

TEST_CASE("bridge correction removes the late-detection bias") {
    LevyModel m(BrownianDrift{0.0, 1.0});
    HittingTransforms t(m, 1.0);
    SimConfig on = small(40000), off = on;
    on.dt = off.dt = 0.02;
    off.bridge_correction = false;
    auto a = simulate_hit(m, 1.0, -0.3, on), b = simulate_hit(m, 1.0, -0.3, off);
    double truth = t.laplace_L(-0.3);
    CHECK(within(a.L, truth));
    CHECK(b.L.mean < truth - 4 * b.L.std_error);
}

TEST_CASE("policy estimators: both forms agree and tau = 0 gives 0") {
    ProblemSpec spec(ProblemParams{LevyModel(KouJD{0.1, 0.3, 1.0, 0.5, 3.0, 2.0}), 1.0, 1.0, 1.0, 1.0});
    auto vf = value_function(spec);
    double b = vf.threshold().b_c;
    auto est = policy_values(spec, b, {0.5 * b, 1.5 * b, 3.0 * b}, small());
    CHECK(est[0].direct.mean == 0.0);
    CHECK(est[0].reduced.mean == 0.0);
    for (std::size_t i = 1; i < est.size(); ++i) {
        CHECK(est[i].reconciled);
        CHECK(within(est[i].reduced, vf.w(est[i].v)));
        CHECK(within(est[i].direct, vf.w(est[i].v)));
    }
    CHECK_THROWS_AS(policy_value(spec, -1.0, small()), DomainError);
}

TEST_CASE("neg poisson policy is exact between jumps") {
    ProblemSpec spec(ProblemParams{LevyModel(NegPoisson{1.0}), 1.0, 1.0, 0.5, 1.0});
    auto vf = value_function(spec);
    auto est = policy_values(spec, vf.threshold().b_c, {1.0, 2.0, 4.0}, small());
    for (const auto& e : est) {
        CHECK(within(e.reduced, vf.w(e.v)));
        CHECK(within(e.direct, vf.w(e.v)));
    }
}

TEST_CASE("sweep flags the argmax inside its flat region") {
    ProblemSpec spec(ProblemParams{LevyModel(ExpJD{-0.1, 0.3, 1.0, 3.0}), 1.0, 1.0, 1.0, 1.0});
    double bc = threshold(spec).b_c;
    std::vector<double> grid;
    for (int j = 0; j < 7; ++j) grid.push_back(bc * std::pow(3.0, (j - 3) / 3.0));
    auto res = sweep(spec, grid, small(10000));
    REQUIRE(res.points.size() == grid.size());
    CHECK(res.flat[res.argmax]);
    CHECK(res.flat_lo <= grid[res.argmax]);
    CHECK(res.flat_hi >= grid[res.argmax]);
    CHECK(res.paired_se[res.argmax] == 0.0);
    CHECK_THROWS_AS(sweep(spec, {2.0, 1.0}, small()), InputError);
}

TEST_CASE("epsilon stopping times are monotone on common paths") {
    ProblemSpec spec(ProblemParams{LevyModel(BrownianDrift{0.0, 1.0}), 1.0, 1.0, 1.0, 2.0});
    auto vf = value_function(spec);
    SimConfig cfg = small(5000);
    cfg.dt = 0.01;
    auto run = epsilon_stop_paths(vf, {INFINITY, 0.1, 0.01, 1e-3}, cfg);
    CHECK(run.monotonicity_violations == 0);
    CHECK(run.tau[0].mean == 0.0);
    for (std::size_t i = 1; i < run.tau.size(); ++i) CHECK(run.tau[i].mean >= run.tau[i - 1].mean);
    CHECK(run.tau_bc.mean >= run.tau.back().mean);
    CHECK_THROWS_AS(epsilon_stop_paths(vf, {0.01, 0.1}, cfg), InputError);
}

TEST_CASE("class-D ladder against the exact value") {
    for (const auto& m : {LevyModel(BrownianDrift{0.0, 1.0}), LevyModel(KouJD{0.1, 0.3, 1.0, 0.5, 3.0, 2.0}),
                          LevyModel(ExpJD{-0.1, 0.3, 1.0, 3.0})}) {
        SimConfig cfg = small();
        cfg.dt = 0.002;
        auto est = class_d_diagnostic(m, 1.0, {1.0, 1.5, 3.0}, cfg);
        CHECK(est[0].value.mean == 1.0);
        for (const auto& e : est) {
            CAPTURE(m.name());
            CAPTURE(e.n);
            CHECK(std::abs(e.value.mean - ladder_value(m, 1.0, e.n)) <= 4 * e.value.std_error);
        }
    }
}

TEST_CASE("configuration checks") {
    LevyModel m(BrownianDrift{0.0, 1.0});
    SimConfig bad = small();
    bad.dt = 0.0;
    CHECK_THROWS_AS(simulate_hit(m, 1.0, -0.1, bad), InputError);
    CHECK_THROWS_AS(simulate_hit(m, 1.0, 0.1, small()), DomainError);
    CHECK_THROWS_AS(class_d_diagnostic(m, 0.4, {2.0}, small()), AssumptionViolation);
    SimConfig t = small();
    t.threads = 5;
    CHECK(worker_count(t) == 5);
    setenv("LEVYSTOP_THREADS", "1", 1);
    CHECK(worker_count(small()) == 1);
    unsetenv("LEVYSTOP_THREADS");
}
