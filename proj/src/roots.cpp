#include "levystop/roots.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "levystop/errors.hpp"
#include "root_solve.hpp"

namespace levystop {

namespace {

double need(const std::optional<double>& x, const char* name) {
    if (!x) throw DomainError(std::string("root ") + name + " does not exist for this family");
    return *x;
}

/// Point next to a pole (on side +1 or -1) where f has the wanted sign.
template <class F>
double beside_pole(F f, double pole, int side, bool want_positive) {
    double delta = 1e-9 * (1.0 + std::abs(pole));
    for (int i = 0; i < 80; ++i) {
        double x = pole + side * delta;
        if (x == pole) break;
        double fx = f(x);
        if ((fx > 0.0) == want_positive && fx != 0.0) return x;
        delta *= 0.5;
    }
    throw BracketFailure("no sign change next to the pole at " + std::to_string(pole));
}

/// Walk away from `start` in direction `side`, doubling the distance, until f > 0.
template <class F>
double expand_until_positive(F f, double anchor, double start, int side) {
    double dist = std::abs(start - anchor);
    if (dist == 0.0) dist = 1.0;
    for (int i = 0; i < 1100; ++i) {
        double x = anchor + side * dist;
        if (f(x) > 0.0) return x;
        dist *= 2.0;
    }
    throw BracketFailure("bracket doubling did not find a sign change");
}

template <class F, class DF>
double solve(F f, DF df, double lo, double hi) {
    return detail::solve_bracketed(f, df, lo, hi, f(lo), f(hi));
}

}  // namespace

double KouRoots::get_psi0() const { return need(psi0, "psi0"); }
double KouRoots::get_psi1() const { return need(psi1, "psi1"); }
double KouRoots::get_psi2() const { return need(psi2, "psi2"); }
double KouRoots::get_psi3() const { return need(psi3, "psi3"); }

KouRoots kou_roots(const LevyModel& model, double r) {
    if (!(r > 0.0)) throw DomainError("kou_roots requires r > 0");
    auto fam = model.family();
    if (fam != Family::Kou && fam != Family::ExpJD && fam != Family::SpectNegKou)
        throw UnsupportedFamily("kou_roots needs a kou, expjd or spectneg_kou model, got " +
                                std::string(model.name()));
    auto f = [&](double b) { return psi_formula(model, b) - r; };
    auto df = [&](double b) { return dpsi_formula(model, b); };
    KouRoots out;

    if (model.has_up_jumps()) {
        double eta1 = model.domain_upper();
        double left_of_pole = beside_pole(f, eta1, -1, true);
        out.psi1 = solve(f, df, 0.0, left_of_pole);
        double right_of_pole = beside_pole(f, eta1, +1, false);
        double far = expand_until_positive(f, eta1, std::max(eta1, 1.0), +1);
        out.psi0 = solve(f, df, right_of_pole, far);
    } else {
        double far = expand_until_positive(f, 0.0, 1.0, +1);
        out.psi1 = solve(f, df, 0.0, far);
    }

    if (fam != Family::ExpJD) {
        double eta2 = -model.domain_lower();
        double inside = beside_pole(f, -eta2, +1, true);
        out.psi2 = solve(f, df, inside, 0.0);
        double outside = beside_pole(f, -eta2, -1, false);
        double far = expand_until_positive(f, -eta2, std::max(eta2, 1.0), -1);
        out.psi3 = solve(f, df, far, outside);
    }
    return out;
}

EmeryRoot emery_root(const LevyModel& model, double r) {
    if (model.family() != Family::ExpJD)
        throw UnsupportedFamily("emery_root needs an expjd model, got " + std::string(model.name()));
    if (!(r > 0.0)) throw DomainError("emery_root requires r > 0");
    auto f = [&](double b) { return psi_formula(model, b) - r; };
    auto df = [&](double b) { return dpsi_formula(model, b); };
    double far = expand_until_positive(f, 0.0, 1.0, -1);
    return EmeryRoot{-solve(f, df, far, 0.0)};
}

LadderExponents ladder_exponents(const LevyModel& model, double r) {
    LadderExponents out;
    auto g = [&](double b) { return psi_formula(model, b) - r * b; };
    auto dg = [&](double b) { return dpsi_formula(model, b) - r; };
    switch (model.family()) {
    case Family::Brownian: {
        double s = model.sigma();
        out.beta1 = 2.0 * (r - model.drift()) / (s * s);
        break;
    }
    case Family::NegPoisson:
        break;
    case Family::SpectNegKou: {
        if (!(g(1.0) < 0.0)) throw DomainError("ladder exponents need r > psi(1)");
        double far = expand_until_positive(g, 0.0, 2.0, +1);
        out.beta1 = solve(g, dg, 1.0, far);
        break;
    }
    case Family::Kou:
    case Family::ExpJD: {
        if (!(g(1.0) < 0.0)) throw DomainError("ladder exponents need r > psi(1)");
        double eta1 = model.domain_upper();
        out.beta1 = solve(g, dg, 1.0, beside_pole(g, eta1, -1, true));
        double far = expand_until_positive(g, eta1, std::max(eta1, 1.0), +1);
        out.beta0 = solve(g, dg, beside_pole(g, eta1, +1, false), far);
        break;
    }
    }
    return out;
}

double ladder_value(const LevyModel& model, double r, double n) {
    if (!(n >= 1.0)) throw DomainError("ladder level n must be >= 1");
    if (n == 1.0) return 1.0;
    auto ex = ladder_exponents(model, r);
    switch (model.family()) {
    case Family::NegPoisson:
        return 0.0;
    case Family::Brownian:
    case Family::SpectNegKou:
        return std::pow(n, 1.0 - *ex.beta1);
    case Family::Kou:
    case Family::ExpJD: {
        double b1 = *ex.beta1, b0 = *ex.beta0, e1 = model.domain_upper();
        double den = (b0 - b1) * (e1 - 1.0);
        return std::pow(n, 1.0 - b1) * (e1 - b1) * (b0 - 1.0) / den +
               std::pow(n, 1.0 - b0) * (b0 - e1) * (b1 - 1.0) / den;
    }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace levystop
