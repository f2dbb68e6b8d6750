#include "levystop/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "levystop/errors.hpp"

namespace levystop {

std::string_view regime_name(Regime r) {
    return r == Regime::GContinuous ? "g_continuous" : "g_discontinuous";
}

ThresholdResult threshold(const ProblemSpec& spec, const HittingTransforms& t, ThresholdOptions opts) {
    if (t.family() != spec.model().family() || t.r() != spec.r())
        throw InputError("hitting transforms were built for a different problem");
    ThresholdResult th;
    th.psi1 = spec.psi1();
    th.upper_bound = spec.positivity_bound();
    th.phi_r = t.phi_r();
    th.roots = t.roots();
    th.lam_bar = t.lam_bar();

    switch (spec.model().family()) {
    case Family::NegPoisson: {
        th.regime = Regime::GDiscontinuous;
        th.slope_ratio = (1.0 - t.L_left_limit()) / (1.0 - t.G_left_limit());
        break;
    }
    case Family::Brownian:
    case Family::Kou:
    case Family::ExpJD:
    case Family::SpectNegKou:
        th.regime = Regime::GContinuous;
        th.slope_ratio = t.L_left_slope() / t.G_left_slope();
        break;
    }
    th.b_c = th.upper_bound * th.slope_ratio;
    if (!(th.b_c > 0.0 && th.b_c < th.upper_bound))
        throw QualityError("threshold fell outside (0, c(r - psi(1))/(r alpha))");

    if (spec.model().family() == Family::SpectNegKou && opts.check_convexity) {
        th.convexity = convexity_report(spec, t, th);
        if (!th.convexity->ok() && opts.on_convexity_failure == ThresholdOptions::OnFailure::Abort)
            throw QualityError("g(., B_c) failed the numerical strict-convexity check; threshold not certified");
    }
    return th;
}

ThresholdResult threshold(const ProblemSpec& spec, ThresholdOptions opts) {
    HittingTransforms t(spec.model(), spec.r());
    return threshold(spec, t, opts);
}

ConvexityReport convexity_report(const ProblemSpec& spec, const HittingTransforms& t, const ThresholdResult& th) {
    ConvexityReport rep;
    if (th.regime != Regime::GContinuous) {
        rep.applicable = false;
        rep.family_check = "not applicable: G is discontinuous at 0";
        return rep;
    }
    const double b = th.b_c;
    auto g = [&](double v) { return g_value(spec, t, b, v); };

    const std::size_t n = 1000;
    const double step = 9.0 * b / n;
    rep.grid_points = n;
    rep.min_second_diff = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j <= n; ++j) {
        double v = b + j * step;
        double d2 = g(v - step) - 2.0 * g(v) + g(v + step);
        rep.min_second_diff = std::min(rep.min_second_diff, d2);
        if (!(d2 > 0.0)) ++rep.second_diff_violations;
    }

    // One-sided differences at b+ with two Richardson steps; the step shrinks with Phi(r),
    // which sets how fast G and L curve.
    double h = 1e-3 * b / std::max(1.0, th.phi_r.value_or(1.0));
    double gb = g(b);
    auto fwd = [&](double step) { return (g(b + step) - gb) / step; };
    double slope = (8.0 * fwd(0.25 * h) - 6.0 * fwd(0.5 * h) + fwd(h)) / 3.0;
    double fprime = -spec.alpha() / (spec.r() - spec.psi1());
    rep.tangency_error = std::abs(slope - fprime);
    rep.tangency_ok = rep.tangency_error < 1e-6;

    const double fb = payoff_f(spec, b);
    switch (spec.model().family()) {
    case Family::Brownian:
    case Family::ExpJD: {
        double k = t.L_left_slope();
        rep.family_check = "g'' = k(k+1) f(b) b^k v^{-k-2} with f(b) > 0";
        rep.family_check_min = k * (k + 1.0) * fb;
        rep.family_check_ok = rep.family_check_min > 0.0;
        break;
    }
    case Family::Kou: {
        const auto& k = *th.roots;
        double p2 = k.get_psi2(), p3 = k.get_psi3(), e2 = spec.model().as<KouJD>().eta2;
        double a = spec.alpha() / (spec.r() - spec.psi1()), cr = spec.c() / spec.r();
        double dl = (p2 - p3) * e2, dg = (p2 - p3) * (e2 + 1.0);
        double coef3 = -a * b * (e2 + p3) * (p2 - 1.0) / dg + cr * p2 * (e2 + p3) / dl;
        double coef2 = -a * b * (e2 + p2) * (1.0 - p3) / dg - cr * p3 * (e2 + p2) / dl;
        rep.family_check = "coefficients of (b/v)^{|psi3|} and (b/v)^{|psi2|} both > 0";
        rep.family_check_min = std::min(coef2, coef3);
        rep.family_check_ok = rep.family_check_min > 0.0;
        break;
    }
    case Family::SpectNegKou: {
        // W' - Phi W = e^{Phi y} W_Phi'(y). W_Phi' decays like e^{-(Phi - psi2) y} and soon drops
        // under the inversion floor, so it is judged relative to W_Phi'(0+).
        const auto& sf = *t.scale();
        double w0 = sf.W_prime_at_zero();
        rep.family_check = "W_Phi'(y) / W_Phi'(0+) > -1e-12 for y in (0, ln 10]";
        rep.family_check_min = std::numeric_limits<double>::infinity();
        for (std::size_t j = 1; j <= n; ++j) {
            double y = std::log(10.0) * j / n;
            rep.family_check_min = std::min(rep.family_check_min, sf.W_phi_prime_direct(y) / w0);
        }
        rep.family_check_ok = rep.family_check_min > -1e-12;
        break;
    }
    case Family::NegPoisson:
        break;
    }
    return rep;
}

ValueFunction::ValueFunction(ProblemSpec spec, std::shared_ptr<const HittingTransforms> t, ThresholdResult th)
    : spec_(std::move(spec)), t_(std::move(t)), th_(std::move(th)) {
    if (!t_) throw InputError("value function needs hitting transforms");
}

double ValueFunction::f(double v) const { return payoff_f(spec_, v); }

double ValueFunction::w(double v) const {
    if (!(v > 0.0)) throw DomainError("value function needs v > 0");
    if (v <= th_.b_c) return 0.0;
    return spec_.alpha() * v / (spec_.r() - spec_.psi1()) - spec_.c() / spec_.r() + g_value(spec_, *t_, th_.b_c, v);
}

double ValueFunction::s(double v) const { return w(v) + f(v); }

ValueFunction value_function(const ProblemSpec& spec, ThresholdOptions opts) {
    auto t = std::make_shared<const HittingTransforms>(spec.model(), spec.r());
    auto th = threshold(spec, *t, opts);
    return ValueFunction(spec, t, th);
}

EpsilonBoundary epsilon_region(const ValueFunction& vf, double eps) {
    if (std::isinf(eps) && eps > 0.0) return {true, std::numeric_limits<double>::infinity()};
    if (!(eps >= 0.0)) throw DomainError("epsilon_region needs eps >= 0");
    double lo = vf.threshold().b_c;
    if (eps == 0.0) return {false, lo};
    double hi = 2.0 * lo;
    for (int i = 0; vf.w(hi) <= eps; ++i) {
        if (i > 2000) throw QualityError("epsilon_region: w did not exceed eps");
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        double mid = 0.5 * (lo + hi);
        (vf.w(mid) <= eps ? lo : hi) = mid;
    }
    return {false, lo};
}

}  // namespace levystop
