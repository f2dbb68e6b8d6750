#include "levystop/hitting_transforms.hpp"

#include <cmath>
#include <sstream>

#include "levystop/errors.hpp"

namespace levystop {

HittingTransforms::HittingTransforms(const LevyModel& model, double r, ScaleOptions scale_opts)
    : model_(model), r_(r), psi1_(levystop::psi1(model)) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("hitting transforms require r > 0");
    switch (model.family()) {
    case Family::Brownian: {
        double m = model.drift(), s2 = model.sigma() * model.sigma();
        theta_ = (m + std::sqrt(m * m + 2.0 * s2 * r)) / s2;
        phi_r_ = phi(model, r);
        break;
    }
    case Family::Kou:
        roots_ = kou_roots(model, r);
        break;
    case Family::ExpJD:
        roots_ = kou_roots(model, r);
        lam_bar_ = emery_root(model, r).lam_bar;
        break;
    case Family::NegPoisson:
        break;
    case Family::SpectNegKou: {
        roots_ = kou_roots(model, r);
        phi_r_ = phi(model, r);
        if (!(r > psi1_))
            throw DomainError("spectneg_kou transforms use the tilt c = 1, which needs r > psi(1)");
        scale_opts.cached_tilts = {0.0, 1.0};
        scale_ = std::make_shared<const ScaleFunction>(model, r, scale_opts);
        break;
    }
    }
}

namespace {

struct KouParts {
    double p2, p3, e2;
};

KouParts kou_parts(const LevyModel& m, const KouRoots& k) {
    double e2 = m.family() == Family::Kou ? m.as<KouJD>().eta2 : m.as<SpectNegKou>().eta2;
    return {k.get_psi2(), k.get_psi3(), e2};
}

}  // namespace

double HittingTransforms::laplace_L(double x) const {
    if (x >= 0.0) return 1.0;
    switch (family()) {
    case Family::Brownian:
        return std::exp(*theta_ * x);
    case Family::ExpJD:
        return std::exp(*lam_bar_ * x);
    case Family::Kou: {
        auto [p2, p3, e2] = kou_parts(model_, *roots_);
        double d = (p2 - p3) * e2;
        return p2 * (e2 + p3) / d * std::exp(-x * p3) - p3 * (e2 + p2) / d * std::exp(-x * p2);
    }
    case Family::NegPoisson: {
        double a = model_.as<NegPoisson>().a;
        return std::pow(a / (r_ + a), std::ceil(-x));
    }
    case Family::SpectNegKou: {
        return scale_->first_passage(0.0, -x);
    }
    }
    return 0.0;
}

double HittingTransforms::laplace_G(double x) const {
    if (x >= 0.0) return 1.0;
    switch (family()) {
    case Family::Brownian:
        return std::exp((*theta_ + 1.0) * x);
    case Family::ExpJD:
        return std::exp((*lam_bar_ + 1.0) * x);
    case Family::Kou: {
        auto [p2, p3, e2] = kou_parts(model_, *roots_);
        double d = (p2 - p3) * (e2 + 1.0);
        return std::exp(x) * ((e2 + p3) * (p2 - 1.0) / d * std::exp(-x * p3) +
                              (e2 + p2) * (1.0 - p3) / d * std::exp(-x * p2));
    }
    case Family::NegPoisson: {
        double a = model_.as<NegPoisson>().a;
        return std::pow(a / (std::exp(1.0) * (r_ + a)), std::ceil(-x));
    }
    case Family::SpectNegKou: {
        return scale_->first_passage(1.0, -x);
    }
    }
    return 0.0;
}

double HittingTransforms::L_left_limit() const {
    if (family() == Family::NegPoisson) {
        double a = model_.as<NegPoisson>().a;
        return a / (r_ + a);
    }
    return 1.0;
}

double HittingTransforms::G_left_limit() const {
    if (family() == Family::NegPoisson) {
        double a = model_.as<NegPoisson>().a;
        return a / (std::exp(1.0) * (r_ + a));
    }
    return 1.0;
}

double HittingTransforms::L_left_slope() const {
    switch (family()) {
    case Family::Brownian: return *theta_;
    case Family::ExpJD: return *lam_bar_;
    case Family::Kou: {
        auto [p2, p3, e2] = kou_parts(model_, *roots_);
        return p2 * p3 / e2;
    }
    case Family::SpectNegKou: return r_ / *phi_r_ * scale_->W_prime_at_zero();
    case Family::NegPoisson: break;
    }
    throw DomainError("L jumps at 0 for neg_poisson; no left slope");
}

double HittingTransforms::G_left_slope() const {
    switch (family()) {
    case Family::Brownian: return *theta_ + 1.0;
    case Family::ExpJD: return *lam_bar_ + 1.0;
    case Family::Kou: {
        auto [p2, p3, e2] = kou_parts(model_, *roots_);
        return (1.0 - p2) * (1.0 - p3) / (e2 + 1.0);
    }
    case Family::SpectNegKou:
        return (r_ - psi1_) / (*phi_r_ - 1.0) * scale_->W_prime_at_zero();
    case Family::NegPoisson: break;
    }
    throw DomainError("G jumps at 0 for neg_poisson; no left slope");
}

double payoff_f(const ProblemSpec& spec, double v) {
    return -spec.alpha() * v / (spec.r() - spec.psi1()) + spec.c() / spec.r();
}

double g_value(const ProblemSpec& spec, const HittingTransforms& t, double b, double v) {
    double ub = spec.positivity_bound();
    if (!(b > 0.0 && b < ub)) {
        std::ostringstream os;
        os.precision(17);
        os << "g(v, b) needs b in (0, " << ub << "), got b = " << b;
        throw DomainError(os.str());
    }
    if (!(v > 0.0)) throw DomainError("g(v, b) needs v > 0");
    if (v <= b) return payoff_f(spec, v);
    double x = std::log(b / v);
    return -spec.alpha() * v / (spec.r() - spec.psi1()) * t.laplace_G(x) + spec.c() / spec.r() * t.laplace_L(x);
}

double g_value(const ProblemSpec& spec, double b, double v) {
    HittingTransforms t(spec.model(), spec.r());
    return g_value(spec, t, b, v);
}

}  // namespace levystop
