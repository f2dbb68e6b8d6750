#include "levystop/levy_model.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "levystop/errors.hpp"
#include "root_solve.hpp"

namespace levystop {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* what) {
    if (!ok) throw InputError(what);
}

bool finite(double x) { return std::isfinite(x); }

void check_diffusion(double m, double sigma) {
    require(finite(m), "drift m must be finite");
    require(finite(sigma) && sigma > 0.0, "sigma must be > 0");
}

}  // namespace

std::string_view family_name(Family f) {
    switch (f) {
    case Family::Brownian: return "brownian";
    case Family::Kou: return "kou";
    case Family::ExpJD: return "expjd";
    case Family::NegPoisson: return "neg_poisson";
    case Family::SpectNegKou: return "spectneg_kou";
    }
    return "unknown";
}

LevyModel::LevyModel(BrownianDrift p) : params_(p) { check_diffusion(p.m, p.sigma); }

LevyModel::LevyModel(KouJD p) : params_(p) {
    check_diffusion(p.m, p.sigma);
    require(finite(p.a) && p.a > 0.0, "jump intensity a must be > 0");
    require(p.p > 0.0 && p.p < 1.0, "p must lie strictly inside (0,1); use expjd or spectneg_kou for the one-sided cases");
    require(finite(p.eta1) && p.eta1 > 1.0, "eta1 must be > 1 (E[e^X] must be finite)");
    require(finite(p.eta2) && p.eta2 > 0.0, "eta2 must be > 0");
}

LevyModel::LevyModel(ExpJD p) : params_(p) {
    check_diffusion(p.m, p.sigma);
    require(finite(p.a) && p.a > 0.0, "jump intensity a must be > 0");
    require(finite(p.eta1) && p.eta1 > 1.0, "eta1 must be > 1 (E[e^X] must be finite)");
}

LevyModel::LevyModel(NegPoisson p) : params_(p) {
    require(finite(p.a) && p.a > 0.0, "jump intensity a must be > 0");
}

LevyModel::LevyModel(SpectNegKou p) : params_(p) {
    check_diffusion(p.m, p.sigma);
    require(finite(p.a) && p.a > 0.0, "jump intensity a must be > 0");
    require(finite(p.eta2) && p.eta2 > 0.0, "eta2 must be > 0");
}

bool LevyModel::spectrally_negative() const {
    auto f = family();
    return f == Family::Brownian || f == Family::SpectNegKou || f == Family::NegPoisson;
}

bool LevyModel::has_up_jumps() const {
    auto f = family();
    return f == Family::Kou || f == Family::ExpJD;
}

double LevyModel::drift() const {
    return std::visit(overloaded{[](const NegPoisson&) { return 0.0; },
                                 [](const auto& p) { return p.m; }},
                      params_);
}

double LevyModel::sigma() const {
    return std::visit(overloaded{[](const NegPoisson&) { return 0.0; },
                                 [](const auto& p) { return p.sigma; }},
                      params_);
}

double LevyModel::jump_rate() const {
    return std::visit(overloaded{[](const BrownianDrift&) { return 0.0; },
                                 [](const auto& p) { return p.a; }},
                      params_);
}

double LevyModel::domain_lower() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return std::visit(overloaded{[](const KouJD& p) { return -p.eta2; },
                                 [](const SpectNegKou& p) { return -p.eta2; },
                                 [](const auto&) { return -inf; }},
                      params_);
}

double LevyModel::domain_upper() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return std::visit(overloaded{[](const KouJD& p) { return p.eta1; },
                                 [](const ExpJD& p) { return p.eta1; },
                                 [](const auto&) { return inf; }},
                      params_);
}

LevyModel LevyModel::with_drift(double m) const {
    return std::visit(overloaded{[](const NegPoisson&) -> LevyModel {
                                     throw UnsupportedFamily("neg_poisson has no drift parameter");
                                 },
                                 [m](auto p) -> LevyModel {
                                     p.m = m;
                                     return LevyModel(p);
                                 }},
                      params_);
}

double psi_formula(const LevyModel& model, double b) {
    return std::visit(
        overloaded{
            [b](const BrownianDrift& p) { return p.m * b + 0.5 * p.sigma * p.sigma * b * b; },
            [b](const KouJD& p) {
                return p.m * b + 0.5 * p.sigma * p.sigma * b * b +
                       p.a * (p.eta1 * p.p / (p.eta1 - b) + p.eta2 * p.q() / (p.eta2 + b) - 1.0);
            },
            [b](const ExpJD& p) {
                return p.m * b + 0.5 * p.sigma * p.sigma * b * b + p.a * b / (p.eta1 - b);
            },
            [b](const NegPoisson& p) { return p.a * std::expm1(-b); },
            [b](const SpectNegKou& p) {
                return p.m * b + 0.5 * p.sigma * p.sigma * b * b - p.a * b / (p.eta2 + b);
            }},
        model.params());
}

double dpsi_formula(const LevyModel& model, double b) {
    return std::visit(
        overloaded{
            [b](const BrownianDrift& p) { return p.m + p.sigma * p.sigma * b; },
            [b](const KouJD& p) {
                double u = p.eta1 - b, d = p.eta2 + b;
                return p.m + p.sigma * p.sigma * b +
                       p.a * (p.eta1 * p.p / (u * u) - p.eta2 * p.q() / (d * d));
            },
            [b](const ExpJD& p) {
                double u = p.eta1 - b;
                return p.m + p.sigma * p.sigma * b + p.a * p.eta1 / (u * u);
            },
            [b](const NegPoisson& p) { return -p.a * std::exp(-b); },
            [b](const SpectNegKou& p) {
                double d = p.eta2 + b;
                return p.m + p.sigma * p.sigma * b - p.a * p.eta2 / (d * d);
            }},
        model.params());
}

namespace {
void check_domain(const LevyModel& model, double lam) {
    if (!(lam > model.domain_lower() && lam < model.domain_upper())) {
        std::ostringstream os;
        os << "psi(" << lam << ") is outside the moment domain (" << model.domain_lower() << ", "
           << model.domain_upper() << ") of the " << model.name() << " exponent";
        throw DomainError(os.str());
    }
}
}  // namespace

double psi(const LevyModel& model, double lam) {
    check_domain(model, lam);
    return psi_formula(model, lam);
}

double dpsi(const LevyModel& model, double lam) {
    check_domain(model, lam);
    return dpsi_formula(model, lam);
}

double psi1(const LevyModel& model) { return psi(model, 1.0); }

double phi(const LevyModel& model, double qq) {
    if (!model.spectrally_negative())
        throw UnsupportedFamily(std::string("phi is only defined for spectrally negative models, not ") +
                                std::string(model.name()));
    if (!(qq > 0.0) || !std::isfinite(qq)) throw DomainError("phi requires qq > 0");
    if (model.family() == Family::NegPoisson)
        throw DomainError("neg_poisson has decreasing paths: psi < 0 on (0, inf), so psi = qq has no root");
    auto f = [&](double x) { return psi_formula(model, x) - qq; };
    auto df = [&](double x) { return dpsi_formula(model, x); };
    double lo = 0.0, hi = 1.0;
    double fhi = f(hi);
    for (int i = 0; fhi <= 0.0; ++i) {
        if (i > 1100) throw BracketFailure("phi: upper bracket did not reach psi > qq");
        lo = hi;
        hi *= 2.0;
        fhi = f(hi);
    }
    return detail::solve_bracketed(f, df, lo, hi, f(lo), fhi);
}

std::vector<std::string> AssumptionReport::failures() const {
    std::vector<std::string> out;
    if (!finite_mean) out.emplace_back("finite mean: E[e^{X_1}] must be finite (eta1 > 1)");
    if (!discounting) {
        auto shortest = [](double x) {
            char buf[32];
            return std::string(buf, std::to_chars(buf, buf + sizeof buf, x).ptr);
        };
        out.push_back("discounting: requires r > psi(1) = " + shortest(psi1) + ", got r = " + shortest(r));
    }
    if (!class_d) out.emplace_back("class D: reward process is not of class D");
    return out;
}

AssumptionReport check_assumptions(const ProblemParams& params) {
    AssumptionReport rep;
    rep.r = params.r;
    rep.psi1 = psi1(params.model);
    rep.finite_mean = std::isfinite(rep.psi1);
    rep.discounting = params.r > rep.psi1;
    rep.class_d = true;
    switch (params.model.family()) {
    case Family::Brownian:
        rep.class_d_basis = "ladder E[e^{-rR_n+X_{R_n}}] = n^{1-2(r-m)/sigma^2} -> 0 when r > psi(1)";
        break;
    case Family::Kou:
    case Family::ExpJD:
        rep.class_d_basis =
            "ladder decays like n^{1-beta1}, beta1 > 1 the smallest positive root of psi(beta) = r beta, when r > psi(1)";
        break;
    case Family::NegPoisson:
        rep.class_d_basis = "X - rt is bounded above by 0, so the reward is bounded (direct argument)";
        break;
    case Family::SpectNegKou:
        rep.class_d_basis = "ladder decays like n^{1-Phi_bar(0)} with Phi_bar(0) > 1 when r > psi(1)";
        break;
    }
    return rep;
}

ProblemSpec::ProblemSpec(ProblemParams params) : p_(std::move(params)) {
    auto pos = [](double x) { return std::isfinite(x) && x > 0.0; };
    if (!pos(p_.r)) throw InputError("r must be > 0");
    if (!pos(p_.alpha)) throw InputError("alpha must be > 0");
    if (p_.c == 0.0)
        throw InputError("c must be > 0: with c = 0 the optimal stopping time is tau* = infinity (never liquidate)");
    if (!pos(p_.c)) throw InputError("c must be > 0");
    if (!pos(p_.v)) throw InputError("v must be > 0");
    auto rep = check_assumptions(p_);
    if (!rep.ok()) {
        std::string msg = "assumption violated:";
        for (const auto& f : rep.failures()) msg += " " + f + ";";
        throw AssumptionViolation(msg);
    }
    psi1_ = rep.psi1;
}

ProblemSpec ProblemSpec::with_v(double v) const {
    ProblemParams p = p_;
    p.v = v;
    return ProblemSpec(p);
}

}  // namespace levystop
