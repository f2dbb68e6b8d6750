#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace levystop {

// Parameters follow X_t = m t + sigma B_t + (compound Poisson part), V = v e^X.

struct BrownianDrift {
    double m = 0.0;
    double sigma = 1.0;
};

/// Double-exponential jumps: with probability p an Exp(eta1) up-jump, otherwise Exp(eta2) down.
struct KouJD {
    double m = 0.0;
    double sigma = 1.0;
    double a = 1.0;
    double p = 0.5;
    double eta1 = 2.0;
    double eta2 = 2.0;
    double q() const { return 1.0 - p; }
};

/// Exp(eta1) up-jumps only.
struct ExpJD {
    double m = 0.0;
    double sigma = 1.0;
    double a = 1.0;
    double eta1 = 2.0;
};

/// X = -N with N a Poisson process of intensity a.
struct NegPoisson {
    double a = 1.0;
};

/// Exp(eta2) down-jumps only, Gaussian part present.
struct SpectNegKou {
    double m = 0.0;
    double sigma = 1.0;
    double a = 1.0;
    double eta2 = 2.0;
};

enum class Family { Brownian, Kou, ExpJD, NegPoisson, SpectNegKou };

std::string_view family_name(Family f);

/// Closed union of the supported families. Parameters are validated on construction.
class LevyModel {
public:
    using Params = std::variant<BrownianDrift, KouJD, ExpJD, NegPoisson, SpectNegKou>;

    LevyModel(BrownianDrift p);
    LevyModel(KouJD p);
    LevyModel(ExpJD p);
    LevyModel(NegPoisson p);
    LevyModel(SpectNegKou p);

    Family family() const { return static_cast<Family>(params_.index()); }
    std::string_view name() const { return family_name(family()); }
    const Params& params() const { return params_; }

    template <class T>
    const T& as() const { return std::get<T>(params_); }

    bool spectrally_negative() const;
    bool has_up_jumps() const;
    double drift() const;
    double sigma() const;
    double jump_rate() const;

    /// Open interval on which E[e^{beta X_1}] is finite.
    double domain_lower() const;
    double domain_upper() const;

    /// Same model with the drift replaced (not defined for NegPoisson).
    LevyModel with_drift(double m) const;

private:
    Params params_;
};

/// Laplace exponent psi(lam) = log E[e^{lam X_1}] on its open domain.
double psi(const LevyModel& model, double lam);

/// psi'(lam).
double dpsi(const LevyModel& model, double lam);

/// Rational/analytic formula of psi, evaluated anywhere except at the jump poles.
/// Roots of psi = r beyond the moment domain live here.
double psi_formula(const LevyModel& model, double beta);
double dpsi_formula(const LevyModel& model, double beta);

double psi1(const LevyModel& model);

/// Largest root of psi(lam) = qq for spectrally negative models.
double phi(const LevyModel& model, double qq);

struct ProblemParams {
    LevyModel model;
    double r = 1.0;
    double alpha = 1.0;
    double c = 1.0;
    double v = 1.0;
};

struct AssumptionReport {
    bool finite_mean = true;
    bool discounting = true;
    bool class_d = true;
    double psi1 = 0.0;
    double r = 0.0;
    std::string class_d_basis;

    bool ok() const { return finite_mean && discounting && class_d; }
    std::vector<std::string> failures() const;
};

AssumptionReport check_assumptions(const ProblemParams& params);

/// Validated stopping problem. Construction throws InputError for non-positive
/// rates and AssumptionViolation when r <= psi(1).
class ProblemSpec {
public:
    explicit ProblemSpec(ProblemParams params);

    const LevyModel& model() const { return p_.model; }
    double r() const { return p_.r; }
    double alpha() const { return p_.alpha; }
    double c() const { return p_.c; }
    double v() const { return p_.v; }
    double psi1() const { return psi1_; }
    const ProblemParams& params() const { return p_; }

    /// Upper end of the admissible threshold interval, c (r - psi(1)) / (r alpha).
    double positivity_bound() const { return p_.c * (p_.r - psi1_) / (p_.r * p_.alpha); }

    ProblemSpec with_v(double v) const;

private:
    ProblemParams p_;
    double psi1_;
};

}  // namespace levystop
