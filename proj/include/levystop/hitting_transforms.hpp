#pragma once

#include <memory>
#include <optional>

#include "levystop/levy_model.hpp"
#include "levystop/roots.hpp"
#include "levystop/scale_function.hpp"

namespace levystop {

/// L(x) = E[e^{-r T_x}] and G(x) = E[e^{-r T_x + X_{T_x}}], T_x the first time X <= x.
/// Arguments are log-moneyness x = ln(b / v); both maps equal 1 for x >= 0.
class HittingTransforms {
public:
    HittingTransforms(const LevyModel& model, double r, ScaleOptions scale_opts = {});

    const LevyModel& model() const { return model_; }
    Family family() const { return model_.family(); }
    double r() const { return r_; }
    double psi1() const { return psi1_; }

    double laplace_L(double x) const;
    double laplace_G(double x) const;

    /// True unless G jumps at 0 (unit down-jumps).
    bool G_continuous_at_zero() const { return family() != Family::NegPoisson; }
    /// L(0-), G(0-).
    double L_left_limit() const;
    double G_left_limit() const;
    /// L'(0-), G'(0-) for the continuous families.
    double L_left_slope() const;
    double G_left_slope() const;

    const std::optional<KouRoots>& roots() const { return roots_; }
    std::optional<double> phi_r() const { return phi_r_; }
    std::optional<double> lam_bar() const { return lam_bar_; }
    /// Exponent of L for Brownian motion with drift: L(x) = e^{theta x}.
    std::optional<double> brownian_exponent() const { return theta_; }
    const std::shared_ptr<const ScaleFunction>& scale() const { return scale_; }

private:
    LevyModel model_;
    double r_;
    double psi1_;
    std::optional<KouRoots> roots_;
    std::optional<double> phi_r_, lam_bar_, theta_;
    std::shared_ptr<const ScaleFunction> scale_;
};

/// f(v) = -alpha v / (r - psi(1)) + c / r.
double payoff_f(const ProblemSpec& spec, double v);

/// g(v, b) = E_v[e^{-r tau_b} f(V_{tau_b})] via the L/G decomposition.
/// b must lie in (0, c (r - psi(1)) / (r alpha)).
double g_value(const ProblemSpec& spec, const HittingTransforms& t, double b, double v);
double g_value(const ProblemSpec& spec, double b, double v);

}  // namespace levystop
