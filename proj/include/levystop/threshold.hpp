#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "levystop/hitting_transforms.hpp"
#include "levystop/levy_model.hpp"
#include "levystop/roots.hpp"

namespace levystop {

enum class Regime { GContinuous, GDiscontinuous };

std::string_view regime_name(Regime r);

struct ConvexityReport {
    bool applicable = true;
    std::size_t grid_points = 0;
    std::size_t second_diff_violations = 0;
    double min_second_diff = 0.0;
    double tangency_error = 0.0;  ///< |dg/dv(b+) - f'|
    bool tangency_ok = true;
    /// Family-specific analytic sign condition (Brownian/ExpJD: g'' coefficient,
    /// Kou: both power-term coefficients, SpectNegKou: W' - Phi(r) W on the grid).
    std::string family_check;
    double family_check_min = 0.0;
    bool family_check_ok = true;

    bool ok() const { return !applicable || (second_diff_violations == 0 && tangency_ok && family_check_ok); }
};

struct ThresholdResult {
    double b_c = 0.0;
    Regime regime = Regime::GContinuous;
    double slope_ratio = 0.0;  ///< lim_{x -> 0-} (1 - L(x)) / (1 - G(x))
    double psi1 = 0.0;
    double upper_bound = 0.0;  ///< c (r - psi(1)) / (r alpha)
    std::optional<double> phi_r;
    std::optional<KouRoots> roots;
    std::optional<double> lam_bar;
    std::optional<ConvexityReport> convexity;  ///< filled when the engine checked it numerically
};

struct ThresholdOptions {
    enum class OnFailure { Abort, Warn };
    /// Numerical strict-convexity check for spectneg_kou, the one family without a
    /// closed-form convexity argument.
    bool check_convexity = true;
    OnFailure on_convexity_failure = OnFailure::Abort;
};

ThresholdResult threshold(const ProblemSpec& spec, const HittingTransforms& t, ThresholdOptions opts = {});
ThresholdResult threshold(const ProblemSpec& spec, ThresholdOptions opts = {});

ConvexityReport convexity_report(const ProblemSpec& spec, const HittingTransforms& t, const ThresholdResult& th);

/// w(v) = s(v) - f(v), zero on the stopping region v <= B_c.
class ValueFunction {
public:
    ValueFunction(ProblemSpec spec, std::shared_ptr<const HittingTransforms> t, ThresholdResult th);

    const ProblemSpec& spec() const { return spec_; }
    const ThresholdResult& threshold() const { return th_; }
    const HittingTransforms& transforms() const { return *t_; }

    double w(double v) const;
    double s(double v) const;
    double f(double v) const;
    double operator()(double v) const { return w(v); }

private:
    ProblemSpec spec_;
    std::shared_ptr<const HittingTransforms> t_;
    ThresholdResult th_;
};

ValueFunction value_function(const ProblemSpec& spec, ThresholdOptions opts = {});

/// b(eps) = sup{v : s(v) <= f(v) + eps}; unbounded only for eps = +inf.
struct EpsilonBoundary {
    bool unbounded = false;
    double level = 0.0;
};

EpsilonBoundary epsilon_region(const ValueFunction& vf, double eps);

}  // namespace levystop
