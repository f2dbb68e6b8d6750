#pragma once

#include <optional>

#include "levystop/levy_model.hpp"

namespace levystop {

/// Real roots of psi(beta) = r. Slots that do not exist for a family are empty.
///   psi1 in (0, eta1), psi0 in (eta1, inf)         positive pair (Kou, ExpJD)
///   psi1 alone                                      spectneg_kou: the single positive root Phi(r)
///   psi2 in (-eta2, 0), psi3 in (-inf, -eta2)       negative pair (Kou, SpectNegKou)
struct KouRoots {
    std::optional<double> psi0, psi1, psi2, psi3;

    double get_psi0() const;
    double get_psi1() const;
    double get_psi2() const;
    double get_psi3() const;
};

KouRoots kou_roots(const LevyModel& model, double r);

/// lam_bar > 0 with psi(-lam_bar) = r, for models without negative jumps.
struct EmeryRoot {
    double lam_bar;
};

EmeryRoot emery_root(const LevyModel& model, double r);

/// Positive roots of psi(beta) = r beta, i.e. the up-crossing exponents of X - r t.
/// beta1 > 1 is the smaller (or only) one; beta0 > eta1 exists for families with up-jumps.
struct LadderExponents {
    std::optional<double> beta1, beta0;
};

LadderExponents ladder_exponents(const LevyModel& model, double r);

/// Exact E[e^{-r R_n + X_{R_n}} 1{R_n < inf}], R_n the first time X_t - r t >= ln n.
double ladder_value(const LevyModel& model, double r, double n);

}  // namespace levystop
