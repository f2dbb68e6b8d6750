#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <vector>

#include "levystop/kernels/inversion_kernel.hpp"
#include "levystop/levy_model.hpp"

namespace levystop {

struct ScaleOptions {
    int nodes = 64;                     ///< Talbot contour nodes (even, >= 8)
    double grid_step = 1e-3;            ///< cache spacing
    double cap = 50.0;                  ///< cache covers [0, cap]; beyond it W is inverted directly
    double chunk = 1.0;                 ///< cache is filled lazily in chunks of this length
    double rel_tol = 1e-8;              ///< estimated relative error that triggers the Euler fallback
    bool force_euler = false;           ///< skip Talbot (testing the fallback)
    std::vector<double> cached_tilts{0.0, 1.0};
    kernels::Isa isa = kernels::best_isa();
};

/// W^(q) and Z^(q) of a spectrally negative model with sigma > 0, obtained by
/// inverting the tilted transform of W_Phi(x) = e^{-Phi(q) x} W^(q)(x):
///   int_0^inf e^{-s x} W_Phi(x) dx = 1 / (psi(s + Phi(q)) - q).
/// W_Phi, W_Phi' and W_Phi'' are inverted on one contour and cached on a uniform
/// grid with quintic Hermite interpolation; Z integrates that interpolant exactly.
class ScaleFunction {
public:
    ScaleFunction(const LevyModel& model, double q, ScaleOptions opts = {});
    ScaleFunction(const ScaleFunction&) = delete;
    ScaleFunction& operator=(const ScaleFunction&) = delete;

    const LevyModel& model() const { return model_; }
    double q() const { return q_; }
    double phi_q() const { return phi_; }
    const ScaleOptions& options() const { return opts_; }

    double W(double x) const;
    double W_prime(double x) const;
    double Z(double x) const;

    /// e^{-c x} W^(q)(x), the (q - psi(c))-scale function under the c-tilted measure.
    double tilted_W(double c, double x) const;
    double tilted_W_prime(double c, double x) const;
    /// 1 + (q - psi(c)) int_0^x e^{-c y} W^(q)(y) dy.
    double tilted_Z(double c, double x) const;

    /// tilted_Z(c, x) - (q - psi(c)) / (Phi(q) - c) * tilted_W(c, x) for x > 0, inverted from its
    /// own transform 1/s + (q_c/Phi_c)(Phi_c - s)/s / (psi(s + c) - q). Both terms grow like
    /// e^{(Phi - c) x} while their difference decays, so subtracting cached values loses
    /// everything once (Phi - c) x is large. Needs psi(c) < q.
    double first_passage(double c, double x) const;

    /// d/dx of e^{-Phi(q) x} W^(q)(x) on the short contour, so W' - Phi W = e^{Phi x} W_phi_prime_direct(x)
    /// without cancellation (absolute error ~1e-14 W_phi'(0+)).
    double W_phi_prime_direct(double x) const;

    /// W^(q)'(0+), from the contour at a vanishing argument.
    double W_prime_at_zero() const { return dw0_; }

    struct Point {
        double w_phi = 0.0, dw_phi = 0.0, d2w_phi = 0.0;
        double rel_err = 0.0;  ///< cancellation-based error estimate of the Talbot sum
        bool euler = false;    ///< value came from the Euler fallback
    };
    /// Uncached inversion at x > 0 (tilted quantities).
    Point invert(double x) const;
    double W_direct(double x) const;
    double W_prime_direct(double x) const;

    std::size_t talbot_warnings() const { return talbot_warnings_.load(); }
    std::size_t unresolved_warnings() const { return unresolved_.load(); }
    bool accuracy_ok() const { return unresolved_.load() == 0; }

private:
    struct Tilt {
        double c;
        double kappa;
        std::vector<double> cum;  // e^{-kappa x_i} int_0^{x_i} e^{-c y} W(y) dy
    };

    template <class F>
    double short_contour(double x, F transform) const;
    void invert_many(const double* x, std::size_t n, Point* out) const;
    Point euler_point(double x) const;
    void ensure(std::size_t node) const;
    void fill_chunk(std::size_t chunk) const;
    std::size_t cell(double x) const;
    double cum_integral(double c, double x) const;
    double integral_beyond_cap(double c, double x) const;
    void integrand_node(double c, double kappa, std::size_t i, double out[3]) const;

    LevyModel model_;
    double q_;
    double phi_;
    ScaleOptions opts_;
    kernels::SnExponent expo_;
    kernels::TalbotNodes nodes_;
    kernels::TalbotNodes fp_nodes_;
    double df0_;
    double dw0_;
    std::size_t n_cells_;
    std::size_t cells_per_chunk_;
    std::size_t n_chunks_;

    mutable std::vector<double> wp_, dwp_, d2wp_;
    mutable std::vector<Tilt> tilts_;
    mutable std::unique_ptr<std::once_flag[]> chunk_once_;
    mutable std::atomic<std::size_t> talbot_warnings_{0};
    mutable std::atomic<std::size_t> unresolved_{0};
};

}  // namespace levystop
