#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace levystop::kernels {

/// psi(s) = drift s + half_var s^2 - jump_rate s / (eta + s); jump_rate = 0 for no jumps.
struct SnExponent {
    double drift = 0.0;
    double half_var = 0.5;
    double jump_rate = 0.0;
    double eta = 1.0;
};

/// Positive-half nodes of the optimised Talbot contour
/// w(theta) = -0.6122 + 0.5017 theta cot(0.6407 theta) + 0.2645 i theta,
/// midpoint rule with n nodes on (-pi, pi). c_k = 2 e^{n w_k} w'(theta_k).
struct TalbotNodes {
    int n = 0;
    std::vector<double> w_re, w_im, c_re, c_im;
};

TalbotNodes make_talbot_nodes(int n);

/// Inversion of F(z) = 1 / (psi(z + shift) - q) at each x > 0:
///   f[i]   = f(x),   f(x) = (1/x) sum_k Im(c_k F(z_k)),  z_k = (n/x) w_k
///   df[i]  from z F(z) - f(0+)   (f(0+) = 0 when half_var > 0)
///   d2f[i] from z^2 F(z) - df0
///   mag[i] = (1/x) sum_k |Im(c_k F(z_k))|, used to estimate cancellation loss.
struct InversionBatch {
    const double* x;
    std::size_t count;
    double* f;
    double* df;
    double* d2f;
    double* mag;
};

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

/// Best variant the running CPU supports (LEVYSTOP_SIMD=scalar forces the reference kernel).
Isa best_isa();
bool isa_available(Isa isa);

void invert_sn_scalar(const SnExponent& e, double shift, double q, double df0, const TalbotNodes& nodes,
                      const InversionBatch& batch);
void invert_sn_avx2(const SnExponent& e, double shift, double q, double df0, const TalbotNodes& nodes,
                    const InversionBatch& batch);

void invert_sn(Isa isa, const SnExponent& e, double shift, double q, double df0, const TalbotNodes& nodes,
               const InversionBatch& batch);

}  // namespace levystop::kernels
