#include <cmath>
#include <numbers>

#include "levystop/kernels/inversion_kernel.hpp"

namespace levystop::kernels {

TalbotNodes make_talbot_nodes(int n) {
    TalbotNodes t;
    t.n = n;
    const double pi = std::numbers::pi;
    for (int k = n / 2; k < n; ++k) {
        double th = -pi + (k + 0.5) * 2.0 * pi / n;
        double a = 0.6407 * th;
        double cot = std::cos(a) / std::sin(a);
        double s = std::sin(a);
        double wr = -0.6122 + 0.5017 * th * cot;
        double wi = 0.2645 * th;
        double dwr = 0.5017 * (cot - a / (s * s));
        double dwi = 0.2645;
        double mag = 2.0 * std::exp(n * wr);
        double cr = mag * std::cos(n * wi), ci = mag * std::sin(n * wi);
        t.w_re.push_back(wr);
        t.w_im.push_back(wi);
        t.c_re.push_back(cr * dwr - ci * dwi);
        t.c_im.push_back(cr * dwi + ci * dwr);
    }
    return t;
}

// The AVX2 variant repeats these operations in the same order; keep the two in step.
void invert_sn_scalar(const SnExponent& e, double shift, double q, double df0, const TalbotNodes& nodes,
                      const InversionBatch& b) {
    const std::size_t m = nodes.w_re.size();
    for (std::size_t i = 0; i < b.count; ++i) {
        const double inv = 1.0 / b.x[i];
        const double scale = nodes.n * inv;
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, am = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            double zr = scale * nodes.w_re[k];
            double zi = scale * nodes.w_im[k];
            double sr = zr + shift;
            double si = zi;
            double s2r = sr * sr - si * si;
            double s2i = 2.0 * sr * si;
            double pr = e.drift * sr + e.half_var * s2r;
            double pim = e.drift * si + e.half_var * s2i;
            double dr = e.eta + sr;
            double den = dr * dr + si * si;
            double qr = (sr * dr + si * si) / den;
            double qi = (si * dr - sr * si) / den;
            pr = pr - e.jump_rate * qr - q;
            pim = pim - e.jump_rate * qi;
            double m2 = pr * pr + pim * pim;
            double fr = pr / m2;
            double fi = -pim / m2;
            double t0 = nodes.c_re[k] * fi + nodes.c_im[k] * fr;
            double zfr = zr * fr - zi * fi;
            double zfi = zr * fi + zi * fr;
            double t1 = nodes.c_re[k] * zfi + nodes.c_im[k] * zfr;
            double z2r = zr * zfr - zi * zfi - df0;
            double z2i = zr * zfi + zi * zfr;
            double t2 = nodes.c_re[k] * z2i + nodes.c_im[k] * z2r;
            a0 += t0;
            a1 += t1;
            a2 += t2;
            am += std::fabs(t0);
        }
        b.f[i] = a0 * inv;
        b.df[i] = a1 * inv;
        b.d2f[i] = a2 * inv;
        b.mag[i] = am * inv;
    }
}

}  // namespace levystop::kernels
