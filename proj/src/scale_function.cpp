#include "levystop/scale_function.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levystop/errors.hpp"

namespace levystop {

namespace {

using cplx = std::complex<double>;

// Quintic Hermite basis on [0,1]: values, first derivatives, running integrals.
struct Hermite5 {
    double h[6];
    void values(double t) {
        double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
        h[0] = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        h[1] = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        h[2] = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        h[3] = 0.5 * t3 - t4 + 0.5 * t5;
        h[4] = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        h[5] = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    }
    void slopes(double t) {
        double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
        h[0] = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        h[1] = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        h[2] = t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
        h[3] = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
        h[4] = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        h[5] = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    }
    void integrals(double t) {
        double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t, t6 = t5 * t;
        h[0] = t - 2.5 * t4 + 3.0 * t5 - t6;
        h[1] = 0.5 * t2 - 1.5 * t4 + 1.6 * t5 - 0.5 * t6;
        h[2] = t3 / 6.0 - 0.375 * t4 + 0.3 * t5 - t6 / 12.0;
        h[3] = 0.125 * t4 - 0.2 * t5 + t6 / 12.0;
        h[4] = -t4 + 1.4 * t5 - 0.5 * t6;
        h[5] = 2.5 * t4 - 3.0 * t5 + t6;
    }
    // Combine with end data (f0, f0', f0'') and (f1, f1', f1'') on a cell of width w.
    double combine(const double a[3], const double b[3], double w) const {
        return h[0] * a[0] + h[1] * w * a[1] + h[2] * w * w * a[2] + h[3] * w * w * b[2] + h[4] * w * b[1] +
               h[5] * b[0];
    }
};

double phi_at(const LevyModel& model, double q) {
    if (q > 0.0) return phi(model, q);
    if (dpsi_formula(model, 0.0) >= 0.0) return 0.0;
    double hi = 1.0;
    while (psi_formula(model, hi) <= 0.0) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (psi_formula(model, mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

kernels::SnExponent exponent_of(const LevyModel& model) {
    kernels::SnExponent e;
    e.drift = model.drift();
    e.half_var = 0.5 * model.sigma() * model.sigma();
    if (model.family() == Family::SpectNegKou) {
        e.jump_rate = model.as<SpectNegKou>().a;
        e.eta = model.as<SpectNegKou>().eta2;
    }
    return e;
}

cplx psi_complex(const kernels::SnExponent& e, cplx s) {
    return e.drift * s + e.half_var * s * s - e.jump_rate * s / (e.eta + s);
}

constexpr double kVanishing = 1e-12;
// The first-passage transform is bounded on the contour, so a short contour reaches
// ~1e-14 absolute while roundoff grows like e^{0.17 n}.
constexpr int kFirstPassageNodes = 32;

}  // namespace

ScaleFunction::ScaleFunction(const LevyModel& model, double q, ScaleOptions opts)
    : model_(model), q_(q), opts_(std::move(opts)) {
    if (!model.spectrally_negative())
        throw UnsupportedFamily("scale functions need a spectrally negative model, got " +
                                std::string(model.name()));
    if (!(model.sigma() > 0.0))
        throw UnsupportedFamily("scale functions are implemented for sigma > 0 only (neg_poisson has none)");
    if (!(q >= 0.0) || !std::isfinite(q)) throw DomainError("scale function requires q >= 0");
    if (opts_.nodes < 8 || opts_.nodes % 2 != 0) throw InputError("Talbot node count must be even and >= 8");
    if (!(opts_.grid_step > 0.0) || !(opts_.cap > 0.0) || !(opts_.chunk >= opts_.grid_step))
        throw InputError("invalid scale-function grid options");

    phi_ = phi_at(model, q);
    expo_ = exponent_of(model);
    nodes_ = kernels::make_talbot_nodes(opts_.nodes);
    fp_nodes_ = kernels::make_talbot_nodes(kFirstPassageNodes);
    df0_ = 1.0 / expo_.half_var;

    n_cells_ = static_cast<std::size_t>(std::llround(opts_.cap / opts_.grid_step));
    cells_per_chunk_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opts_.chunk / opts_.grid_step)));
    n_chunks_ = (n_cells_ + cells_per_chunk_ - 1) / cells_per_chunk_;
    wp_.assign(n_cells_ + 1, 0.0);
    dwp_.assign(n_cells_ + 1, 0.0);
    d2wp_.assign(n_cells_ + 1, 0.0);
    chunk_once_ = std::make_unique<std::once_flag[]>(n_chunks_);

    Point p0 = invert(kVanishing);
    dw0_ = p0.dw_phi;
    wp_[0] = 0.0;
    dwp_[0] = p0.dw_phi;
    // Large-s expansion of 1/(psi(s+Phi)-q): the contour sum for W_Phi'' cancels
    // catastrophically at vanishing x, the asymptotic limit does not.
    d2wp_[0] = -(2.0 * expo_.half_var * phi_ + expo_.drift) / (expo_.half_var * expo_.half_var);

    for (double c : opts_.cached_tilts) {
        if (psi_formula(model_, c) > q_ || c <= model_.domain_lower())
            throw DomainError("cached tilt c = " + std::to_string(c) + " has psi(c) > q");
        Tilt t{c, std::max(phi_ - c, 0.0), {}};
        t.cum.assign(n_cells_ + 1, 0.0);
        tilts_.push_back(std::move(t));
    }
}

void ScaleFunction::invert_many(const double* x, std::size_t n, Point* out) const {
    std::vector<double> f(n), df(n), d2f(n), mag(n);
    kernels::InversionBatch b{x, n, f.data(), df.data(), d2f.data(), mag.data()};
    if (!opts_.force_euler) kernels::invert_sn(opts_.isa, expo_, phi_, q_, df0_, nodes_, b);
    for (std::size_t i = 0; i < n; ++i) {
        Point p;
        if (!opts_.force_euler) {
            p.w_phi = f[i];
            p.dw_phi = df[i];
            p.d2w_phi = d2f[i];
            // Roundoff in the contour sum scales with the sum of absolute terms.
            p.rel_err = 1e-15 * mag[i] / std::max(std::abs(f[i]), std::numeric_limits<double>::min());
        }
        bool bad = !std::isfinite(p.w_phi) || !std::isfinite(p.dw_phi) || !std::isfinite(p.d2w_phi) ||
                   p.rel_err > opts_.rel_tol;
        if (opts_.force_euler || bad) {
            if (!opts_.force_euler) ++talbot_warnings_;
            p = euler_point(x[i]);
        }
        out[i] = p;
    }
}

// Abate-Whitt Euler summation of the Bromwich integral (A = 18.4, 15 + 11 terms),
// run twice with different term counts; the spread is the error estimate.
ScaleFunction::Point ScaleFunction::euler_point(double x) const {
    const double A = 18.4;
    auto transform = [&](cplx z, int which) {
        cplx F = 1.0 / (psi_complex(expo_, z + phi_) - q_);
        if (which == 0) return F;
        if (which == 1) return z * F;
        return z * z * F - df0_;
    };
    auto sum = [&](int which, int n_terms, int m_avg) {
        std::vector<double> partial(n_terms + m_avg + 1);
        double acc = 0.5 * transform(cplx(A / (2.0 * x), 0.0), which).real();
        partial[0] = acc;
        for (int k = 1; k <= n_terms + m_avg; ++k) {
            cplx z(A / (2.0 * x), k * M_PI / x);
            acc += (k % 2 ? -1.0 : 1.0) * transform(z, which).real();
            partial[k] = acc;
        }
        double out = 0.0, binom = 1.0;
        for (int j = 0; j <= m_avg; ++j) {
            out += binom * partial[n_terms + j];
            binom = binom * (m_avg - j) / (j + 1);
        }
        return std::exp(A / 2.0) / x * out / std::pow(2.0, m_avg);
    };
    Point p;
    p.euler = true;
    p.w_phi = sum(0, 15, 11);
    p.dw_phi = sum(1, 15, 11);
    p.d2w_phi = sum(2, 15, 11);
    double alt = sum(0, 25, 11);
    p.rel_err = std::abs(alt - p.w_phi) / std::max(std::abs(p.w_phi), std::numeric_limits<double>::min());
    if (!(p.rel_err <= 1e-6)) ++unresolved_;
    return p;
}

ScaleFunction::Point ScaleFunction::invert(double x) const {
    if (!(x > 0.0)) throw DomainError("contour inversion needs x > 0");
    Point p;
    invert_many(&x, 1, &p);
    return p;
}

double ScaleFunction::W_direct(double x) const {
    if (x <= 0.0) return 0.0;
    return std::exp(phi_ * x) * invert(x).w_phi;
}

double ScaleFunction::W_prime_direct(double x) const {
    if (x < 0.0) return 0.0;
    if (x == 0.0) return dw0_;
    Point p = invert(x);
    return std::exp(phi_ * x) * (p.dw_phi + phi_ * p.w_phi);
}

void ScaleFunction::integrand_node(double c, double kappa, std::size_t i, double out[3]) const {
    double d = phi_ - c;
    double xi = i * opts_.grid_step;
    double s = (d - kappa == 0.0) ? 1.0 : std::exp((d - kappa) * xi);
    out[0] = s * wp_[i];
    out[1] = s * (dwp_[i] + d * wp_[i]);
    out[2] = s * (d2wp_[i] + 2.0 * d * dwp_[i] + d * d * wp_[i]);
}

void ScaleFunction::fill_chunk(std::size_t k) const {
    std::size_t lo = k * cells_per_chunk_ + 1;
    std::size_t hi = std::min((k + 1) * cells_per_chunk_, n_cells_);
    if (lo > hi) return;
    std::size_t n = hi - lo + 1;
    std::vector<double> xs(n);
    for (std::size_t j = 0; j < n; ++j) xs[j] = (lo + j) * opts_.grid_step;
    std::vector<Point> pts(n);
    invert_many(xs.data(), n, pts.data());
    for (std::size_t j = 0; j < n; ++j) {
        wp_[lo + j] = pts[j].w_phi;
        dwp_[lo + j] = pts[j].dw_phi;
        d2wp_[lo + j] = pts[j].d2w_phi;
    }
    const double h = opts_.grid_step;
    for (auto& t : tilts_) {
        double decay = std::exp(-t.kappa * h);
        double a[3], b[3];
        integrand_node(t.c, t.kappa, lo - 1, a);
        for (std::size_t i = lo; i <= hi; ++i) {
            integrand_node(t.c, t.kappa, i, b);
            double cell = 0.5 * h * (decay * a[0] + b[0]) + h * h / 10.0 * (decay * a[1] - b[1]) +
                          h * h * h / 120.0 * (decay * a[2] + b[2]);
            t.cum[i] = decay * t.cum[i - 1] + cell;
            std::copy(b, b + 3, a);
        }
    }
}

void ScaleFunction::ensure(std::size_t node) const {
    if (node == 0) return;
    std::size_t last = std::min((node - 1) / cells_per_chunk_, n_chunks_ - 1);
    for (std::size_t k = 0; k <= last; ++k) std::call_once(chunk_once_[k], [this, k] { fill_chunk(k); });
}

std::size_t ScaleFunction::cell(double x) const {
    auto i = static_cast<std::size_t>(x / opts_.grid_step);
    return std::min(i, n_cells_ - 1);
}

double ScaleFunction::W(double x) const {
    if (!(x > 0.0)) return 0.0;
    if (x > opts_.cap) return W_direct(x);
    std::size_t i = cell(x);
    ensure(i + 1);
    const double h = opts_.grid_step;
    double t = (x - i * h) / h;
    double a[3] = {wp_[i], dwp_[i], d2wp_[i]}, b[3] = {wp_[i + 1], dwp_[i + 1], d2wp_[i + 1]};
    Hermite5 hb;
    hb.values(t);
    return std::exp(phi_ * x) * hb.combine(a, b, h);
}

double ScaleFunction::W_prime(double x) const {
    if (x < 0.0) return 0.0;
    if (x == 0.0) return dw0_;
    if (x > opts_.cap) return W_prime_direct(x);
    std::size_t i = cell(x);
    ensure(i + 1);
    const double h = opts_.grid_step;
    double t = (x - i * h) / h;
    double a[3] = {wp_[i], dwp_[i], d2wp_[i]}, b[3] = {wp_[i + 1], dwp_[i + 1], d2wp_[i + 1]};
    Hermite5 hb;
    hb.values(t);
    double val = hb.combine(a, b, h);
    hb.slopes(t);
    double slope = hb.combine(a, b, h) / h;
    return std::exp(phi_ * x) * (slope + phi_ * val);
}

double ScaleFunction::tilted_W(double c, double x) const {
    if (psi_formula(model_, c) > q_) throw DomainError("tilted_W requires psi(c) <= q");
    if (!(x > 0.0)) return 0.0;
    if (x > opts_.cap) return std::exp(-c * x) * W_direct(x);
    std::size_t i = cell(x);
    ensure(i + 1);
    const double h = opts_.grid_step;
    double t = (x - i * h) / h;
    double a[3] = {wp_[i], dwp_[i], d2wp_[i]}, b[3] = {wp_[i + 1], dwp_[i + 1], d2wp_[i + 1]};
    Hermite5 hb;
    hb.values(t);
    return std::exp((phi_ - c) * x) * hb.combine(a, b, h);
}

double ScaleFunction::tilted_W_prime(double c, double x) const {
    if (psi_formula(model_, c) > q_) throw DomainError("tilted_W requires psi(c) <= q");
    if (x < 0.0) return 0.0;
    if (x == 0.0) return dw0_;
    return std::exp(-c * x) * (W_prime(x) - c * W(x));
}

template <class F>
double ScaleFunction::short_contour(double x, F transform) const {
    const auto& nd = fp_nodes_;
    const double scale = nd.n / x;
    double acc = 0.0, mag = 0.0;
    for (std::size_t j = 0; j < nd.w_re.size(); ++j) {
        cplx z(scale * nd.w_re[j], scale * nd.w_im[j]);
        double t = (cplx(nd.c_re[j], nd.c_im[j]) * transform(z)).imag();
        acc += t;
        mag += std::abs(t);
    }
    if (!(1e-15 * mag / x <= 1e-9)) ++talbot_warnings_;
    return acc / x;
}

double ScaleFunction::W_phi_prime_direct(double x) const {
    if (x < 0.0) return 0.0;
    if (x == 0.0) return dw0_;
    return short_contour(x, [&](cplx z) { return z / (psi_complex(expo_, z + phi_) - q_); });
}

double ScaleFunction::first_passage(double c, double x) const {
    double qc = q_ - psi_formula(model_, c);
    double phic = phi_ - c;
    if (!(qc > 0.0) || !(phic > 0.0)) throw DomainError("first_passage requires psi(c) < q");
    if (!(x > 0.0)) return 1.0;
    const double k = qc / phic;
    return short_contour(x, [&](cplx z) { return 1.0 / z + k * (phic - z) / z / (psi_complex(expo_, z + c) - q_); });
}

double ScaleFunction::cum_integral(double c, double x) const {
    const double h = opts_.grid_step;
    std::size_t i = cell(x);
    ensure(i + 1);
    double d = phi_ - c;
    double kappa = std::max(d, 0.0);

    const Tilt* tilt = nullptr;
    for (const auto& t : tilts_)
        if (t.c == c) tilt = &t;
    double base;
    if (tilt) {
        base = tilt->cum[i];
    } else {
        base = 0.0;
        double decay = std::exp(-kappa * h);
        double a[3], b[3];
        integrand_node(c, kappa, 0, a);
        for (std::size_t j = 1; j <= i; ++j) {
            integrand_node(c, kappa, j, b);
            double cellint = 0.5 * h * (decay * a[0] + b[0]) + h * h / 10.0 * (decay * a[1] - b[1]) +
                             h * h * h / 120.0 * (decay * a[2] + b[2]);
            base = decay * base + cellint;
            std::copy(b, b + 3, a);
        }
    }
    // Partial cell, integrand scaled by e^{-kappa x_i}.
    double a[3], b[3];
    integrand_node(c, kappa, i, a);
    integrand_node(c, kappa, i + 1, b);
    double grow = std::exp(kappa * h);
    for (double& v : b) v *= grow;
    Hermite5 hb;
    hb.integrals((x - i * h) / h);
    double part = h * hb.combine(a, b, h);
    return std::exp(kappa * i * h) * (base + part);
}

double ScaleFunction::integral_beyond_cap(double c, double x) const {
    auto f = [&](double y) { return std::exp(-c * y) * W_direct(y); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, opts_.cap, x, 12, 1e-12);
}

double ScaleFunction::tilted_Z(double c, double x) const {
    double qc = q_ - psi_formula(model_, c);
    if (qc < 0.0) throw DomainError("tilted_Z requires psi(c) <= q");
    if (!(x > 0.0)) return 1.0;
    if (x <= opts_.cap) return 1.0 + qc * cum_integral(c, x);
    return 1.0 + qc * (cum_integral(c, opts_.cap) + integral_beyond_cap(c, x));
}

double ScaleFunction::Z(double x) const { return tilted_Z(0.0, x); }

}  // namespace levystop
