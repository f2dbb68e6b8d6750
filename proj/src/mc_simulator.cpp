#include "levystop/mc_simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "levystop/errors.hpp"

namespace levystop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

double keyed_unit(std::uint64_t key) { return (splitmix64(key) >> 11) * 0x1.0p-53; }

/// First time a Brownian path of variance sigma2 per unit time, started a > 0 above a level and
/// pinned at distance b from it (on either side) after h, touches the level, given that it does.
/// With u = s / (h - s) the conditional density is proportional to u^{-3/2} exp(-alpha/u - beta u),
/// an inverse Gaussian with mean a/b and shape a^2/(sigma2 h); drawn by Michael-Schucany-Haas.
double bridge_hit_time(double a, double b, double sigma2, double h, std::uint64_t key) {
    if (!(b > 0.0)) return h;
    double mu = a / b, lambda = a * a / (sigma2 * h);
    double u1 = 1.0 - keyed_unit(key), u2 = keyed_unit(key + 1), u3 = keyed_unit(key + 2);
    double nu = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    double w = mu * nu * nu / (2.0 * lambda);
    double x = mu / (1.0 + w + std::sqrt(w * w + 2.0 * w));
    double u = u3 * (mu + x) <= mu ? x : mu * mu / x;
    return std::isinf(u) ? h : h * u / (1.0 + u);
}

struct Dynamics {
    double mu = 0.0, sigma = 0.0, rate = 0.0;
    double p_up = 0.0, eta_up = 1.0, eta_down = 1.0;
    bool unit = false;  // jumps of size exactly 1
};

Dynamics dynamics_of(const LevyModel& m) {
    Dynamics d;
    d.mu = m.drift();
    d.sigma = m.sigma();
    d.rate = m.jump_rate();
    switch (m.family()) {
    case Family::Brownian: break;
    case Family::Kou: {
        const auto& k = m.as<KouJD>();
        d.p_up = k.p;
        d.eta_up = k.eta1;
        d.eta_down = k.eta2;
        break;
    }
    case Family::ExpJD:
        d.p_up = 1.0;
        d.eta_up = m.as<ExpJD>().eta1;
        break;
    case Family::SpectNegKou:
        d.eta_down = m.as<SpectNegKou>().eta2;
        break;
    case Family::NegPoisson:
        d.unit = true;
        break;
    }
    return d;
}

Dynamics negated(Dynamics d) {
    d.mu = -d.mu;
    d.p_up = 1.0 - d.p_up;
    std::swap(d.eta_up, d.eta_down);
    return d;
}

enum class Tail { None, Discount, CashFlow, Reflected };

struct TailRule {
    Tail kind = Tail::None;
    double tol = 0.0;
    double a_coef = 0.0;  // CashFlow: bound = a_coef e^{X - rt} + c_coef e^{-rt}
    double c_coef = 0.0;
};

struct Outcome {
    std::vector<unsigned char> hit;
    std::vector<double> tau, x, A;
    double t_end = 0.0, x_end = 0.0, A_end = 0.0;
};

struct Rng {
    std::mt19937_64 eng;
    boost::random::normal_distribution<double> normal;
    boost::random::exponential_distribution<double> expo;
    boost::random::uniform_01<double> unif;
    explicit Rng(std::uint64_t s) : eng(s) {}
    double n() { return normal(eng); }
    double e() { return expo(eng); }
    double u() { return unif(eng); }
};

/// Single pass over one path, recording the first passage below each level.
/// Levels are nonincreasing, so they are reached in order.
class Engine {
public:
    Engine(Dynamics d, std::vector<double> levels, double r, double horizon, TailRule tail, bool integral,
           const SimConfig& cfg)
        : d_(d), levels_(std::move(levels)), r_(r), horizon_(horizon), tail_(tail), integral_(integral),
          dt_(cfg.dt), bridge_(cfg.bridge_correction), seed_(cfg.seed) {
        for (std::size_t i = 1; i < levels_.size(); ++i)
            if (levels_[i] > levels_[i - 1]) throw InputError("engine levels must be nonincreasing");
        log_tol_ = tail_.tol > 0.0 ? std::log(tail_.tol) : -kInf;
    }

    std::size_t size() const { return levels_.size(); }
    double horizon() const { return horizon_; }

    void run(std::uint64_t index, Outcome& o) const {
        const std::size_t L = levels_.size();
        o.hit.assign(L, 0);
        o.tau.assign(L, 0.0);
        o.x.assign(L, 0.0);
        o.A.assign(L, 0.0);
        const std::uint64_t ps = path_seed(seed_, index);
        Rng rng(ps);
        // Bridge uniforms are keyed by step number, not drawn from the stream, so the
        // stream does not depend on which levels were asked for.
        const std::uint64_t bridge_key = splitmix64(ps ^ 0xD1B54A32D192ED03ULL);
        std::uint64_t step_no = 0;

        double t = 0.0, X = 0.0, A = 0.0, dsc = 1.0, E = 1.0;
        std::size_t k = 0;
        auto record = [&](double tau, double x, double a) {
            o.hit[k] = 1;
            o.tau[k] = tau;
            o.x[k] = x;
            o.A[k] = a;
            ++k;
        };
        while (k < L && levels_[k] >= 0.0) record(0.0, 0.0, 0.0);

        const double step_decay = std::exp(-r_ * dt_);
        const double mu_dt = d_.mu * dt_, sd_dt = d_.sigma * std::sqrt(dt_);
        const double two_over_var = d_.sigma > 0.0 ? 2.0 / (d_.sigma * d_.sigma) : 0.0;
        double next_jump = d_.rate > 0.0 ? rng.e() / d_.rate : kInf;

        auto jump = [&] {
            bool up;
            if (d_.p_up <= 0.0)
                up = false;
            else if (d_.p_up >= 1.0)
                up = true;
            else
                up = rng.u() < d_.p_up;
            if (d_.unit) return up ? 1.0 : -1.0;
            double size = rng.e();
            return up ? size / d_.eta_up : -size / d_.eta_down;
        };
        auto after_jump = [&] {
            X += jump();
            if (integral_) E = dsc * std::exp(X);
            while (k < L && X <= levels_[k]) record(t, X, A);
            next_jump = t + rng.e() / d_.rate;
        };

        while (k < L) {
            if (t >= horizon_) break;
            if (stop_by_tail(X, dsc, E)) break;
            if (d_.sigma > 0.0) {
                double h = dt_;
                bool jump_now = false;
                if (next_jump - t <= h) {
                    h = next_jump - t;
                    jump_now = true;
                }
                if (horizon_ - t < h) {
                    h = horizon_ - t;
                    jump_now = false;
                }
                double z = rng.n();
                ++step_no;
                double u = -1.0;  // bridge uniform, made only when a crossing is plausible
                double last_tau = t;
                const bool full = h == dt_;
                double X1 = full ? X + mu_dt + sd_dt * z : X + d_.mu * h + d_.sigma * std::sqrt(h) * z;
                double t1 = jump_now ? next_jump : t + h;
                double dsc1 = full ? dsc * step_decay : std::exp(-r_ * t1);
                double E1 = integral_ ? dsc1 * std::exp(X1) : 0.0;
                const std::uint64_t time_key = splitmix64(bridge_key ^ (step_no * 0x9E3779B97F4A7C15ULL));
                while (k < L) {
                    double l = levels_[k];
                    double tau;
                    if (!bridge_) {
                        if (X1 > l) break;
                        tau = t + h * (X - l) / (X - X1);
                    } else {
                        if (X1 > l) {
                            double arg = two_over_var * (X - l) * (X1 - l) / h;
                            if (arg > 50.0) break;
                            if (u < 0.0) u = keyed_unit(bridge_key + step_no);
                            if (!(u < std::exp(-arg))) break;
                        }
                        // Levels share the draw; the clamp keeps them ordered when two are crossed in one step.
                        double s = bridge_hit_time(X - l, std::abs(X1 - l), d_.sigma * d_.sigma, h, time_key);
                        tau = std::max(t + s, last_tau);
                    }
                    double a = integral_ ? A + 0.5 * (tau - t) * (E + std::exp(l - r_ * tau)) : 0.0;
                    record(tau, l, a);
                    last_tau = tau;
                }
                if (integral_) A += 0.5 * h * (E + E1);
                t = t1;
                X = X1;
                dsc = dsc1;
                E = E1;
                if (k < L && jump_now) after_jump();
            } else {
                double t1 = std::min(next_jump, horizon_);
                double dsc1 = std::exp(-r_ * t1);
                if (integral_) A += std::exp(X) * (r_ > 0.0 ? (dsc - dsc1) / r_ : t1 - t);
                t = t1;
                dsc = dsc1;
                if (integral_) E = dsc * std::exp(X);
                if (t >= horizon_) break;
                after_jump();
            }
        }
        o.t_end = t;
        o.x_end = X;
        o.A_end = A;
    }

private:
    bool stop_by_tail(double X, double dsc, double E) const {
        switch (tail_.kind) {
        case Tail::None: return false;
        case Tail::Discount: return dsc < tail_.tol;
        case Tail::CashFlow: return tail_.a_coef * E + tail_.c_coef * dsc < tail_.tol;
        case Tail::Reflected: return -X < log_tol_;
        }
        return false;
    }

    Dynamics d_;
    std::vector<double> levels_;
    double r_, horizon_;
    TailRule tail_;
    bool integral_;
    double dt_;
    bool bridge_;
    std::uint64_t seed_;
    double log_tol_;
};

/// Sums, cross products and truncation counts of K per-path quantities.
struct Moments {
    std::size_t K = 0, n = 0;
    std::vector<double> sum, gram;
    std::vector<std::size_t> trunc;

    explicit Moments(std::size_t k = 0) : K(k), sum(k, 0.0), gram(k * k, 0.0), trunc(k, 0) {}

    void add(const double* y, const unsigned char* tr) {
        ++n;
        for (std::size_t i = 0; i < K; ++i) {
            sum[i] += y[i];
            trunc[i] += tr[i];
            double* row = &gram[i * K];
            for (std::size_t j = 0; j <= i; ++j) row[j] += y[i] * y[j];
        }
    }
    void merge(const Moments& o) {
        n += o.n;
        for (std::size_t i = 0; i < K; ++i) {
            sum[i] += o.sum[i];
            trunc[i] += o.trunc[i];
        }
        for (std::size_t i = 0; i < K * K; ++i) gram[i] += o.gram[i];
    }
    double mean(std::size_t i) const { return sum[i] / n; }
    double cov(std::size_t i, std::size_t j) const {
        if (n < 2) return 0.0;
        if (j > i) std::swap(i, j);
        return (gram[i * K + j] - n * mean(i) * mean(j)) / (n - 1);
    }
    double se(std::size_t i) const { return std::sqrt(std::max(cov(i, i), 0.0) / n); }
    double diff_se(std::size_t i, std::size_t j) const {
        double v = cov(i, i) + cov(j, j) - 2.0 * cov(i, j);
        return std::sqrt(std::max(v, 0.0) / n);
    }
    McEstimate estimate(std::size_t i, std::uint64_t seed) const {
        return McEstimate{mean(i), se(i), n, n ? double(trunc[i]) / n : 0.0, seed};
    }
};

void validate(const SimConfig& cfg) {
    if (cfg.n_paths < 1) throw InputError("n_paths must be >= 1");
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw InputError("dt must be > 0");
    if (cfg.horizon && !(*cfg.horizon > 0.0)) throw InputError("horizon must be > 0");
    if (!(cfg.tail_tol >= 0.0)) throw InputError("tail_tol must be >= 0");
    if (cfg.batch_size < 1) throw InputError("batch_size must be >= 1");
}

double default_horizon(const LevyModel& m, double r, const SimConfig& cfg) {
    if (cfg.horizon) return *cfg.horizon;
    double p1 = psi1(m);
    return r > p1 ? 50.0 / (r - p1) : 50.0 / r;
}

/// Runs all paths in fixed batches; per-batch moments are merged in batch order.
template <class Fill>
Moments run_paths(const Engine& engine, const SimConfig& cfg, std::size_t K, Fill fill) {
    const std::size_t n_batches = (cfg.n_paths + cfg.batch_size - 1) / cfg.batch_size;
    std::vector<Moments> parts(n_batches, Moments(K));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        Outcome o;
        std::vector<double> y(K);
        std::vector<unsigned char> tr(K);
        for (std::size_t b; (b = next.fetch_add(1)) < n_batches;) {
            std::size_t lo = b * cfg.batch_size, hi = std::min(cfg.n_paths, lo + cfg.batch_size);
            for (std::size_t i = lo; i < hi; ++i) {
                engine.run(i, o);
                fill(o, y.data(), tr.data());
                parts[b].add(y.data(), tr.data());
            }
        }
    };
    unsigned w = std::min<std::size_t>(worker_count(cfg), n_batches);
    if (w <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < w; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    Moments total(K);
    for (const auto& p : parts) total.merge(p);
    return total;
}

/// Sorts values descending, returning the permutation (order[i] = original index).
std::vector<std::size_t> descending_order(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    return order;
}

struct PolicyRun {
    Moments m;
    std::vector<std::size_t> order;
};

/// Policy values for pairs (b_i, v_i) sharing one X path: level_i = ln(b_i / v_i).
PolicyRun run_policy(const ProblemSpec& spec, const std::vector<double>& bs, const std::vector<double>& vs,
                     const SimConfig& cfg) {
    validate(cfg);
    const std::size_t n = bs.size();
    std::vector<double> levels(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(bs[i] > 0.0)) throw DomainError("policy threshold b must be > 0");
        if (!(vs[i] > 0.0)) throw DomainError("starting value v must be > 0");
        levels[i] = std::log(bs[i] / vs[i]);
    }
    auto order = descending_order(levels);
    std::vector<double> sorted(n), sv(n);
    for (std::size_t i = 0; i < n; ++i) {
        sorted[i] = levels[order[i]];
        sv[i] = vs[order[i]];
    }
    const double r = spec.r(), al = spec.alpha(), c = spec.c(), gap = r - spec.psi1();
    TailRule tail;
    if (cfg.tail_tol > 0.0) {
        tail.kind = Tail::CashFlow;
        tail.tol = cfg.tail_tol;
        tail.a_coef = al * *std::max_element(sv.begin(), sv.end()) / gap;
        tail.c_coef = c / r;
    }
    Engine engine(dynamics_of(spec.model()), sorted, r, default_horizon(spec.model(), r, cfg), tail, true, cfg);
    auto fill = [&](const Outcome& o, double* y, unsigned char* tr) {
        for (std::size_t i = 0; i < n; ++i) {
            double v = sv[i];
            double direct, reduced;
            if (o.hit[i] && o.tau[i] == 0.0) {
                direct = reduced = 0.0;
                tr[2 * i] = tr[2 * i + 1] = 0;
            } else if (o.hit[i]) {
                double disc = std::exp(-r * o.tau[i]);
                direct = al * v * o.A[i] - c * (1.0 - disc) / r;
                reduced = al * v / gap - c / r + disc * (-al * v * std::exp(o.x[i]) / gap + c / r);
                tr[2 * i] = tr[2 * i + 1] = 0;
            } else {
                direct = al * v * o.A_end - c * (1.0 - std::exp(-r * o.t_end)) / r;
                reduced = al * v / gap - c / r;
                tr[2 * i] = tr[2 * i + 1] = 1;
            }
            y[2 * i] = direct;
            y[2 * i + 1] = reduced;
        }
    };
    return {run_paths(engine, cfg, 2 * n, fill), order};
}

PolicyEstimate policy_from(const Moments& m, std::size_t slot, double b, double v, std::uint64_t seed) {
    PolicyEstimate p;
    p.b = b;
    p.v = v;
    p.direct = m.estimate(2 * slot, seed);
    p.reduced = m.estimate(2 * slot + 1, seed);
    p.diff_se = m.diff_se(2 * slot, 2 * slot + 1);
    p.reconciled = std::abs(p.direct.mean - p.reduced.mean) <= 4.0 * p.diff_se;
    return p;
}

}  // namespace

unsigned worker_count(const SimConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("LEVYSTOP_THREADS")) {
        char* end = nullptr;
        unsigned long cap = std::strtoul(env, &end, 10);
        if (end != env && cap > 0) return static_cast<unsigned>(std::min<unsigned long>(cap, hw));
    }
    return hw;
}

std::vector<HitEstimate> simulate_hit(const LevyModel& model, double r, const std::vector<double>& levels,
                                      const SimConfig& cfg) {
    validate(cfg);
    if (!(r > 0.0)) throw DomainError("simulate_hit needs r > 0");
    for (double x : levels)
        if (!(x < 0.0)) throw DomainError("simulate_hit needs levels x < 0");
    auto order = descending_order(levels);
    std::vector<double> sorted(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) sorted[i] = levels[order[i]];
    TailRule tail;
    if (cfg.tail_tol > 0.0) {
        tail.kind = Tail::Discount;
        tail.tol = cfg.tail_tol;
    }
    Engine engine(dynamics_of(model), sorted, r, default_horizon(model, r, cfg), tail, false, cfg);
    const std::size_t n = sorted.size();
    auto fill = [&](const Outcome& o, double* y, unsigned char* tr) {
        for (std::size_t i = 0; i < n; ++i) {
            if (o.hit[i]) {
                y[2 * i] = std::exp(-r * o.tau[i]);
                y[2 * i + 1] = std::exp(-r * o.tau[i] + o.x[i]);
                tr[2 * i] = tr[2 * i + 1] = 0;
            } else {
                y[2 * i] = y[2 * i + 1] = 0.0;
                tr[2 * i] = tr[2 * i + 1] = 1;
            }
        }
    };
    Moments m = run_paths(engine, cfg, 2 * n, fill);
    std::vector<HitEstimate> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& h = out[order[i]];
        h.level = sorted[i];
        h.L = m.estimate(2 * i, cfg.seed);
        h.G = m.estimate(2 * i + 1, cfg.seed);
    }
    return out;
}

HitEstimate simulate_hit(const LevyModel& model, double r, double x_level, const SimConfig& cfg) {
    return simulate_hit(model, r, std::vector<double>{x_level}, cfg).front();
}

std::vector<PolicyEstimate> policy_values(const ProblemSpec& spec, double b, const std::vector<double>& vs,
                                          const SimConfig& cfg) {
    std::vector<double> bs(vs.size(), b);
    auto run = run_policy(spec, bs, vs, cfg);
    std::vector<PolicyEstimate> out(vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i) out[run.order[i]] = policy_from(run.m, i, b, vs[run.order[i]], cfg.seed);
    return out;
}

PolicyEstimate policy_value(const ProblemSpec& spec, double b, const SimConfig& cfg) {
    return policy_values(spec, b, {spec.v()}, cfg).front();
}

SweepResult sweep(const ProblemSpec& spec, const std::vector<double>& b_grid, const SimConfig& cfg) {
    if (b_grid.empty()) throw InputError("sweep needs at least one b");
    for (std::size_t i = 1; i < b_grid.size(); ++i)
        if (!(b_grid[i] > b_grid[i - 1])) throw InputError("sweep grid must be strictly ascending");
    std::vector<double> vs(b_grid.size(), spec.v());
    auto run = run_policy(spec, b_grid, vs, cfg);
    const std::size_t n = b_grid.size();
    std::vector<std::size_t> slot(n);  // slot[j] = engine slot of grid point j
    for (std::size_t i = 0; i < n; ++i) slot[run.order[i]] = i;

    SweepResult res;
    res.points.resize(n);
    for (std::size_t j = 0; j < n; ++j) res.points[j] = policy_from(run.m, slot[j], b_grid[j], spec.v(), cfg.seed);
    res.argmax = 0;
    for (std::size_t j = 1; j < n; ++j)
        if (res.points[j].reduced.mean > res.points[res.argmax].reduced.mean) res.argmax = j;
    res.paired_se.resize(n);
    res.flat.resize(n);
    res.flat_lo = kInf;
    res.flat_hi = -kInf;
    const double best = res.points[res.argmax].reduced.mean;
    for (std::size_t j = 0; j < n; ++j) {
        res.paired_se[j] = run.m.diff_se(2 * slot[j] + 1, 2 * slot[res.argmax] + 1);
        res.flat[j] = best - res.points[j].reduced.mean <= res.paired_se[j];
        if (res.flat[j]) {
            res.flat_lo = std::min(res.flat_lo, b_grid[j]);
            res.flat_hi = std::max(res.flat_hi, b_grid[j]);
        }
    }
    return res;
}

EpsilonRun epsilon_stop_paths(const ValueFunction& vf, const std::vector<double>& eps_desc, const SimConfig& cfg) {
    validate(cfg);
    for (std::size_t i = 1; i < eps_desc.size(); ++i)
        if (!(eps_desc[i] <= eps_desc[i - 1])) throw InputError("eps list must be descending");
    const auto& spec = vf.spec();
    EpsilonRun run;
    run.eps = eps_desc;
    std::vector<double> levels;
    for (double e : eps_desc) {
        auto bd = epsilon_region(vf, e);
        run.boundary.push_back(bd);
        levels.push_back(bd.unbounded ? kInf : std::log(bd.level / spec.v()));
    }
    levels.push_back(std::log(vf.threshold().b_c / spec.v()));
    const std::size_t n = levels.size();
    Engine engine(dynamics_of(spec.model()), levels, spec.r(), default_horizon(spec.model(), spec.r(), cfg),
                  TailRule{}, false, cfg);
    const double T = engine.horizon();
    // Slots 0..n-1: tau per level; slot n: 1 if the path broke monotonicity.
    auto fill = [&](const Outcome& o, double* y, unsigned char* tr) {
        unsigned char bad = 0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = o.hit[i] ? o.tau[i] : T;
            tr[i] = o.hit[i] ? 0 : 1;
            if (i > 0 && y[i] < y[i - 1]) bad = 1;
        }
        y[n] = bad;
        tr[n] = 0;
    };
    Moments m = run_paths(engine, cfg, n + 1, fill);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        run.tau.push_back(m.estimate(i, cfg.seed));
        run.diff_se.push_back(m.diff_se(i, n - 1));
    }
    run.tau_bc = m.estimate(n - 1, cfg.seed);
    run.monotonicity_violations = static_cast<std::size_t>(std::llround(m.sum[n]));
    return run;
}

std::vector<LadderEstimate> class_d_diagnostic(const LevyModel& model, double r, const std::vector<double>& n_levels,
                                               const SimConfig& cfg) {
    validate(cfg);
    if (!(r > psi1(model))) throw AssumptionViolation("class-D diagnostic needs r > psi(1)");
    std::vector<double> levels;
    for (double n : n_levels) {
        if (!(n >= 1.0)) throw DomainError("ladder levels need n >= 1");
        levels.push_back(-std::log(n));
    }
    auto order = descending_order(levels);
    std::vector<double> sorted(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) sorted[i] = levels[order[i]];
    // Work with Z = -(X - r t): the up-crossing of X - r t is a down-crossing of Z.
    Dynamics d = negated(dynamics_of(model));
    d.mu += r;
    TailRule tail;
    if (cfg.tail_tol > 0.0) {
        tail.kind = Tail::Reflected;
        tail.tol = cfg.tail_tol;
    }
    Engine engine(d, sorted, 0.0, default_horizon(model, r, cfg), tail, false, cfg);
    const std::size_t n = sorted.size();
    auto fill = [&](const Outcome& o, double* y, unsigned char* tr) {
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = o.hit[i] ? std::exp(-o.x[i]) : 0.0;
            tr[i] = o.hit[i] ? 0 : 1;
        }
    };
    Moments m = run_paths(engine, cfg, n, fill);
    std::vector<LadderEstimate> out(n);
    for (std::size_t i = 0; i < n; ++i) out[order[i]] = {n_levels[order[i]], m.estimate(i, cfg.seed)};
    return out;
}

std::vector<double> simulate_increments(const LevyModel& model, double t, std::size_t n, std::uint64_t seed) {
    if (!(t > 0.0)) throw DomainError("simulate_increments needs t > 0");
    Dynamics d = dynamics_of(model);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(path_seed(seed, i));
        double x = d.mu * t + d.sigma * std::sqrt(t) * rng.n();
        if (d.rate > 0.0) {
            for (double s = rng.e() / d.rate; s <= t; s += rng.e() / d.rate) {
                bool up = d.p_up >= 1.0 ? true : d.p_up <= 0.0 ? false : rng.u() < d.p_up;
                double size = d.unit ? 1.0 : rng.e() / (up ? d.eta_up : d.eta_down);
                x += up ? size : -size;
            }
        }
        out[i] = x;
    }
    return out;
}

}  // namespace levystop
