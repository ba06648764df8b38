#include "reflex/simulator.hpp"

#include "reflex/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace reflex {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

// Neumaier compensated running sum.
class Accumulator {
public:
    Accumulator() = default;
    explicit Accumulator(double start) : sum_(start) {}
    void add(double x) {
        const double t = sum_ + x;
        comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

void require_barriers(double a, double b, const char* where) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
        std::ostringstream os;
        os << where << ": need finite a < b, got a = " << a << ", b = " << b;
        throw DomainError(os.str());
    }
}

void require_truncation(const SimConfig& cfg, double eps, const char* where) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError(std::string(where) + ": eps must be positive");
    if (std::exp(-eps * cfg.horizon) > cfg.truncation_tol) {
        std::ostringstream os;
        os << where << ": horizon " << cfg.horizon << " leaves a discount factor " << std::exp(-eps * cfg.horizon)
           << " above truncation_tol " << cfg.truncation_tol << "; need horizon >= " << -std::log(cfg.truncation_tol) / eps;
        throw ConfigError(os.str());
    }
}

// Chambers-Mallows-Stuck draws of the stable increment over a fixed dt.
class StableSampler {
public:
    StableSampler(const StableFiniteMean& m, double dt)
        : alpha_(m.index()), inv_alpha_(1.0 / alpha_), tail_pow_((1.0 - alpha_) / alpha_) {
        const double t = m.skewness() * std::tan(kPi * alpha_ / 2.0);
        shift_ = std::atan(t) / alpha_;
        scale_ = stable_increment_scale(m) * std::pow(dt, inv_alpha_) * std::pow(1.0 + t * t, 1.0 / (2.0 * alpha_));
    }

    double operator()(RngStream& rng) const {
        const double v = kPi * (rng.uniform() - 0.5);
        const double w = rng.exponential(1.0);
        const double arg = alpha_ * (v + shift_);
        return scale_ * std::sin(arg) / std::pow(std::cos(v), inv_alpha_) *
               std::pow(std::cos(v - arg) / w, tail_pow_);
    }

private:
    double alpha_;
    double inv_alpha_;
    double tail_pow_;
    double shift_ = 0.0;
    double scale_ = 0.0;
};

double compound_poisson_increment(const CompoundPoissonTwoExp& m, double dt, RngStream& rng) {
    double x = 0.0;
    for (auto n = rng.poisson(m.intensity_up() * dt); n > 0; --n) x += rng.exponential(m.size_rate_up());
    for (auto n = rng.poisson(m.intensity_down() * dt); n > 0; --n) x -= rng.exponential(m.size_rate_down());
    return x;
}

// Free jump-diffusion increments over consecutive steps. Jump times are drawn
// as exponential gaps, which has the same law as per-step Poisson counts.
class JumpDiffusionStepper {
public:
    JumpDiffusionStepper(const JumpDiffusionTwoExp& m, RngStream& rng)
        : m_(m.jumps()), nu_(m.volatility()), rng_(rng), total_(m_.total_intensity()),
          next_(rng.exponential(total_)) {}

    double increment(double t0, double t1) {
        double x = nu_ * std::sqrt(t1 - t0) * rng_.normal();
        while (next_ <= t1) {
            x += rng_.uniform() * total_ < m_.intensity_up() ? rng_.exponential(m_.size_rate_up())
                                                             : -rng_.exponential(m_.size_rate_down());
            next_ += rng_.exponential(total_);
        }
        return x;
    }

private:
    const CompoundPoissonTwoExp& m_;
    double nu_;
    RngStream& rng_;
    double total_;
    double next_;
};

// Drives a reflected path, reporting to the visitor:
//   start(x, u0, d0)       state after the initial push
//   hold(t0, t1, x)        state x on [t0, t1)
//   move(t, dx, du, dd, x) free increment dx at t, then pushes, giving x
template <class Visitor>
void drive_reflected(const LevyModel& model, double a, double b, const SimConfig& cfg, RngStream& rng, Visitor& v) {
    double x = std::clamp(cfg.x0, a, b);
    v.start(x, std::max(a - cfg.x0, 0.0), std::max(cfg.x0 - b, 0.0));
    const double horizon = cfg.horizon;
    const auto settle = [&](double t, double dx) {
        double y = x + dx;
        double du = 0.0, dd = 0.0;
        if (y > b) {
            dd = y - b;
            y = b;
        } else if (y < a) {
            du = a - y;
            y = a;
        }
        x = y;
        v.move(t, dx, du, dd, x);
    };

    if (const auto* cp = std::get_if<CompoundPoissonTwoExp>(&model)) {
        const double total = cp->total_intensity();
        const double p_up = cp->intensity_up() / total;
        double t = 0.0;
        for (;;) {
            const double next = t + rng.exponential(total);
            if (next >= horizon) {
                v.hold(t, horizon, x);
                return;
            }
            v.hold(t, next, x);
            const double dx = rng.uniform() < p_up ? rng.exponential(cp->size_rate_up())
                                                   : -rng.exponential(cp->size_rate_down());
            settle(next, dx);
            t = next;
        }
    }

    const double dt = cfg.time_step;
    const auto steps = static_cast<long long>(std::ceil(horizon / dt - 1e-9));
    const auto run = [&](auto&& increment) {
        double t = 0.0;
        for (long long k = 1; k <= steps; ++k) {
            const double t1 = k == steps ? horizon : static_cast<double>(k) * dt;
            v.hold(t, t1, x);
            settle(t1, increment(t, t1, k == steps ? t1 - t : dt));
            t = t1;
        }
    };
    if (const auto* m = std::get_if<JumpDiffusionTwoExp>(&model)) {
        JumpDiffusionStepper jd(*m, rng);
        run([&](double t0, double t1, double) { return jd.increment(t0, t1); });
    } else {
        const auto& st = std::get<StableFiniteMean>(model);
        const StableSampler full(st, dt);
        run([&](double, double, double len) { return len == dt ? full(rng) : StableSampler(st, len)(rng); });
    }
}

struct Recorder {
    PathRecord& rec;
    Accumulator u, d, w;

    void start(double x, double u0, double d0) {
        u = Accumulator(u0);
        d = Accumulator(d0);
        push(0.0, x);
    }
    void hold(double, double, double) {}
    void move(double t, double dx, double du, double dd, double x) {
        w.add(dx);
        u.add(du);
        d.add(dd);
        push(t, x);
    }
    void push(double t, double x) {
        rec.times.push_back(t);
        rec.states.push_back(x);
        rec.u_cum.push_back(u.value());
        rec.d_cum.push_back(d.value());
        rec.free_cum.push_back(w.value());
    }
};

struct ErgodicTally {
    const CostSpec& cost;
    double q_u, q_d, burn_in;
    Accumulator running, pushes;

    void start(double, double, double) {}
    void hold(double t0, double t1, double x) {
        const double lo = std::max(t0, burn_in);
        if (t1 > lo) running.add(cost(x) * (t1 - lo));
    }
    void move(double t, double, double du, double dd, double) {
        if (t >= burn_in) pushes.add(q_u * du + q_d * dd);
    }
};

struct DiscountedTally {
    const CostSpec& cost;
    double q_u, q_d, eps;
    Accumulator total;
    double pushed = 0.0;

    void start(double, double u0, double d0) { total.add(q_u * u0 + q_d * d0); }
    void hold(double t0, double t1, double x) {
        total.add(cost(x) * (std::exp(-eps * t0) - std::exp(-eps * t1)) / eps);
    }
    void move(double t, double, double du, double dd, double) {
        total.add(std::exp(-eps * t) * (q_u * du + q_d * dd));
        pushed += du + dd;
    }
};

struct OccupationTally {
    double a, b, burn_in;
    bool separate;
    std::vector<double> bins;
    double at_low = 0.0, at_high = 0.0;

    void start(double, double, double) {}
    void hold(double t0, double t1, double x) {
        const double lo = std::max(t0, burn_in);
        if (!(t1 > lo)) return;
        const double span = t1 - lo;
        if (separate && x == a) {
            at_low += span;
        } else if (separate && x == b) {
            at_high += span;
        } else {
            const auto n = static_cast<double>(bins.size());
            const auto k = static_cast<std::size_t>(std::clamp(std::floor((x - a) / (b - a) * n), 0.0, n - 1.0));
            bins[k] += span;
        }
    }
    void move(double, double, double, double, double) {}
};

double cost_bound(const CostSpec& cost, double a, double b) {
    // every built-in cost is even and nondecreasing in |x|
    return std::max(std::abs(cost(a)), std::abs(cost(b)));
}

}  // namespace

// ---------------------------------------------------------------------------

void SimConfig::validate() const {
    const auto fail = [](const std::string& what) { throw ConfigError("sim." + what); };
    if (n_paths < 1) fail("n_paths must be a positive integer");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) fail("horizon must be positive and finite");
    if (!(time_step > 0.0) || !(time_step <= horizon)) fail("time_step must satisfy 0 < time_step <= horizon");
    if (!(burn_in >= 0.0) || !(burn_in < horizon)) fail("burn_in must satisfy 0 <= burn_in < horizon");
    if (!std::isfinite(x0)) fail("x0 must be finite");
    if (!(truncation_tol > 0.0) || !(truncation_tol < 1.0)) fail("truncation_tol must lie in (0, 1)");
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    engine_.seed(seq);
}

double RngStream::uniform() {
    // midpoints of the 2^53 dyadic cells, so never 0 or 1
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
}

double RngStream::exponential(double rate) { return boost::random::exponential_distribution<double>(rate)(engine_); }

double RngStream::normal() { return boost::random::normal_distribution<double>()(engine_); }

std::uint64_t RngStream::poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    return boost::random::poisson_distribution<std::uint64_t, double>(mean)(engine_);
}

double stable_increment_scale(const StableFiniteMean& model) {
    const double al = model.index();
    return std::pow(-(model.c_plus() + model.c_minus()) * std::tgamma(-al) * std::cos(kPi * al / 2.0), 1.0 / al);
}

double sample_increment(const LevyModel& model, double dt, RngStream& stream) {
    if (!(dt > 0.0)) throw DomainError("sample_increment: dt must be positive");
    if (const auto* cp = std::get_if<CompoundPoissonTwoExp>(&model)) return compound_poisson_increment(*cp, dt, stream);
    if (const auto* jd = std::get_if<JumpDiffusionTwoExp>(&model)) {
        return jd->volatility() * std::sqrt(dt) * stream.normal() + compound_poisson_increment(jd->jumps(), dt, stream);
    }
    return StableSampler(std::get<StableFiniteMean>(model), dt)(stream);
}

SkorokhodCheck check_skorokhod(const PathRecord& p) {
    SkorokhodCheck c;
    const std::size_t n = p.states.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double x = p.states[k];
        if (!(p.lower <= x && x <= p.upper)) c.contained = false;
        const long double rebuilt = static_cast<long double>(p.x0) + p.free_cum[k] + p.u_cum[k] - p.d_cum[k];
        c.identity_error = std::max(c.identity_error, static_cast<double>(std::abs(rebuilt - x)));
        if (k == 0) {
            if (p.u_cum[0] != std::max(p.lower - p.x0, 0.0) || p.d_cum[0] != std::max(p.x0 - p.upper, 0.0)) {
                c.monotone = false;
            }
            if (p.u_cum[0] > 0.0 && std::abs(x - p.lower) > 1e-12) c.complementary = false;
            if (p.d_cum[0] > 0.0 && std::abs(x - p.upper) > 1e-12) c.complementary = false;
            continue;
        }
        if (p.u_cum[k] < p.u_cum[k - 1] || p.d_cum[k] < p.d_cum[k - 1] || p.times[k] < p.times[k - 1]) {
            c.monotone = false;
        }
        if (p.u_cum[k] > p.u_cum[k - 1] && std::abs(x - p.lower) > 1e-12) c.complementary = false;
        if (p.d_cum[k] > p.d_cum[k - 1] && std::abs(x - p.upper) > 1e-12) c.complementary = false;
    }
    return c;
}

PathRecord simulate_reflected(const LevyModel& model, double a, double b, const SimConfig& cfg, RngStream& stream) {
    require_barriers(a, b, "simulate_reflected");
    cfg.validate();
    PathRecord rec;
    rec.lower = a;
    rec.upper = b;
    rec.x0 = cfg.x0;
    Recorder r{rec, {}, {}, {}};
    drive_reflected(model, a, b, cfg, stream, r);
    return rec;
}

// ---------------------------------------------------------------------------

SimEstimate summarize(const std::vector<double>& values, std::uint64_t master_seed) {
    SimEstimate e;
    e.n = static_cast<int>(values.size());
    e.master_seed = master_seed;
    if (values.empty()) return e;
    Accumulator s;
    for (double v : values) s.add(v);
    e.mean = s.value() / e.n;
    if (e.n > 1) {
        Accumulator ss;
        for (double v : values) ss.add((v - e.mean) * (v - e.mean));
        e.std_error = std::sqrt(ss.value() / (e.n - 1) / e.n);
    }
    return e;
}

std::vector<double> run_replications(int n, int jobs, const std::function<double(int)>& fn) {
    std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)));
    if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::min(jobs, std::max(n, 1));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += jobs) out[static_cast<std::size_t>(i)] = fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

SimEstimate estimate_ergodic_cost(const LevyModel& model, const CostSpec& cost, const Quotes& quotes, double a,
                                  double b, const SimConfig& cfg, int jobs) {
    require_barriers(a, b, "estimate_ergodic_cost");
    cfg.validate();
    const double window = cfg.horizon - cfg.burn_in;
    const auto values = run_replications(cfg.n_paths, jobs, [&](int i) {
        RngStream rng(cfg.master_seed, static_cast<std::uint64_t>(i));
        ErgodicTally tally{cost, quotes.lower(), quotes.upper(), cfg.burn_in, {}, {}};
        drive_reflected(model, a, b, cfg, rng, tally);
        return (tally.running.value() + tally.pushes.value()) / window;
    });
    return summarize(values, cfg.master_seed);
}

SimEstimate estimate_discounted_cost(const LevyModel& model, const CostSpec& cost, const Quotes& quotes, double eps,
                                     double a, double b, const SimConfig& cfg, int jobs) {
    require_barriers(a, b, "estimate_discounted_cost");
    cfg.validate();
    require_truncation(cfg, eps, "estimate_discounted_cost");
    std::vector<double> push_rate(static_cast<std::size_t>(cfg.n_paths));
    const auto values = run_replications(cfg.n_paths, jobs, [&](int i) {
        RngStream rng(cfg.master_seed, static_cast<std::uint64_t>(i));
        DiscountedTally tally{cost, quotes.lower(), quotes.upper(), eps, {}};
        drive_reflected(model, a, b, cfg, rng, tally);
        push_rate[static_cast<std::size_t>(i)] = tally.pushed / cfg.horizon;
        return tally.total.value();
    });
    auto e = summarize(values, cfg.master_seed);
    const double rate = summarize(push_rate, cfg.master_seed).mean;
    const double tail = std::exp(-eps * cfg.horizon);
    e.diagnostics["truncation_bound"] = tail * (cost_bound(cost, a, b) + quotes.total() * rate) / eps;
    e.diagnostics["discount_at_horizon"] = tail;
    e.diagnostics["observed_push_rate"] = rate;
    return e;
}

SimEstimate estimate_dynkin_payoff(const JumpDiffusionTwoExp& model, double eps, const Quotes& quotes, double a,
                                   double b, double x0, const SimConfig& cfg, int jobs) {
    if (!(a < x0 && x0 < b)) {
        std::ostringstream os;
        os << "estimate_dynkin_payoff: need a < x0 < b, got " << a << ", " << x0 << ", " << b;
        throw DomainError(os.str());
    }
    cfg.validate();
    require_truncation(cfg, eps, "estimate_dynkin_payoff");
    std::vector<double> exit_time(static_cast<std::size_t>(cfg.n_paths));
    const auto values = run_replications(cfg.n_paths, jobs, [&](int i) {
        RngStream rng(cfg.master_seed, static_cast<std::uint64_t>(i));
        const double dt = cfg.time_step;
        const auto steps = static_cast<long long>(std::ceil(cfg.horizon / dt - 1e-9));
        JumpDiffusionStepper stepper(model, rng);
        Accumulator running;
        double x = x0, t = 0.0, disc = 1.0;
        for (long long k = 1; k <= steps; ++k) {
            const double t1 = k == steps ? cfg.horizon : static_cast<double>(k) * dt;
            const double disc1 = std::exp(-eps * t1);
            running.add(x * (disc - disc1) / eps);
            x += stepper.increment(t, t1);
            t = t1;
            disc = disc1;
            if (x <= a) {
                exit_time[static_cast<std::size_t>(i)] = t;
                return running.value() - quotes.lower() * disc;
            }
            if (x >= b) {
                exit_time[static_cast<std::size_t>(i)] = t;
                return running.value() + quotes.upper() * disc;
            }
        }
        exit_time[static_cast<std::size_t>(i)] = cfg.horizon;
        return running.value();
    });
    auto e = summarize(values, cfg.master_seed);
    e.diagnostics["mean_exit_time"] = summarize(exit_time, cfg.master_seed).mean;
    e.diagnostics["time_step"] = cfg.time_step;
    // unexited paths lose at most this much
    e.diagnostics["truncation_bound"] =
        std::exp(-eps * cfg.horizon) * (std::max(std::abs(a), std::abs(b)) / eps + quotes.lower() + quotes.upper());
    return e;
}

// ---------------------------------------------------------------------------

OccupationHistogram occupation_histogram(const LevyModel& model, double a, double b, const SimConfig& cfg, int n_bins,
                                         int jobs) {
    require_barriers(a, b, "occupation_histogram");
    cfg.validate();
    if (n_bins < 1) throw DomainError("occupation_histogram: n_bins must be positive");
    const bool separate = has_bounded_variation(model);
    const int cats = n_bins + (separate ? 2 : 0);
    const double window = cfg.horizon - cfg.burn_in;

    OccupationHistogram h;
    h.lower = a;
    h.upper = b;
    h.separate_atoms = separate;
    h.per_path.resize(cfg.n_paths, cats);
    run_replications(cfg.n_paths, jobs, [&](int i) {
        RngStream rng(cfg.master_seed, static_cast<std::uint64_t>(i));
        OccupationTally tally{a, b, cfg.burn_in, separate, std::vector<double>(static_cast<std::size_t>(n_bins)), 0, 0};
        drive_reflected(model, a, b, cfg, rng, tally);
        for (int k = 0; k < n_bins; ++k) h.per_path(i, k) = tally.bins[static_cast<std::size_t>(k)] / window;
        if (separate) {
            h.per_path(i, n_bins) = tally.at_low / window;
            h.per_path(i, n_bins + 1) = tally.at_high / window;
        }
        return 0.0;
    });

    const auto column = [&](int k) {
        std::vector<double> v(static_cast<std::size_t>(cfg.n_paths));
        for (int i = 0; i < cfg.n_paths; ++i) v[static_cast<std::size_t>(i)] = h.per_path(i, k);
        return summarize(v, cfg.master_seed);
    };
    for (int k = 0; k < n_bins; ++k) {
        const auto s = column(k);
        h.fractions.push_back(s.mean);
        h.std_errors.push_back(s.std_error);
    }
    if (separate) {
        const auto lo = column(n_bins), hi = column(n_bins + 1);
        h.atom_low = lo.mean;
        h.atom_low_se = lo.std_error;
        h.atom_high = hi.mean;
        h.atom_high_se = hi.std_error;
    }
    return h;
}

std::vector<double> expected_categories(const StationaryMeasure& pi, int n_bins, bool separate_atoms) {
    const double w = pi.width();
    std::vector<double> out;
    for (int k = 0; k < n_bins; ++k) {
        const double lo = w * k / n_bins;
        const double hi = k + 1 == n_bins ? w : w * (k + 1) / n_bins;
        out.push_back(pi.density_mass(lo, hi));
    }
    if (separate_atoms) {
        out.push_back(pi.atom_low());
        out.push_back(pi.atom_high());
    } else {
        out.front() += pi.atom_low();
        out.back() += pi.atom_high();
    }
    return out;
}

ChiSquareResult occupation_chi_square(const OccupationHistogram& hist, const std::vector<double>& expected,
                                      double level) {
    const auto n = static_cast<int>(hist.per_path.rows());
    const auto cats = static_cast<int>(hist.per_path.cols());
    if (static_cast<int>(expected.size()) != cats) {
        throw DomainError("occupation_chi_square: expected masses do not match the histogram categories");
    }
    ChiSquareResult r;
    std::vector<int> keep;
    for (int k = 0; k + 1 < cats; ++k) {
        const Eigen::VectorXd col = hist.per_path.col(k);
        const double spread = col.maxCoeff() - col.minCoeff();
        if (spread > 0.0) {
            keep.push_back(k);
        } else if (std::abs(col(0) - expected[static_cast<std::size_t>(k)]) > 0.0) {
            r.statistic = std::numeric_limits<double>::infinity();
        }
    }
    const auto p = static_cast<int>(keep.size());
    r.dof = p;
    if (p == 0 || n <= p) {
        r.pass = false;
        return r;
    }
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd diff(p);
    for (int j = 0; j < p; ++j) {
        x.col(j) = hist.per_path.col(keep[static_cast<std::size_t>(j)]);
        diff(j) = x.col(j).mean() - expected[static_cast<std::size_t>(keep[static_cast<std::size_t>(j)])];
    }
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / (n - 1);
    if (std::isfinite(r.statistic)) r.statistic = n * diff.dot(cov.ldlt().solve(diff));
    const boost::math::fisher_f f(p, n - p);
    r.critical = static_cast<double>(p) * (n - 1) / (n - p) * boost::math::quantile(f, level);
    r.pass = r.statistic <= r.critical;
    return r;
}

void write_path_csv(const PathRecord& path, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw ConfigError("cannot open '" + file + "' for writing");
    out << "time,state,u_cum,d_cum\n";
    char line[128];
    for (std::size_t k = 0; k < path.states.size(); ++k) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", path.times[k], path.states[k], path.u_cum[k],
                      path.d_cum[k]);
        out << line;
    }
}

}  // namespace reflex
