#include "reflex/numerics.hpp"

#include "reflex/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

namespace reflex {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::domain: return "domain";
        case ErrorKind::precondition: return "precondition";
        case ErrorKind::bracket: return "bracket";
        case ErrorKind::convergence: return "convergence";
        case ErrorKind::divergence: return "divergence";
        case ErrorKind::singular: return "singular";
        case ErrorKind::localization: return "localization";
        case ErrorKind::unsupported: return "unsupported";
        case ErrorKind::configuration: return "configuration";
    }
    return "unknown";
}

void NumericTolerances::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || max_iter < 1) {
        throw DomainError("tolerances require rel_tol > 0, abs_tol > 0 and max_iter >= 1");
    }
}

namespace {

std::string fmt_interval(double lo, double hi) {
    std::ostringstream os;
    os.precision(17);
    os << '[' << lo << ", " << hi << ']';
    return os.str();
}

}  // namespace

double find_root_bracketed(const ScalarFunction& f, double lo, double hi,
                           const NumericTolerances& tol) {
    tol.validate();
    if (!(lo <= hi)) throw DomainError("find_root_bracketed: empty bracket " + fmt_interval(lo, hi));
    const double flo = f(lo);
    const double fhi = f(hi);
    if (!std::isfinite(flo) || !std::isfinite(fhi)) {
        throw DomainError("find_root_bracketed: non-finite value at bracket end " + fmt_interval(lo, hi));
    }
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) {
        throw BracketError("find_root_bracketed: no sign change on " + fmt_interval(lo, hi));
    }

    auto narrow_enough = [&](double x1, double x2) {
        const double scale = std::min(std::abs(x1), std::abs(x2));
        return std::abs(x2 - x1) <= tol.rel_tol * scale + tol.abs_tol;
    };
    std::uintmax_t iters = static_cast<std::uintmax_t>(tol.max_iter);
    const auto [l, r] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, narrow_enough, iters);

    const double fl = f(l);
    const double fr = f(r);
    const double best = std::abs(fl) <= std::abs(fr) ? l : r;
    const double fbest = std::min(std::abs(fl), std::abs(fr));
    if (fbest > tol.abs_tol && !narrow_enough(l, r)) {
        throw ConvergenceError("find_root_bracketed: no convergence within max_iter on " + fmt_interval(lo, hi), best);
    }
    return std::clamp(best, lo, hi);
}

namespace {

struct Panel {
    double lo;
    double hi;
    double estimate;
    double error;
};

struct ByError {
    bool operator()(const Panel& x, const Panel& y) const { return x.error < y.error; }
};

Panel evaluate_panel(const ScalarFunction& f, double lo, double hi) {
    // Boost's own single-panel error figure is not usable here, so the panel
    // is summed from its tabulated 15-point Kronrod / 7-point Gauss rule.
    using kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
    using gauss = boost::math::quadrature::gauss<double, 7>;
    const auto& x = kronrod::abscissa();
    const auto& wk = kronrod::weights();
    const auto& wg = gauss::weights();
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    const double f0 = f(c);
    double k = wk[0] * f0;
    double g = wg[0] * f0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double pair = f(c - h * x[i]) + f(c + h * x[i]);
        k += wk[i] * pair;
        if (i % 2 == 0) g += wg[i / 2] * pair;
    }
    const double est = h * k;
    const double err = std::abs(h * (k - g));
    if (!std::isfinite(est)) {
        throw DomainError("integrate_adaptive: integrand not finite on " + fmt_interval(lo, hi));
    }
    return {lo, hi, est, err};
}

}  // namespace

double integrate_adaptive(const ScalarFunction& f, double lo, double hi, const NumericTolerances& tol) {
    tol.validate();
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw DomainError("integrate_adaptive: bounds must be finite");
    }
    if (lo > hi) throw DomainError("integrate_adaptive: lo > hi");
    if (lo == hi) return 0.0;

    std::priority_queue<Panel, std::vector<Panel>, ByError> queue;
    std::vector<Panel> frozen;  // too narrow to split

    Panel first = evaluate_panel(f, lo, hi);
    double total = first.estimate;
    double total_err = first.error;
    queue.push(first);

    int subdivisions = 0;
    while (total_err > tol.rel_tol * std::abs(total) + tol.abs_tol) {
        if (queue.empty() || subdivisions >= tol.max_iter) {
            throw ConvergenceError("integrate_adaptive: subdivision limit reached on " + fmt_interval(lo, hi),
                                   total, total_err);
        }
        Panel worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        const double scale = std::max(std::abs(worst.lo), std::abs(worst.hi));
        if (worst.hi - worst.lo <= 1e-13 * scale || !(worst.lo < mid && mid < worst.hi)) {
            frozen.push_back(worst);
            continue;
        }
        const Panel left = evaluate_panel(f, worst.lo, mid);
        const Panel right = evaluate_panel(f, mid, worst.hi);
        total += left.estimate + right.estimate - worst.estimate;
        total_err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++subdivisions;
    }

    // Re-sum to shed the drift of the running updates.
    double sum = 0.0;
    for (const auto& p : frozen) sum += p.estimate;
    while (!queue.empty()) {
        sum += queue.top().estimate;
        queue.pop();
    }
    return sum;
}

double integrate_semi_infinite(const ScalarFunction& f, double lo, const NumericTolerances& tol) {
    tol.validate();
    if (!std::isfinite(lo)) throw DomainError("integrate_semi_infinite: lower bound must be finite");

    thread_local boost::math::quadrature::exp_sinh<double> rule;
    double err = 0.0;
    double l1 = 0.0;
    double result = 0.0;
    try {
        result = rule.integrate([&](double y) { return f(y); }, lo, std::numeric_limits<double>::infinity(),
                                tol.rel_tol, &err, &l1);
    } catch (const std::exception& e) {
        throw DivergenceError(std::string("integrate_semi_infinite: refinement failed: ") + e.what());
    }
    if (!std::isfinite(result) || err > tol.rel_tol * l1 + tol.abs_tol) {
        std::ostringstream os;
        os << "integrate_semi_infinite: estimate does not settle under refinement (estimate " << result
           << ", error " << err << "); integrand tail is likely not integrable";
        throw DivergenceError(os.str());
    }
    return result;
}

LinearSolveResult solve_linear_dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs, double min_rcond) {
    if (a.rows() != a.cols()) throw DomainError("solve_linear_dense: matrix is not square");
    if (a.rows() != rhs.size()) throw DomainError("solve_linear_dense: size mismatch between matrix and rhs");
    if (!a.allFinite() || !rhs.allFinite()) throw DomainError("solve_linear_dense: non-finite input");

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    // Eigen's estimator reports 1 for an exactly zero pivot; small systems get the exact 1-norm value.
    double rcond = 0.0;
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() > 0.0) {
        if (a.rows() <= 16) {
            const double inv_norm = lu.inverse().cwiseAbs().colwise().sum().maxCoeff();
            const double a_norm = a.cwiseAbs().colwise().sum().maxCoeff();
            rcond = std::isfinite(inv_norm) && a_norm > 0.0 ? 1.0 / (a_norm * inv_norm) : 0.0;
        } else {
            rcond = lu.rcond();
        }
    }
    if (!(rcond >= min_rcond)) {
        std::ostringstream os;
        os << "solve_linear_dense: matrix numerically singular (condition estimate " << 1.0 / rcond << ")";
        throw SingularMatrixError(os.str(), rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
    }
    return {lu.solve(rhs), rcond};
}

ScalarMinimum minimize_scalar(const ScalarFunction& f, double lo, double hi, const NumericTolerances& tol) {
    tol.validate();
    if (!(lo <= hi)) throw DomainError("minimize_scalar: empty interval " + fmt_interval(lo, hi));
    ScalarMinimum best{lo, f(lo)};
    if (lo == hi) return best;

    const int max_bits = std::numeric_limits<double>::digits / 2;
    const int bits = std::clamp(static_cast<int>(std::ceil(-std::log2(tol.rel_tol))), 8, max_bits);
    std::uintmax_t iters = static_cast<std::uintmax_t>(tol.max_iter);
    const auto [x, fx] = boost::math::tools::brent_find_minima(f, lo, hi, bits, iters);
    if (iters >= static_cast<std::uintmax_t>(tol.max_iter)) {
        throw ConvergenceError("minimize_scalar: no convergence within max_iter on " + fmt_interval(lo, hi), x);
    }
    if (fx < best.value) best = {x, fx};
    const double fhi = f(hi);
    if (fhi < best.value) best = {hi, fhi};
    return best;
}

ScalarMinimum minimize_scalar_scanned(const ScalarFunction& f, double lo, double hi, int n, bool log_spaced,
                                      const NumericTolerances& tol) {
    if (!(lo <= hi)) throw DomainError("minimize_scalar_scanned: empty interval " + fmt_interval(lo, hi));
    if (n < 3) n = 3;
    const bool use_log = log_spaced && lo > 0.0;
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        grid[static_cast<std::size_t>(i)] = use_log ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
    }
    grid.back() = hi;

    std::size_t ibest = 0;
    double vbest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = f(grid[i]);
        if (v < vbest) {
            vbest = v;
            ibest = i;
        }
    }
    const double cell_lo = grid[ibest == 0 ? 0 : ibest - 1];
    const double cell_hi = grid[std::min(ibest + 1, grid.size() - 1)];
    const ScalarMinimum local = minimize_scalar(f, cell_lo, cell_hi, tol);
    if (local.value <= vbest) return local;
    return {grid[ibest], vbest};
}

namespace {

struct Gradient {
    double da;
    double db;
};

Gradient central_gradient(const BivariateFunction& f, double a, double b, double scale) {
    const double ha = scale * (1.0 + std::abs(a));
    const double hb = scale * (1.0 + std::abs(b));
    return {(f(a + ha, b) - f(a - ha, b)) / (2.0 * ha), (f(a, b + hb) - f(a, b - hb)) / (2.0 * hb)};
}

}  // namespace

SaddleResult saddle_search(const BivariateFunction& f, Interval a_range, Interval b_range, const SaddleOptions& opts) {
    opts.tol.validate();
    if (!(a_range.lo < a_range.hi) || !(b_range.lo < b_range.hi)) {
        throw DomainError("saddle_search: search ranges must have positive width");
    }

    auto inner = [&](double a) {
        return minimize_scalar_scanned([&](double b) { return f(a, b); }, b_range.lo, b_range.hi,
                                       opts.scan_points, false, opts.tol);
    };
    const ScalarMinimum outer = minimize_scalar_scanned([&](double a) { return -inner(a).value; }, a_range.lo,
                                                        a_range.hi, opts.scan_points, false, opts.tol);
    double a = outer.argmin;
    double b = inner(a).argmin;

    const double edge_a = 1e-7 * (1.0 + a_range.width());
    const double edge_b = 1e-7 * (1.0 + b_range.width());
    auto on_edge = [&](double x, Interval r, double edge) { return x - r.lo <= edge || r.hi - x <= edge; };

    SaddleResult result;
    result.interior = !on_edge(a, a_range, edge_a) && !on_edge(b, b_range, edge_b);

    // Newton polish of grad f = 0. Only meaningful away from the boundary.
    Gradient g = central_gradient(f, a, b, opts.fd_scale);
    if (result.interior) {
        const double h = 1e-4;
        for (int it = 0; it < opts.tol.max_iter; ++it) {
            const double gnorm = std::max(std::abs(g.da), std::abs(g.db));
            if (gnorm <= 1e-3 * opts.tol_grad) break;
            const double ha = h * (1.0 + std::abs(a));
            const double hb = h * (1.0 + std::abs(b));
            const double f0 = f(a, b);
            const double faa = (f(a + ha, b) - 2.0 * f0 + f(a - ha, b)) / (ha * ha);
            const double fbb = (f(a, b + hb) - 2.0 * f0 + f(a, b - hb)) / (hb * hb);
            const double fab =
                (f(a + ha, b + hb) - f(a + ha, b - hb) - f(a - ha, b + hb) + f(a - ha, b - hb)) / (4.0 * ha * hb);
            const double det = faa * fbb - fab * fab;
            if (!std::isfinite(det) || det == 0.0) break;
            double step_a = -(fbb * g.da - fab * g.db) / det;
            double step_b = -(-fab * g.da + faa * g.db) / det;

            bool accepted = false;
            for (int damp = 0; damp < 30; ++damp) {
                const double na = std::clamp(a + step_a, a_range.lo, a_range.hi);
                const double nb = std::clamp(b + step_b, b_range.lo, b_range.hi);
                const Gradient ng = central_gradient(f, na, nb, opts.fd_scale);
                if (std::max(std::abs(ng.da), std::abs(ng.db)) < gnorm) {
                    a = na;
                    b = nb;
                    g = ng;
                    accepted = true;
                    break;
                }
                step_a *= 0.5;
                step_b *= 0.5;
            }
            ++result.newton_steps;
            if (!accepted) break;
        }
        result.interior = !on_edge(a, a_range, edge_a) && !on_edge(b, b_range, edge_b);
    }

    result.a = a;
    result.b = b;
    result.value = f(a, b);
    result.grad_a = g.da;
    result.grad_b = g.db;
    return result;
}

}  // namespace reflex
