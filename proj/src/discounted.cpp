#include "reflex/discounted.hpp"

#include "reflex/errors.hpp"
#include "reflex/numerics.hpp"

#include <cmath>
#include <sstream>

namespace reflex {

namespace {

constexpr double kMaxBracket = 1e6;

NumericTolerances root_tolerances() { return {1e-15, 1e-14, 400}; }

// Grows |z| from start until f changes sign relative to the pole side.
double expand_outward(const ScalarFunction& f, double start, double direction) {
    double z = start;
    while (!(f(direction * z) > 0.0)) {
        z *= 2.0;
        if (z > kMaxBracket) {
            std::ostringstream os;
            os << "roots_phi_eq_eps: no sign change within |z| <= " << kMaxBracket;
            throw LocalizationError(os.str());
        }
    }
    return direction * z;
}

}  // namespace

QuarticRoots roots_phi_eq_eps(const JumpDiffusionTwoExp& model, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("roots_phi_eq_eps: eps must be positive");
    const double up = model.jumps().size_rate_up();
    const double down = model.jumps().size_rate_down();
    const auto f = [&](double z) { return model.char_exponent(z) - eps; };
    const auto tol = root_tolerances();
    const double off_up = up * 1e-13;
    const double off_down = down * 1e-13;

    QuarticRoots r;
    r.rho1 = find_root_bracketed(f, -down + off_down, 0.0, tol);
    r.rho3 = find_root_bracketed(f, 0.0, up - off_up, tol);
    const double left = expand_outward(f, down + 1.0, -1.0);
    r.rho2 = find_root_bracketed(f, left, -down - off_down, tol);
    const double right = expand_outward(f, up + 1.0, 1.0);
    r.rho4 = find_root_bracketed(f, up + off_up, right, tol);

    if (!(r.rho2 < -down && -down < r.rho1 && r.rho1 < 0.0 && 0.0 < r.rho3 && r.rho3 < up && up < r.rho4)) {
        throw LocalizationError("roots_phi_eq_eps: roots violate the expected ordering");
    }
    return r;
}

Eigen::Matrix4d build_exit_matrix(const JumpDiffusionTwoExp& model, const QuarticRoots& r, double a, double b) {
    if (!(a < b)) {
        std::ostringstream os;
        os << "build_exit_matrix: need a < b, got a = " << a << ", b = " << b;
        throw DomainError(os.str());
    }
    const double a1 = model.jumps().size_rate_up();
    const double a2 = model.jumps().size_rate_down();
    const double g = a - b;
    const double e1 = std::exp(-r.rho1 * g), e2 = std::exp(-r.rho2 * g);
    const double e3 = std::exp(r.rho3 * g), e4 = std::exp(r.rho4 * g);
    Eigen::Matrix4d n;
    n << 1.0, 1.0, e1, e2,
         1.0 / (a1 - r.rho3), 1.0 / (a1 - r.rho4), e1 / (a1 - r.rho1), e2 / (a1 - r.rho2),
         e3, e4, 1.0, 1.0,
         e3 / (a2 + r.rho3), e4 / (a2 + r.rho4), 1.0 / (a2 + r.rho1), 1.0 / (a2 + r.rho2);
    return n;
}

Eigen::Vector4d exit_rhs(const JumpDiffusionTwoExp& model, double eps, const Quotes& quotes, double a, double b) {
    const double a1 = model.jumps().size_rate_up();
    const double a2 = model.jumps().size_rate_down();
    const double m = model.mean() / (eps * eps);
    const double qu = quotes.lower(), qd = quotes.upper();
    Eigen::Vector4d rhs;
    rhs << -m - b / eps + qd,
           -(m + 1.0 / (eps * a1) + b / eps - qd) / a1,
           -m - a / eps - qu,
           -(m - 1.0 / (eps * a2) + a / eps + qu) / a2;
    return rhs;
}

Eigen::RowVector4d exit_weights(const QuarticRoots& r, double a, double b) {
    return {std::exp(-r.rho3 * b), std::exp(-r.rho4 * b), std::exp(-r.rho1 * a), std::exp(-r.rho2 * a)};
}

DynkinPayoff::DynkinPayoff(JumpDiffusionTwoExp model, double eps, Quotes quotes)
    : model_(model), eps_(eps), quotes_(quotes), roots_(roots_phi_eq_eps(model, eps)) {}

double DynkinPayoff::operator()(double a, double b) const {
    if (!(a < 0.0 && b > 0.0)) {
        std::ostringstream os;
        os << "dynkin payoff: need a < 0 < b, got a = " << a << ", b = " << b;
        throw DomainError(os.str());
    }
    const auto n = build_exit_matrix(model_, roots_, a, b);
    const auto solved = solve_linear_dense(n, exit_rhs(model_, eps_, quotes_, a, b), 1e-12);
    return exit_weights(roots_, a, b).dot(solved.x) + model_.mean() / (eps_ * eps_);
}

double DynkinPayoff::rcond(double a, double b) const {
    const auto n = build_exit_matrix(model_, roots_, a, b);
    return solve_linear_dense(n, Eigen::Vector4d::Zero(), 0.0).rcond;
}

double dynkin_payoff_M(const JumpDiffusionTwoExp& model, double eps, const Quotes& quotes, double a, double b) {
    return DynkinPayoff(model, eps, quotes)(a, b);
}

}  // namespace reflex
