#include "trivine/numerics.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace trivine {

namespace {

using fast_policy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Roots of P_n on (-1,1) by Newton iteration from Chebyshev-like guesses.
void legendre_roots(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = z;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk =
                    ((2.0 * static_cast<double>(k) - 1.0) * z * p1 - (static_cast<double>(k) - 1.0) * p0) /
                    static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0;
        double p1 = z;
        for (std::size_t k = 2; k <= n; ++k) {
            const double pk =
                ((2.0 * static_cast<double>(k) - 1.0) * z * p1 - (static_cast<double>(k) - 1.0) * p0) /
                static_cast<double>(k);
            p0 = p1;
            p1 = pk;
        }
        dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
        const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if (n % 2 == 1) {
        x[n / 2] = 0.0;
    }
}

}  // namespace

QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
    if (n < 1) {
        throw std::invalid_argument("gauss_legendre: need at least one node");
    }
    QuadratureRule rule;
    if (n == 1) {
        rule.nodes = {0.5 * (a + b)};
        rule.weights = {b - a};
        return rule;
    }
    std::vector<double> x;
    std::vector<double> w;
    legendre_roots(n, x, w);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rule.nodes[i] = mid + half * x[i];
        rule.weights[i] = half * w[i];
    }
    return rule;
}

QuadratureRule graded_legendre_01(std::size_t per_piece) {
    std::vector<double> cuts{0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 0.5};
    for (std::size_t i = cuts.size() - 2; i >= 1; --i) {
        cuts.push_back(1.0 - cuts[i]);
    }
    cuts.push_back(1.0);
    QuadratureRule out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const QuadratureRule r = gauss_legendre(per_piece, cuts[i], cuts[i + 1]);
        out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
        out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
    }
    return out;
}

QuadratureRule gauss_legendre_01(std::size_t n_q) {
    if (n_q < 2) {
        throw std::invalid_argument("gauss_legendre_01: n_q must be >= 2, got " + std::to_string(n_q));
    }
    QuadratureRule rule = gauss_legendre(n_q, 0.0, 1.0);
    // Renormalize so that the weights sum to one to the last ulp.
    double total = 0.0;
    for (double w : rule.weights) {
        total += w;
    }
    for (double& w : rule.weights) {
        w /= total;
    }
    return rule;
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("std_normal_quantile: p must lie in (0,1), got " + std::to_string(p));
    }
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p, fast_policy());
}

double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("reg_inc_beta: shape parameters must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("reg_inc_beta: x must lie in [0,1]");
    }
    return boost::math::ibeta(a, b, x, fast_policy());
}

double reg_inc_beta_inv(double a, double b, double p, double* complement) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("reg_inc_beta_inv: shape parameters must be positive");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error("reg_inc_beta_inv: p must lie in [0,1]");
    }
    double q = 0.0;
    const double x = boost::math::ibeta_inv(a, b, p, &q, fast_policy());
    if (complement != nullptr) {
        *complement = q;
    }
    return x;
}

double debye1(double x) {
    if (x == 0.0) {
        return 1.0;
    }
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x / 4.0 + x2 / 36.0 - x2 * x2 / 3600.0;
    }
    static const QuadratureRule unit = gauss_legendre(50, 0.0, 1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < unit.size(); ++i) {
        const double t = x * unit.nodes[i];
        sum += unit.weights[i] * t / std::expm1(t);
    }
    // (1/x) * int_0^x g(t) dt = int_0^1 g(x s) ds
    return sum;
}

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double h) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd g(n);
    Eigen::VectorXd xp = x;
    double f0 = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double step = h * std::max(1.0, std::abs(x[i]));
        if (!(step > 0.0) || x[i] + step == x[i]) {
            throw std::invalid_argument("numeric_gradient: step underflow in coordinate " + std::to_string(i));
        }
        xp[i] = x[i] + step;
        const double fp = f(xp);
        xp[i] = x[i] - step;
        const double fm = f(xp);
        xp[i] = x[i];
        if (std::isfinite(fp) && std::isfinite(fm)) {
            g[i] = (fp - fm) / (2.0 * step);
            continue;
        }
        if (std::isnan(f0)) {
            f0 = f(x);
        }
        if (std::isfinite(fp)) {
            g[i] = (fp - f0) / step;
        } else if (std::isfinite(fm)) {
            g[i] = (f0 - fm) / step;
        } else {
            g[i] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return g;
}

Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x, double h) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd steps(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        steps[i] = h * std::max(1.0, std::abs(x[i]));
        if (!(steps[i] > 0.0) || x[i] + steps[i] == x[i]) {
            throw std::invalid_argument("numeric_hessian: step underflow in coordinate " + std::to_string(i));
        }
    }
    const double f0 = f(x);
    Eigen::MatrixXd hess(n, n);
    Eigen::VectorXd xt = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double hi = steps[i];
        xt[i] = x[i] + hi;
        const double fp = f(xt);
        xt[i] = x[i] - hi;
        const double fm = f(xt);
        xt[i] = x[i];
        hess(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
        for (Eigen::Index j = 0; j < i; ++j) {
            const double hj = steps[j];
            auto eval = [&](double si, double sj) {
                xt[i] = x[i] + si * hi;
                xt[j] = x[j] + sj * hj;
                const double v = f(xt);
                xt[i] = x[i];
                xt[j] = x[j];
                return v;
            };
            const double v = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * hi * hj);
            hess(i, j) = v;
            hess(j, i) = v;
        }
    }
    return 0.5 * (hess + hess.transpose());
}

OptimResult minimize(const Objective& f, const Eigen::VectorXd& x0, const OptimOptions& opts) {
    OptimResult res;
    int evals = 0;
    const Objective counted = [&](const Eigen::VectorXd& x) {
        ++evals;
        const double v = f(x);
        return std::isnan(v) ? kInf : v;
    };

    const Eigen::Index n = x0.size();
    Eigen::VectorXd x = x0;
    double fx = counted(x);
    res.argmin = x;
    res.objective = fx;
    if (!std::isfinite(fx)) {
        res.evaluations = evals;
        return res;
    }

    Eigen::VectorXd g = numeric_gradient(counted, x, opts.gradient_step);
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
    bool identity_metric = true;
    bool converged = false;
    int iter = 0;

    constexpr double armijo = 1e-4;
    constexpr double first_step_cap = 1.0;

    for (; iter < opts.max_iters; ++iter) {
        if (!g.allFinite()) {
            break;
        }
        if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
            converged = true;
            break;
        }
        Eigen::VectorXd dir = -hinv * g;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            hinv.setIdentity();
            identity_metric = true;
            dir = -g;
            slope = -g.squaredNorm();
        }
        double step = 1.0;
        if (identity_metric) {
            const double len = dir.lpNorm<Eigen::Infinity>();
            if (len > first_step_cap) {
                step = first_step_cap / len;
            }
        }

        Eigen::VectorXd xt;
        double ft = kInf;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xt = x + step * dir;
            ft = counted(xt);
            if (std::isfinite(ft) && ft <= fx + armijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (!identity_metric) {
                hinv.setIdentity();
                identity_metric = true;
                continue;
            }
            // Stalled along steepest descent: accept as converged only at
            // the numerical noise floor of the gradient.
            converged = g.lpNorm<Eigen::Infinity>() < 1e-3;
            break;
        }

        const Eigen::VectorXd gt = numeric_gradient(counted, xt, opts.gradient_step);
        const Eigen::VectorXd s = xt - x;
        const Eigen::VectorXd y = gt - g;
        const double sy = s.dot(y);
        const double rel_change = std::abs(fx - ft) / (std::abs(fx) + opts.rel_obj_tol);

        x = xt;
        fx = ft;
        g = gt;

        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (identity_metric) {
                hinv *= sy / y.squaredNorm();
            }
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = hinv * y;
            const double yhy = y.dot(hy);
            hinv += ((1.0 + rho * yhy) * rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
            identity_metric = false;
        }

        if (rel_change < opts.rel_obj_tol) {
            converged = true;
            ++iter;
            break;
        }
    }

    res.argmin = x;
    res.objective = fx;
    res.iterations = iter;
    res.converged = converged && std::isfinite(fx);
    if (opts.compute_hessian) {
        res.hessian = numeric_hessian(counted, x, opts.hessian_step);
    }
    res.evaluations = evals;
    return res;
}

double log_sum_exp(std::span<const double> values) {
    double m = -kInf;
    for (double v : values) {
        m = std::max(m, v);
    }
    if (!std::isfinite(m)) {
        return m;
    }
    double s = 0.0;
    for (double v : values) {
        s += std::exp(v - m);
    }
    return m + std::log(s);
}

}  // namespace trivine
