#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace trivine {

/// Quadrature rule on the unit interval. Nodes are strictly increasing in
/// (0,1) and the weights sum to one.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Legendre rule with `n_q` points mapped from (-1,1) to (0,1).
/// Exact for polynomials of degree <= 2*n_q - 1. Throws
/// std::invalid_argument for n_q < 2.
QuadratureRule gauss_legendre_01(std::size_t n_q);

/// Gauss-Legendre rule on an arbitrary interval [a,b] (n >= 1).
QuadratureRule gauss_legendre(std::size_t n, double a, double b);

/// Composite Gauss-Legendre rule on (0,1): `per_piece` nodes on each of the
/// pieces [0, 1e-6], [1e-6, 1e-5], ..., [0.1, 0.5] and their mirror images.
/// Suited to integrands with endpoint singularities on the copula scale.
QuadratureRule graded_legendre_01(std::size_t per_piece);

double std_normal_cdf(double x);
double std_normal_pdf(double x);
/// Throws std::domain_error unless 0 < p < 1.
double std_normal_quantile(double p);

/// Regularized incomplete beta I_x(a,b). Throws std::domain_error for
/// a <= 0, b <= 0 or x outside [0,1].
double reg_inc_beta(double a, double b, double x);
/// Inverse of reg_inc_beta in x. If `complement` is non-null it receives
/// 1 - x computed without cancellation.
double reg_inc_beta_inv(double a, double b, double p, double* complement = nullptr);

/// Debye function of order one, (1/x) * int_0^x t/(e^t - 1) dt.
/// debye1(0) returns the limit value 1.
double debye1(double x);

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Central-difference gradient with per-coordinate step h*max(1,|x_i|).
/// Throws std::invalid_argument when a step underflows.
Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double h = 1e-6);

/// Central-difference Hessian, symmetrized as (H + H^T)/2.
Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x, double h = 1e-4);

struct OptimOptions {
    int max_iters = 500;
    double grad_tol = 1e-6;     // infinity norm of the gradient
    double rel_obj_tol = 1e-10; // relative objective change between iterations
    double gradient_step = 1e-6;
    double hessian_step = 1e-4;
    bool compute_hessian = true;
};

struct OptimResult {
    Eigen::VectorXd argmin;
    double objective = 0.0;
    Eigen::MatrixXd hessian;
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
};

/// BFGS with Armijo backtracking and numerically estimated gradients.
/// Non-finite objective values are treated as failed trial points. The
/// returned Hessian is re-estimated by central differences at the optimum.
OptimResult minimize(const Objective& f, const Eigen::VectorXd& x0, const OptimOptions& opts = {});

/// log(sum(exp(values))); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> values);

}  // namespace trivine
