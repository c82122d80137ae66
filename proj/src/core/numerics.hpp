#pragma once

#include <functional>
#include <span>
#include <vector>

namespace reliafit {

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// ln Γ(x) for x > 0. Absolute error below 1e-12 on [0.1, 200].
double ln_gamma(double x);

/// Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.
/// Series expansion for x < a + 1, Lentz continued fraction otherwise.
double reg_inc_gamma_p(double a, double x);

/// Regularized incomplete beta I_x(a, b) for a, b > 0, x in [0, 1].
double reg_inc_beta(double a, double b, double x);

/// Student-t quantile at probability p with dof degrees of freedom,
/// inverted from the incomplete-beta CDF to better than 1e-8.
double student_t_quantile(double p, int dof);

// ---------------------------------------------------------------------------
// Damped nonlinear least squares
// ---------------------------------------------------------------------------

/// Model callback: y = f(params, t).
using NlsModel = std::function<double(std::span<const double>, double)>;

struct NlsProblem {
    NlsModel model;
    std::vector<double> t_values;
    std::vector<double> y_values;
    std::vector<double> initial_params;
    std::vector<double> lower_bounds; // empty = -inf everywhere
    std::vector<double> upper_bounds; // empty = +inf everywhere
    std::vector<bool> fixed_mask;     // empty = all free
};

struct NlsOptions {
    int max_iter = 400;
    double rel_tol = 1e-10;
    double damping_init = 1e-3;
};

struct NlsResult {
    std::vector<double> params;
    double sse = 0.0;
    int dof = 0;
    std::vector<double> covariance; // p_free x p_free, row major
    std::vector<int> free_index;    // covariance row -> parameter index
    int iterations = 0;
    bool converged = false;
    std::vector<double> sse_trace; // SSE after each accepted step
};

NlsResult nls_fit(const NlsProblem& problem, const NlsOptions& options = {});

/// Forward-difference Jacobian (step max(1e-8, 1e-8*|p|)) over free parameters,
/// row major n x p_free. Exposed so tests can cross-check it against central
/// differences.
std::vector<double> nls_jacobian(const NlsModel& model, std::span<const double> params,
                                 std::span<const double> t_values,
                                 const std::vector<bool>& fixed_mask);

struct ConfidenceInterval {
    int param_index; // index into NlsResult::params
    double low;
    double high;
};

/// Per-free-parameter t-based intervals:
/// param ± t(1-(1-level)/2, dof) * sqrt(cov_ii).
std::vector<ConfidenceInterval> confidence_intervals(const NlsResult& result,
                                                     double level = 0.95);

} // namespace reliafit
