#include "numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace reliafit {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Lanczos g=7, n=9 coefficients (Godfrey). Relative error ~1e-15 on the
// positive axis, which keeps |error of ln Γ| under 1e-12 across [0.1, 200].
constexpr double kLanczos[9] = {
    0.99999999999980993,   676.5203681218851,     -1259.1392167224028,
    771.32342877765313,    -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,  9.9843695780195716e-6, 1.5056327351493116e-7};

double ln_gamma_lanczos(double x) {
    // Valid for x >= 0.5.
    double acc = kLanczos[0];
    for (int i = 1; i < 9; ++i) acc += kLanczos[i] / (x + i - 1);
    const double t = x + 6.5;
    return 0.5 * std::log(2.0 * kPi) + (x - 0.5) * std::log(t) - t + std::log(acc);
}

} // namespace

double ln_gamma(double x) {
    if (!(x > 0.0))
        throw Error(Errc::domain, "ln_gamma: argument must be positive, got " + std::to_string(x));
    if (x < 0.5) {
        // Reflection keeps the Lanczos argument in its accurate range.
        return std::log(kPi / std::sin(kPi * x)) - ln_gamma_lanczos(1.0 - x);
    }
    return ln_gamma_lanczos(x);
}

double reg_inc_gamma_p(double a, double x) {
    if (!(a > 0.0))
        throw Error(Errc::domain, "reg_inc_gamma_p: shape must be positive, got " + std::to_string(a));
    if (!(x >= 0.0))
        throw Error(Errc::domain, "reg_inc_gamma_p: x must be nonnegative, got " + std::to_string(x));
    if (x == 0.0) return 0.0;

    const double log_prefix = a * std::log(x) - x - ln_gamma(a);
    if (x < a + 1.0) {
        // Lower series: P = x^a e^-x / Γ(a) * Σ x^n / (a(a+1)...(a+n)).
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 1000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return std::max(0.0, std::min(1.0, std::exp(log_prefix) * sum));
    }
    // Upper continued fraction (modified Lentz), Q = prefix * cf; P = 1 - Q.
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::max(0.0, std::min(1.0, 1.0 - std::exp(log_prefix) * h));
}

namespace {

double inc_beta_cf(double a, double b, double x) {
    // Continued fraction for I_x(a,b) (modified Lentz).
    const double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h;
}

} // namespace

double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw Error(Errc::domain, "reg_inc_beta: shape parameters must be positive");
    if (!(x >= 0.0 && x <= 1.0))
        throw Error(Errc::domain, "reg_inc_beta: x must lie in [0, 1], got " + std::to_string(x));
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * inc_beta_cf(a, b, x) / a;
    return 1.0 - front * inc_beta_cf(b, a, 1.0 - x) / b;
}

namespace {

double student_t_cdf(double t, int dof) {
    const double v = static_cast<double>(dof);
    const double x = v / (v + t * t);
    const double half_tail = 0.5 * reg_inc_beta(0.5 * v, 0.5, x);
    return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

double student_t_pdf(double t, int dof) {
    const double v = static_cast<double>(dof);
    const double ln =
        ln_gamma(0.5 * (v + 1.0)) - ln_gamma(0.5 * v) - 0.5 * std::log(v * kPi) -
        0.5 * (v + 1.0) * std::log1p(t * t / v);
    return std::exp(ln);
}

} // namespace

double student_t_quantile(double p, int dof) {
    if (dof < 1) throw Error(Errc::domain, "student_t_quantile: dof must be >= 1");
    if (!(p > 0.0 && p < 1.0))
        throw Error(Errc::domain, "student_t_quantile: p must lie in (0, 1)");
    if (p == 0.5) return 0.0;
    // Symmetric: solve for the upper half, reflect if needed.
    if (p < 0.5) return -student_t_quantile(1.0 - p, dof);

    // Bracket, then bisection with Newton polish.
    double lo = 0.0, hi = 1.0;
    while (student_t_cdf(hi, dof) < p) {
        hi *= 2.0;
        if (hi > 1e12) break;
    }
    double t = 0.5 * (lo + hi);
    for (int i = 0; i < 200; ++i) {
        const double f = student_t_cdf(t, dof) - p;
        if (f > 0.0)
            hi = t;
        else
            lo = t;
        const double deriv = student_t_pdf(t, dof);
        double next = t - f / deriv;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
            t = next;
            break;
        }
        t = next;
    }
    return t;
}

// ---------------------------------------------------------------------------
// Damped least squares
// ---------------------------------------------------------------------------

namespace {

struct FreeSet {
    std::vector<int> index; // free-parameter positions
};

double compute_sse(const NlsProblem& p, std::span<const double> params, bool& finite) {
    double sse = 0.0;
    finite = true;
    for (std::size_t i = 0; i < p.t_values.size(); ++i) {
        const double f = p.model(params, p.t_values[i]);
        if (!std::isfinite(f)) {
            finite = false;
            return std::numeric_limits<double>::infinity();
        }
        const double r = p.y_values[i] - f;
        sse += r * r;
    }
    return sse;
}

// Gauss-Jordan inverse with partial pivoting; p is tiny (<= a handful).
// Throws a degenerate-fit error naming the first unresolvable column.
std::vector<double> invert_spd(std::vector<double> m, int p, const std::vector<int>& free_index) {
    std::vector<double> inv(static_cast<std::size_t>(p) * p, 0.0);
    for (int i = 0; i < p; ++i) inv[i * p + i] = 1.0;
    for (int col = 0; col < p; ++col) {
        int pivot = col;
        for (int r = col + 1; r < p; ++r)
            if (std::abs(m[r * p + col]) > std::abs(m[pivot * p + col])) pivot = r;
        if (std::abs(m[pivot * p + col]) < 1e-300)
            throw Error(Errc::degenerate,
                        "degenerate fit: J^T J singular along free parameter index " +
                            std::to_string(free_index[col]));
        if (pivot != col) {
            for (int c = 0; c < p; ++c) {
                std::swap(m[pivot * p + c], m[col * p + c]);
                std::swap(inv[pivot * p + c], inv[col * p + c]);
            }
        }
        const double d = m[col * p + col];
        for (int c = 0; c < p; ++c) {
            m[col * p + c] /= d;
            inv[col * p + c] /= d;
        }
        for (int r = 0; r < p; ++r) {
            if (r == col) continue;
            const double f = m[r * p + col];
            if (f == 0.0) continue;
            for (int c = 0; c < p; ++c) {
                m[r * p + c] -= f * m[col * p + c];
                inv[r * p + c] -= f * inv[col * p + c];
            }
        }
    }
    return inv;
}

// Solve (A + lambda*diag(A)) x = g in place; returns false when singular.
bool solve_damped(std::vector<double> a, std::vector<double> g, double lambda, int p,
                  std::vector<double>& x) {
    for (int i = 0; i < p; ++i) a[i * p + i] *= (1.0 + lambda);
    // Gaussian elimination with partial pivoting.
    std::vector<int> piv(p);
    for (int i = 0; i < p; ++i) piv[i] = i;
    for (int col = 0; col < p; ++col) {
        int pivot = col;
        for (int r = col + 1; r < p; ++r)
            if (std::abs(a[r * p + col]) > std::abs(a[pivot * p + col])) pivot = r;
        if (std::abs(a[pivot * p + col]) < 1e-300) return false;
        if (pivot != col) {
            for (int c = 0; c < p; ++c) std::swap(a[pivot * p + c], a[col * p + c]);
            std::swap(g[pivot], g[col]);
        }
        for (int r = col + 1; r < p; ++r) {
            const double f = a[r * p + col] / a[col * p + col];
            if (f == 0.0) continue;
            for (int c = col; c < p; ++c) a[r * p + c] -= f * a[col * p + c];
            g[r] -= f * g[col];
        }
    }
    x.assign(p, 0.0);
    for (int r = p - 1; r >= 0; --r) {
        double s = g[r];
        for (int c = r + 1; c < p; ++c) s -= a[r * p + c] * x[c];
        x[r] = s / a[r * p + r];
    }
    return true;
}

} // namespace

std::vector<double> nls_jacobian(const NlsModel& model, std::span<const double> params,
                                 std::span<const double> t_values,
                                 const std::vector<bool>& fixed_mask) {
    std::vector<int> free_index;
    for (std::size_t j = 0; j < params.size(); ++j)
        if (fixed_mask.empty() || !fixed_mask[j]) free_index.push_back(static_cast<int>(j));
    const std::size_t n = t_values.size();
    const std::size_t pf = free_index.size();
    std::vector<double> base(n);
    for (std::size_t i = 0; i < n; ++i) base[i] = model(params, t_values[i]);
    std::vector<double> jac(n * pf);
    std::vector<double> bumped(params.begin(), params.end());
    for (std::size_t jc = 0; jc < pf; ++jc) {
        const int j = free_index[jc];
        const double h = std::max(1e-8, 1e-8 * std::abs(params[j]));
        bumped[j] = params[j] + h;
        for (std::size_t i = 0; i < n; ++i)
            jac[i * pf + jc] = (model(bumped, t_values[i]) - base[i]) / h;
        bumped[j] = params[j];
    }
    return jac;
}

NlsResult nls_fit(const NlsProblem& problem, const NlsOptions& options) {
    const std::size_t n = problem.t_values.size();
    const std::size_t np = problem.initial_params.size();
    if (n != problem.y_values.size())
        throw Error(Errc::contract, "nls_fit: t and y lengths differ");
    if (np == 0) throw Error(Errc::contract, "nls_fit: no parameters");
    if (!problem.fixed_mask.empty() && problem.fixed_mask.size() != np)
        throw Error(Errc::contract, "nls_fit: fixed_mask length mismatch");
    if (!problem.lower_bounds.empty() && problem.lower_bounds.size() != np)
        throw Error(Errc::contract, "nls_fit: lower_bounds length mismatch");
    if (!problem.upper_bounds.empty() && problem.upper_bounds.size() != np)
        throw Error(Errc::contract, "nls_fit: upper_bounds length mismatch");

    std::vector<int> free_index;
    for (std::size_t j = 0; j < np; ++j)
        if (problem.fixed_mask.empty() || !problem.fixed_mask[j])
            free_index.push_back(static_cast<int>(j));
    const int pf = static_cast<int>(free_index.size());
    if (pf == 0) throw Error(Errc::contract, "nls_fit: every parameter is frozen");
    if (n < static_cast<std::size_t>(pf) + 1)
        throw Error(Errc::precondition, "nls_fit: need at least " + std::to_string(pf + 1) +
                                            " points for " + std::to_string(pf) +
                                            " free parameters, got " + std::to_string(n));

    const auto lower = [&](std::size_t j) {
        return problem.lower_bounds.empty() ? -std::numeric_limits<double>::infinity()
                                            : problem.lower_bounds[j];
    };
    const auto upper = [&](std::size_t j) {
        return problem.upper_bounds.empty() ? std::numeric_limits<double>::infinity()
                                            : problem.upper_bounds[j];
    };
    for (std::size_t j = 0; j < np; ++j) {
        if (!(lower(j) <= problem.initial_params[j] && problem.initial_params[j] <= upper(j)))
            throw Error(Errc::contract, "nls_fit: initial parameter " + std::to_string(j) +
                                            " violates its bounds");
    }

    std::vector<double> params = problem.initial_params;
    bool finite = false;
    double sse = compute_sse(problem, params, finite);
    if (!finite)
        throw Error(Errc::domain, "nls_fit: model not finite at the initial parameters");

    NlsResult result;
    result.free_index = free_index;
    result.dof = static_cast<int>(n) - pf;
    result.sse_trace.push_back(sse);

    double lambda = options.damping_init;
    bool converged = (sse == 0.0);
    int iter = 0;

    while (!converged && iter < options.max_iter) {
        ++iter;
        const auto jac = nls_jacobian(problem.model, params, problem.t_values, problem.fixed_mask);
        bool jac_finite = true;
        for (double v : jac)
            if (!std::isfinite(v)) jac_finite = false;

        // residuals at the current point
        std::vector<double> resid(n);
        for (std::size_t i = 0; i < n; ++i)
            resid[i] = problem.y_values[i] - problem.model(params, problem.t_values[i]);

        std::vector<double> jtj(static_cast<std::size_t>(pf) * pf, 0.0);
        std::vector<double> g(pf, 0.0);
        if (jac_finite) {
            for (std::size_t i = 0; i < n; ++i) {
                for (int a = 0; a < pf; ++a) {
                    g[a] += jac[i * pf + a] * resid[i];
                    for (int b = a; b < pf; ++b)
                        jtj[a * pf + b] += jac[i * pf + a] * jac[i * pf + b];
                }
            }
            for (int a = 0; a < pf; ++a)
                for (int b = 0; b < a; ++b) jtj[a * pf + b] = jtj[b * pf + a];

            double gmax = 0.0;
            for (double v : g) gmax = std::max(gmax, std::abs(v));
            if (gmax < 1e-12) {
                converged = true;
                break;
            }

            // A fully dead column cannot be damped away: report it.
            for (int a = 0; a < pf; ++a)
                if (jtj[a * pf + a] == 0.0)
                    throw Error(Errc::degenerate,
                                "degenerate fit: J^T J singular along free parameter index " +
                                    std::to_string(free_index[a]));
        }

        bool accepted = false;
        if (jac_finite) {
            std::vector<double> step;
            if (solve_damped(jtj, g, lambda, pf, step)) {
                std::vector<double> trial = params;
                for (int a = 0; a < pf; ++a) {
                    const std::size_t j = static_cast<std::size_t>(free_index[a]);
                    trial[j] = std::clamp(trial[j] + step[a], lower(j), upper(j));
                }
                bool trial_finite = true;
                const double trial_sse = compute_sse(problem, trial, trial_finite);
                if (trial_finite && trial_sse <= sse) {
                    const double drop = sse - trial_sse;
                    params = std::move(trial);
                    sse = trial_sse;
                    result.sse_trace.push_back(sse);
                    lambda = std::max(lambda * 0.1, 1e-14);
                    accepted = true;
                    if (sse == 0.0 || drop <= options.rel_tol * std::max(sse, 1e-300))
                        converged = true;
                }
            }
        }
        if (!accepted) {
            lambda *= 10.0;
            if (lambda > 1e14) break; // no representable step improves SSE
        }
    }

    result.params = params;
    result.sse = sse;
    result.iterations = iter;
    result.converged = converged;

    // Covariance s^2 (J^T J)^-1 over the free parameters at the solution.
    const auto jac = nls_jacobian(problem.model, params, problem.t_values, problem.fixed_mask);
    std::vector<double> jtj(static_cast<std::size_t>(pf) * pf, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (int a = 0; a < pf; ++a)
            for (int b = a; b < pf; ++b) jtj[a * pf + b] += jac[i * pf + a] * jac[i * pf + b];
    for (int a = 0; a < pf; ++a)
        for (int b = 0; b < a; ++b) jtj[a * pf + b] = jtj[b * pf + a];
    const double s2 = result.dof > 0 ? sse / result.dof : 0.0;
    auto inv = invert_spd(std::move(jtj), pf, free_index);
    for (double& v : inv) v *= s2;
    // Numerical noise can leave a tiny negative variance on a perfect fit.
    for (int a = 0; a < pf; ++a) inv[a * pf + a] = std::max(0.0, inv[a * pf + a]);
    result.covariance = std::move(inv);
    return result;
}

std::vector<ConfidenceInterval> confidence_intervals(const NlsResult& result, double level) {
    if (!result.converged)
        throw Error(Errc::contract, "confidence_intervals: fit did not converge");
    if (result.dof < 1)
        throw Error(Errc::precondition, "confidence_intervals: no degrees of freedom");
    if (!(level > 0.0 && level < 1.0))
        throw Error(Errc::domain, "confidence_intervals: level must lie in (0, 1)");
    const int pf = static_cast<int>(result.free_index.size());
    const double tq = student_t_quantile(1.0 - (1.0 - level) / 2.0, result.dof);
    std::vector<ConfidenceInterval> out;
    out.reserve(pf);
    for (int a = 0; a < pf; ++a) {
        const double se = std::sqrt(result.covariance[a * pf + a]);
        const double center = result.params[result.free_index[a]];
        out.push_back({result.free_index[a], center - tq * se, center + tq * se});
    }
    return out;
}

} // namespace reliafit
