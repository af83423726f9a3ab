#include "koopnf/numerics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

namespace koopnf {

namespace {

constexpr int kPolishPasses = 4;

void check_stage_range(const NormalFormSequence& seq, int m, const char* what)
{
    if (m < 2 || m > seq.degree) {
        throw std::out_of_range(std::string(what) + ": m = " + std::to_string(m) + " outside 2.."
                                + std::to_string(seq.degree));
    }
}

void check_point_dim(std::size_t expected, std::size_t got, const char* what)
{
    if (expected != got) {
        throw std::invalid_argument(std::string(what) + ": point has dimension " + std::to_string(got)
                                    + ", expected " + std::to_string(expected));
    }
}

void check_radii(std::span<const double> radii, const char* what)
{
    if (radii.size() < 2) {
        throw std::invalid_argument(std::string(what) + ": at least two radii are required");
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] < radii[i - 1]))) {
            throw std::invalid_argument(std::string(what) + ": radii must be positive and strictly decreasing");
        }
    }
}

double distance(std::span<const complex_t> a, std::span<const complex_t> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

CVector phi_apply(const VectorPoly& q, std::span<const complex_t> w)
{
    CVector out = evaluate_vec(q, w);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += w[i];
    }
    return out;
}

complex_t monomial_value(const MultiIndex& alpha, std::span<const complex_t> z)
{
    complex_t v = 1.0;
    for (std::size_t i = 0; i < alpha.dim(); ++i) {
        for (int k = 0; k < alpha[i]; ++k) {
            v *= z[i];
        }
    }
    return v;
}

} // namespace

PhiInverse invert_phi_pointwise(const VectorPoly& q, std::span<const complex_t> y, double tol, int max_iter)
{
    check_point_dim(q.dim(), y.size(), "invert_phi_pointwise");
    if (!(tol > 0.0)) {
        throw std::invalid_argument("invert_phi_pointwise: tol must be positive");
    }
    if (max_iter < 1) {
        throw std::invalid_argument("invert_phi_pointwise: max_iter must be >= 1");
    }
    const double floor = 64.0 * DBL_EPSILON * std::max(norm_inf(y), DBL_MIN);
    PhiInverse out;
    CVector x(y.size());
    double prev_step = std::numeric_limits<double>::infinity();
    double last_ratio = std::numeric_limits<double>::quiet_NaN();

    auto next_iterate = [&](const CVector& from) {
        CVector next = evaluate_vec(q, from);
        for (std::size_t i = 0; i < next.size(); ++i) {
            next[i] = y[i] - next[i];
        }
        return next;
    };

    for (int it = 1; it <= max_iter; ++it) {
        CVector next = next_iterate(x);
        const double step = distance(next, x);
        if (!std::isfinite(step)) {
            throw InversionError("invert_phi_pointwise: iteration diverged after " + std::to_string(it)
                                     + " steps (last contraction ratio " + std::to_string(last_ratio) + ")",
                                 0, last_ratio, it);
        }
        if (std::isfinite(prev_step) && prev_step > floor) {
            last_ratio = step / prev_step;
            out.max_ratio = std::max(out.max_ratio, last_ratio);
        }
        x = std::move(next);
        out.iterations = it;
        if (step <= tol) {
            double s = step;
            for (int pass = 0; pass < kPolishPasses && s > 0.0; ++pass) {
                CVector polished = next_iterate(x);
                const double s2 = distance(polished, x);
                if (!(s2 < s)) {
                    break;
                }
                x = std::move(polished);
                s = s2;
            }
            out.residual = distance(next_iterate(x), x);
            out.x = std::move(x);
            return out;
        }
        prev_step = step;
    }
    throw InversionError("invert_phi_pointwise: no convergence in " + std::to_string(max_iter)
                             + " iterations (last contraction ratio " + std::to_string(last_ratio)
                             + "); the point is likely outside the contraction domain",
                         0, last_ratio, max_iter);
}

CVector tau_pointwise(const NormalFormSequence& seq, int m, std::span<const complex_t> z)
{
    check_stage_range(seq, m, "tau_pointwise");
    check_point_dim(seq.spectrum.dim(), z.size(), "tau_pointwise");
    CVector w(z.begin(), z.end());
    for (int k = m; k >= 2; --k) {
        w = phi_apply(seq.stage(k).Q, w);
    }
    return w;
}

CVector tau_inverse_pointwise(const NormalFormSequence& seq, int m, std::span<const complex_t> x, double tol,
                              int max_iter)
{
    check_stage_range(seq, m, "tau_inverse_pointwise");
    check_point_dim(seq.spectrum.dim(), x.size(), "tau_inverse_pointwise");
    CVector w(x.begin(), x.end());
    for (int k = 2; k <= m; ++k) {
        try {
            w = invert_phi_pointwise(seq.stage(k).Q, w, tol, max_iter).x;
        } catch (const InversionError& e) {
            throw InversionError("stage " + std::to_string(k) + ": " + e.what(), k, e.last_ratio(), e.iterations());
        }
    }
    return w;
}

EigenfunctionValue eval_approx_eigenfunction(const MultiIndex& alpha, const NormalFormSequence& seq, int m,
                                             std::span<const complex_t> x, double tol, int max_iter)
{
    if (alpha.dim() != seq.spectrum.dim() || alpha.order() < 1) {
        throw std::invalid_argument("eval_approx_eigenfunction: alpha must have dimension n and order >= 1");
    }
    const CVector z = tau_inverse_pointwise(seq, m, x, tol, max_iter);
    return {monomial_value(alpha, z), seq.spectrum.power(alpha)};
}

SlopeFit fit_loglog_slope(std::span<const double> radii, std::span<const double> values)
{
    if (radii.size() != values.size()) {
        throw std::invalid_argument("fit_loglog_slope: size mismatch");
    }
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] > 0.0 && values[i] > 0.0 && std::isfinite(values[i])) {
            lx.push_back(std::log(radii[i]));
            ly.push_back(std::log(values[i]));
        }
    }
    SlopeFit fit;
    if (lx.size() < 2) {
        fit.degenerate = true;
        fit.slope = std::numeric_limits<double>::quiet_NaN();
        fit.intercept = std::numeric_limits<double>::quiet_NaN();
        return fit;
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

std::vector<double> geometric_radii(double first, double last, int count)
{
    if (count < 2 || !(first > 0.0) || !(last > 0.0)) {
        throw std::invalid_argument("geometric_radii: need count >= 2 and positive endpoints");
    }
    std::vector<double> r(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        r[static_cast<std::size_t>(i)] = first * std::pow(last / first, static_cast<double>(i) / (count - 1));
    }
    r.front() = first;
    r.back() = last;
    return r;
}

ResidualStudy residual_study(const VectorPoly& t, const NormalFormSequence& seq, int m, const MultiIndex& alpha,
                             std::span<const double> radii, int samples, std::uint64_t seed, double tol,
                             int max_iter)
{
    check_stage_range(seq, m, "residual_study");
    const std::size_t n = seq.spectrum.dim();
    if (t.dim() != n) {
        throw std::invalid_argument("residual_study: map dimension differs from the sequence");
    }
    if (alpha.dim() != n || alpha.order() < 1) {
        throw std::invalid_argument("residual_study: alpha must have dimension n and order >= 1");
    }
    if (samples < 1) {
        throw std::invalid_argument("residual_study: samples must be >= 1");
    }
    check_radii(radii, "residual_study");
    const double eps = seq.min_epsilon(m);
    if (!(radii.front() < eps)) {
        throw std::invalid_argument("residual_study: largest radius " + std::to_string(radii.front())
                                    + " is not below the smallest stage epsilon " + std::to_string(eps));
    }

    ResidualStudy study;
    study.m = m;
    study.alpha = alpha;
    study.mu = seq.spectrum.power(alpha);
    study.radii.assign(radii.begin(), radii.end());
    study.samples_per_radius = samples;
    study.max_residual.assign(radii.size(), 0.0);
    study.skipped.assign(radii.size(), 0);

    const VectorPoly& t_m = seq.stage(m).T_after;
    SampleRng rng(seed);
    for (std::size_t r = 0; r < radii.size(); ++r) {
        for (int s = 0; s < samples; ++s) {
            CVector z = rng.sphere_point(n);
            for (auto& v : z) {
                v *= radii[r];
            }
            try {
                const CVector x = tau_pointwise(seq, m, z);
                const CVector z_x = tau_inverse_pointwise(seq, m, x, tol, max_iter);
                const CVector z_tx = tau_inverse_pointwise(seq, m, evaluate_vec(t, x), tol, max_iter);
                const complex_t psi_tx = monomial_value(alpha, z_tx);
                ResidualRecord rec;
                rec.radius_index = r;
                rec.sample = s;
                rec.residual = std::abs(psi_tx - study.mu * monomial_value(alpha, z_x));
                rec.two_way_gap = std::abs(psi_tx - monomial_value(alpha, evaluate_vec(t_m, z_x)));
                study.max_residual[r] = std::max(study.max_residual[r], rec.residual);
                study.max_two_way_gap = std::max(study.max_two_way_gap, rec.two_way_gap);
                study.records.push_back(rec);
            } catch (const InversionError&) {
                ++study.skipped[r];
                ++study.skipped_total;
            }
        }
    }
    const SlopeFit fit = fit_loglog_slope(study.radii, study.max_residual);
    study.fitted_slope = fit.slope;
    study.fit_rsquared = fit.r_squared;
    study.degenerate = fit.degenerate;
    return study;
}

InverseStudy inverse_asymptotics_study(const VectorPoly& q, std::span<const double> radii, int samples,
                                       std::uint64_t seed, double tol, int max_iter, double beta)
{
    check_radii(radii, "inverse_asymptotics_study");
    if (samples < 1) {
        throw std::invalid_argument("inverse_asymptotics_study: samples must be >= 1");
    }
    InverseStudy study;
    study.m = q.is_zero() ? 0 : q.degree();
    study.radii.assign(radii.begin(), radii.end());
    study.samples_per_radius = samples;
    study.max_error.assign(radii.size(), 0.0);
    if (!q.is_zero()) {
        const double eps = epsilon_bound(q, beta, 2000, seed);
        if (!(radii.front() < eps)) {
            throw std::invalid_argument("inverse_asymptotics_study: largest radius " + std::to_string(radii.front())
                                        + " is not below the contraction radius " + std::to_string(eps));
        }
    }

    SampleRng rng(seed);
    for (std::size_t r = 0; r < radii.size(); ++r) {
        for (int s = 0; s < samples; ++s) {
            CVector y = rng.sphere_point(q.dim());
            for (auto& v : y) {
                v *= radii[r];
            }
            const CVector x = invert_phi_pointwise(q, y, tol, max_iter).x;
            const CVector qy = evaluate_vec(q, y);
            double err = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                err = std::max(err, std::abs(x[i] - (y[i] - qy[i])));
            }
            study.max_error[r] = std::max(study.max_error[r], err);
        }
    }
    const SlopeFit fit = fit_loglog_slope(study.radii, study.max_error);
    study.fitted_slope = fit.slope;
    study.fit_rsquared = fit.r_squared;
    study.degenerate = fit.degenerate;
    return study;
}

DomainReport domain_check(const NormalFormSequence& seq, int m, std::span<const complex_t> z)
{
    check_stage_range(seq, m, "domain_check");
    check_point_dim(seq.spectrum.dim(), z.size(), "domain_check");
    DomainReport report;
    report.inside = true;
    auto record = [&](int stage, std::span<const complex_t> w) {
        DomainCheckEntry e;
        e.stage = stage;
        e.norm = norm_inf(w);
        e.epsilon = seq.stage(stage).epsilon;
        e.inside = e.norm < e.epsilon;
        report.inside = report.inside && e.inside;
        report.checks.push_back(e);
    };
    record(m, z);
    CVector w(z.begin(), z.end());
    for (int j = 1; j <= m - 2; ++j) {
        w = phi_apply(seq.stage(m - j + 1).Q, w);
        record(m - j, w);
    }
    return report;
}

bool orbit_domain_check(const VectorPoly& t, const NormalFormSequence& seq, int m, std::span<const complex_t> x,
                        int iterates, double tol, int max_iter)
{
    CVector p(x.begin(), x.end());
    for (int k = 0; k <= iterates; ++k) {
        try {
            if (!domain_check(seq, m, tau_inverse_pointwise(seq, m, p, tol, max_iter)).inside) {
                return false;
            }
        } catch (const InversionError&) {
            return false;
        }
        p = evaluate_vec(t, p);
    }
    return true;
}

} // namespace koopnf
