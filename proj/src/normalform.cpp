#include "koopnf/normalform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace koopnf {

namespace {

std::string describe_term(std::size_t j, const MultiIndex& alpha)
{
    return "(j=" + std::to_string(j + 1) + ", alpha=" + alpha.to_string() + ")";
}

std::string resonance_message(std::size_t j, const MultiIndex& alpha, complex_t mu, int stage, complex_t coeff)
{
    std::ostringstream os;
    os << "resonant term " << describe_term(j, alpha) << " with |mu| = " << std::abs(mu)
       << " carries nonzero coefficient " << coeff;
    if (stage > 0) {
        os << " at stage " << stage;
    }
    return os.str();
}

void require_dims(const VectorPoly& p, const Spectrum& spec, const char* what)
{
    if (p.dim() != spec.dim()) {
        throw std::invalid_argument(std::string(what) + ": map and spectrum dimensions differ");
    }
}

// Largest deviation of the degree-1 part of p from diag(spec).
double linear_part_deviation(const VectorPoly& p, const Spectrum& spec)
{
    VectorPoly diff = homogeneous_part(p, 1) - VectorPoly::diagonal(spec.lambdas());
    return diff.max_abs_coeff();
}

VectorPoly nonlinear_part(const VectorPoly& p)
{
    VectorPoly r(p.dim());
    for (std::size_t j = 0; j < p.dim(); ++j) {
        for (const auto& [alpha, c] : p[j].terms()) {
            if (alpha.order() >= 2) {
                r.add_term(j, alpha, c);
            }
        }
    }
    return r;
}

} // namespace

ResonanceError::ResonanceError(std::size_t j, MultiIndex alpha, complex_t mu, int stage, complex_t coeff)
    : std::runtime_error(resonance_message(j, alpha, mu, stage, coeff)),
      j_(j),
      alpha_(std::move(alpha)),
      mu_(mu),
      stage_(stage),
      coeff_(coeff)
{}

double max_abs_in_degrees(const VectorPoly& p, int lo, int hi)
{
    double m = 0.0;
    for (const auto& c : p.components()) {
        for (const auto& [alpha, v] : c.terms()) {
            if (alpha.order() >= lo && alpha.order() <= hi) {
                m = std::max(m, std::abs(v));
            }
        }
    }
    return m;
}

VectorPoly lie_solve(const VectorPoly& r_hat, const Spectrum& spec, double resonance_tol, double near_resonance_tol,
                     std::vector<ResonanceEntry>* near_resonant, int stage)
{
    require_dims(r_hat, spec, "lie_solve");
    VectorPoly q(r_hat.dim());
    if (r_hat.is_zero()) {
        return q;
    }
    const int m = r_hat.degree();
    if (!r_hat.is_homogeneous_of(m) || m < 2) {
        throw std::invalid_argument("lie_solve: right-hand side must be homogeneous of degree >= 2");
    }
    for (std::size_t j = 0; j < r_hat.dim(); ++j) {
        for (const auto& [alpha, c] : r_hat[j].terms()) {
            const complex_t m_ja = mu(j, alpha, spec);
            const double a = std::abs(m_ja);
            if (a <= resonance_tol) {
                throw ResonanceError(j, alpha, m_ja, stage, c);
            }
            if (a < near_resonance_tol && near_resonant != nullptr) {
                near_resonant->push_back({j, alpha, m_ja});
            }
            q.add_term(j, alpha, c / m_ja);
        }
    }
    return q;
}

VectorPoly series_inverse(const VectorPoly& phi, int max_degree)
{
    if (max_degree < 1) {
        throw std::invalid_argument("series_inverse: truncation degree must be >= 1");
    }
    const std::size_t n = phi.dim();
    if (!homogeneous_part(phi, 0).is_zero()) {
        throw std::invalid_argument("series_inverse: map has a nonzero constant term");
    }
    const VectorPoly id = VectorPoly::identity(n);
    if (!(homogeneous_part(phi, 1) == id)) {
        throw std::invalid_argument("series_inverse: linear part is not the identity");
    }
    const VectorPoly nonlinear = truncate(nonlinear_part(phi), max_degree);

    VectorPoly psi = id;
    for (int pass = 0; pass <= max_degree; ++pass) {
        VectorPoly next = id - compose(nonlinear, psi, max_degree);
        if (next == psi) {
            break;
        }
        psi = std::move(next);
    }
    return psi;
}

double epsilon_bound(const VectorPoly& q, double beta, int samples, std::uint64_t seed)
{
    if (!(beta > 0.0 && beta < 1.0)) {
        throw std::invalid_argument("epsilon_bound: beta must lie in (0, 1)");
    }
    if (q.is_zero()) {
        return 1.0;
    }
    const int m = q.degree();
    if (m < 2 || !q.is_homogeneous_of(m)) {
        throw std::invalid_argument("epsilon_bound: Q must be homogeneous of degree >= 2");
    }
    const double norm = sup_norm_estimate(q, samples, seed);
    if (norm == 0.0) {
        return 1.0;
    }
    return std::min(1.0, std::pow(beta / (m * norm), 1.0 / (m - 1)));
}

NormalFormStage normal_form_step(const VectorPoly& t_m, int m, const Spectrum& spec, int max_degree,
                                 const NormalFormOptions& options)
{
    require_dims(t_m, spec, "normal_form_step");
    if (m < 1) {
        throw std::invalid_argument("normal_form_step: m must be >= 1");
    }
    if (max_degree < m + 1) {
        throw std::invalid_argument("normal_form_step: working degree must be at least m + 1");
    }
    const double scale = std::max(1.0, t_m.max_abs_coeff());
    if (!homogeneous_part(t_m, 0).is_zero()) {
        throw std::invalid_argument("normal_form_step: map does not fix the origin");
    }
    if (linear_part_deviation(t_m, spec) > 1e-12 * scale) {
        throw std::invalid_argument("normal_form_step: linear part is not diag(eigenvalues)");
    }
    if (m >= 2 && max_abs_in_degrees(t_m, 2, m) > options.vanish_tol * scale) {
        throw std::invalid_argument("normal_form_step: degrees 2.." + std::to_string(m) + " are not eliminated");
    }

    NormalFormStage stage;
    stage.m = m + 1;
    const VectorPoly r_hat = homogeneous_part(t_m, m + 1);
    stage.Q = lie_solve(r_hat, spec, options.resonance_tol, options.near_resonance_tol, &stage.near_resonant,
                        stage.m);

    const VectorPoly phi = VectorPoly::identity(spec.dim()) + stage.Q;
    const VectorPoly phi_inv = series_inverse(phi, max_degree);
    stage.T_after = compose(phi_inv, compose(t_m, phi, max_degree), max_degree);
    stage.epsilon = epsilon_bound(stage.Q, options.beta, options.norm_samples, options.seed);

    const double after_scale = std::max(scale, stage.Q.max_abs_coeff());
    if (max_abs_in_degrees(stage.T_after, 2, stage.m) > options.vanish_tol * after_scale) {
        throw std::logic_error("normal_form_step: stage " + std::to_string(stage.m)
                               + " left a nonzero term of degree <= " + std::to_string(stage.m));
    }
    return stage;
}

const NormalFormStage& NormalFormSequence::stage(int m) const
{
    if (m < 2 || m > degree) {
        throw std::out_of_range("NormalFormSequence: stage " + std::to_string(m) + " outside 2.."
                                + std::to_string(degree));
    }
    return stages[static_cast<std::size_t>(m - 2)];
}

double NormalFormSequence::min_epsilon(int m) const
{
    double e = 1.0;
    for (int k = 2; k <= m; ++k) {
        e = std::min(e, stage(k).epsilon);
    }
    return e;
}

NormalFormSequence run(const VectorPoly& t, const Spectrum& spec, int max_degree, const NormalFormOptions& options)
{
    require_dims(t, spec, "run");
    if (max_degree < 2) {
        throw std::invalid_argument("run: working degree D must be >= 2");
    }
    if (!spec.is_stable() && !options.allow_unstable) {
        throw std::invalid_argument("run: some |lambda_i| >= 1; the origin is not asymptotically stable");
    }
    if (!homogeneous_part(t, 0).is_zero()) {
        throw std::invalid_argument("run: T(0) != 0");
    }
    double lam_scale = 1.0;
    for (const auto& l : spec.lambdas()) {
        lam_scale = std::max(lam_scale, std::abs(l));
    }
    if (linear_part_deviation(t, spec) > 1e-12 * lam_scale) {
        throw std::invalid_argument("run: linear part of T is not diag(eigenvalues)");
    }

    NormalFormSequence seq;
    seq.spectrum = spec;
    seq.degree = max_degree;
    seq.input = t;
    seq.options = options;
    seq.stages.reserve(static_cast<std::size_t>(max_degree - 1));
    seq.taus.reserve(static_cast<std::size_t>(max_degree - 1));

    VectorPoly current = truncate(t, max_degree);
    const VectorPoly id = VectorPoly::identity(spec.dim());
    for (int m = 1; m < max_degree; ++m) {
        NormalFormStage stage = normal_form_step(current, m, spec, max_degree, options);
        const VectorPoly phi = id + stage.Q;
        if (seq.taus.empty()) {
            seq.taus.push_back(truncate(phi, max_degree));
        } else {
            seq.taus.push_back(compose(seq.taus.back(), phi, max_degree));
        }
        current = stage.T_after;
        seq.stages.push_back(std::move(stage));
    }
    return seq;
}

VectorPoly tau(const NormalFormSequence& seq, int m, std::optional<int> max_degree)
{
    if (m < 2 || m > seq.degree) {
        throw std::out_of_range("tau: m = " + std::to_string(m) + " outside 2.." + std::to_string(seq.degree));
    }
    if (!max_degree || *max_degree == seq.degree) {
        return seq.taus[static_cast<std::size_t>(m - 2)];
    }
    if (*max_degree < 1) {
        throw std::invalid_argument("tau: truncation degree must be >= 1");
    }
    const VectorPoly id = VectorPoly::identity(seq.spectrum.dim());
    VectorPoly result = truncate(id + seq.stage(2).Q, *max_degree);
    for (int k = 3; k <= m; ++k) {
        result = compose(result, id + seq.stage(k).Q, *max_degree);
    }
    return result;
}

} // namespace koopnf
