#include "koopnf/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace koopnf {

Spectrum::Spectrum(CVector lambdas) : lambdas_(std::move(lambdas))
{
    for (std::size_t i = 0; i < lambdas_.size(); ++i) {
        if (lambdas_[i] == complex_t{}) {
            throw std::invalid_argument("Spectrum: eigenvalue " + std::to_string(i + 1)
                                        + " is zero; the map is not a diffeomorphism at the origin");
        }
    }
}

bool Spectrum::is_stable() const noexcept
{
    return std::all_of(lambdas_.begin(), lambdas_.end(), [](complex_t l) { return std::abs(l) < 1.0; });
}

complex_t Spectrum::power(const MultiIndex& alpha) const
{
    if (alpha.dim() != dim()) {
        throw std::invalid_argument("Spectrum::power: dimension mismatch");
    }
    complex_t r = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) {
        for (int k = 0; k < alpha[i]; ++k) {
            r *= lambdas_[i];
        }
    }
    return r;
}

complex_t mu(std::size_t j, const MultiIndex& alpha, const Spectrum& spec)
{
    if (j >= spec.dim()) {
        throw std::out_of_range("mu: component index " + std::to_string(j + 1) + " out of range 1.."
                                + std::to_string(spec.dim()));
    }
    return spec.power(alpha) - spec[j];
}

ResonanceReport check_resonance(const Spectrum& spec, int max_order, double tol, double near_tol)
{
    if (max_order < 2) {
        throw std::invalid_argument("check_resonance: order must be >= 2");
    }
    if (tol < 0.0) {
        throw std::invalid_argument("check_resonance: tolerance must be >= 0");
    }
    ResonanceReport report;
    report.max_order = max_order;
    report.tol = tol;
    report.near_tol = near_tol;
    report.min_abs_mu = std::numeric_limits<double>::infinity();
    for (int k = 2; k <= max_order; ++k) {
        for (const auto& alpha : multi_indices_of_order(spec.dim(), k)) {
            for (std::size_t j = 0; j < spec.dim(); ++j) {
                ResonanceEntry e{j, alpha, mu(j, alpha, spec)};
                const double a = std::abs(e.mu);
                report.min_abs_mu = std::min(report.min_abs_mu, a);
                if (a <= tol) {
                    report.resonant.push_back(e);
                } else if (a < near_tol) {
                    report.near_resonant.push_back(e);
                }
                report.entries.push_back(std::move(e));
            }
        }
    }
    return report;
}

EigenBasis eigencoordinates(const Eigen::MatrixXcd& A, double condition_bound)
{
    const auto n = static_cast<std::size_t>(A.rows());
    if (A.rows() != A.cols() || n == 0) {
        throw std::invalid_argument("eigencoordinates: matrix must be square and non-empty");
    }
    if (n > kMaxEigenDim) {
        throw std::invalid_argument("eigencoordinates: dimension above " + std::to_string(kMaxEigenDim)
                                    + " is not supported; supply eigenvalues directly");
    }
    const bool real_input = A.imag().cwiseAbs().maxCoeff() == 0.0;

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(A, true);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigencoordinates: eigen solver did not converge");
    }
    Eigen::VectorXcd vals = solver.eigenvalues();
    Eigen::MatrixXcd vecs = solver.eigenvectors();

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    const double tie = 1e-12 * scale;
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double ma = std::abs(vals[a]);
        const double mb = std::abs(vals[b]);
        if (std::abs(ma - mb) > tie) {
            return ma > mb;
        }
        if (std::abs(vals[a].imag() - vals[b].imag()) > tie) {
            return vals[a].imag() > vals[b].imag();
        }
        return vals[a].real() > vals[b].real();
    });

    EigenBasis basis;
    CVector lambdas(n);
    basis.V.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const auto src = order[k];
        lambdas[k] = vals[src];
        Eigen::VectorXcd v = vecs.col(src);
        Eigen::Index big = 0;
        v.cwiseAbs().maxCoeff(&big);
        v /= v[big];
        basis.V.col(static_cast<Eigen::Index>(k)) = v;
    }

    if (real_input) {
        for (std::size_t k = 0; k < n; ++k) {
            if (std::abs(lambdas[k].imag()) <= tie) {
                lambdas[k] = lambdas[k].real();
                basis.V.col(static_cast<Eigen::Index>(k)) = basis.V.col(static_cast<Eigen::Index>(k)).real().cast<complex_t>();
            } else if (lambdas[k].imag() > 0 && k + 1 < n
                       && std::abs(lambdas[k + 1] - std::conj(lambdas[k])) <= 1e-8 * scale) {
                lambdas[k + 1] = std::conj(lambdas[k]);
                basis.V.col(static_cast<Eigen::Index>(k + 1)) = basis.V.col(static_cast<Eigen::Index>(k)).conjugate();
                ++k;
            }
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(basis.V);
    const auto& sv = svd.singularValues();
    const double smin = sv[sv.size() - 1];
    basis.condition = smin > 0.0 ? sv[0] / smin : std::numeric_limits<double>::infinity();
    if (!(basis.condition <= condition_bound)) {
        throw DefectiveMatrixError("eigencoordinates: matrix is defective or nearly so (eigenvector condition "
                                       + std::to_string(basis.condition) + " exceeds bound "
                                       + std::to_string(condition_bound) + ")",
                                   basis.condition);
    }
    basis.V_inv = basis.V.inverse();
    basis.spectrum = Spectrum(std::move(lambdas));
    return basis;
}

ScalarPoly apply_koopman_linear(const ScalarPoly& p, const Spectrum& spec)
{
    if (p.dim() != spec.dim()) {
        throw std::invalid_argument("apply_koopman_linear: dimension mismatch");
    }
    ScalarPoly r(p.dim());
    for (const auto& [alpha, c] : p.terms()) {
        r.add_term(alpha, spec.power(alpha) * c);
    }
    return r;
}

} // namespace koopnf
