#include "koopnf/observables.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace koopnf {

PullbackObservable::PullbackObservable(ScalarPoly f, int m, std::shared_ptr<const NormalFormSequence> seq,
                                       bool with_constant)
    : f_(std::move(f)), m_(m), seq_(std::move(seq)), with_constant_(with_constant)
{
    if (!seq_) {
        throw std::invalid_argument("PullbackObservable: null sequence");
    }
    if (f_.dim() != seq_->spectrum.dim()) {
        throw std::invalid_argument("PullbackObservable: observable dimension differs from the sequence");
    }
    if (m_ < 2 || m_ > seq_->degree) {
        throw std::out_of_range("PullbackObservable: m outside 2..D");
    }
    if (!with_constant_ && !homogeneous_part(f_, 0).is_zero()) {
        throw std::invalid_argument("PullbackObservable: constant term present but constants are not adjoined");
    }
}

complex_t pullback_eval(const PullbackObservable& obs, std::span<const complex_t> x, double tol, int max_iter)
{
    return evaluate(obs.f(), tau_inverse_pointwise(obs.sequence(), obs.m(), x, tol, max_iter));
}

ScalarPoly conjugate_in_algebra(const ScalarPoly& f, const ConjugatePairing& pairing)
{
    const std::size_t n = f.dim();
    std::vector<std::size_t> partner(n);
    for (std::size_t i = 0; i < n; ++i) {
        partner[i] = i;
    }
    std::vector<bool> used(n, false);
    for (const auto& [a, b] : pairing) {
        if (a >= n || b >= n || a == b || used[a] || used[b]) {
            throw std::invalid_argument("conjugate_in_algebra: pairing must use distinct indices in 1.."
                                        + std::to_string(n) + " at most once");
        }
        used[a] = used[b] = true;
        partner[a] = b;
        partner[b] = a;
    }
    ScalarPoly g(n);
    for (const auto& [alpha, c] : f.terms()) {
        std::vector<int> e(n);
        for (std::size_t i = 0; i < n; ++i) {
            e[partner[i]] = alpha[i];
        }
        g.add_term(MultiIndex(std::move(e)), std::conj(c));
    }
    return g;
}

DensityTable density_demo(const Target& target, std::span<const std::pair<double, double>> box,
                          const NormalFormSequence& seq, int m, const DensityOptions& options)
{
    const std::size_t n = seq.spectrum.dim();
    if (box.size() != n) {
        throw std::invalid_argument("density_demo: box needs one interval per coordinate");
    }
    if (n > 2) {
        throw std::invalid_argument("density_demo: only dimensions 1 and 2 are supported");
    }
    if (options.grid < 2 || options.max_degree < 0) {
        throw std::invalid_argument("density_demo: grid must be >= 2 and max_degree >= 0");
    }
    for (const auto& [lo, hi] : box) {
        if (!(lo < hi)) {
            throw std::invalid_argument("density_demo: empty box interval");
        }
    }

    // Grid points x, their preimages z = tau_m^{-1}(x), and target values.
    std::vector<CVector> points;
    const auto g = static_cast<std::size_t>(options.grid);
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        total *= g;
    }
    points.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        CVector x(n);
        std::size_t rem = flat;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = rem % g;
            rem /= g;
            const auto [lo, hi] = box[i];
            x[i] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(g - 1);
        }
        points.push_back(std::move(x));
    }

    std::vector<CVector> pre(total);
    Eigen::VectorXcd rhs(static_cast<Eigen::Index>(total));
    for (std::size_t p = 0; p < total; ++p) {
        pre[p] = tau_inverse_pointwise(seq, m, points[p], options.tol, options.max_iter);
        if (!domain_check(seq, m, pre[p]).inside) {
            throw std::domain_error("density_demo: grid point " + std::to_string(p)
                                    + " lies outside the validated domain chain");
        }
        rhs[static_cast<Eigen::Index>(p)] = target(points[p]);
    }

    // Differences below this are fit round-off, not a loss of accuracy.
    const double slack = 1e-12 * std::max(1.0, rhs.cwiseAbs().maxCoeff());
    std::vector<MultiIndex> basis;
    DensityTable table;
    table.grid_points = static_cast<int>(total);
    for (int d = 0; d <= options.max_degree; ++d) {
        if (d > 0 || options.with_constant) {
            for (auto& a : multi_indices_of_order(n, d)) {
                basis.push_back(std::move(a));
            }
        }
        DensityRow row;
        row.degree = d;
        row.basis_size = static_cast<int>(basis.size());
        Eigen::VectorXcd fit = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(total));
        if (!basis.empty()) {
            Eigen::MatrixXcd a(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(basis.size()));
            for (std::size_t p = 0; p < total; ++p) {
                for (std::size_t b = 0; b < basis.size(); ++b) {
                    complex_t v = 1.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        for (int k = 0; k < basis[b][i]; ++k) {
                            v *= pre[p][i];
                        }
                    }
                    a(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(b)) = v;
                }
            }
            // Column equilibration so the condition estimate reflects the basis, not its scaling.
            Eigen::VectorXd col_norm = a.colwise().norm().transpose();
            for (Eigen::Index c = 0; c < a.cols(); ++c) {
                if (col_norm[c] > 0.0) {
                    a.col(c) /= col_norm[c];
                }
            }
            Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const auto& sv = svd.singularValues();
            const double smin = sv[sv.size() - 1];
            row.condition = smin > 0.0 ? sv[0] / smin : std::numeric_limits<double>::infinity();
            row.ill_conditioned = !(row.condition <= options.condition_limit);
            fit = a * svd.solve(rhs);
        }
        row.sup_error = (rhs - fit).cwiseAbs().maxCoeff();
        if (!table.rows.empty() && row.sup_error > table.rows.back().sup_error + slack) {
            ++table.monotonicity_violations;
        }
        table.rows.push_back(row);
    }
    return table;
}

} // namespace koopnf
