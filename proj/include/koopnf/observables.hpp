#pragma once

// Observables of the nonlinear map obtained by pulling elements of the polynomial
// eigenfunction algebra back through tau_m^{-1}, plus a least-squares density demo.

#include "koopnf/normalform.hpp"
#include "koopnf/numerics.hpp"
#include "koopnf/polyalg.hpp"

#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace koopnf {

class PullbackObservable
{
public:
    /// Throws if `with_constant` is false and f has a constant term.
    PullbackObservable(ScalarPoly f, int m, std::shared_ptr<const NormalFormSequence> seq, bool with_constant = true);

    const ScalarPoly& f() const noexcept { return f_; }
    int m() const noexcept { return m_; }
    const NormalFormSequence& sequence() const noexcept { return *seq_; }
    bool with_constant() const noexcept { return with_constant_; }

private:
    ScalarPoly f_;
    int m_;
    std::shared_ptr<const NormalFormSequence> seq_;
    bool with_constant_;
};

/// f(tau_m^{-1}(x)).
complex_t pullback_eval(const PullbackObservable& obs, std::span<const complex_t> x, double tol = kDefaultInversionTol,
                        int max_iter = kDefaultMaxIter);

/// 0-based index pairs (i, j) with phi_j = conj(phi_i) on the real slice; unlisted indices are real.
using ConjugatePairing = std::vector<std::pair<std::size_t, std::size_t>>;

/// The algebra element g with g(x) = conj(f(x)) on the real slice: coefficients are conjugated
/// and exponents swapped within each pair.
ScalarPoly conjugate_in_algebra(const ScalarPoly& f, const ConjugatePairing& pairing);

struct DensityRow
{
    int degree = 0;
    int basis_size = 0;
    double sup_error = 0.0;
    double condition = 1.0;
    bool ill_conditioned = false;
};

struct DensityTable
{
    std::vector<DensityRow> rows;
    int grid_points = 0;
    /// Rows whose sup-error exceeds the previous row's.
    int monotonicity_violations = 0;
};

struct DensityOptions
{
    int grid = 41;                  // points per axis
    int max_degree = 5;
    bool with_constant = true;
    double condition_limit = 1e12;
    double tol = kDefaultInversionTol;
    int max_iter = kDefaultMaxIter;
};

using Target = std::function<complex_t(std::span<const complex_t>)>;

/// Fits `target` on a uniform grid over the real box by least squares in the pulled-back
/// monomials phi^alpha o tau_m^{-1} of degree <= d, for d = 0..max_degree, and reports the
/// sup-error over the grid. Every grid point must pass domain_check.
DensityTable density_demo(const Target& target, std::span<const std::pair<double, double>> box,
                          const NormalFormSequence& seq, int m, const DensityOptions& options = {});

} // namespace koopnf
