#pragma once

// Linear part of the map in eigen-coordinates: eigenvalues, the diagonal Koopman
// action on monomials, and resonance bookkeeping.

#include "koopnf/polyalg.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace koopnf {

class Spectrum
{
public:
    Spectrum() = default;
    /// Throws if any eigenvalue is zero.
    explicit Spectrum(CVector lambdas);

    std::size_t dim() const noexcept { return lambdas_.size(); }
    const CVector& lambdas() const noexcept { return lambdas_; }
    complex_t operator[](std::size_t i) const { return lambdas_.at(i); }

    /// All |lambda_i| < 1.
    bool is_stable() const noexcept;
    /// lambda^alpha = prod lambda_i^alpha_i.
    complex_t power(const MultiIndex& alpha) const;

private:
    CVector lambdas_;
};

/// mu_{j,alpha} = lambda^alpha - lambda_j, the eigenvalue of the homological operator on
/// the basis element phi^alpha e_j. `j` is 0-based.
complex_t mu(std::size_t j, const MultiIndex& alpha, const Spectrum& spec);

struct ResonanceEntry
{
    std::size_t j = 0; // 0-based component
    MultiIndex alpha;
    complex_t mu;
};

struct ResonanceReport
{
    int max_order = 0;
    double tol = 0.0;
    double near_tol = 0.0;
    std::vector<ResonanceEntry> entries;
    double min_abs_mu = 0.0;
    /// |mu| <= tol.
    std::vector<ResonanceEntry> resonant;
    /// tol < |mu| < near_tol; coefficients get amplified by 1/|mu| here.
    std::vector<ResonanceEntry> near_resonant;
};

inline constexpr double kDefaultResonanceTol = 1e-10;
inline constexpr double kDefaultNearResonanceTol = 1e-4;

/// Enumerates every (j, alpha) with 2 <= |alpha| <= max_order.
ResonanceReport check_resonance(const Spectrum& spec, int max_order, double tol = kDefaultResonanceTol,
                                double near_tol = kDefaultNearResonanceTol);

class DefectiveMatrixError : public std::runtime_error
{
public:
    DefectiveMatrixError(const std::string& what, double condition)
        : std::runtime_error(what), condition_(condition)
    {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

struct EigenBasis
{
    Spectrum spectrum;
    Eigen::MatrixXcd V;     // columns are eigenvectors
    Eigen::MatrixXcd V_inv;
    double condition = 1.0; // 2-norm condition number of V
};

inline constexpr double kDefaultConditionBound = 1e8;
inline constexpr std::size_t kMaxEigenDim = 16;

/// Diagonalizes A. Eigenvalues are ordered by decreasing modulus, then decreasing imaginary
/// part; each eigenvector is scaled so its largest entry equals 1. For real A, conjugate
/// pairs get exactly conjugate eigenvalues and eigenvectors.
/// This is supporting plumbing for user maps given in arbitrary coordinates (n <= 16).
EigenBasis eigencoordinates(const Eigen::MatrixXcd& A, double condition_bound = kDefaultConditionBound);

/// U_{Lambda} p: each term c_alpha phi^alpha becomes lambda^alpha c_alpha phi^alpha.
ScalarPoly apply_koopman_linear(const ScalarPoly& p, const Spectrum& spec);

} // namespace koopnf
