#pragma once

// Pointwise evaluation of the conjugacies and their inverses, approximate Koopman
// eigenfunctions, and log-log order studies of the asymptotic error terms.

#include "koopnf/normalform.hpp"
#include "koopnf/polyalg.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace koopnf {

inline constexpr double kDefaultInversionTol = 1e-13;
inline constexpr int kDefaultMaxIter = 200;

class InversionError : public std::runtime_error
{
public:
    InversionError(const std::string& what, int stage, double last_ratio, int iterations)
        : std::runtime_error(what), stage_(stage), last_ratio_(last_ratio), iterations_(iterations)
    {}
    /// Stage whose Phi failed to invert, 0 when unknown.
    int stage() const noexcept { return stage_; }
    double last_ratio() const noexcept { return last_ratio_; }
    int iterations() const noexcept { return iterations_; }

private:
    int stage_;
    double last_ratio_;
    int iterations_;
};

struct PhiInverse
{
    CVector x;
    int iterations = 0;
    /// Largest ||x_{k+1} - x_k|| / ||x_k - x_{k-1}|| seen above the rounding floor; 0 if none.
    double max_ratio = 0.0;
    double residual = 0.0; // ||x + Q(x) - y||
};

/// Solves x + Q(x) = y by x_{k+1} = y - Q(x_k), x_0 = 0. Converged once successive iterates
/// differ by <= tol; a few extra passes then run while the steps keep shrinking.
PhiInverse invert_phi_pointwise(const VectorPoly& q, std::span<const complex_t> y, double tol = kDefaultInversionTol,
                                int max_iter = kDefaultMaxIter);

/// tau_m(z) = Phi_2(Phi_3(...Phi_m(z))), evaluated exactly (no truncation).
CVector tau_pointwise(const NormalFormSequence& seq, int m, std::span<const complex_t> z);

/// tau_m^{-1}(x) = Phi_m^{-1}(...Phi_2^{-1}(x)); Phi_2^{-1} is applied first.
CVector tau_inverse_pointwise(const NormalFormSequence& seq, int m, std::span<const complex_t> x,
                              double tol = kDefaultInversionTol, int max_iter = kDefaultMaxIter);

struct EigenfunctionValue
{
    complex_t value; // psi(tau_m^{-1}(x)), psi = phi^alpha
    complex_t mu;    // lambda^alpha
};

EigenfunctionValue eval_approx_eigenfunction(const MultiIndex& alpha, const NormalFormSequence& seq, int m,
                                             std::span<const complex_t> x, double tol = kDefaultInversionTol,
                                             int max_iter = kDefaultMaxIter);

struct SlopeFit
{
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    bool degenerate = false; // fewer than two usable (positive) points
};

/// Ordinary least squares of log(value) against log(radius); zero values are dropped.
SlopeFit fit_loglog_slope(std::span<const double> radii, std::span<const double> values);

/// n geometric radii from `first` down to `last` (inclusive).
std::vector<double> geometric_radii(double first, double last, int count);

struct ResidualRecord
{
    std::size_t radius_index = 0;
    int sample = 0;
    double residual = 0.0;
    double two_way_gap = 0.0; // |psi_m(T(x)) - psi(T_m(z))|
};

struct ResidualStudy
{
    int m = 0;
    MultiIndex alpha;
    complex_t mu;
    std::vector<double> radii;
    int samples_per_radius = 0;
    std::vector<ResidualRecord> records;
    std::vector<double> max_residual; // per radius
    std::vector<int> skipped;         // per radius
    int skipped_total = 0;
    double max_two_way_gap = 0.0;
    double fitted_slope = 0.0;
    double fit_rsquared = 0.0;
    bool degenerate = false;
};

/// For z on the sphere of each radius, x = tau_m(z) and
///   residual = |psi_m(T(x)) - mu psi_m(x)|,  psi_m = phi^alpha o tau_m^{-1}.
/// Radii must be strictly decreasing and below the smallest stage epsilon up to m.
ResidualStudy residual_study(const VectorPoly& t, const NormalFormSequence& seq, int m, const MultiIndex& alpha,
                             std::span<const double> radii, int samples, std::uint64_t seed,
                             double tol = kDefaultInversionTol, int max_iter = kDefaultMaxIter);

struct InverseStudy
{
    int m = 0;
    std::vector<double> radii;
    std::vector<double> max_error; // max ||Phi^{-1}(y) - (y - Q(y))|| per radius
    int samples_per_radius = 0;
    double fitted_slope = 0.0;
    double fit_rsquared = 0.0;
    bool degenerate = false;
};

/// Measures the remainder of the two-term inverse y - Q(y) over shrinking ||y||.
InverseStudy inverse_asymptotics_study(const VectorPoly& q, std::span<const double> radii, int samples,
                                       std::uint64_t seed, double tol = kDefaultInversionTol,
                                       int max_iter = kDefaultMaxIter, double beta = 0.5);

struct DomainCheckEntry
{
    int stage = 0;     // k such that the point is tested against B_{eps_k}
    double norm = 0.0;
    double epsilon = 0.0;
    bool inside = false;
};

struct DomainReport
{
    bool inside = false;
    std::vector<DomainCheckEntry> checks;
};

/// z in B_{eps_m} and Phi_{m-j+1} o ... o Phi_m(z) in B_{eps_{m-j}} for j = 1..m-2.
DomainReport domain_check(const NormalFormSequence& seq, int m, std::span<const complex_t> z);

/// Follows `iterates` steps of the orbit of x under T and checks that tau_m^{-1} of each point
/// lands in the domain chain. A finite-orbit stand-in for T-invariance.
bool orbit_domain_check(const VectorPoly& t, const NormalFormSequence& seq, int m, std::span<const complex_t> x,
                        int iterates = 10, double tol = kDefaultInversionTol, int max_iter = kDefaultMaxIter);

} // namespace koopnf
