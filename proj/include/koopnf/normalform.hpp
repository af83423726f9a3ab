#pragma once

// Truncated normal-form induction.
//
// Starting from T_1 = T (diagonal linear part, no constant), each stage m = 2..D picks
// Phi_m = I + Q_m with Q_m solving the homological equation for the lowest surviving
// nonlinear degree, and conjugates T_m = Phi_m^{-1} o T_{m-1} o Phi_m. Every composition is
// truncated at the working degree D. The approximate conjugacies are
// tau_m = Phi_2 o ... o Phi_m.

#include "koopnf/polyalg.hpp"
#include "koopnf/spectrum.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace koopnf {

/// Raised when a resonant (j, alpha) carries a nonzero coefficient.
class ResonanceError : public std::runtime_error
{
public:
    ResonanceError(std::size_t j, MultiIndex alpha, complex_t mu, int stage, complex_t coeff);

    std::size_t component() const noexcept { return j_; }
    const MultiIndex& alpha() const noexcept { return alpha_; }
    complex_t mu() const noexcept { return mu_; }
    /// Stage being computed, or 0 when raised outside the pipeline.
    int stage() const noexcept { return stage_; }
    complex_t coeff() const noexcept { return coeff_; }

private:
    std::size_t j_;
    MultiIndex alpha_;
    complex_t mu_;
    int stage_;
    complex_t coeff_;
};

struct NormalFormOptions
{
    double beta = 0.5;
    double resonance_tol = kDefaultResonanceTol;
    double near_resonance_tol = kDefaultNearResonanceTol;
    /// Relative tolerance for "this homogeneous part vanishes".
    double vanish_tol = 1e-10;
    int norm_samples = 2000;
    std::uint64_t seed = 0;
    bool allow_unstable = false;
};

/// Q with q_{j,alpha} = r_{j,alpha} / mu_{j,alpha}, i.e. Q(Lambda z) - Lambda Q(z) = R_hat(z).
/// Near-resonant divisions are appended to `near_resonant` when given.
VectorPoly lie_solve(const VectorPoly& r_hat, const Spectrum& spec, double resonance_tol = kDefaultResonanceTol,
                     double near_resonance_tol = kDefaultNearResonanceTol,
                     std::vector<ResonanceEntry>* near_resonant = nullptr, int stage = 0);

/// Truncated compositional inverse of Phi = I + N (N of degree >= 2), from the iteration
/// Psi <- y - N(Psi), which fixes one more degree per pass.
VectorPoly series_inverse(const VectorPoly& phi, int max_degree);

/// min{1, (beta / (m ||Q||))^{1/(m-1)}} with ||Q|| replaced by its sampled sup-norm.
/// Returns 1 for Q = 0.
double epsilon_bound(const VectorPoly& q, double beta, int samples, std::uint64_t seed);

struct NormalFormStage
{
    int m = 0;               // degree eliminated by this stage
    VectorPoly Q;            // homogeneous of degree m
    VectorPoly T_after;      // T_m, truncated at D
    double epsilon = 1.0;    // inversion radius estimate for Phi_m
    std::vector<ResonanceEntry> near_resonant;
};

/// Given T_m (no parts of degree 2..m), builds stage m+1.
NormalFormStage normal_form_step(const VectorPoly& t_m, int m, const Spectrum& spec, int max_degree,
                                 const NormalFormOptions& options = {});

struct NormalFormSequence
{
    Spectrum spectrum;
    int degree = 0;                   // working truncation degree D
    VectorPoly input;                 // T as given
    NormalFormOptions options;
    std::vector<NormalFormStage> stages; // m = 2..D
    std::vector<VectorPoly> taus;     // tau_m truncated at D, same indexing as stages

    const NormalFormStage& stage(int m) const;
    /// Smallest stage epsilon over 2..m.
    double min_epsilon(int m) const;
    /// T_D, the final conjugated map.
    const VectorPoly& final_map() const { return stages.back().T_after; }
};

/// Runs stages 2..D on T. T must fix 0 with linear part diag(spec); |lambda_i| < 1 unless
/// options.allow_unstable.
NormalFormSequence run(const VectorPoly& t, const Spectrum& spec, int max_degree, const NormalFormOptions& options = {});

/// tau_m truncated at `max_degree` (cached when max_degree == seq.degree).
VectorPoly tau(const NormalFormSequence& seq, int m, std::optional<int> max_degree = std::nullopt);

/// Largest coefficient over homogeneous degrees [lo, hi] of p.
double max_abs_in_degrees(const VectorPoly& p, int lo, int hi);

} // namespace koopnf
