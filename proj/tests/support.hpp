#pragma once

// Shared test fixtures: random polynomials, the worked systems, and independent oracles.

#include "koopnf/normalform.hpp"
#include "koopnf/polyalg.hpp"
#include "koopnf/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace koopnf::test {

class Rand
{
public:
    explicit Rand(std::uint64_t seed) : eng_(seed) {}

    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    complex_t unit_box() { return {real(-1.0, 1.0), real(-1.0, 1.0)}; }
    complex_t polar(double rlo, double rhi)
    {
        return std::polar(real(rlo, rhi), real(-M_PI, M_PI));
    }
    CVector vec(std::size_t n, double scale = 1.0)
    {
        CVector v(n);
        for (auto& c : v) {
            c = scale * unit_box();
        }
        return v;
    }

private:
    std::mt19937_64 eng_;
};

inline ScalarPoly random_scalar(std::size_t n, int lo, int hi, Rand& rng, double density = 0.7)
{
    ScalarPoly p(n);
    for (int k = lo; k <= hi; ++k) {
        for (const auto& a : multi_indices_of_order(n, k)) {
            if (rng.real(0.0, 1.0) < density) {
                p.add_term(a, rng.polar(0.1, 1.0));
            }
        }
    }
    if (p.is_zero()) {
        p.add_term(multi_indices_of_order(n, hi).front(), 1.0);
    }
    return p;
}

inline VectorPoly random_vector(std::size_t n, int lo, int hi, Rand& rng, double density = 0.7)
{
    std::vector<ScalarPoly> c;
    for (std::size_t j = 0; j < n; ++j) {
        c.push_back(random_scalar(n, lo, hi, rng, density));
    }
    return VectorPoly(std::move(c));
}

/// 0.5 x + x^2.
inline VectorPoly worked_1d()
{
    VectorPoly t = VectorPoly::diagonal(CVector{0.5});
    t.add_term(0, MultiIndex{2}, 1.0);
    return t;
}

inline Spectrum worked_1d_spectrum()
{
    return Spectrum(CVector{0.5});
}

/// lambda = (0.5, 0.3) with generic quadratic and cubic terms.
inline VectorPoly generic_2d()
{
    VectorPoly t = VectorPoly::diagonal(CVector{0.5, 0.3});
    t.add_term(0, MultiIndex{2, 0}, 0.5);
    t.add_term(0, MultiIndex{1, 1}, -0.4);
    t.add_term(0, MultiIndex{0, 2}, 0.3);
    t.add_term(1, MultiIndex{2, 0}, 0.05);
    t.add_term(1, MultiIndex{1, 1}, 0.3);
    t.add_term(1, MultiIndex{0, 2}, -0.4);
    t.add_term(0, MultiIndex{3, 0}, 0.4);
    t.add_term(0, MultiIndex{1, 2}, -0.3);
    t.add_term(1, MultiIndex{2, 1}, 0.3);
    t.add_term(1, MultiIndex{0, 3}, 0.2);
    return t;
}

inline Spectrum generic_2d_spectrum()
{
    return Spectrum(CVector{0.5, 0.3});
}

/// The degree-<=D part of T = Phi o Lambda o Phi^{-1}, built from T o Phi = Phi o Lambda one degree
/// at a time: N_k = [Phi o Lambda]_k - [Lambda Phi]_k - [N_{<k} o Phi]_k. Never inverts Phi.
inline VectorPoly forward_conjugate(const VectorPoly& phi, const Spectrum& spec, int max_degree)
{
    const std::size_t n = spec.dim();
    const VectorPoly lambda = VectorPoly::diagonal(spec.lambdas());
    const VectorPoly phi_lambda = compose(phi, lambda, max_degree);
    VectorPoly lambda_phi(n);
    for (std::size_t j = 0; j < n; ++j) {
        lambda_phi[j] = scale(phi[j], spec[j]);
    }
    VectorPoly nonlinear(n);
    for (int k = 2; k <= max_degree; ++k) {
        const VectorPoly lower = compose(nonlinear, phi, k);
        nonlinear += homogeneous_part(phi_lambda, k) - homogeneous_part(lambda_phi, k) - homogeneous_part(lower, k);
    }
    return lambda + nonlinear;
}

/// Spectrum with |lambda_i| in [lo, hi] and every |mu_{j,alpha}|, 2 <= |alpha| <= order, at least `gap`.
inline Spectrum random_nonresonant(std::size_t n, double lo, double hi, int order, double gap, Rand& rng,
                                   bool real = false)
{
    for (;;) {
        CVector l(n);
        for (auto& c : l) {
            c = real ? complex_t(rng.real(lo, hi) * (rng.real(0, 1) < 0.5 ? -1 : 1)) : rng.polar(lo, hi);
        }
        Spectrum s(l);
        if (check_resonance(s, order).min_abs_mu >= gap) {
            return s;
        }
    }
}

inline double max_abs_diff(const CVector& a, const CVector& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
    }
    return d;
}

} // namespace koopnf::test
