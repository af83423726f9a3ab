#pragma once

// Sparse multivariate polynomials over C in eigen-coordinates.
//
// A ScalarPoly is a finite map from exponent vectors to complex coefficients,
// kept in graded-lexicographic order. A VectorPoly is an n-tuple of those,
// component j being the coefficient of the j-th eigenvector. All summations
// walk terms in that order, so results are bit-reproducible.

#include <compare>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace koopnf {

using complex_t = std::complex<double>;
using CVector = std::vector<complex_t>;

/// Sentinel degree meaning "do not truncate".
inline constexpr int kNoTruncation = std::numeric_limits<int>::max();

/// Max modulus of the coordinates (the l-infinity norm used throughout).
double norm_inf(std::span<const complex_t> x);

class MultiIndex
{
public:
    MultiIndex() = default;
    /// The zero index of length `dim`.
    explicit MultiIndex(std::size_t dim);
    explicit MultiIndex(std::vector<int> exponents);
    MultiIndex(std::initializer_list<int> exponents);

    static MultiIndex unit(std::size_t dim, std::size_t i, int power = 1);

    std::size_t dim() const noexcept { return exps_.size(); }
    int order() const noexcept { return order_; }
    int operator[](std::size_t i) const { return exps_[i]; }
    std::span<const int> exponents() const noexcept { return exps_; }

    MultiIndex operator+(const MultiIndex& other) const;

    bool operator==(const MultiIndex& other) const noexcept { return exps_ == other.exps_; }
    // Graded: lower order first; within an order, larger leading exponents first
    // (x1^2 < x1 x2 < x2^2).
    std::strong_ordering operator<=>(const MultiIndex& other) const noexcept;

    std::string to_string() const;

private:
    std::vector<int> exps_;
    int order_ = 0;
};

/// All multi-indices of length `dim` and total order `order`, in graded-lex order.
std::vector<MultiIndex> multi_indices_of_order(std::size_t dim, int order);

class ScalarPoly
{
public:
    using TermMap = std::map<MultiIndex, complex_t>;

    explicit ScalarPoly(std::size_t dim = 0) : dim_(dim) {}

    static ScalarPoly constant(std::size_t dim, complex_t c);
    /// The coordinate functional phi_i (0-based).
    static ScalarPoly coordinate(std::size_t dim, std::size_t i);

    std::size_t dim() const noexcept { return dim_; }
    const TermMap& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool is_zero() const noexcept { return terms_.empty(); }

    /// Max |alpha| over stored terms; -1 for the zero polynomial.
    int degree() const noexcept;
    /// Min |alpha| over stored terms; -1 for the zero polynomial.
    int low_degree() const noexcept;
    /// True when every stored term has order k (the zero polynomial is homogeneous of every order).
    bool is_homogeneous_of(int k) const noexcept;

    complex_t coeff(const MultiIndex& alpha) const;
    double max_abs_coeff() const noexcept;

    /// Accumulates `c` onto the coefficient of `alpha`; exact zeros are dropped.
    void add_term(const MultiIndex& alpha, complex_t c);

    ScalarPoly& operator+=(const ScalarPoly& q);
    ScalarPoly& operator-=(const ScalarPoly& q);
    ScalarPoly& operator*=(complex_t c);

    bool operator==(const ScalarPoly& other) const = default;

private:
    void check_dim(const MultiIndex& alpha) const;

    std::size_t dim_ = 0;
    TermMap terms_;
};

ScalarPoly monomial(std::size_t dim, const MultiIndex& alpha, complex_t coeff);
ScalarPoly add(const ScalarPoly& p, const ScalarPoly& q);
ScalarPoly subtract(const ScalarPoly& p, const ScalarPoly& q);
ScalarPoly scale(const ScalarPoly& p, complex_t c);
/// Product truncated to total degree `max_degree`.
ScalarPoly multiply(const ScalarPoly& p, const ScalarPoly& q, int max_degree = kNoTruncation);

ScalarPoly operator+(const ScalarPoly& p, const ScalarPoly& q);
ScalarPoly operator-(const ScalarPoly& p, const ScalarPoly& q);
ScalarPoly operator-(const ScalarPoly& p);
ScalarPoly operator*(const ScalarPoly& p, const ScalarPoly& q);
ScalarPoly operator*(complex_t c, const ScalarPoly& p);

complex_t evaluate(const ScalarPoly& p, std::span<const complex_t> x);
ScalarPoly homogeneous_part(const ScalarPoly& p, int k);
ScalarPoly truncate(const ScalarPoly& p, int max_degree);

class VectorPoly
{
public:
    VectorPoly() = default;
    /// The zero map on C^dim.
    explicit VectorPoly(std::size_t dim);
    explicit VectorPoly(std::vector<ScalarPoly> components);

    static VectorPoly identity(std::size_t dim);
    /// x -> diag(d) x.
    static VectorPoly diagonal(std::span<const complex_t> d);
    /// x -> M x for a row-major dim x dim matrix.
    static VectorPoly linear(std::size_t dim, std::span<const complex_t> row_major);

    std::size_t dim() const noexcept { return comps_.size(); }
    const ScalarPoly& operator[](std::size_t j) const { return comps_.at(j); }
    ScalarPoly& operator[](std::size_t j) { return comps_.at(j); }
    const std::vector<ScalarPoly>& components() const noexcept { return comps_; }

    int degree() const noexcept;
    int low_degree() const noexcept;
    bool is_zero() const noexcept;
    bool is_homogeneous_of(int k) const noexcept;
    double max_abs_coeff() const noexcept;
    std::size_t term_count() const noexcept;

    void add_term(std::size_t component, const MultiIndex& alpha, complex_t c);

    VectorPoly& operator+=(const VectorPoly& q);
    VectorPoly& operator-=(const VectorPoly& q);

    bool operator==(const VectorPoly& other) const = default;

private:
    std::vector<ScalarPoly> comps_;
};

VectorPoly operator+(const VectorPoly& p, const VectorPoly& q);
VectorPoly operator-(const VectorPoly& p, const VectorPoly& q);
VectorPoly operator-(const VectorPoly& p);
VectorPoly scale(const VectorPoly& p, complex_t c);

CVector evaluate_vec(const VectorPoly& p, std::span<const complex_t> x);
VectorPoly homogeneous_part(const VectorPoly& p, int k);
VectorPoly truncate(const VectorPoly& p, int max_degree);

/// (Q o P) truncated to degree `max_degree`. Powers P^alpha are built by
/// truncated multiplication and memoized across components of Q.
VectorPoly compose(const VectorPoly& q, const VectorPoly& p, int max_degree = kNoTruncation);
/// Scalar observable f o P truncated to `max_degree`.
ScalarPoly compose(const ScalarPoly& f, const VectorPoly& p, int max_degree = kNoTruncation);

/// Symmetric m-linear form of a homogeneous degree-m polynomial, recovered by polarization:
///   A(x_1..x_m) = 1/(2^m m!) sum_{eps in {+-1}^m} eps_1..eps_m P(sum eps_i x_i).
complex_t polarize(const ScalarPoly& p, std::span<const CVector> xs);

/// Deterministic generator shared by all sampling code. mt19937_64 output is fixed by the
/// standard; doubles come from the top 53 bits rather than a library distribution.
class SampleRng
{
public:
    explicit SampleRng(std::uint64_t seed);
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform point on the unit sphere of the l-infinity norm of C^dim.
    CVector sphere_point(std::size_t dim);
    /// Complex number with modulus in [lo, hi] and uniform phase.
    complex_t annulus_point(double lo, double hi);

private:
    std::mt19937_64 engine_;
};

/// Lower estimate of sup{ ||P(x)|| : ||x|| <= 1 } from `samples` points of the unit sphere.
double sup_norm_estimate(const VectorPoly& p, int samples, std::uint64_t seed);

std::string to_string(const ScalarPoly& p);
std::string to_string(const VectorPoly& p);

} // namespace koopnf
