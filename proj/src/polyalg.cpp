#include "koopnf/polyalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace koopnf {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what)
{
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs "
                                    + std::to_string(b) + ")");
    }
}

// x_i^k for k = 0..max_exp, built by repeated multiplication.
std::vector<CVector> power_table(std::span<const complex_t> x, int max_exp)
{
    std::vector<CVector> table(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        table[i].resize(static_cast<std::size_t>(max_exp) + 1);
        table[i][0] = 1.0;
        for (int k = 1; k <= max_exp; ++k) {
            table[i][k] = table[i][k - 1] * x[i];
        }
    }
    return table;
}

int max_exponent(const ScalarPoly& p)
{
    int e = 0;
    for (const auto& [alpha, c] : p.terms()) {
        for (int a : alpha.exponents()) {
            e = std::max(e, a);
        }
    }
    return e;
}

complex_t evaluate_with_table(const ScalarPoly& p, const std::vector<CVector>& table)
{
    complex_t sum = 0.0;
    for (const auto& [alpha, c] : p.terms()) {
        complex_t term = c;
        for (std::size_t i = 0; i < alpha.dim(); ++i) {
            if (alpha[i] != 0) {
                term *= table[i][alpha[i]];
            }
        }
        sum += term;
    }
    return sum;
}

// Truncated powers P^alpha of the components of a vector polynomial.
class PowerCache
{
public:
    PowerCache(const VectorPoly& p, int max_degree) : p_(p), max_degree_(max_degree)
    {
        low_.reserve(p.dim());
        for (const auto& c : p.components()) {
            low_.push_back(c.low_degree());
        }
    }

    const ScalarPoly& power(const MultiIndex& alpha)
    {
        if (auto it = cache_.find(alpha); it != cache_.end()) {
            return it->second;
        }
        ScalarPoly result(p_.dim());
        if (alpha.order() == 0) {
            result = ScalarPoly::constant(p_.dim(), 1.0);
        } else if (!vanishes_below_cap(alpha)) {
            std::size_t i = alpha.dim();
            while (alpha[--i] == 0) {
            }
            std::vector<int> base(alpha.exponents().begin(), alpha.exponents().end());
            --base[i];
            // std::map references stay valid across the recursive insertions.
            const ScalarPoly& lower = power(MultiIndex(std::move(base)));
            result = multiply(lower, p_[i], max_degree_);
        }
        return cache_.emplace(alpha, std::move(result)).first->second;
    }

private:
    // True when P^alpha is zero or has no terms of degree <= max_degree.
    bool vanishes_below_cap(const MultiIndex& alpha) const
    {
        long long low = 0;
        for (std::size_t i = 0; i < alpha.dim(); ++i) {
            if (alpha[i] == 0) {
                continue;
            }
            if (low_[i] < 0) {
                return true;
            }
            low += static_cast<long long>(alpha[i]) * low_[i];
        }
        return max_degree_ != kNoTruncation && low > max_degree_;
    }

    const VectorPoly& p_;
    int max_degree_;
    std::vector<int> low_;
    std::map<MultiIndex, ScalarPoly> cache_;
};

ScalarPoly compose_with_cache(const ScalarPoly& f, PowerCache& powers)
{
    ScalarPoly acc(f.dim());
    for (const auto& [alpha, c] : f.terms()) {
        for (const auto& [beta, cb] : powers.power(alpha).terms()) {
            acc.add_term(beta, c * cb);
        }
    }
    return acc;
}

void append_coeff(std::ostringstream& os, complex_t c)
{
    os << '(' << c.real() << (c.imag() < 0 ? "" : "+") << c.imag() << "i)";
}

} // namespace

double norm_inf(std::span<const complex_t> x)
{
    double m = 0.0;
    for (const auto& v : x) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

// ---------------------------------------------------------------------------------------------
// MultiIndex
// ---------------------------------------------------------------------------------------------

MultiIndex::MultiIndex(std::size_t dim) : exps_(dim, 0) {}

MultiIndex::MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents))
{
    for (int e : exps_) {
        if (e < 0) {
            throw std::invalid_argument("MultiIndex: negative exponent");
        }
        order_ += e;
    }
}

MultiIndex::MultiIndex(std::initializer_list<int> exponents) : MultiIndex(std::vector<int>(exponents)) {}

MultiIndex MultiIndex::unit(std::size_t dim, std::size_t i, int power)
{
    if (i >= dim) {
        throw std::out_of_range("MultiIndex::unit: index out of range");
    }
    std::vector<int> e(dim, 0);
    e[i] = power;
    return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const
{
    require_same_dim(dim(), other.dim(), "MultiIndex::operator+");
    MultiIndex r = *this;
    for (std::size_t i = 0; i < exps_.size(); ++i) {
        r.exps_[i] += other.exps_[i];
    }
    r.order_ += other.order_;
    return r;
}

std::strong_ordering MultiIndex::operator<=>(const MultiIndex& other) const noexcept
{
    if (auto c = order_ <=> other.order_; c != 0) {
        return c;
    }
    if (auto c = exps_.size() <=> other.exps_.size(); c != 0) {
        return c;
    }
    for (std::size_t i = 0; i < exps_.size(); ++i) {
        if (exps_[i] != other.exps_[i]) {
            return other.exps_[i] <=> exps_[i];
        }
    }
    return std::strong_ordering::equal;
}

std::string MultiIndex::to_string() const
{
    std::string s = "(";
    for (std::size_t i = 0; i < exps_.size(); ++i) {
        if (i != 0) {
            s += ',';
        }
        s += std::to_string(exps_[i]);
    }
    return s + ')';
}

std::vector<MultiIndex> multi_indices_of_order(std::size_t dim, int order)
{
    std::vector<MultiIndex> out;
    if (order < 0) {
        return out;
    }
    if (dim == 0) {
        if (order == 0) {
            out.emplace_back(std::size_t{0});
        }
        return out;
    }
    // Descending lexicographic walk, which is the graded-lex order within a fixed order.
    std::vector<int> e(dim, 0);
    auto rec = [&](auto&& self, std::size_t i, int remaining) -> void {
        if (i + 1 == dim) {
            e[i] = remaining;
            out.emplace_back(e);
            return;
        }
        for (int k = remaining; k >= 0; --k) {
            e[i] = k;
            self(self, i + 1, remaining - k);
        }
    };
    rec(rec, 0, order);
    return out;
}

// ---------------------------------------------------------------------------------------------
// ScalarPoly
// ---------------------------------------------------------------------------------------------

ScalarPoly ScalarPoly::constant(std::size_t dim, complex_t c)
{
    ScalarPoly p(dim);
    p.add_term(MultiIndex(dim), c);
    return p;
}

ScalarPoly ScalarPoly::coordinate(std::size_t dim, std::size_t i)
{
    ScalarPoly p(dim);
    p.add_term(MultiIndex::unit(dim, i), 1.0);
    return p;
}

int ScalarPoly::degree() const noexcept
{
    return terms_.empty() ? -1 : terms_.rbegin()->first.order();
}

int ScalarPoly::low_degree() const noexcept
{
    return terms_.empty() ? -1 : terms_.begin()->first.order();
}

bool ScalarPoly::is_homogeneous_of(int k) const noexcept
{
    return terms_.empty() || (low_degree() == k && degree() == k);
}

complex_t ScalarPoly::coeff(const MultiIndex& alpha) const
{
    check_dim(alpha);
    auto it = terms_.find(alpha);
    return it == terms_.end() ? complex_t{} : it->second;
}

double ScalarPoly::max_abs_coeff() const noexcept
{
    double m = 0.0;
    for (const auto& [alpha, c] : terms_) {
        m = std::max(m, std::abs(c));
    }
    return m;
}

void ScalarPoly::check_dim(const MultiIndex& alpha) const
{
    require_same_dim(dim_, alpha.dim(), "ScalarPoly");
}

void ScalarPoly::add_term(const MultiIndex& alpha, complex_t c)
{
    check_dim(alpha);
    if (c == complex_t{}) {
        return;
    }
    auto [it, inserted] = terms_.try_emplace(alpha, c);
    if (!inserted) {
        it->second += c;
        if (it->second == complex_t{}) {
            terms_.erase(it);
        }
    }
}

ScalarPoly& ScalarPoly::operator+=(const ScalarPoly& q)
{
    require_same_dim(dim_, q.dim_, "ScalarPoly::operator+=");
    for (const auto& [alpha, c] : q.terms_) {
        add_term(alpha, c);
    }
    return *this;
}

ScalarPoly& ScalarPoly::operator-=(const ScalarPoly& q)
{
    require_same_dim(dim_, q.dim_, "ScalarPoly::operator-=");
    for (const auto& [alpha, c] : q.terms_) {
        add_term(alpha, -c);
    }
    return *this;
}

ScalarPoly& ScalarPoly::operator*=(complex_t c)
{
    if (c == complex_t{}) {
        terms_.clear();
        return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
        it->second *= c;
        it = it->second == complex_t{} ? terms_.erase(it) : std::next(it);
    }
    return *this;
}

ScalarPoly monomial(std::size_t dim, const MultiIndex& alpha, complex_t coeff)
{
    ScalarPoly p(dim);
    p.add_term(alpha, coeff);
    return p;
}

ScalarPoly add(const ScalarPoly& p, const ScalarPoly& q)
{
    ScalarPoly r = p;
    r += q;
    return r;
}

ScalarPoly subtract(const ScalarPoly& p, const ScalarPoly& q)
{
    ScalarPoly r = p;
    r -= q;
    return r;
}

ScalarPoly scale(const ScalarPoly& p, complex_t c)
{
    ScalarPoly r = p;
    r *= c;
    return r;
}

ScalarPoly multiply(const ScalarPoly& p, const ScalarPoly& q, int max_degree)
{
    require_same_dim(p.dim(), q.dim(), "multiply");
    ScalarPoly r(p.dim());
    for (const auto& [a, ca] : p.terms()) {
        for (const auto& [b, cb] : q.terms()) {
            // q's terms are sorted by order, so the rest are too high as well.
            if (max_degree != kNoTruncation && a.order() + b.order() > max_degree) {
                break;
            }
            r.add_term(a + b, ca * cb);
        }
    }
    return r;
}

ScalarPoly operator+(const ScalarPoly& p, const ScalarPoly& q) { return add(p, q); }
ScalarPoly operator-(const ScalarPoly& p, const ScalarPoly& q) { return subtract(p, q); }
ScalarPoly operator-(const ScalarPoly& p) { return scale(p, -1.0); }
ScalarPoly operator*(const ScalarPoly& p, const ScalarPoly& q) { return multiply(p, q); }
ScalarPoly operator*(complex_t c, const ScalarPoly& p) { return scale(p, c); }

complex_t evaluate(const ScalarPoly& p, std::span<const complex_t> x)
{
    require_same_dim(p.dim(), x.size(), "evaluate");
    return evaluate_with_table(p, power_table(x, max_exponent(p)));
}

ScalarPoly homogeneous_part(const ScalarPoly& p, int k)
{
    if (k < 0) {
        throw std::invalid_argument("homogeneous_part: negative degree");
    }
    ScalarPoly r(p.dim());
    for (const auto& [alpha, c] : p.terms()) {
        if (alpha.order() == k) {
            r.add_term(alpha, c);
        }
    }
    return r;
}

ScalarPoly truncate(const ScalarPoly& p, int max_degree)
{
    if (max_degree < 0) {
        throw std::invalid_argument("truncate: negative degree");
    }
    ScalarPoly r(p.dim());
    for (const auto& [alpha, c] : p.terms()) {
        if (alpha.order() > max_degree) {
            break;
        }
        r.add_term(alpha, c);
    }
    return r;
}

// ---------------------------------------------------------------------------------------------
// VectorPoly
// ---------------------------------------------------------------------------------------------

VectorPoly::VectorPoly(std::size_t dim) : comps_(dim, ScalarPoly(dim)) {}

VectorPoly::VectorPoly(std::vector<ScalarPoly> components) : comps_(std::move(components))
{
    for (const auto& c : comps_) {
        require_same_dim(c.dim(), comps_.size(), "VectorPoly");
    }
}

VectorPoly VectorPoly::identity(std::size_t dim)
{
    VectorPoly p(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        p.add_term(j, MultiIndex::unit(dim, j), 1.0);
    }
    return p;
}

VectorPoly VectorPoly::diagonal(std::span<const complex_t> d)
{
    VectorPoly p(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) {
        p.add_term(j, MultiIndex::unit(d.size(), j), d[j]);
    }
    return p;
}

VectorPoly VectorPoly::linear(std::size_t dim, std::span<const complex_t> row_major)
{
    require_same_dim(dim * dim, row_major.size(), "VectorPoly::linear");
    VectorPoly p(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < dim; ++i) {
            p.add_term(j, MultiIndex::unit(dim, i), row_major[j * dim + i]);
        }
    }
    return p;
}

int VectorPoly::degree() const noexcept
{
    int d = -1;
    for (const auto& c : comps_) {
        d = std::max(d, c.degree());
    }
    return d;
}

int VectorPoly::low_degree() const noexcept
{
    int d = -1;
    for (const auto& c : comps_) {
        const int l = c.low_degree();
        if (l >= 0 && (d < 0 || l < d)) {
            d = l;
        }
    }
    return d;
}

bool VectorPoly::is_zero() const noexcept
{
    return std::all_of(comps_.begin(), comps_.end(), [](const ScalarPoly& c) { return c.is_zero(); });
}

bool VectorPoly::is_homogeneous_of(int k) const noexcept
{
    return std::all_of(comps_.begin(), comps_.end(), [k](const ScalarPoly& c) { return c.is_homogeneous_of(k); });
}

double VectorPoly::max_abs_coeff() const noexcept
{
    double m = 0.0;
    for (const auto& c : comps_) {
        m = std::max(m, c.max_abs_coeff());
    }
    return m;
}

std::size_t VectorPoly::term_count() const noexcept
{
    std::size_t n = 0;
    for (const auto& c : comps_) {
        n += c.size();
    }
    return n;
}

void VectorPoly::add_term(std::size_t component, const MultiIndex& alpha, complex_t c)
{
    if (component >= comps_.size()) {
        throw std::out_of_range("VectorPoly::add_term: component out of range");
    }
    comps_[component].add_term(alpha, c);
}

VectorPoly& VectorPoly::operator+=(const VectorPoly& q)
{
    require_same_dim(dim(), q.dim(), "VectorPoly::operator+=");
    for (std::size_t j = 0; j < comps_.size(); ++j) {
        comps_[j] += q.comps_[j];
    }
    return *this;
}

VectorPoly& VectorPoly::operator-=(const VectorPoly& q)
{
    require_same_dim(dim(), q.dim(), "VectorPoly::operator-=");
    for (std::size_t j = 0; j < comps_.size(); ++j) {
        comps_[j] -= q.comps_[j];
    }
    return *this;
}

VectorPoly operator+(const VectorPoly& p, const VectorPoly& q)
{
    VectorPoly r = p;
    r += q;
    return r;
}

VectorPoly operator-(const VectorPoly& p, const VectorPoly& q)
{
    VectorPoly r = p;
    r -= q;
    return r;
}

VectorPoly operator-(const VectorPoly& p)
{
    return scale(p, -1.0);
}

VectorPoly scale(const VectorPoly& p, complex_t c)
{
    std::vector<ScalarPoly> comps;
    comps.reserve(p.dim());
    for (const auto& s : p.components()) {
        comps.push_back(scale(s, c));
    }
    return VectorPoly(std::move(comps));
}

CVector evaluate_vec(const VectorPoly& p, std::span<const complex_t> x)
{
    require_same_dim(p.dim(), x.size(), "evaluate_vec");
    int e = 0;
    for (const auto& c : p.components()) {
        e = std::max(e, max_exponent(c));
    }
    const auto table = power_table(x, e);
    CVector out(p.dim());
    for (std::size_t j = 0; j < p.dim(); ++j) {
        out[j] = evaluate_with_table(p[j], table);
    }
    return out;
}

VectorPoly homogeneous_part(const VectorPoly& p, int k)
{
    std::vector<ScalarPoly> comps;
    comps.reserve(p.dim());
    for (const auto& c : p.components()) {
        comps.push_back(homogeneous_part(c, k));
    }
    return VectorPoly(std::move(comps));
}

VectorPoly truncate(const VectorPoly& p, int max_degree)
{
    std::vector<ScalarPoly> comps;
    comps.reserve(p.dim());
    for (const auto& c : p.components()) {
        comps.push_back(truncate(c, max_degree));
    }
    return VectorPoly(std::move(comps));
}

VectorPoly compose(const VectorPoly& q, const VectorPoly& p, int max_degree)
{
    require_same_dim(q.dim(), p.dim(), "compose");
    if (max_degree < 0) {
        throw std::invalid_argument("compose: negative truncation degree");
    }
    PowerCache powers(p, max_degree);
    std::vector<ScalarPoly> comps;
    comps.reserve(q.dim());
    for (const auto& qj : q.components()) {
        comps.push_back(compose_with_cache(qj, powers));
    }
    return VectorPoly(std::move(comps));
}

ScalarPoly compose(const ScalarPoly& f, const VectorPoly& p, int max_degree)
{
    require_same_dim(f.dim(), p.dim(), "compose");
    if (max_degree < 0) {
        throw std::invalid_argument("compose: negative truncation degree");
    }
    PowerCache powers(p, max_degree);
    return compose_with_cache(f, powers);
}

complex_t polarize(const ScalarPoly& p, std::span<const CVector> xs)
{
    const int m = static_cast<int>(xs.size());
    if (!p.is_homogeneous_of(m)) {
        throw std::invalid_argument("polarize: polynomial is not homogeneous of degree "
                                    + std::to_string(m));
    }
    for (const auto& x : xs) {
        require_same_dim(p.dim(), x.size(), "polarize");
    }
    if (m == 0) {
        return evaluate(p, CVector(p.dim()));
    }
    if (m > 24) {
        throw std::invalid_argument("polarize: degree too large");
    }
    complex_t sum = 0.0;
    CVector point(p.dim());
    const unsigned long patterns = 1ul << m;
    for (unsigned long mask = 0; mask < patterns; ++mask) {
        std::fill(point.begin(), point.end(), complex_t{});
        int negatives = 0;
        for (int i = 0; i < m; ++i) {
            const bool neg = (mask >> i) & 1u;
            negatives += neg;
            for (std::size_t k = 0; k < point.size(); ++k) {
                point[k] += neg ? -xs[i][k] : xs[i][k];
            }
        }
        const complex_t v = evaluate(p, point);
        sum += (negatives % 2 == 0) ? v : -v;
    }
    double denom = static_cast<double>(patterns);
    for (int k = 2; k <= m; ++k) {
        denom *= k;
    }
    return sum / denom;
}

// ---------------------------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------------------------

SampleRng::SampleRng(std::uint64_t seed) : engine_(seed) {}

double SampleRng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

CVector SampleRng::sphere_point(std::size_t dim)
{
    CVector z(dim);
    if (dim == 0) {
        return z;
    }
    const auto face = std::min(dim - 1, static_cast<std::size_t>(uniform() * static_cast<double>(dim)));
    for (std::size_t i = 0; i < dim; ++i) {
        const double r = i == face ? 1.0 : std::sqrt(uniform());
        z[i] = std::polar(r, 2.0 * std::numbers::pi * uniform());
    }
    return z;
}

complex_t SampleRng::annulus_point(double lo, double hi)
{
    const double r = lo + (hi - lo) * uniform();
    return std::polar(r, 2.0 * std::numbers::pi * uniform());
}

double sup_norm_estimate(const VectorPoly& p, int samples, std::uint64_t seed)
{
    if (samples < 1) {
        throw std::invalid_argument("sup_norm_estimate: samples must be >= 1");
    }
    SampleRng rng(seed);
    double best = 0.0;
    for (int s = 0; s < samples; ++s) {
        const CVector x = rng.sphere_point(p.dim());
        best = std::max(best, norm_inf(evaluate_vec(p, x)));
    }
    return best;
}

std::string to_string(const ScalarPoly& p)
{
    if (p.is_zero()) {
        return "0";
    }
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& [alpha, c] : p.terms()) {
        if (!first) {
            os << " + ";
        }
        first = false;
        append_coeff(os, c);
        for (std::size_t i = 0; i < alpha.dim(); ++i) {
            if (alpha[i] == 1) {
                os << "*phi" << i + 1;
            } else if (alpha[i] > 1) {
                os << "*phi" << i + 1 << '^' << alpha[i];
            }
        }
    }
    return os.str();
}

std::string to_string(const VectorPoly& p)
{
    std::string s;
    for (std::size_t j = 0; j < p.dim(); ++j) {
        s += "e" + std::to_string(j + 1) + ": " + to_string(p[j]) + '\n';
    }
    return s;
}

} // namespace koopnf
