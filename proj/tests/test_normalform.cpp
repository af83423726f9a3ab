#include <doctest.h>

#include "support.hpp"

using namespace koopnf;
using namespace koopnf::test;

TEST_CASE("lie_solve on the worked 1D system gives -4")
{
    VectorPoly r(1);
    r.add_term(0, MultiIndex{2}, 1.0);
    const VectorPoly q = lie_solve(r, worked_1d_spectrum());
    CHECK(q[0].coeff(MultiIndex{2}) == complex_t(-4.0));
    CHECK(q.term_count() == 1);
}

TEST_CASE("lie_solve input checks")
{
    const Spectrum s(CVector{0.5, 0.3});
    CHECK(lie_solve(VectorPoly(2), s).is_zero());
    VectorPoly mixed(2);
    mixed.add_term(0, MultiIndex{2, 0}, 1.0);
    mixed.add_term(0, MultiIndex{3, 0}, 1.0);
    CHECK_THROWS_AS(lie_solve(mixed, s), std::invalid_argument);
    VectorPoly linear(2);
    linear.add_term(0, MultiIndex{1, 0}, 1.0);
    CHECK_THROWS_AS(lie_solve(linear, s), std::invalid_argument);
}

TEST_CASE("lie_solve raises on a resonant coefficient")
{
    const Spectrum s(CVector{0.5, 0.25});
    VectorPoly r(2);
    r.add_term(1, MultiIndex{2, 0}, 1.0);
    try {
        lie_solve(r, s, kDefaultResonanceTol, kDefaultNearResonanceTol, nullptr, 2);
        FAIL("expected ResonanceError");
    } catch (const ResonanceError& e) {
        CHECK(e.component() == 1);
        CHECK(e.alpha() == MultiIndex{2, 0});
        CHECK(e.stage() == 2);
        CHECK(e.mu() == complex_t(0.0));
    }
    // The same (j, alpha) with a zero coefficient is not an obstruction.
    VectorPoly ok(2);
    ok.add_term(0, MultiIndex{2, 0}, 1.0);
    CHECK_NOTHROW(lie_solve(ok, s));
}

TEST_CASE("lie_solve records near-resonant divisions")
{
    const Spectrum s(CVector{0.5, 0.25 + 1e-6});
    VectorPoly r(2);
    r.add_term(1, MultiIndex{2, 0}, 1.0);
    std::vector<ResonanceEntry> near;
    const VectorPoly q = lie_solve(r, s, kDefaultResonanceTol, kDefaultNearResonanceTol, &near);
    CHECK(near.size() == 1);
    CHECK(std::abs(q[1].coeff(MultiIndex{2, 0}) + 1e6) < 1e-3);
}

TEST_CASE("homological identity for random right-hand sides")
{
    Rand rng(10);
    for (int c = 0; c < 30; ++c) {
        const std::size_t n = static_cast<std::size_t>(1 + c % 3);
        const int m = 2 + c % 4;
        const Spectrum s = random_nonresonant(n, 0.2, 0.9, m, 1e-3, rng);
        const VectorPoly r = random_vector(n, m, m, rng);
        const VectorPoly q = lie_solve(r, s);
        VectorPoly lhs = compose(q, VectorPoly::diagonal(s.lambdas()));
        for (std::size_t j = 0; j < n; ++j) {
            lhs[j] -= scale(q[j], s[j]);
        }
        CHECK((lhs - r).max_abs_coeff() <= 1e-12 * r.max_abs_coeff());
    }
}

TEST_CASE("series_inverse of x + x^2 gives the Catalan numbers")
{
    VectorPoly phi = VectorPoly::identity(1);
    phi.add_term(0, MultiIndex{2}, 1.0);
    const VectorPoly inv = series_inverse(phi, 6);
    const double catalan[] = {1, 1, 2, 5, 14, 42};
    for (int k = 1; k <= 6; ++k) {
        const double sign = (k % 2 == 1) ? 1.0 : -1.0;
        CHECK(inv[0].coeff(MultiIndex{k}) == complex_t(sign * catalan[k - 1]));
    }
    CHECK(inv.degree() == 6);
}

TEST_CASE("series_inverse is a two-sided inverse up to the truncation degree")
{
    Rand rng(11);
    for (int c = 0; c < 15; ++c) {
        const std::size_t n = static_cast<std::size_t>(1 + c % 3);
        const int d = 3 + c % 3;
        const VectorPoly phi = VectorPoly::identity(n) + random_vector(n, 2, 3, rng);
        const VectorPoly inv = series_inverse(phi, d);
        const VectorPoly id = VectorPoly::identity(n);
        CHECK((compose(phi, inv, d) - id).max_abs_coeff() < 1e-11);
        CHECK((compose(inv, phi, d) - id).max_abs_coeff() < 1e-11);
    }
}

TEST_CASE("series_inverse of I + Q_m has no terms in degrees m+1..2m-2")
{
    Rand rng(12);
    for (int m = 3; m <= 5; ++m) {
        const VectorPoly q = random_vector(2, m, m, rng);
        const VectorPoly inv = series_inverse(VectorPoly::identity(2) + q, 2 * m - 1);
        for (int k = m + 1; k <= 2 * m - 2; ++k) {
            CHECK(homogeneous_part(inv, k).is_zero());
        }
        CHECK(homogeneous_part(inv, m) == -q);
        CHECK_FALSE(homogeneous_part(inv, 2 * m - 1).is_zero());
    }
}

TEST_CASE("series_inverse preconditions")
{
    VectorPoly bad = VectorPoly::diagonal(CVector{2.0});
    CHECK_THROWS_AS(series_inverse(bad, 3), std::invalid_argument);
    VectorPoly shifted = VectorPoly::identity(1);
    shifted.add_term(0, MultiIndex{0}, 1.0);
    CHECK_THROWS_AS(series_inverse(shifted, 3), std::invalid_argument);
    CHECK_THROWS_AS(series_inverse(VectorPoly::identity(1), 0), std::invalid_argument);
}

TEST_CASE("epsilon_bound")
{
    CHECK(epsilon_bound(VectorPoly(2), 0.5, 100, 0) == 1.0);
    VectorPoly q(1);
    q.add_term(0, MultiIndex{2}, 1.0);
    CHECK(std::abs(epsilon_bound(q, 0.5, 100, 0) - 0.25) < 1e-15);
    VectorPoly c(1);
    c.add_term(0, MultiIndex{3}, 8.0);
    CHECK(std::abs(epsilon_bound(c, 0.6, 100, 0) - std::sqrt(0.6 / 24.0)) < 1e-15);
    VectorPoly tiny(1);
    tiny.add_term(0, MultiIndex{2}, 1e-3);
    CHECK(epsilon_bound(tiny, 0.5, 100, 0) == 1.0);
    CHECK_THROWS_AS(epsilon_bound(q, 1.0, 100, 0), std::invalid_argument);
    CHECK_THROWS_AS(epsilon_bound(q, 0.0, 100, 0), std::invalid_argument);
}

TEST_CASE("pipeline on the worked 1D system")
{
    // Symbolic stage-by-stage expansion: q_2 = -4, q_3 = 64/3, q_4 = 256/7, q_5 = 6144/5.
    const auto seq = run(worked_1d(), worked_1d_spectrum(), 5);
    REQUIRE(seq.stages.size() == 4);
    const double want[] = {-4.0, 64.0 / 3.0, 256.0 / 7.0, 6144.0 / 5.0};
    for (int m = 2; m <= 5; ++m) {
        const complex_t q = seq.stage(m).Q[0].coeff(MultiIndex{m});
        CHECK(std::abs(q - want[m - 2]) <= 1e-12 * std::abs(want[m - 2]));
        CHECK(seq.stage(m).Q.is_homogeneous_of(m));
        CHECK(max_abs_in_degrees(seq.stage(m).T_after, 2, m) <= 1e-12);
        CHECK(seq.stage(m).epsilon > 0.0);
        CHECK(seq.stage(m).epsilon <= 1.0);
    }
    CHECK(max_abs_in_degrees(seq.final_map(), 2, 5) <= 1e-10);
    CHECK(std::abs(seq.stage(2).epsilon - 0.0625) < 1e-15);
    CHECK(seq.min_epsilon(4) == std::min({seq.stage(2).epsilon, seq.stage(3).epsilon, seq.stage(4).epsilon}));
    CHECK_THROWS_AS(seq.stage(6), std::out_of_range);
}

TEST_CASE("pipeline recovers planted changes of variables")
{
    for (std::uint64_t s = 1; s <= 5; ++s) {
        Rand rng(100 + s);
        const Spectrum spec = random_nonresonant(2, 0.2, 0.8, 4, 1e-2, rng);
        const VectorPoly q2 = random_vector(2, 2, 2, rng);
        const VectorPoly q3 = random_vector(2, 3, 3, rng);
        const VectorPoly id = VectorPoly::identity(2);
        const VectorPoly t = forward_conjugate(compose(id + q2, id + q3), spec, 5);
        const auto seq = run(t, spec, 5);
        CHECK((seq.stage(2).Q - q2).max_abs_coeff() < 1e-10);
        CHECK((seq.stage(3).Q - q3).max_abs_coeff() < 1e-10);
        CHECK(seq.stage(4).Q.max_abs_coeff() < 1e-10);
    }
}

TEST_CASE("tau is the ordered composition of the stages")
{
    const auto seq = run(generic_2d(), generic_2d_spectrum(), 5);
    const VectorPoly id = VectorPoly::identity(2);
    CHECK(tau(seq, 2) == id + seq.stage(2).Q);
    const VectorPoly t3 = compose(id + seq.stage(2).Q, id + seq.stage(3).Q, 5);
    CHECK((tau(seq, 3) - t3).max_abs_coeff() < 1e-14);
    CHECK(tau(seq, 4, 5) == tau(seq, 4));
    CHECK(tau(seq, 4, 3) == truncate(tau(seq, 4), 3));
    CHECK_THROWS_AS(tau(seq, 1), std::out_of_range);
    CHECK_THROWS_AS(tau(seq, 6), std::out_of_range);
}

TEST_CASE("tau conjugates T to the truncated T_m")
{
    const VectorPoly t = generic_2d();
    const auto seq = run(t, generic_2d_spectrum(), 5);
    for (int m = 2; m <= 5; ++m) {
        const VectorPoly tm = tau(seq, m);
        const VectorPoly lhs = compose(t, tm, 5);
        const VectorPoly rhs = compose(tm, seq.stage(m).T_after, 5);
        CHECK((lhs - rhs).max_abs_coeff() <= 1e-10 * std::max(1.0, lhs.max_abs_coeff()));
    }
}

TEST_CASE("pipeline preconditions")
{
    const Spectrum s(CVector{0.5});
    CHECK_THROWS_AS(run(worked_1d(), s, 1), std::invalid_argument);

    VectorPoly shifted = worked_1d();
    shifted.add_term(0, MultiIndex{0}, 0.1);
    CHECK_THROWS_AS(run(shifted, s, 3), std::invalid_argument);

    CHECK_THROWS_AS(run(worked_1d(), Spectrum(CVector{0.6}), 3), std::invalid_argument);

    VectorPoly unstable = VectorPoly::diagonal(CVector{1.5});
    unstable.add_term(0, MultiIndex{2}, 1.0);
    CHECK_THROWS_AS(run(unstable, Spectrum(CVector{1.5}), 3), std::invalid_argument);
    NormalFormOptions allow;
    allow.allow_unstable = true;
    CHECK_NOTHROW(run(unstable, Spectrum(CVector{1.5}), 3, allow));

    CHECK_THROWS_AS(normal_form_step(worked_1d(), 2, s, 4), std::invalid_argument);
}

TEST_CASE("pipeline resonance abort names the stage")
{
    const Spectrum s(CVector{0.5, 0.25});
    VectorPoly t = VectorPoly::diagonal(s.lambdas());
    t.add_term(1, MultiIndex{2, 0}, 0.3);
    try {
        run(t, s, 4);
        FAIL("expected ResonanceError");
    } catch (const ResonanceError& e) {
        CHECK(e.stage() == 2);
        CHECK(e.component() == 1);
        CHECK(e.alpha() == MultiIndex{2, 0});
        CHECK(e.coeff() == complex_t(0.3));
    }
    VectorPoly benign = VectorPoly::diagonal(s.lambdas());
    benign.add_term(0, MultiIndex{2, 0}, 0.3);
    benign.add_term(0, MultiIndex{0, 3}, 0.2);
    CHECK_NOTHROW(run(benign, s, 4));
}

TEST_CASE("pipeline is deterministic")
{
    const auto a = run(generic_2d(), generic_2d_spectrum(), 5);
    const auto b = run(generic_2d(), generic_2d_spectrum(), 5);
    for (int m = 2; m <= 5; ++m) {
        CHECK(a.stage(m).Q == b.stage(m).Q);
        CHECK(a.stage(m).epsilon == b.stage(m).epsilon);
    }
}
