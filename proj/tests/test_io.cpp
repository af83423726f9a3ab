#include <doctest.h>

#include "support.hpp"

#include "koopnf/io.hpp"

using namespace koopnf;
using namespace koopnf::test;

namespace {

const char* kWorked = R"({"dim":1, "eigenvalues":[[0.5,0]], "terms":[{"component":1, "alpha":[2], "coeff":[1,0]}]})";

std::string error_of(const std::string& text)
{
    try {
        io::parse_description(text);
    } catch (const io::ParseError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("the worked 1D map parses to 0.5x + x^2")
{
    const auto loaded = io::to_map(io::parse_description(kWorked));
    CHECK(loaded.map == worked_1d());
    CHECK(loaded.spectrum.lambdas() == CVector{0.5});
    CHECK_FALSE(loaded.basis.has_value());
    CHECK(loaded.warnings.empty());
}

TEST_CASE("schema violations name the offending field")
{
    CHECK(error_of(R"({"dim":2, "eigenvalues":[[0.5,0],[0.3,0]],
        "terms":[{"component":1,"alpha":[2,0],"coeff":[1,0]},{"component":1,"alpha":[2],"coeff":[1,0]}]})")
              .find("terms[1].alpha") != std::string::npos);
    CHECK(error_of(R"({"dim":1, "eigenvalues":[[0.5,0]], "terms":[{"component":1,"alpha":[1],"coeff":[1,0]}]})")
              .find("linear terms belong in eigenvalues") != std::string::npos);
    CHECK(error_of(R"({"dim":1, "eigenvalues":[[0.5,0]], "extra":1})").find("extra") != std::string::npos);
    CHECK(error_of(R"({"dim":1, "eigenvalues":[[0.5,0]], "linear":[[[0.5,0]]]})").find("exactly one")
          != std::string::npos);
    CHECK(error_of(R"({"dim":1})").find("exactly one") != std::string::npos);
    CHECK(error_of(R"({"eigenvalues":[[0.5,0]]})").find("dim") != std::string::npos);
    CHECK(error_of(R"({"dim":1, "eigenvalues":[[0.5,0]], "terms":[{"component":2,"alpha":[2],"coeff":[1,0]}]})")
              .find("terms[0].component") != std::string::npos);
    CHECK(error_of(R"({"dim":1, "eigenvalues":[[0.5,0]], "terms":[{"component":1,"alpha":[2],"coeff":[1,0]},
        {"component":1,"alpha":[2],"coeff":[2,0]}]})")
              .find("duplicate") != std::string::npos);
    CHECK(error_of(R"({"dim":1, "eigenvalues":[[0.5]]})").find("eigenvalues[0]") != std::string::npos);
    CHECK(error_of(R"({"dim":1, "eigenvalues":[[0.5,0]], "terms":[{"component":1,"alpha":[2]}]})")
              .find("terms[0].coeff") != std::string::npos);
}

TEST_CASE("syntax errors report line and column")
{
    const std::string e = error_of("{\n  \"dim\": 1,\n  \"eigenvalues\": [[0.5, 0]\n}");
    CHECK(e.find("line 4") != std::string::npos);
    CHECK(e.find("column") != std::string::npos);
}

TEST_CASE("canonical emission round-trips byte for byte")
{
    const std::string messy = R"({"terms":[{"coeff":[0.25,-1],"alpha":[0,2],"component":2},
        {"alpha":[1,1],"component":1,"coeff":[0.1,0]},{"alpha":[2,0],"component":1,"coeff":[3,0]}],
        "metadata":{"name":"demo"},"eigenvalues":[[0.5,0],[0.3,0.1]],"dim":2})";
    const std::string canon = io::emit_description(io::parse_description(messy));
    CHECK(io::emit_description(io::parse_description(canon)) == canon);
    CHECK(canon.find("\"alpha\":[2,0]") < canon.find("\"alpha\":[1,1]"));
    CHECK(canon.back() == '\n');
    CHECK(canon.find("\"metadata\": {\"name\":\"demo\"}") != std::string::npos);
    const auto a = io::to_map(io::parse_description(messy));
    const auto b = io::to_map(io::parse_description(canon));
    CHECK(a.map == b.map);
}

TEST_CASE("a map given with a dense linear part is moved to eigen-coordinates")
{
    const std::string text = R"({"dim":2, "linear":[[[0.4,0],[0.2,0]],[[0.2,0],[0.4,0]]],
        "terms":[{"component":1,"alpha":[2,0],"coeff":[1,0]},{"component":2,"alpha":[1,1],"coeff":[-0.5,0]}]})";
    const auto desc = io::parse_description(text);
    const auto loaded = io::to_map(desc);
    REQUIRE(loaded.basis.has_value());
    CHECK(std::abs(loaded.spectrum[0] - 0.6) < 1e-14);
    CHECK(std::abs(loaded.spectrum[1] - 0.2) < 1e-14);
    const auto& v = loaded.basis->V;
    // Original T(x) = A x + N(x); check V^{-1} T(V z) against the loaded map.
    auto t_orig = [](const CVector& x) {
        return CVector{0.4 * x[0] + 0.2 * x[1] + x[0] * x[0], 0.2 * x[0] + 0.4 * x[1] - 0.5 * x[0] * x[1]};
    };
    const CVector z{0.03, complex_t(-0.02, 0.01)};
    Eigen::VectorXcd vz = v * Eigen::Map<const Eigen::VectorXcd>(z.data(), 2);
    const CVector tx = t_orig(CVector{vz[0], vz[1]});
    Eigen::VectorXcd back = loaded.basis->V_inv * Eigen::Map<const Eigen::VectorXcd>(tx.data(), 2);
    const CVector got = evaluate_vec(loaded.map, z);
    CHECK(std::abs(got[0] - back[0]) < 1e-14);
    CHECK(std::abs(got[1] - back[1]) < 1e-14);
    CHECK(homogeneous_part(loaded.map, 1) == VectorPoly::diagonal(loaded.spectrum.lambdas()));
}

TEST_CASE("an unstable fixed point is a warning, not an error")
{
    const auto loaded = io::to_map(io::parse_description(R"({"dim":1, "eigenvalues":[[1.5,0]]})"));
    REQUIRE(loaded.warnings.size() == 1);
    CHECK(loaded.warnings[0].find("1.5") != std::string::npos);
}

TEST_CASE("numbers are written in shortest round-trip form")
{
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(-4.0) == "-4");
    CHECK(io::format_double(-0.0) == "0");
    CHECK(io::format_double(1e-300) == "1e-300");
    const double third = 1.0 / 3.0;
    CHECK(std::stod(io::format_double(third)) == third);
}

TEST_CASE("flag value parsers")
{
    const auto g = io::parse_radii("0.03:0.001:6");
    CHECK(g.size() == 6);
    CHECK(g.front() == 0.03);
    CHECK(g.back() == 0.001);
    CHECK(io::parse_radii("0.1,0.05,0.01") == std::vector<double>{0.1, 0.05, 0.01});
    CHECK_THROWS_AS(io::parse_radii("0.1:0.01"), std::invalid_argument);
    CHECK_THROWS_AS(io::parse_radii("0.1,abc"), std::invalid_argument);
    CHECK_THROWS_AS(io::parse_radii("0.1:0.01:2.5"), std::invalid_argument);

    CHECK(io::parse_alpha("1,0,2") == MultiIndex{1, 0, 2});
    CHECK_THROWS_AS(io::parse_alpha("1,-1"), std::invalid_argument);
    CHECK_THROWS_AS(io::parse_alpha("1.5"), std::invalid_argument);

    CHECK(io::parse_interval("-0.2:0.2") == std::pair{-0.2, 0.2});
    CHECK_THROWS_AS(io::parse_interval("0.2"), std::invalid_argument);

    CHECK(io::parse_point("[[0.1,0],[0,-0.5]]") == CVector{0.1, complex_t(0.0, -0.5)});
    CHECK_THROWS_AS(io::parse_point("[0.1]"), std::invalid_argument);
    CHECK_THROWS_AS(io::parse_point("[[0.1,0]"), std::invalid_argument);
}

TEST_CASE("resonance CSV and JSON")
{
    const auto report = check_resonance(Spectrum(CVector{0.5, 0.25}), 2);
    const std::string csv = io::resonance_csv(report);
    CHECK(csv.rfind("j,alpha,mu_re,mu_im,abs_mu,status\n", 0) == 0);
    CHECK(csv.find("2,2;0,0,0,0,resonant\n") != std::string::npos);
    const auto j = io::to_json(report);
    CHECK(j["max_order"] == 2);
    REQUIRE(j["resonant"].size() == 1);
    CHECK(j["resonant"][0]["j"] == 2);
    CHECK(j["resonant"][0]["alpha"] == nlohmann::json::array({2, 0}));
    CHECK(j["entries"].size() == report.entries.size());
}

TEST_CASE("normal-form CSV and JSON")
{
    const auto seq = run(worked_1d(), worked_1d_spectrum(), 4);
    const std::string csv = io::normalform_csv(seq);
    CHECK(csv.rfind("m,epsilon,component,alpha,re,im\n", 0) == 0);
    CHECK(csv.find("2,0.062499999999999986,1,2,-4,0\n") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    const auto j = io::to_json(seq);
    CHECK(j["D"] == 4);
    CHECK(j["stages"].size() == 3);
    CHECK(j["stages"][0]["Q"][0]["coeff"][0] == -4.0);
    CHECK(j["tau_cache"].size() == 3);
    CHECK(io::to_json(seq, 100.0)["stages"][0]["Q"].empty());
}

TEST_CASE("study CSVs have a single header and a summary row")
{
    const VectorPoly t = worked_1d();
    const auto seq = run(t, worked_1d_spectrum(), 4);
    const auto st = residual_study(t, seq, 2, MultiIndex{1}, geometric_radii(0.03, 0.001, 6), 5, 0);
    const std::string csv = io::residual_csv(st);
    CHECK(csv.rfind("row,radius,max_residual,skipped,fitted_slope,fit_rsquared\n", 0) == 0);
    CHECK(csv.find("\nsummary,,,0,") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
    CHECK(csv == io::residual_csv(residual_study(t, seq, 2, MultiIndex{1}, geometric_radii(0.03, 0.001, 6), 5, 0)));
    CHECK(io::to_json(st)["records"].size() == 30);

    VectorPoly q(1);
    q.add_term(0, MultiIndex{2}, 1.0);
    const auto inv = inverse_asymptotics_study(q, geometric_radii(0.1, 0.001, 4), 5, 0);
    CHECK(io::inverse_csv(inv).rfind("row,radius,max_error,fitted_slope,fit_rsquared\n", 0) == 0);

    DensityTable table;
    table.rows.push_back({0, 1, 0.5, 1.0, false});
    table.rows.push_back({1, 2, 0.25, 1e13, true});
    CHECK(io::density_csv(table) == "degree,sup_error,condition_flag\n0,0.5,0\n1,0.25,1\n");
}
