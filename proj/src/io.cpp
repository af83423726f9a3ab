#include "koopnf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace koopnf::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what)
{
    throw ParseError(where + ": " + what);
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte)
{
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

complex_t parse_complex(const json& v, const std::string& where)
{
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        fail(where, "expected a [re, im] pair of numbers");
    }
    const complex_t c(v[0].get<double>(), v[1].get<double>());
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
        fail(where, "non-finite number");
    }
    return c;
}

std::size_t parse_positive_int(const json& v, const std::string& where)
{
    if (!v.is_number_integer() || v.get<long long>() < 1) {
        fail(where, "expected a positive integer");
    }
    return static_cast<std::size_t>(v.get<long long>());
}

double parse_number(const std::string& s, const std::string& what)
{
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first != last && *first == ' ') {
        ++first;
    }
    if (first != last && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw std::invalid_argument("cannot parse " + what + " '" + s + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

ordered_json complex_list(std::span<const complex_t> v)
{
    ordered_json a = ordered_json::array();
    for (const auto& c : v) {
        a.push_back(to_json(c));
    }
    return a;
}

std::string alpha_field(const MultiIndex& alpha)
{
    std::string s;
    for (std::size_t i = 0; i < alpha.dim(); ++i) {
        if (i != 0) {
            s += ';';
        }
        s += std::to_string(alpha[i]);
    }
    return s;
}

ordered_json alpha_json(const MultiIndex& alpha)
{
    return ordered_json(std::vector<int>(alpha.exponents().begin(), alpha.exponents().end()));
}

ordered_json entry_json(const ResonanceEntry& e)
{
    ordered_json j;
    j["j"] = e.j + 1;
    j["alpha"] = alpha_json(e.alpha);
    j["mu"] = to_json(e.mu);
    return j;
}

ordered_json entries_json(const std::vector<ResonanceEntry>& es)
{
    ordered_json a = ordered_json::array();
    for (const auto& e : es) {
        a.push_back(entry_json(e));
    }
    return a;
}

ordered_json number_or_null(double v)
{
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

std::string csv_number(double v)
{
    return std::isfinite(v) ? format_double(v) : (std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf"));
}

} // namespace

std::string format_double(double v)
{
    if (v == 0.0) {
        v = 0.0; // no "-0"
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) {
        return "nan";
    }
    return std::string(buf, ptr);
}

MapDescription parse_description(std::string_view text)
{
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
    }
    if (!j.is_object()) {
        fail("top level", "expected a JSON object");
    }
    static const std::set<std::string> known = {"dim", "eigenvalues", "linear", "terms", "metadata"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            fail("field '" + key + "'", "unknown field");
        }
    }

    MapDescription desc;
    if (!j.contains("dim")) {
        fail("dim", "missing required field");
    }
    desc.dim = parse_positive_int(j["dim"], "dim");
    const std::size_t n = desc.dim;

    const bool has_eig = j.contains("eigenvalues");
    const bool has_lin = j.contains("linear");
    if (has_eig == has_lin) {
        fail("eigenvalues/linear", "exactly one of 'eigenvalues' or 'linear' must be present");
    }
    if (has_eig) {
        const json& e = j["eigenvalues"];
        if (!e.is_array() || e.size() != n) {
            fail("eigenvalues", "expected a list of " + std::to_string(n) + " [re, im] pairs");
        }
        CVector vals;
        for (std::size_t i = 0; i < n; ++i) {
            vals.push_back(parse_complex(e[i], "eigenvalues[" + std::to_string(i) + "]"));
        }
        desc.eigenvalues = std::move(vals);
    } else {
        const json& a = j["linear"];
        if (!a.is_array() || a.size() != n) {
            fail("linear", "expected " + std::to_string(n) + " rows");
        }
        std::vector<CVector> rows;
        for (std::size_t r = 0; r < n; ++r) {
            const std::string where = "linear[" + std::to_string(r) + "]";
            if (!a[r].is_array() || a[r].size() != n) {
                fail(where, "expected a row of " + std::to_string(n) + " [re, im] pairs");
            }
            CVector row;
            for (std::size_t c = 0; c < n; ++c) {
                row.push_back(parse_complex(a[r][c], where + "[" + std::to_string(c) + "]"));
            }
            rows.push_back(std::move(row));
        }
        desc.linear = std::move(rows);
    }

    if (j.contains("terms")) {
        const json& ts = j["terms"];
        if (!ts.is_array()) {
            fail("terms", "expected a list");
        }
        std::set<std::pair<std::size_t, MultiIndex>> seen;
        for (std::size_t t = 0; t < ts.size(); ++t) {
            const std::string where = "terms[" + std::to_string(t) + "]";
            const json& term = ts[t];
            if (!term.is_object()) {
                fail(where, "expected an object");
            }
            for (const auto& [key, value] : term.items()) {
                if (key != "component" && key != "alpha" && key != "coeff") {
                    fail(where + "." + key, "unknown field");
                }
            }
            for (const char* key : {"component", "alpha", "coeff"}) {
                if (!term.contains(key)) {
                    fail(where + "." + key, "missing required field");
                }
            }
            MapTerm mt;
            const std::size_t comp = parse_positive_int(term["component"], where + ".component");
            if (comp > n) {
                fail(where + ".component", "must lie in 1.." + std::to_string(n));
            }
            mt.component = comp - 1;
            const json& a = term["alpha"];
            if (!a.is_array() || a.size() != n) {
                fail(where + ".alpha", "expected " + std::to_string(n) + " exponents, got "
                                           + (a.is_array() ? std::to_string(a.size()) : std::string("a non-list")));
            }
            std::vector<int> exps;
            for (const auto& e : a) {
                if (!e.is_number_integer() || e.get<long long>() < 0 || e.get<long long>() > 1000) {
                    fail(where + ".alpha", "exponents must be non-negative integers");
                }
                exps.push_back(e.get<int>());
            }
            mt.alpha = MultiIndex(std::move(exps));
            if (mt.alpha.order() < 2) {
                fail(where + ".alpha", "|alpha| = " + std::to_string(mt.alpha.order())
                                           + "; linear terms belong in eigenvalues and constants are not allowed");
            }
            mt.coeff = parse_complex(term["coeff"], where + ".coeff");
            if (!seen.emplace(mt.component, mt.alpha).second) {
                fail(where, "duplicate term for this component and alpha");
            }
            desc.terms.push_back(std::move(mt));
        }
    }
    if (j.contains("metadata")) {
        desc.metadata = j["metadata"];
    }
    return desc;
}

MapDescription load_description(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path + ": cannot open file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_description(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string emit_description(const MapDescription& desc)
{
    std::vector<MapTerm> terms = desc.terms;
    std::sort(terms.begin(), terms.end(), [](const MapTerm& a, const MapTerm& b) {
        if (a.component != b.component) {
            return a.component < b.component;
        }
        return a.alpha < b.alpha;
    });
    std::string out = "{\n  \"dim\": " + std::to_string(desc.dim) + ",\n";
    if (desc.eigenvalues) {
        out += "  \"eigenvalues\": " + complex_list(*desc.eigenvalues).dump() + ",\n";
    } else if (desc.linear) {
        out += "  \"linear\": [";
        for (std::size_t r = 0; r < desc.linear->size(); ++r) {
            out += (r == 0 ? "\n    " : ",\n    ") + complex_list((*desc.linear)[r]).dump();
        }
        out += "\n  ],\n";
    }
    out += "  \"terms\": [";
    for (std::size_t t = 0; t < terms.size(); ++t) {
        ordered_json tj;
        tj["component"] = terms[t].component + 1;
        tj["alpha"] = alpha_json(terms[t].alpha);
        tj["coeff"] = to_json(terms[t].coeff);
        out += (t == 0 ? "\n    " : ",\n    ") + tj.dump();
    }
    out += terms.empty() ? "]" : "\n  ]";
    if (!desc.metadata.is_null()) {
        out += ",\n  \"metadata\": " + desc.metadata.dump();
    }
    out += "\n}\n";
    return out;
}

LoadedMap to_map(const MapDescription& desc, double condition_bound)
{
    const std::size_t n = desc.dim;
    LoadedMap loaded;
    VectorPoly nonlinear(n);
    for (const auto& t : desc.terms) {
        nonlinear.add_term(t.component, t.alpha, t.coeff);
    }
    if (desc.eigenvalues) {
        loaded.spectrum = Spectrum(*desc.eigenvalues);
        loaded.map = VectorPoly::diagonal(loaded.spectrum.lambdas()) + nonlinear;
    } else {
        Eigen::MatrixXcd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (*desc.linear)[r][c];
            }
        }
        EigenBasis basis = eigencoordinates(a, condition_bound);
        CVector v_rows(n * n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                v_rows[r * n + c] = basis.V(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            }
        }
        const VectorPoly n_of_vz = compose(nonlinear, VectorPoly::linear(n, v_rows));
        VectorPoly transformed(n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                const complex_t w = basis.V_inv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
                transformed[j] += scale(n_of_vz[k], w);
            }
        }
        loaded.spectrum = basis.spectrum;
        loaded.map = VectorPoly::diagonal(loaded.spectrum.lambdas()) + transformed;
        loaded.basis = std::move(basis);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(loaded.spectrum[i]) >= 1.0) {
            loaded.warnings.push_back("eigenvalue " + std::to_string(i + 1) + " has modulus "
                                      + format_double(std::abs(loaded.spectrum[i]))
                                      + " >= 1; the origin is not asymptotically stable");
        }
    }
    return loaded;
}

LoadedMap parse_map(const std::string& path)
{
    return to_map(load_description(path));
}

// ---------------------------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------------------------

ordered_json to_json(complex_t c)
{
    return ordered_json::array({c.real(), c.imag()});
}

ordered_json terms_to_json(const VectorPoly& p, double chop)
{
    ordered_json a = ordered_json::array();
    for (std::size_t j = 0; j < p.dim(); ++j) {
        for (const auto& [alpha, c] : p[j].terms()) {
            if (std::abs(c) < chop) {
                continue;
            }
            ordered_json t;
            t["component"] = j + 1;
            t["alpha"] = alpha_json(alpha);
            t["coeff"] = to_json(c);
            a.push_back(std::move(t));
        }
    }
    return a;
}

ordered_json to_json(const ResonanceReport& report)
{
    ordered_json j;
    j["max_order"] = report.max_order;
    j["tol"] = report.tol;
    j["near_tol"] = report.near_tol;
    j["min_abs_mu"] = number_or_null(report.min_abs_mu);
    j["resonant"] = entries_json(report.resonant);
    j["near_resonant"] = entries_json(report.near_resonant);
    j["entries"] = entries_json(report.entries);
    return j;
}

ordered_json to_json(const NormalFormSequence& seq, double chop)
{
    ordered_json j;
    j["spectrum"] = {{"dim", seq.spectrum.dim()}, {"lambdas", complex_list(seq.spectrum.lambdas())}};
    j["D"] = seq.degree;
    j["beta"] = seq.options.beta;
    j["T_input"] = terms_to_json(seq.input, chop);
    ordered_json stages = ordered_json::array();
    for (const auto& st : seq.stages) {
        ordered_json s;
        s["m"] = st.m;
        s["epsilon"] = st.epsilon;
        s["Q"] = terms_to_json(st.Q, chop);
        s["T_after"] = terms_to_json(st.T_after, chop);
        s["near_resonant"] = entries_json(st.near_resonant);
        stages.push_back(std::move(s));
    }
    j["stages"] = std::move(stages);
    ordered_json taus = ordered_json::array();
    for (std::size_t k = 0; k < seq.taus.size(); ++k) {
        taus.push_back({{"m", static_cast<int>(k) + 2}, {"terms", terms_to_json(seq.taus[k], chop)}});
    }
    j["tau_cache"] = std::move(taus);
    return j;
}

ordered_json to_json(const ResidualStudy& study)
{
    ordered_json j;
    j["m"] = study.m;
    j["alpha"] = alpha_json(study.alpha);
    j["mu"] = to_json(study.mu);
    j["radii"] = study.radii;
    j["samples_per_radius"] = study.samples_per_radius;
    ordered_json recs = ordered_json::array();
    for (const auto& r : study.records) {
        recs.push_back({{"radius", study.radii[r.radius_index]},
                        {"sample", r.sample},
                        {"residual", r.residual},
                        {"two_way_gap", r.two_way_gap}});
    }
    j["records"] = std::move(recs);
    j["max_residual"] = study.max_residual;
    j["skipped"] = study.skipped;
    j["max_two_way_gap"] = study.max_two_way_gap;
    j["fitted_slope"] = number_or_null(study.fitted_slope);
    j["fit_rsquared"] = number_or_null(study.fit_rsquared);
    j["degenerate"] = study.degenerate;
    return j;
}

ordered_json to_json(const InverseStudy& study)
{
    ordered_json j;
    j["m"] = study.m;
    j["radii"] = study.radii;
    j["samples_per_radius"] = study.samples_per_radius;
    j["max_error"] = study.max_error;
    j["fitted_slope"] = number_or_null(study.fitted_slope);
    j["fit_rsquared"] = number_or_null(study.fit_rsquared);
    j["degenerate"] = study.degenerate;
    return j;
}

ordered_json to_json(const DensityTable& table)
{
    ordered_json j;
    j["grid_points"] = table.grid_points;
    ordered_json rows = ordered_json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"degree", r.degree},
                        {"basis_size", r.basis_size},
                        {"sup_error", r.sup_error},
                        {"condition", number_or_null(r.condition)},
                        {"ill_conditioned", r.ill_conditioned}});
    }
    j["rows"] = std::move(rows);
    j["monotonicity_violations"] = table.monotonicity_violations;
    return j;
}

ordered_json invert_json(const std::vector<InvertRow>& rows, int m)
{
    ordered_json j;
    j["m"] = m;
    ordered_json pts = ordered_json::array();
    for (const auto& r : rows) {
        pts.push_back({{"x", complex_list(r.x)},
                       {"z", complex_list(r.z)},
                       {"roundtrip_error", r.roundtrip_error},
                       {"in_domain", r.in_domain}});
    }
    j["points"] = std::move(pts);
    return j;
}

// ---------------------------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------------------------

std::string resonance_csv(const ResonanceReport& report)
{
    std::string out = "j,alpha,mu_re,mu_im,abs_mu,status\n";
    for (const auto& e : report.entries) {
        const double a = std::abs(e.mu);
        const char* status = a <= report.tol ? "resonant" : (a < report.near_tol ? "near" : "ok");
        out += std::to_string(e.j + 1) + ',' + alpha_field(e.alpha) + ',' + format_double(e.mu.real()) + ','
               + format_double(e.mu.imag()) + ',' + format_double(a) + ',' + status + '\n';
    }
    return out;
}

std::string normalform_csv(const NormalFormSequence& seq, double chop)
{
    std::string out = "m,epsilon,component,alpha,re,im\n";
    for (const auto& st : seq.stages) {
        for (std::size_t j = 0; j < st.Q.dim(); ++j) {
            for (const auto& [alpha, c] : st.Q[j].terms()) {
                if (std::abs(c) < chop) {
                    continue;
                }
                out += std::to_string(st.m) + ',' + format_double(st.epsilon) + ',' + std::to_string(j + 1) + ','
                       + alpha_field(alpha) + ',' + format_double(c.real()) + ',' + format_double(c.imag()) + '\n';
            }
        }
    }
    return out;
}

std::string residual_csv(const ResidualStudy& study)
{
    std::string out = "row,radius,max_residual,skipped,fitted_slope,fit_rsquared\n";
    for (std::size_t r = 0; r < study.radii.size(); ++r) {
        out += "radius," + format_double(study.radii[r]) + ',' + format_double(study.max_residual[r]) + ','
               + std::to_string(study.skipped[r]) + ",,\n";
    }
    out += "summary,,," + std::to_string(study.skipped_total) + ',' + csv_number(study.fitted_slope) + ','
           + csv_number(study.fit_rsquared) + '\n';
    return out;
}

std::string inverse_csv(const InverseStudy& study)
{
    std::string out = "row,radius,max_error,fitted_slope,fit_rsquared\n";
    for (std::size_t r = 0; r < study.radii.size(); ++r) {
        out += "radius," + format_double(study.radii[r]) + ',' + format_double(study.max_error[r]) + ",,\n";
    }
    out += "summary,,," + csv_number(study.fitted_slope) + ',' + csv_number(study.fit_rsquared) + '\n';
    return out;
}

std::string density_csv(const DensityTable& table)
{
    std::string out = "degree,sup_error,condition_flag\n";
    for (const auto& r : table.rows) {
        out += std::to_string(r.degree) + ',' + format_double(r.sup_error) + ',' + (r.ill_conditioned ? "1" : "0")
               + '\n';
    }
    return out;
}

std::string invert_csv(const std::vector<InvertRow>& rows)
{
    std::string out = "point,component,x_re,x_im,z_re,z_im,roundtrip_error,in_domain\n";
    for (std::size_t p = 0; p < rows.size(); ++p) {
        const auto& r = rows[p];
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            out += std::to_string(p + 1) + ',' + std::to_string(i + 1) + ',' + format_double(r.x[i].real()) + ','
                   + format_double(r.x[i].imag()) + ',' + format_double(r.z[i].real()) + ','
                   + format_double(r.z[i].imag()) + ',' + format_double(r.roundtrip_error) + ','
                   + (r.in_domain ? "1" : "0") + '\n';
        }
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Flag values
// ---------------------------------------------------------------------------------------------

std::vector<double> parse_radii(const std::string& spec)
{
    if (spec.find(':') != std::string::npos) {
        const auto parts = split(spec, ':');
        if (parts.size() != 3) {
            throw std::invalid_argument("radii: expected 'first:last:count'");
        }
        const double first = parse_number(parts[0], "radius");
        const double last = parse_number(parts[1], "radius");
        const double count = parse_number(parts[2], "count");
        if (count != std::floor(count)) {
            throw std::invalid_argument("radii: count must be an integer");
        }
        return geometric_radii(first, last, static_cast<int>(count));
    }
    std::vector<double> out;
    for (const auto& p : split(spec, ',')) {
        out.push_back(parse_number(p, "radius"));
    }
    return out;
}

MultiIndex parse_alpha(const std::string& spec)
{
    std::vector<int> e;
    for (const auto& p : split(spec, ',')) {
        const double v = parse_number(p, "exponent");
        if (v < 0 || v != std::floor(v) || v > 1000) {
            throw std::invalid_argument("alpha: exponents must be non-negative integers");
        }
        e.push_back(static_cast<int>(v));
    }
    return MultiIndex(std::move(e));
}

std::pair<double, double> parse_interval(const std::string& spec)
{
    // Split on the first ':' that is not a leading sign position.
    const auto pos = spec.find(':', 1);
    if (pos == std::string::npos) {
        throw std::invalid_argument("interval: expected 'lo:hi'");
    }
    return {parse_number(spec.substr(0, pos), "interval bound"), parse_number(spec.substr(pos + 1), "interval bound")};
}

CVector parse_point(const std::string& spec)
{
    json j;
    try {
        j = json::parse(spec);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("point: ") + e.what());
    }
    if (!j.is_array()) {
        throw std::invalid_argument("point: expected a list of [re, im] pairs");
    }
    CVector out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        try {
            out.push_back(parse_complex(j[i], "point[" + std::to_string(i) + "]"));
        } catch (const ParseError& e) {
            throw std::invalid_argument(e.what());
        }
    }
    return out;
}

} // namespace koopnf::io
