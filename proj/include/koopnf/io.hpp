#pragma once

// Map description files and machine-readable result emission.
//
// Map file (JSON, UTF-8):
//   {
//     "dim": 2,
//     "eigenvalues": [[0.5, 0], [0.3, 0]],           // or "linear": n x n of [re, im]
//     "terms": [{"component": 1, "alpha": [1, 1], "coeff": [1, 0]}, ...],
//     "metadata": {...}                               // optional, free-form
//   }
// Components are 1-based in files and 0-based in memory. Every term must have |alpha| >= 2.

#include "koopnf/normalform.hpp"
#include "koopnf/numerics.hpp"
#include "koopnf/observables.hpp"
#include "koopnf/polyalg.hpp"
#include "koopnf/spectrum.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace koopnf::io {

class ParseError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct MapTerm
{
    std::size_t component = 0; // 0-based
    MultiIndex alpha;
    complex_t coeff;
};

struct MapDescription
{
    std::size_t dim = 0;
    std::optional<CVector> eigenvalues;
    std::optional<std::vector<CVector>> linear; // rows
    std::vector<MapTerm> terms;
    nlohmann::json metadata; // null when absent
};

MapDescription parse_description(std::string_view text);
MapDescription load_description(const std::string& path);

/// Canonical text: fixed key order, terms sorted by (component, graded-lex alpha),
/// shortest round-trip numbers, trailing newline.
std::string emit_description(const MapDescription& desc);

struct LoadedMap
{
    VectorPoly map;    // in eigen-coordinates, linear part diag(spectrum)
    Spectrum spectrum;
    std::optional<EigenBasis> basis; // present when the file gave `linear`
    std::vector<std::string> warnings;
};

/// Builds T in eigen-coordinates. With `linear`, T(x) = A x + N(x) becomes
/// V^{-1} T(V z) = Lambda z + V^{-1} N(V z).
LoadedMap to_map(const MapDescription& desc, double condition_bound = kDefaultConditionBound);
LoadedMap parse_map(const std::string& path);

/// Shortest decimal that round-trips.
std::string format_double(double v);

nlohmann::ordered_json to_json(complex_t c);
nlohmann::ordered_json terms_to_json(const VectorPoly& p, double chop = 0.0);
nlohmann::ordered_json to_json(const ResonanceReport& report);
nlohmann::ordered_json to_json(const NormalFormSequence& seq, double chop = 0.0);
nlohmann::ordered_json to_json(const ResidualStudy& study);
nlohmann::ordered_json to_json(const InverseStudy& study);
nlohmann::ordered_json to_json(const DensityTable& table);

std::string resonance_csv(const ResonanceReport& report);
std::string normalform_csv(const NormalFormSequence& seq, double chop = 0.0);
std::string residual_csv(const ResidualStudy& study);
std::string inverse_csv(const InverseStudy& study);
std::string density_csv(const DensityTable& table);

struct InvertRow
{
    CVector x;
    CVector z;
    double roundtrip_error = 0.0;
    bool in_domain = false;
};
std::string invert_csv(const std::vector<InvertRow>& rows);
nlohmann::ordered_json invert_json(const std::vector<InvertRow>& rows, int m);

/// "a:b:count" (geometric, a to b) or "r1,r2,...".
std::vector<double> parse_radii(const std::string& spec);
/// "1,0,2" -> MultiIndex.
MultiIndex parse_alpha(const std::string& spec);
/// "lo:hi".
std::pair<double, double> parse_interval(const std::string& spec);
/// JSON list of [re, im] pairs, e.g. "[[0.1,0],[0.05,0]]".
CVector parse_point(const std::string& spec);

} // namespace koopnf::io
