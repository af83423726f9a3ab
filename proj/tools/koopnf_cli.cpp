// koopnf command-line front end.
//
// Exit codes: 0 success, 1 usage or input error, 2 resonance obstruction.

#include "koopnf/io.hpp"
#include "koopnf/normalform.hpp"
#include "koopnf/numerics.hpp"
#include "koopnf/observables.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

using namespace koopnf;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitResonance = 2;

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct Common
{
    std::string map_path;
    std::string out;
    std::string format = "csv";
    std::uint64_t seed = 0;
    bool allow_unstable = false;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("map", c.map_path, "Map description file (JSON)")->required();
    cmd->add_option("--out", c.out, "Output path (default: stdout)");
    cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", c.seed, "Sampling seed");
    cmd->add_flag("--allow-unstable", c.allow_unstable, "Run even if some |lambda| >= 1");
}

void write_output(const Common& c, const std::string& text)
{
    if (c.out.empty() || c.out == "-") {
        std::cout << text;
        return;
    }
    std::filesystem::path path(c.out);
    if (const char* dir = std::getenv("KOOPNF_OUTPUT_DIR"); dir != nullptr && *dir != '\0' && path.is_relative()) {
        path = std::filesystem::path(dir) / path;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw UsageError("cannot write " + path.string());
    }
    f << text;
}

std::string dump(const nlohmann::ordered_json& j)
{
    return j.dump(2) + "\n";
}

io::LoadedMap load(const Common& c, bool pipeline)
{
    io::LoadedMap m = io::parse_map(c.map_path);
    for (const auto& w : m.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    if (pipeline && !m.warnings.empty() && !c.allow_unstable) {
        throw UsageError("refusing to run on an unstable fixed point (pass --allow-unstable to override)");
    }
    return m;
}

NormalFormSequence pipeline(const io::LoadedMap& m, int degree, const NormalFormOptions& opts)
{
    return run(m.map, m.spectrum, degree, opts);
}

void check_m(int m, int degree)
{
    if (m < 2) {
        throw UsageError("-m must be >= 2");
    }
    if (degree < m) {
        throw UsageError("--degree must be >= m");
    }
}

Target parse_target(const std::string& spec, std::size_t dim)
{
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto coord = [&](const std::string& s) {
        std::size_t i = 1;
        if (!s.empty()) {
            try {
                i = std::stoul(s);
            } catch (const std::exception&) {
                throw UsageError("--target: bad coordinate '" + s + "'");
            }
        }
        if (i < 1 || i > dim) {
            throw UsageError("--target: coordinate must lie in 1.." + std::to_string(dim));
        }
        return i - 1;
    };
    if (kind == "exp") {
        const std::size_t i = coord(arg);
        return [i](std::span<const complex_t> x) { return std::exp(x[i]); };
    }
    if (kind == "coord") {
        const std::size_t i = coord(arg);
        return [i](std::span<const complex_t> x) { return x[i]; };
    }
    if (kind == "const") {
        double c = 0.0;
        try {
            c = std::stod(arg);
        } catch (const std::exception&) {
            throw UsageError("--target: const needs a number, e.g. const:1.5");
        }
        return [c](std::span<const complex_t>) { return complex_t(c); };
    }
    throw UsageError("--target: expected exp[:i], coord[:i] or const:c");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Normal forms, approximate conjugacies and approximate Koopman eigenfunctions of polynomial maps"};
    app.require_subcommand(1);

    NormalFormOptions nf;
    double chop = 0.0;
    int order = 5;
    int degree = -1;
    int m = 2;
    double tol = kDefaultInversionTol;
    int max_iter = kDefaultMaxIter;
    std::string radii_spec = "0.03:0.001:6";
    int samples = 20;
    std::string alpha_spec;
    std::vector<std::string> points;
    std::vector<std::string> box;
    DensityOptions dens;
    std::string target_spec = "exp";
    bool no_constant = false;

    Common c_res, c_nf, c_inv, c_rs, c_io, c_dd;

    auto* res = app.add_subcommand("resonance", "List mu_{j,alpha} = lambda^alpha - lambda_j up to order K");
    add_common(res, c_res);
    res->add_option("-K,--order", order, "Largest |alpha|")->check(CLI::Range(2, 64));
    res->add_option("--tol", nf.resonance_tol, "Resonance tolerance on |mu|");
    res->add_option("--near-tol", nf.near_resonance_tol, "Near-resonance warning threshold");

    auto add_pipeline = [&](CLI::App* cmd) {
        cmd->add_option("-D,--degree", degree, "Working truncation degree");
        cmd->add_option("--beta", nf.beta, "Contraction target for the inversion radii")
            ->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--resonance-tol", nf.resonance_tol, "Resonance tolerance on |mu|");
        cmd->add_option("--norm-samples", nf.norm_samples, "Samples for the sup-norm estimate")
            ->check(CLI::PositiveNumber);
    };
    auto add_inversion = [&](CLI::App* cmd) {
        cmd->add_option("--tol", tol, "Fixed-point inversion tolerance")->check(CLI::PositiveNumber);
        cmd->add_option("--max-iter", max_iter, "Fixed-point iteration cap")->check(CLI::PositiveNumber);
    };

    auto* nfc = app.add_subcommand("normalform", "Compute the stages Q_m, T_m and epsilon_m");
    add_common(nfc, c_nf);
    add_pipeline(nfc);
    nfc->add_option("--chop", chop, "Hide coefficients below this magnitude in the output");

    auto* inv = app.add_subcommand("invert", "Evaluate tau_m^{-1} at given points");
    add_common(inv, c_inv);
    add_pipeline(inv);
    add_inversion(inv);
    inv->add_option("-m", m, "Conjugacy order");
    inv->add_option("--point", points, "Point as [[re,im],...]; repeatable")->required()->allow_extra_args(false);

    auto* rs = app.add_subcommand("residual-study", "Residual order of the approximate eigenfunction");
    add_common(rs, c_rs);
    add_pipeline(rs);
    add_inversion(rs);
    rs->add_option("-m", m, "Conjugacy order");
    rs->add_option("--alpha", alpha_spec, "Eigenfunction multi-index, e.g. 1,0")->required();
    rs->add_option("--radii", radii_spec, "Comma list or geometric a:b:count");
    rs->add_option("--samples", samples, "Samples per radius")->check(CLI::PositiveNumber);

    auto* io_cmd = app.add_subcommand("inverse-order", "Remainder order of the two-term inverse of Phi_m");
    add_common(io_cmd, c_io);
    add_pipeline(io_cmd);
    add_inversion(io_cmd);
    io_cmd->add_option("-m", m, "Stage");
    io_cmd->add_option("--radii", radii_spec, "Comma list or geometric a:b:count");
    io_cmd->add_option("--samples", samples, "Samples per radius")->check(CLI::PositiveNumber);

    auto* dd = app.add_subcommand("density-demo", "Least-squares fits in the pulled-back algebra");
    add_common(dd, c_dd);
    add_pipeline(dd);
    add_inversion(dd);
    dd->add_option("-m", m, "Conjugacy order");
    dd->add_option("--box", box, "Interval lo:hi per coordinate; repeatable");
    dd->add_option("--grid", dens.grid, "Grid points per axis")->check(CLI::Range(2, 10000));
    dd->add_option("--max-degree", dens.max_degree, "Largest fit degree")->check(CLI::Range(0, 40));
    dd->add_option("--target", target_spec, "exp[:i], coord[:i] or const:c");
    dd->add_flag("--no-constant", no_constant, "Fit without adjoining constants");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    const int work_degree = degree >= 0 ? degree : std::max(6, m);

    try {
        if (res->parsed()) {
            const auto loaded = load(c_res, false);
            const auto report = check_resonance(loaded.spectrum, order, nf.resonance_tol, nf.near_resonance_tol);
            write_output(c_res, c_res.format == "json" ? dump(io::to_json(report)) : io::resonance_csv(report));
            for (const auto& e : report.resonant) {
                std::cerr << "resonance: j=" << e.j + 1 << " alpha=" << e.alpha.to_string()
                          << " |mu|=" << io::format_double(std::abs(e.mu)) << "\n";
            }
            return report.resonant.empty() ? kExitOk : kExitResonance;
        }
        if (nfc->parsed()) {
            const auto loaded = load(c_nf, true);
            nf.seed = c_nf.seed;
            nf.allow_unstable = c_nf.allow_unstable;
            const int d = degree >= 0 ? degree : 4;
            if (d < 2) {
                throw UsageError("--degree must be >= 2");
            }
            const auto seq = pipeline(loaded, d, nf);
            write_output(c_nf, c_nf.format == "json" ? dump(io::to_json(seq, chop)) : io::normalform_csv(seq, chop));
            return kExitOk;
        }
        if (inv->parsed()) {
            check_m(m, work_degree);
            const auto loaded = load(c_inv, true);
            nf.seed = c_inv.seed;
            nf.allow_unstable = c_inv.allow_unstable;
            const auto seq = pipeline(loaded, work_degree, nf);
            std::vector<io::InvertRow> rows;
            for (const auto& p : points) {
                io::InvertRow row;
                try {
                    row.x = io::parse_point(p);
                } catch (const std::invalid_argument& e) {
                    throw UsageError(e.what());
                }
                if (row.x.size() != loaded.map.dim()) {
                    throw UsageError("--point: expected " + std::to_string(loaded.map.dim()) + " coordinates");
                }
                row.z = tau_inverse_pointwise(seq, m, row.x, tol, max_iter);
                const CVector back = tau_pointwise(seq, m, row.z);
                double err = 0.0;
                for (std::size_t i = 0; i < back.size(); ++i) {
                    err = std::max(err, std::abs(back[i] - row.x[i]));
                }
                row.roundtrip_error = err;
                row.in_domain = domain_check(seq, m, row.z).inside;
                rows.push_back(std::move(row));
            }
            write_output(c_inv, c_inv.format == "json" ? dump(io::invert_json(rows, m)) : io::invert_csv(rows));
            return kExitOk;
        }
        if (rs->parsed()) {
            check_m(m, work_degree);
            const auto loaded = load(c_rs, true);
            nf.seed = c_rs.seed;
            nf.allow_unstable = c_rs.allow_unstable;
            MultiIndex alpha;
            std::vector<double> radii;
            try {
                alpha = io::parse_alpha(alpha_spec);
                radii = io::parse_radii(radii_spec);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            if (alpha.dim() != loaded.map.dim()) {
                throw UsageError("--alpha: expected " + std::to_string(loaded.map.dim()) + " exponents");
            }
            const auto seq = pipeline(loaded, work_degree, nf);
            const auto study = residual_study(loaded.map, seq, m, alpha, radii, samples, c_rs.seed, tol, max_iter);
            write_output(c_rs, c_rs.format == "json" ? dump(io::to_json(study)) : io::residual_csv(study));
            return kExitOk;
        }
        if (io_cmd->parsed()) {
            check_m(m, work_degree);
            const auto loaded = load(c_io, true);
            nf.seed = c_io.seed;
            nf.allow_unstable = c_io.allow_unstable;
            std::vector<double> radii;
            try {
                radii = io::parse_radii(radii_spec);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const auto seq = pipeline(loaded, work_degree, nf);
            auto study = inverse_asymptotics_study(seq.stage(m).Q, radii, samples, c_io.seed, tol, max_iter, nf.beta);
            study.m = m;
            write_output(c_io, c_io.format == "json" ? dump(io::to_json(study)) : io::inverse_csv(study));
            return kExitOk;
        }
        if (dd->parsed()) {
            check_m(m, work_degree);
            const auto loaded = load(c_dd, true);
            nf.seed = c_dd.seed;
            nf.allow_unstable = c_dd.allow_unstable;
            const std::size_t n = loaded.map.dim();
            std::vector<std::pair<double, double>> intervals;
            try {
                for (const auto& b : box) {
                    intervals.push_back(io::parse_interval(b));
                }
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            if (intervals.empty()) {
                intervals.assign(n, {-0.05, 0.05});
            } else if (intervals.size() == 1 && n > 1) {
                intervals.assign(n, intervals.front());
            }
            if (intervals.size() != n) {
                throw UsageError("--box: give one interval, or one per coordinate");
            }
            const auto seq = pipeline(loaded, work_degree, nf);
            dens.tol = tol;
            dens.max_iter = max_iter;
            dens.with_constant = !no_constant;
            const auto table = density_demo(parse_target(target_spec, n), intervals, seq, m, dens);
            write_output(c_dd, c_dd.format == "json" ? dump(io::to_json(table)) : io::density_csv(table));
            return kExitOk;
        }
    } catch (const ResonanceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitResonance;
    } catch (const io::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
