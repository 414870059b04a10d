// Command-line driver: property checks, eps sweeps and tables.

#include "thinshell/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace thinshell;

namespace {

struct Options {
    std::string curve;
    std::optional<double> m;
    std::string eps;
    std::optional<int> ns;
    std::optional<int> nt;
    std::optional<int> count;
    std::string out = ".";
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    bool no_richardson = false;
    std::optional<int> levels;
    int n = 2;
    double coupling = effective_coupling;
};

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("--eps: cannot parse '" + item + "'");
        }
    }
    return out;
}

/// --curve takes a file path or inline JSON; either a curve object or a job object with a "curve" key.
Json load_curve_argument(const std::string& arg) {
    if (arg.empty()) return Json::object();
    if (fs::exists(arg)) return load_json_file(arg);
    try {
        return Json::parse(arg);
    } catch (const Json::parse_error&) {
        throw ConfigError("--curve: '" + arg + "' is neither a file nor valid JSON");
    }
}

SweepConfig make_config(const Options& o) {
    const Json arg = load_curve_argument(o.curve);
    Json job = Json::object();
    if (arg.contains("kind")) job["curve"] = arg;
    else if (!arg.empty()) job = arg;
    if (o.m) job["m"] = *o.m;
    if (!o.eps.empty()) job["eps"] = parse_list(o.eps);
    if (o.ns) job["ns"] = *o.ns;
    if (o.nt) job["nt"] = *o.nt;
    if (o.count) job["count"] = *o.count;
    if (o.threads) job["threads"] = *o.threads;
    if (o.seed) job["seed"] = *o.seed;
    if (o.no_richardson) job["richardson"] = false;
    if (o.levels) job["richardson_levels"] = *o.levels;
    return sweep_config_from_json(job);
}

std::ofstream open_output(const Options& o, const std::string& name) {
    fs::create_directories(o.out);
    const fs::path path = fs::path(o.out) / name;
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    return f;
}

void write_json(const Options& o, const std::string& name, const Json& j) { open_output(o, name) << j.dump(2) << '\n'; }

int run_check(const Options& o) {
    CheckOptions co;
    co.coupling = o.coupling;
    if (o.seed) co.seed = *o.seed;
    const std::vector<SuiteResult> results = run_checks(co);
    bool all = true;
    for (const SuiteResult& r : results) {
        std::printf("%-12s %s  %.2fs%s%s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.seconds,
                    r.message.empty() ? "" : "  ", r.message.c_str());
        all = all && r.passed;
    }
    write_json(o, "check_summary.json", checks_summary(results));
    return all ? 0 : 1;
}

int run_sweep_verb(const Options& o) {
    const SweepConfig cfg = make_config(o);
    const AsymptoticsReport rep = run_sweep(cfg);
    auto csv = open_output(o, "sweep.csv");
    write_sweep_csv(csv, rep);
    const Json summary = sweep_summary(rep);
    write_json(o, "sweep_summary.json", summary);
    for (const Json& level : summary.at("levels"))
        std::printf("j=%d  a=%.6g (se %.2g)  b=%.6g  mu_eff=%.6g  rel.err=%.3g  monotone=%s\n", level.at("j").get<int>(),
                    level.at("fit").at("intercept").get<double>(), level.at("fit").at("intercept_se").get<double>(),
                    level.at("fit").at("slope").get<double>(), level.at("mu_effective").get<double>(),
                    level.at("intercept_relative_error").get<double>(), level.at("monotone").get<bool>() ? "yes" : "no");
    if (rep.partial) std::printf("warning: some eigensolves did not converge; report is partial\n");
    return 0;
}

int run_corollary_verb(const Options& o) {
    const CorollaryReport rep = run_corollary(make_config(o));
    auto csv = open_output(o, "corollary.csv");
    write_corollary_csv(csv, rep);
    const Json summary = corollary_summary(rep);
    write_json(o, "corollary_summary.json", summary);
    for (const Json& level : summary.at("levels"))
        std::printf("p=%d  linear=%.6g  reference=%.6g  rel.err=%.3g\n", level.at("p").get<int>(),
                    level.at("fit").at("intercept").get<double>(), level.at("reference_linear").get<double>(),
                    level.at("relative_error").get<double>());
    if (rep.partial) std::printf("warning: some eigensolves did not converge; report is partial\n");
    return 0;
}

int run_transverse_table(const Options& o) {
    std::vector<double> masses;
    if (o.m) masses.push_back(*o.m);
    else
        for (int i = 0; i <= 8; ++i) masses.push_back(0.25 * i);
    const int bands = o.count.value_or(3);
    if (bands < 1) throw ConfigError("--count must be positive");
    for (double m : masses)
        if (m < 0.0) throw ConfigError("--m must be non-negative");
    auto csv = open_output(o, "transverse.csv");
    write_transverse_table(csv, masses, bands);
    write_transverse_table(std::cout, masses, bands);
    return 0;
}

int run_effective_spectrum(const Options& o) {
    const Json arg = load_curve_argument(o.curve);
    const CurveDefinition def = arg.contains("kind") ? curve_from_json(arg)
                                : arg.contains("curve") ? curve_from_json(arg.at("curve"))
                                                        : CurveDefinition{};
    const Curve curve(def);
    if (!curve.is_closed()) throw ConfigError("effective-spectrum: needs a closed curve");
    const int ns = o.ns.value_or(1024), count = o.count.value_or(8);
    if (ns < 16 || ns % 2 != 0) throw ConfigError("--ns must be even and >= 16");
    if (count < 1 || count > ns) throw ConfigError("--count out of range");
    const GaugeCheck g = gauge_transform_check(CliffordFamily(2), curve, ns, count, o.coupling);
    auto csv = open_output(o, "effective.csv");
    write_gauge_csv(csv, g);
    auto curve_csv = open_output(o, "curve.csv");
    write_curve_csv(curve_csv, curve, 256);
    write_gauge_csv(std::cout, g);
    std::printf("max |difference| = %.3g, phase periodicity = %.3g\n", g.spectral_distance, g.phase_periodicity);
    return 0;
}

int run_dump_clifford(const Options& o) {
    if (o.n < 1 || o.n > default_max_clifford_dimension) throw ConfigError("--n must lie in 1..12");
    const CliffordFamily fam(o.n);
    const Json j = clifford_to_json(fam);
    write_json(o, "clifford.json", j);
    std::printf("n=%d N=%d relation defect=%g\n", fam.n(), fam.size(), fam.relation_defect());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thin-shell Dirac spectra: checks, eps sweeps and reference tables"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", o.out, "Output directory")->capture_default_str();
        sub->add_option("--seed", o.seed, "Seed for the initial eigensolver block");
    };
    auto add_sweep = [&](CLI::App* sub) {
        add_common(sub);
        sub->add_option("--curve", o.curve, "Curve or job JSON (file path or inline)");
        sub->add_option("--m", o.m, "Mass");
        sub->add_option("--eps", o.eps, "Comma-separated eps list, strictly decreasing");
        sub->add_option("--ns", o.ns, "Tangential cells");
        sub->add_option("--nt", o.nt, "Transverse cells (default from eps)");
        sub->add_option("--count", o.count, "Eigenvalues per eps");
        sub->add_option("--threads", o.threads, "Parallel eps jobs");
        sub->add_flag("--no-richardson", o.no_richardson, "Single grid, no extrapolation");
        sub->add_option("--levels", o.levels, "Romberg levels, grids doubled per level (2..4)");
    };

    CLI::App* check = app.add_subcommand("check", "Run every property suite");
    add_common(check);
    check->add_option("--coupling", o.coupling, "Connection coupling (negative-control runs)");
    CLI::App* sweep = app.add_subcommand("sweep", "Shell spectra over eps with residual fits");
    add_sweep(sweep);
    CLI::App* corollary = app.add_subcommand("corollary", "Square-root spectrum and linear coefficient fits");
    add_sweep(corollary);
    CLI::App* table = app.add_subcommand("transverse-table", "Transverse momenta, energies and normalizations");
    add_common(table);
    table->add_option("--m", o.m, "Single mass (default 0..2 step 0.25)");
    table->add_option("--count", o.count, "Bands per mass");
    CLI::App* eff = app.add_subcommand("effective-spectrum", "Effective operator vs paired magnetic spectrum");
    add_common(eff);
    eff->add_option("--curve", o.curve, "Curve JSON (file path or inline)");
    eff->add_option("--ns", o.ns, "Grid points");
    eff->add_option("--count", o.count, "Eigenvalues");
    eff->add_option("--coupling", o.coupling, "Connection coupling");
    CLI::App* dump = app.add_subcommand("dump-clifford", "Write the Clifford family as JSON");
    add_common(dump);
    dump->add_option("--n", o.n, "Dimension n")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (check->parsed()) return run_check(o);
        if (sweep->parsed()) return run_sweep_verb(o);
        if (corollary->parsed()) return run_corollary_verb(o);
        if (table->parsed()) return run_transverse_table(o);
        if (eff->parsed()) return run_effective_spectrum(o);
        if (dump->parsed()) return run_dump_clifford(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
