// sgp — spectral-measure Gaussian process toolkit.
//
// Subcommands:
//   spectrum  write the enumerated spectrum Lambda_m as n,lambda
//   charfun   tabulate sigma_hat with certified error bounds
//   simulate  build the X_sigma expansion, sample an ensemble, write paths
//             and summary statistics
//   verify    run the invariant suite; exit 0 iff every check passes
//
// Every command reads one config file, honors --out/--seed/--threads
// overrides, and drops a machine-readable summary.json next to its CSV
// output.  All outputs are deterministic for a fixed (config, seed).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "sgp/config.hpp"
#include "sgp/csv.hpp"
#include "sgp/processes.hpp"
#include "sgp/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliState {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
};

sgp::ExperimentConfig load_config(const CliState& st) {
    sgp::ExperimentConfig cfg;
    if (!st.config_path.empty())
        cfg = sgp::ExperimentConfig::from_config(sgp::Config::load(st.config_path));
    if (!st.out_dir.empty()) cfg.out_dir = st.out_dir;
    if (st.seed_set) cfg.seed = st.seed;
    sgp::set_cascade_threads(st.threads);
    fs::create_directories(cfg.out_dir);
    return cfg;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

int cmd_spectrum(const CliState& st) {
    const auto cfg = load_config(st);
    const auto spec = cfg.make_spectrum();
    sgp::CsvWriter csv(cfg.out_dir + "/spectrum.csv");
    csv.header({"n", "lambda"});
    for (std::size_t n = 0; n < spec.size(); ++n)
        csv.row({static_cast<double>(n), spec.freqs[n]});

    json j;
    j["command"] = "spectrum";
    j["m"] = cfg.m;
    j["count"] = spec.size();
    j["family"] = cfg.spectrum_family;
    if (!spec.twice_q.empty()) {
        json q = json::array();
        for (std::size_t n = 0; n < std::min<std::size_t>(16, spec.size()); ++n)
            q.push_back(spec.twice_q[n]);
        j["twice_lambda_over_2pi_prefix"] = q;
    }
    if (!std::isnan(spec.tail_mass_bound)) j["tail_mass_bound"] = spec.tail_mass_bound;
    write_json(cfg.out_dir + "/summary.json", j);
    return 0;
}

int cmd_charfun(const CliState& st) {
    const auto cfg = load_config(st);
    const auto measure = cfg.make_measure();
    const auto grid = cfg.make_grid();
    sgp::CsvWriter csv(cfg.out_dir + "/charfun.csv");
    csv.header({"t", "sigma_hat", "err"});
    double max_err = 0.0;
    for (double t : grid) {
        const auto v = measure.sigma_hat_real(t, cfg.budget);
        csv.row({t, v.value, v.bound});
        max_err = std::max(max_err, v.bound);
    }
    json j;
    j["command"] = "charfun";
    j["points"] = grid.size();
    j["max_error_bound"] = max_err;
    write_json(cfg.out_dir + "/summary.json", j);
    return 0;
}

int cmd_simulate(const CliState& st) {
    const auto cfg = load_config(st);
    const auto measure = cfg.make_measure();
    const auto spec = cfg.make_spectrum();
    const auto grid = cfg.make_grid();
    const auto X =
        sgp::build_X(measure, spec, grid, cfg.budget, cfg.deficit_threshold);
    const auto ensemble = sgp::sample_paths(X, cfg.paths, cfg.seed, st.threads);
    const auto stats = ensemble.summarize();

    {
        sgp::CsvWriter csv(cfg.out_dir + "/paths.csv");
        std::vector<std::string> cols{"t"};
        for (std::size_t m = 0; m < cfg.paths; ++m)
            cols.push_back("path_" + std::to_string(m));
        csv.header(cols);
        std::vector<double> row(cfg.paths + 1);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            row[0] = grid[i];
            for (std::size_t m = 0; m < cfg.paths; ++m)
                row[m + 1] = ensemble.value(m, i);
            csv.row(row);
        }
    }
    {
        sgp::CsvWriter csv(cfg.out_dir + "/ensemble.csv");
        csv.header({"t", "mean", "var", "stderr"});
        for (std::size_t i = 0; i < grid.size(); ++i)
            csv.row({grid[i], stats.mean[i], stats.variance[i], stats.std_error[i]});
    }
    {
        sgp::CsvWriter csv(cfg.out_dir + "/deficits.csv");
        csv.header({"t", "deficit"});
        for (std::size_t i = 0; i < grid.size(); ++i)
            csv.row({grid[i], X.deficits[i]});
    }

    double max_deficit = 0.0;
    for (double d : X.deficits) max_deficit = std::max(max_deficit, d);
    json j;
    j["command"] = "simulate";
    j["paths"] = cfg.paths;
    j["seed"] = cfg.seed;
    j["basis"] = X.n_basis;
    j["max_deficit"] = max_deficit;
    j["deficit_threshold"] = cfg.deficit_threshold;
    write_json(cfg.out_dir + "/summary.json", j);
    return 0;
}

int cmd_covariance(const CliState& st) {
    const auto cfg = load_config(st);
    const auto measure = cfg.make_measure();
    const auto grid = cfg.make_grid();
    const double reach =
        std::max(std::fabs(cfg.t_min), std::fabs(cfg.t_max)) + 0.5;
    const sgp::CovarianceKernel ck(measure, cfg.budget, reach);

    {
        sgp::CsvWriter csv(cfg.out_dir + "/covariance.csv");
        csv.header({"t", "r", "r_prime"});
        for (double t : grid)
            csv.row({t, ck.variance(t), ck.variance_rate(t)});
    }
    {
        // kernel heatmap on a coarse subgrid
        sgp::CsvWriter csv(cfg.out_dir + "/kernel.csv");
        csv.header({"t", "s", "K"});
        const std::size_t stride = std::max<std::size_t>(1, grid.size() / 33);
        for (std::size_t i = 0; i < grid.size(); i += stride)
            for (std::size_t j = 0; j < grid.size(); j += stride)
                csv.row({grid[i], grid[j], ck.kernel(grid[i], grid[j])});
    }
    json j;
    j["command"] = "covariance";
    j["r_at_t_max"] = ck.variance(cfg.t_max);
    j["r_prime_at_t_max"] = ck.variance_rate(cfg.t_max);
    write_json(cfg.out_dir + "/summary.json", j);
    return 0;
}

int cmd_verify(const CliState& st) {
    const auto cfg = load_config(st);
    const auto results = sgp::run_verification(cfg);

    std::ofstream report(cfg.out_dir + "/report.txt");
    bool all_pass = true;
    json checks = json::array();
    for (const auto& r : results) {
        all_pass = all_pass && r.pass;
        char line[256];
        std::snprintf(line, sizeof(line), "[%s] %-24s measured=%.6e bound=%.6e  %s",
                      r.pass ? "PASS" : "FAIL", r.name.c_str(), r.measured, r.bound,
                      r.note.c_str());
        std::printf("%s\n", line);
        report << line << '\n';
        checks.push_back({{"name", r.name},
                          {"measured", r.measured},
                          {"bound", r.bound},
                          {"pass", r.pass},
                          {"note", r.note}});
    }
    json j;
    j["command"] = "verify";
    j["all_pass"] = all_pass;
    j["checks"] = checks;
    write_json(cfg.out_dir + "/summary.json", j);
    std::printf("%s\n", all_pass ? "VERIFY OK" : "VERIFY FAILED");
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral-measure Gaussian processes: spectra, transforms, "
                 "simulation, verification"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    CliState st;
    app.add_option("--config", st.config_path, "experiment config file");
    app.add_option("--out", st.out_dir, "output directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", st.seed, "RNG seed (overrides config)");
    app.add_option("--threads", st.threads, "worker threads")->check(CLI::Range(1, 256));

    auto* c_spec = app.add_subcommand("spectrum", "write the spectrum table");
    auto* c_char = app.add_subcommand("charfun", "tabulate sigma_hat");
    auto* c_cov = app.add_subcommand("covariance", "tabulate r, r' and the kernel");
    auto* c_sim = app.add_subcommand("simulate", "sample trajectories");
    auto* c_ver = app.add_subcommand("verify", "run the invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    st.seed_set = seed_opt->count() > 0;

    try {
        if (c_spec->parsed()) return cmd_spectrum(st);
        if (c_char->parsed()) return cmd_charfun(st);
        if (c_cov->parsed()) return cmd_covariance(st);
        if (c_sim->parsed()) return cmd_simulate(st);
        if (c_ver->parsed()) return cmd_verify(st);
    } catch (const sgp::BudgetError& e) {
        std::fprintf(stderr, "BUDGET ERROR: %s (best achieved bound %.3e)\n",
                     e.what(), e.best_bound);
        return 1;
    } catch (const sgp::SpectralPairError& e) {
        std::fprintf(stderr, "SPECTRAL PAIR ERROR: %s\n", e.what());
        return 1;
    } catch (const sgp::ConvergenceError& e) {
        std::fprintf(stderr, "CONVERGENCE ERROR: %s\n%s\n", e.what(),
                     e.trace.c_str());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "CONFIG ERROR: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ERROR: %s\n", e.what());
        return 1;
    }
    return 2;
}
