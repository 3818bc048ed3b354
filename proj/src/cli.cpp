#include "tfm/cli.hpp"

#include "tfm/bench.hpp"
#include "tfm/config.hpp"
#include "tfm/dgp.hpp"
#include "tfm/io.hpp"
#include "tfm/preaverage.hpp"
#include "tfm/projection.hpp"
#include "tfm/rank_boot.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace tfm {

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_argument: return 2;
    case ErrorKind::shape_mismatch: return 3;
    case ErrorKind::degenerate: return 4;
    case ErrorKind::non_stationary: return 5;
    case ErrorKind::io: return 6;
    case ErrorKind::parse: return 7;
    case ErrorKind::config: return 8;
    }
    return 9;
}

namespace {

namespace fs = std::filesystem;

struct EstimateOptions {
    std::string input;
    std::string ranks;
    std::size_t m0 = 200;
    std::size_t m = 5;
    double n_frac = 0.5;
    std::size_t iters = 30;
    std::size_t B = 50;
    double p = 1.0;
    std::string c_grid = "auto";
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string truth;
};

std::string join(const Vector& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v(i));
    return s;
}

void cmd_simulate(const std::string& config, const std::string& out_path, std::ostream& out) {
    KeyValues kv = KeyValues::load(config);
    const SimulateSpec spec = read_simulate_config(kv);
    const DgpGroundTruth truth = simulate_setting(spec.dgp, spec.setting);
    write_series(fs::path(out_path), truth.series);

    std::vector<std::pair<std::string, Matrix>> blocks;
    for (std::size_t k = 0; k < truth.loadings.size(); ++k)
        blocks.emplace_back("A" + std::to_string(k + 1), truth.loadings[k]);
    for (std::size_t k = 0; k < truth.bases.size(); ++k)
        blocks.emplace_back("U" + std::to_string(k + 1), truth.bases[k]);
    blocks.emplace_back("mu", Matrix(truth.mean.vec()));
    write_matrices(fs::path(out_path + ".truth"), blocks);
    out << "wrote " << out_path << " (setting " << to_string(spec.setting) << ", T = " << truth.series.length()
        << ")\n";
}

void cmd_estimate(const EstimateOptions& o, std::ostream& out) {
    const TensorSeries x = read_series(fs::path(o.input));
    if (x.length() < 2) throw Error(ErrorKind::invalid_argument, "series needs at least two time steps");
    const std::size_t K = x.order();

    std::optional<std::vector<std::size_t>> ranks;
    if (!o.ranks.empty()) {
        ranks = parse_size_list(o.ranks, "--ranks");
        if (ranks->size() == 1) ranks->assign(K, ranks->front());
        if (ranks->size() != K) throw Error(ErrorKind::invalid_argument, "--ranks needs one value per mode");
        for (std::size_t k = 0; k < K; ++k)
            if ((*ranks)[k] == 0 || (*ranks)[k] > x.dim(k))
                throw Error(ErrorKind::invalid_argument, "rank of mode " + std::to_string(k + 1) + " must lie in [1, d]");
    }
    std::optional<LabelledMatrices> truth;
    if (!o.truth.empty()) truth = read_matrices(fs::path(o.truth));

    PreaverageConfig pc;
    pc.m0 = o.m0;
    pc.m = o.m;
    pc.n_frac = o.n_frac;
    Rng pre_rng(derive_seed(o.seed, 1));
    std::vector<Vector> init;
    for (std::size_t k = 0; k < K; ++k)
        init.push_back(preaverage_direction(x, k, pc, pre_rng).estimate.columns.col(0));

    RefineConfig rc;
    rc.max_iters = o.iters;
    const ProjectionState state = refine_directions(x, init, rc);
    out << "refinement sweeps: " << state.iterations << '\n';

    RankConfig rank_cfg;
    rank_cfg.B = o.B;
    rank_cfg.p = o.p;
    rank_cfg.c_grid = parse_c_grid(o.c_grid);
    Rng rank_rng(derive_seed(o.seed, 2));

    fs::create_directories(o.out_dir);
    for (std::size_t k = 0; k < K; ++k) {
        std::size_t r = 0;
        out << "mode " << k + 1 << ": ";
        if (ranks) {
            r = (*ranks)[k];
            out << "rank " << r << " (given)";
        } else {
            const RankDecision d = estimate_rank(x, k, state, rank_cfg, rank_rng);
            r = d.rank_hat;
            out << "rank " << r << " (C = " << format_double(d.c_hat) << ")";
            if (r == 0) {
                out << ", no loading columns\n";
                continue;
            }
        }
        const LoadingEstimate est = estimate_loading_space(x, k, state, r);
        out << ", eigenvalues " << join(est.eigenvalues);
        const fs::path csv = fs::path(o.out_dir) / ("loading_mode" + std::to_string(k + 1) + ".csv");
        std::vector<std::string> header;
        for (std::size_t j = 0; j < r; ++j) header.push_back("col" + std::to_string(j + 1));
        write_matrix_csv(csv, est.columns, header);
        if (truth) {
            const auto it = truth->find("U" + std::to_string(k + 1));
            if (it == truth->end()) throw Error(ErrorKind::parse, "truth file has no U" + std::to_string(k + 1));
            if (it->second.cols() == est.columns.cols())
                out << ", error " << format_double(projection_error(est, it->second));
            else
                out << ", error NA (true rank " << it->second.cols() << ")";
        }
        out << '\n';
    }
}

void cmd_bench(const std::string& config, const std::string& out_dir, std::optional<std::size_t> threads,
               std::ostream& out) {
    KeyValues kv = KeyValues::load(config);
    BenchConfig cfg = read_bench_config(kv);
    if (threads) cfg.threads = *threads;
    const BenchResult res = run_benchmark(cfg);
    write_bench_outputs(fs::path(out_dir), res);
    write_summary_csv(out, res);
}

void cmd_capm(const std::string& panel_path, const std::string& market_path, const std::string& dims_arg,
              const std::string& out_path, std::ostream& out) {
    const Dims dims = parse_size_list(dims_arg, "--dims");
    const Matrix panel = read_numeric_csv(fs::path(panel_path));
    const Matrix market_raw = read_numeric_csv(fs::path(market_path));
    if (market_raw.rows() != 1 && market_raw.cols() != 1)
        throw Error(ErrorKind::shape_mismatch, "market file must hold a single series");
    const Vector market = market_raw.reshaped();
    if (panel.rows() != market.size())
        throw Error(ErrorKind::shape_mismatch, "panel has " + std::to_string(panel.rows()) + " rows, market has " +
                                                   std::to_string(market.size()));
    if (static_cast<std::size_t>(panel.cols()) != product(dims))
        throw Error(ErrorKind::shape_mismatch, "panel has " + std::to_string(panel.cols()) +
                                                   " columns, dims multiply to " + std::to_string(product(dims)));
    const Vector betas = capm_betas(panel, market);
    const Matrix resid = capm_residuals(panel, market);
    write_series(fs::path(out_path), TensorSeries(dims, Matrix(resid.transpose())));
    write_matrix_csv(fs::path(out_path + ".betas.csv"), betas, {"beta"});
    out << "wrote " << out_path << " and " << out_path << ".betas.csv (" << betas.size() << " betas)\n";
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tensor factor model estimation and simulation", "tfm"};
    app.require_subcommand(1);

    std::string sim_config, sim_out;
    auto* sim = app.add_subcommand("simulate", "Generate a tensor series and its ground truth");
    sim->add_option("config", sim_config, "key = value configuration file")->required();
    sim->add_option("out", sim_out, "output series path (ground truth goes to <out>.truth)")->required();

    EstimateOptions eo;
    auto* est = app.add_subcommand("estimate", "Estimate ranks and loading spaces of a stored series");
    est->add_option("input", eo.input, "series file")->required();
    est->add_option("--ranks", eo.ranks, "comma-separated ranks; skips rank estimation");
    est->add_option("--m0", eo.m0, "random fibre samples per mode")->capture_default_str();
    est->add_option("--m", eo.m, "samples kept for pre-averaging")->capture_default_str();
    est->add_option("--n-frac", eo.n_frac, "subset size fraction per mode")->capture_default_str();
    est->add_option("--iters", eo.iters, "maximum refinement sweeps")->capture_default_str();
    est->add_option("--B", eo.B, "bootstrap draws")->capture_default_str();
    est->add_option("--p", eo.p, "bootstrap keep probability")->capture_default_str();
    est->add_option("--c-grid", eo.c_grid, "threshold constants: list, lo:step:hi or auto")->capture_default_str();
    est->add_option("--seed", eo.seed, "random seed")->capture_default_str();
    est->add_option("--out-dir", eo.out_dir, "directory for loading CSV files")->capture_default_str();
    est->add_option("--truth", eo.truth, "ground-truth file from simulate, for scoring");

    std::string bench_config, bench_out;
    std::optional<std::size_t> threads;
    auto* bench = app.add_subcommand("bench", "Run a Monte Carlo benchmark");
    bench->add_option("config", bench_config, "key = value configuration file")->required();
    bench->add_option("out_dir", bench_out, "directory for replications.csv and summary.csv")->required();
    bench->add_option("--threads", threads, "worker threads (0 = all cores)");

    std::string panel, market, dims, capm_out;
    auto* capm = app.add_subcommand("capm", "Remove the market factor from a return panel");
    capm->add_option("panel", panel, "T x n CSV of returns")->required();
    capm->add_option("market", market, "T market returns")->required();
    capm->add_option("out", capm_out, "output series path")->required();
    capm->add_option("--dims", dims, "tensor shape, product must equal n")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "tfm: error: usage: " << e.what() << '\n';
        return 1;
    }

    try {
        if (*sim) cmd_simulate(sim_config, sim_out, out);
        else if (*est) cmd_estimate(eo, out);
        else if (*bench) cmd_bench(bench_config, bench_out, threads, out);
        else if (*capm) cmd_capm(panel, market, dims, capm_out, out);
    } catch (const Error& e) {
        err << "tfm: error: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "tfm: error: io: " << e.what() << '\n';
        return exit_code(ErrorKind::io);
    } catch (const std::exception& e) {
        err << "tfm: error: internal: " << e.what() << '\n';
        return 9;
    }
    return 0;
}

} // namespace tfm
