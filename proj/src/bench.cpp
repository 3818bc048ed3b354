#include "tfm/bench.hpp"

#include "tfm/error.hpp"
#include "tfm/io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <thread>

namespace tfm {

double projection_error(const Matrix& q, const Matrix& u) {
    if (q.rows() != u.rows()) throw Error(ErrorKind::shape_mismatch, "loading estimate and truth differ in row count");
    if (q.cols() != u.cols())
        throw Error(ErrorKind::shape_mismatch, "loading estimate has " + std::to_string(q.cols()) +
                                                   " columns, truth has " + std::to_string(u.cols()));
    const Matrix diff = q * q.transpose() - u * u.transpose();
    const Eigen::SelfAdjointEigenSolver<Matrix> solver(diff, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double projection_error(const LoadingEstimate& est, const Matrix& u) { return projection_error(est.columns, u); }

std::string_view to_string(Estimator e) noexcept {
    switch (e) {
    case Estimator::pre: return "pre";
    case Estimator::proj: return "proj";
    case Estimator::hosvd: return "hosvd";
    case Estimator::hooi: return "hooi";
    case Estimator::bcorth: return "bcorth";
    }
    return "unknown";
}

std::vector<Estimator> all_estimators() {
    return {Estimator::pre, Estimator::proj, Estimator::hosvd, Estimator::hooi, Estimator::bcorth};
}

Estimator parse_estimator(std::string_view name) {
    for (Estimator e : all_estimators())
        if (to_string(e) == name) return e;
    throw Error(ErrorKind::config, "unknown estimator '" + std::string(name) + "'");
}

void BenchConfig::validate() const {
    if (R == 0) throw Error(ErrorKind::config, "R must be at least 1");
    if (estimators.empty()) throw Error(ErrorKind::config, "no estimators selected");
    for (std::size_t i = 0; i < estimators.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (estimators[i] == estimators[j])
                throw Error(ErrorKind::config, "estimator '" + std::string(to_string(estimators[i])) + "' listed twice");
    apply_setting(dgp, setting).validate();
    if (pre.m == 0 || pre.m > pre.m0) throw Error(ErrorKind::config, "need 1 <= m <= m0");
    if (rank.B < 2) throw Error(ErrorKind::config, "B must be at least 2");
    if (!(rank.p > 0.0 && rank.p <= 1.0)) throw Error(ErrorKind::config, "p must lie in (0, 1]");
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct Outcome {
    std::vector<double> error;
    std::vector<std::optional<std::size_t>> rank;
    std::vector<double> ms;
    std::vector<std::string> failure;

    explicit Outcome(std::size_t K) : error(K, kNan), rank(K), ms(K, 0.0), failure(K) {}

    void fail_all(const std::string& why) {
        for (auto& f : failure) f = why;
    }
};

} // namespace

std::vector<ReplicationRecord> run_replication(const BenchConfig& cfg, std::size_t rep) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, rep);
    DgpConfig dgp = cfg.dgp;
    dgp.seed = rep_seed;
    const DgpGroundTruth truth = simulate_setting(dgp, cfg.setting);
    const TensorSeries& x = truth.series;
    const std::size_t K = x.order();
    const std::vector<std::size_t>& ranks = dgp.ranks;
    const auto wants = [&](Estimator e) {
        return std::find(cfg.estimators.begin(), cfg.estimators.end(), e) != cfg.estimators.end();
    };
    const auto clock_ms = [&](Clock::time_point start) { return cfg.timing ? ms_since(start) : 0.0; };

    Outcome pre(K), proj(K), hosvd_out(K), hooi_out(K), bcorth(K);

    // Pre-averaging feeds proj and bcorth through the refinement start point.
    std::vector<Vector> init(K);
    bool init_ok = true;
    if (wants(Estimator::pre) || wants(Estimator::proj) || wants(Estimator::bcorth)) {
        Rng rng(derive_seed(rep_seed, 1));
        for (std::size_t k = 0; k < K; ++k) {
            PreaverageConfig pc = cfg.pre;
            pc.z = ranks[k];
            const auto start = Clock::now();
            try {
                const PreaverageResult res = preaverage_direction(x, k, pc, rng);
                pre.error[k] = projection_error(res.estimate, truth.bases[k]);
                init[k] = res.estimate.columns.col(0);
            } catch (const std::exception& e) {
                pre.failure[k] = e.what();
                init_ok = false;
            }
            pre.ms[k] = clock_ms(start);
        }
    }

    if (wants(Estimator::proj) || wants(Estimator::bcorth)) {
        if (!init_ok) {
            proj.fail_all("pre-averaging failed");
            bcorth.fail_all("pre-averaging failed");
        } else {
            const auto start = Clock::now();
            try {
                const ProjectionState state = refine_directions(x, init, cfg.refine);
                const double shared = clock_ms(start) / static_cast<double>(K);
                if (wants(Estimator::proj))
                    for (std::size_t k = 0; k < K; ++k) {
                        const auto t0 = Clock::now();
                        try {
                            proj.error[k] = projection_error(estimate_loading_space(x, k, state, ranks[k]), truth.bases[k]);
                        } catch (const std::exception& e) {
                            proj.failure[k] = e.what();
                        }
                        proj.ms[k] = pre.ms[k] + shared + clock_ms(t0);
                    }
                if (wants(Estimator::bcorth)) {
                    Rng rng(derive_seed(rep_seed, 2));
                    for (std::size_t k = 0; k < K; ++k) {
                        const auto t0 = Clock::now();
                        try {
                            bcorth.rank[k] = estimate_rank(x, k, state, cfg.rank, rng).rank_hat;
                        } catch (const std::exception& e) {
                            bcorth.failure[k] = e.what();
                        }
                        bcorth.ms[k] = pre.ms[k] + shared + clock_ms(t0);
                    }
                }
            } catch (const std::exception& e) {
                proj.fail_all(e.what());
                bcorth.fail_all(e.what());
            }
        }
    }

    const auto run_baseline = [&](Outcome& out, auto&& fit) {
        const auto start = Clock::now();
        try {
            const std::vector<LoadingEstimate> est = fit();
            for (std::size_t k = 0; k < K; ++k) out.error[k] = projection_error(est[k], truth.bases[k]);
        } catch (const std::exception& e) {
            out.fail_all(e.what());
        }
        const double each = clock_ms(start) / static_cast<double>(K);
        for (auto& m : out.ms) m = each;
    };
    if (wants(Estimator::hosvd)) run_baseline(hosvd_out, [&] { return hosvd(x, ranks); });
    if (wants(Estimator::hooi)) run_baseline(hooi_out, [&] { return hooi(x, ranks, cfg.hooi_iters); });

    std::vector<ReplicationRecord> out;
    for (Estimator e : cfg.estimators) {
        const Outcome& o = e == Estimator::pre     ? pre
                           : e == Estimator::proj  ? proj
                           : e == Estimator::hosvd ? hosvd_out
                           : e == Estimator::hooi  ? hooi_out
                                                   : bcorth;
        for (std::size_t k = 0; k < K; ++k) {
            ReplicationRecord r;
            r.rep = rep;
            r.estimator = e;
            r.mode = k;
            r.error = e == Estimator::bcorth ? kNan : o.error[k];
            r.rank_hat = o.rank[k];
            r.elapsed_ms = o.ms[k];
            r.failed = !o.failure[k].empty();
            r.failure = o.failure[k];
            if (r.failed) r.error = kNan;
            out.push_back(std::move(r));
        }
    }
    return out;
}

double median_of(std::vector<double> v) {
    std::erase_if(v, [](double d) { return !std::isfinite(d); });
    if (v.empty()) return kNan;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

void describe(const std::vector<double>& v, SummaryRow& row) {
    row.n_ok = v.size();
    if (v.empty()) {
        row.mean = row.median = row.sd = kNan;
        return;
    }
    double sum = 0.0;
    for (double d : v) sum += d;
    row.mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double d : v) ss += (d - row.mean) * (d - row.mean);
    row.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    row.median = median_of(v);
}

} // namespace

BenchResult summarize(const BenchConfig& cfg, std::vector<ReplicationRecord> records) {
    const DgpConfig dgp = apply_setting(cfg.dgp, cfg.setting);
    const std::size_t K = dgp.dims.size();
    BenchResult out;
    out.setting = cfg.setting;
    out.dims = dgp.dims;
    out.T = dgp.T;
    out.R = cfg.R;
    out.records = std::move(records);

    for (Estimator e : cfg.estimators) {
        std::vector<double> runtime(cfg.R, 0.0);
        std::vector<std::uint8_t> correct(cfg.R, 1);
        std::vector<SummaryRow> rows(K);
        std::vector<std::vector<double>> values(K);
        for (const auto& r : out.records) {
            if (r.estimator != e) continue;
            runtime[r.rep] += r.elapsed_ms / 1000.0;
            SummaryRow& row = rows[r.mode];
            if (r.failed) {
                ++row.failures;
                correct[r.rep] = 0;
                continue;
            }
            if (e == Estimator::bcorth) {
                values[r.mode].push_back(static_cast<double>(*r.rank_hat));
                if (*r.rank_hat != dgp.ranks[r.mode]) correct[r.rep] = 0;
            } else {
                values[r.mode].push_back(r.error);
            }
        }
        double mean_runtime = 0.0;
        for (double t : runtime) mean_runtime += t;
        mean_runtime /= static_cast<double>(cfg.R);
        std::size_t n_correct = 0;
        for (auto c : correct) n_correct += c;
        for (std::size_t k = 0; k < K; ++k) {
            SummaryRow& row = rows[k];
            row.estimator = e;
            row.mode = k;
            describe(values[k], row);
            row.runtime_s = mean_runtime;
            if (e == Estimator::bcorth)
                row.correct_prop = static_cast<double>(n_correct) / static_cast<double>(cfg.R);
            out.summary.push_back(row);
        }
    }
    return out;
}

BenchResult run_benchmark(const BenchConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<ReplicationRecord>> per_rep(cfg.R);
    std::size_t workers = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
    workers = std::min(workers, cfg.R);

    if (workers <= 1) {
        for (std::size_t r = 0; r < cfg.R; ++r) per_rep[r] = run_replication(cfg, r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t r = next++; r < cfg.R; r = next++) per_rep[r] = run_replication(cfg, r);
                } catch (...) {
                    errors[w] = std::current_exception();
                    next = cfg.R;
                }
            });
        for (auto& t : pool) t.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    std::vector<ReplicationRecord> flat;
    for (auto& v : per_rep)
        for (auto& r : v) flat.push_back(std::move(r));
    return summarize(cfg, std::move(flat));
}

std::vector<double> BenchResult::errors(Estimator e, std::size_t mode) const {
    std::vector<double> out;
    for (const auto& r : records)
        if (r.estimator == e && r.mode == mode) out.push_back(r.error);
    return out;
}

std::vector<std::optional<std::size_t>> BenchResult::ranks(std::size_t mode) const {
    std::vector<std::optional<std::size_t>> out;
    for (const auto& r : records)
        if (r.estimator == Estimator::bcorth && r.mode == mode) out.push_back(r.failed ? std::nullopt : r.rank_hat);
    return out;
}

const SummaryRow& BenchResult::row(Estimator e, std::size_t mode) const {
    for (const auto& r : summary)
        if (r.estimator == e && r.mode == mode) return r;
    throw Error(ErrorKind::invalid_argument, "no summary row for " + std::string(to_string(e)) + " mode " +
                                                 std::to_string(mode + 1));
}

namespace {

std::string dims_label(const Dims& dims) {
    std::string s;
    for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "x" : "") + std::to_string(dims[i]);
    return s;
}

std::string num(double v) { return std::isnan(v) ? "nan" : format_double(v); }

} // namespace

void write_replications_csv(std::ostream& os, const BenchResult& r) {
    os << "rep,estimator,mode,error,rank_hat,elapsed_ms\n";
    for (const auto& rec : r.records) {
        os << rec.rep + 1 << ',' << to_string(rec.estimator) << ',' << rec.mode + 1 << ',';
        os << (rec.estimator == Estimator::bcorth ? "NA" : num(rec.error)) << ',';
        if (rec.estimator != Estimator::bcorth) os << "NA";
        else if (rec.failed) os << "nan";
        else os << *rec.rank_hat;
        os << ',' << num(rec.elapsed_ms) << '\n';
    }
}

void write_summary_csv(std::ostream& os, const BenchResult& r) {
    os << "setting,T,d,estimator,mode,n_ok,mean,median,sd_x100,correct_prop,runtime_s,failures\n";
    const std::string d = dims_label(r.dims);
    for (const auto& row : r.summary) {
        os << to_string(r.setting) << ',' << r.T << ',' << d << ',' << to_string(row.estimator) << ','
           << row.mode + 1 << ',' << row.n_ok << ',' << num(row.mean) << ',' << num(row.median) << ','
           << num(100.0 * row.sd) << ',' << (row.correct_prop ? num(*row.correct_prop) : "NA") << ','
           << num(row.runtime_s) << ',' << row.failures << '\n';
    }
}

void write_bench_outputs(const std::filesystem::path& dir, const BenchResult& r) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create '" + dir.string() + "': " + ec.message());
    for (const auto& [name, writer] :
         {std::pair{"replications.csv", &write_replications_csv}, std::pair{"summary.csv", &write_summary_csv}}) {
        const auto path = dir / name;
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
        writer(os, r);
        os.flush();
        if (!os) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
    }
}

} // namespace tfm
