#pragma once

#include "tfm/baselines.hpp"
#include "tfm/dgp.hpp"
#include "tfm/loading.hpp"
#include "tfm/preaverage.hpp"
#include "tfm/projection.hpp"
#include "tfm/rank_boot.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tfm {

/// Spectral norm of Q Q^T - U U^T. Both inputs need orthonormal columns.
[[nodiscard]] double projection_error(const Matrix& q, const Matrix& u);
[[nodiscard]] double projection_error(const LoadingEstimate& est, const Matrix& u);

enum class Estimator { pre, proj, hosvd, hooi, bcorth };

[[nodiscard]] std::string_view to_string(Estimator e) noexcept;
[[nodiscard]] Estimator parse_estimator(std::string_view name);
[[nodiscard]] std::vector<Estimator> all_estimators();

struct BenchConfig {
    Setting setting = Setting::Ia;
    DgpConfig dgp;
    std::size_t R = 100;
    std::vector<Estimator> estimators = all_estimators();
    std::uint64_t seed = 1;
    /// 0 means one worker per hardware thread.
    std::size_t threads = 1;
    /// false writes zero timings so output bytes depend only on the seed.
    bool timing = true;
    PreaverageConfig pre;
    RefineConfig refine;
    std::size_t hooi_iters = 30;
    RankConfig rank;

    void validate() const;
};

/// One (replication, estimator, mode) outcome. `error` is NaN for bcorth and
/// for failed runs; `rank_hat` is set for bcorth only.
struct ReplicationRecord {
    std::size_t rep = 0;
    Estimator estimator = Estimator::pre;
    std::size_t mode = 0;
    double error = 0.0;
    std::optional<std::size_t> rank_hat;
    double elapsed_ms = 0.0;
    bool failed = false;
    std::string failure;
};

struct SummaryRow {
    Estimator estimator = Estimator::pre;
    std::size_t mode = 0;
    std::size_t n_ok = 0;
    /// Statistics of the errors, or of the rank estimates for bcorth.
    double mean = 0.0;
    double median = 0.0;
    double sd = 0.0;
    /// Share of replications with every mode's rank correct (bcorth only).
    std::optional<double> correct_prop;
    /// Mean seconds per replication for this estimator (all modes).
    double runtime_s = 0.0;
    std::size_t failures = 0;
};

struct BenchResult {
    Setting setting = Setting::Ia;
    Dims dims;
    std::size_t T = 0;
    std::size_t R = 0;
    /// Ordered by replication, then estimator (config order), then mode.
    std::vector<ReplicationRecord> records;
    std::vector<SummaryRow> summary;

    /// Errors of one estimator and mode in replication order (NaN on failure).
    [[nodiscard]] std::vector<double> errors(Estimator e, std::size_t mode) const;
    /// Rank estimates for one mode in replication order (nullopt on failure).
    [[nodiscard]] std::vector<std::optional<std::size_t>> ranks(std::size_t mode) const;
    [[nodiscard]] const SummaryRow& row(Estimator e, std::size_t mode) const;
};

/// All records of replication `rep`, seeded by derive_seed(cfg.seed, rep).
[[nodiscard]] std::vector<ReplicationRecord> run_replication(const BenchConfig& cfg, std::size_t rep);

/// Aggregates per-replication records (already in replication order).
[[nodiscard]] BenchResult summarize(const BenchConfig& cfg, std::vector<ReplicationRecord> records);

[[nodiscard]] BenchResult run_benchmark(const BenchConfig& cfg);

/// Median of the finite values, NaN if none.
[[nodiscard]] double median_of(std::vector<double> v);

void write_replications_csv(std::ostream& os, const BenchResult& r);
void write_summary_csv(std::ostream& os, const BenchResult& r);
/// Writes replications.csv and summary.csv into `dir` (created if missing).
void write_bench_outputs(const std::filesystem::path& dir, const BenchResult& r);

} // namespace tfm
