#include "tfm/rank_boot.hpp"

#include "tfm/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace tfm {

Matrix correlation_from_covariance(const Matrix& s) {
    if (s.rows() != s.cols()) throw Error(ErrorKind::shape_mismatch, "correlation needs a square matrix");
    const Vector diag = s.diagonal();
    const double top = diag.size() > 0 ? diag.maxCoeff() : 0.0;
    for (Eigen::Index i = 0; i < diag.size(); ++i)
        if (!(diag(i) > 1e-14 * top) || !(diag(i) > 0.0))
            throw Error(ErrorKind::degenerate, "coordinate " + std::to_string(i) + " has zero variance");
    const Vector inv_sd = diag.cwiseSqrt().cwiseInverse();
    Matrix r = inv_sd.asDiagonal() * s * inv_sd.asDiagonal();
    r = 0.5 * (r + r.transpose());
    r.diagonal().setOnes();
    return r;
}

std::size_t count_above(const Vector& descending, double threshold) {
    std::size_t n = 0;
    while (n < static_cast<std::size_t>(descending.size()) && descending(static_cast<Eigen::Index>(n)) > threshold) ++n;
    return n;
}

std::size_t rank_threshold(const Matrix& r, double eta) {
    if (!(eta >= 0.0)) throw Error(ErrorKind::invalid_argument, "threshold offset must be non-negative");
    return count_above(eigenvalues_sym(r), 1.0 + eta);
}

Vector BootstrapWeights::apply(const Vector& q) const {
    if (static_cast<std::size_t>(q.size()) != target.size())
        throw Error(ErrorKind::shape_mismatch, "bootstrap weights do not match the projection vector");
    Vector multiplicity = Vector::Zero(q.size());
    for (std::size_t i = 0; i < target.size(); ++i)
        if (keep[i]) multiplicity(static_cast<Eigen::Index>(target[i])) += 1.0;
    return multiplicity.cwiseProduct(q);
}

Matrix BootstrapWeights::to_matrix() const {
    const auto n = static_cast<Eigen::Index>(target.size());
    Matrix w = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < target.size(); ++i)
        w(static_cast<Eigen::Index>(target[i]), static_cast<Eigen::Index>(i)) = keep[i];
    return w;
}

BootstrapWeights bootstrap_weights(std::size_t d_minus_k, double p, Rng& rng) {
    if (!(p > 0.0) || p > 1.0) throw Error(ErrorKind::invalid_argument, "Bernoulli probability must lie in (0, 1]");
    if (d_minus_k == 0) throw Error(ErrorKind::invalid_argument, "bootstrap size must be positive");
    BootstrapWeights w;
    w.target.resize(d_minus_k);
    w.keep.resize(d_minus_k);
    std::uniform_int_distribution<std::size_t> row(0, d_minus_k - 1);
    std::bernoulli_distribution coin(p);
    for (std::size_t i = 0; i < d_minus_k; ++i) {
        w.target[i] = row(rng);
        w.keep[i] = coin(rng) ? 1 : 0;
    }
    return w;
}

std::vector<double> default_c_grid(std::size_t T, std::size_t d_minus_k) {
    const double top = std::sqrt(static_cast<double>(T)) * (static_cast<double>(d_minus_k) / 10.0 - 1.0);
    const auto n = std::max<long>(100, std::lround(std::floor(top * 10.0 + 1e-9)));
    std::vector<double> grid;
    for (long i = 1; i <= n; ++i) grid.push_back(static_cast<double>(i) / 10.0);
    return grid;
}

std::vector<Vector> bootstrap_spectra(const TensorSeries& x, std::size_t k, const ProjectionState& state,
                                      const RankConfig& cfg, Rng& rng, std::size_t* skipped) {
    if (k >= x.order()) throw Error(ErrorKind::invalid_argument, "mode index out of range");
    if (x.length() < 2) throw Error(ErrorKind::invalid_argument, "need at least two time steps");
    if (cfg.B < 2) throw Error(ErrorKind::invalid_argument, "need at least two bootstrap draws");
    if (state.directions.size() != x.order())
        throw Error(ErrorKind::shape_mismatch, "projection state does not match tensor order");
    const Vector q = minus_k_direction(state.directions, k);
    const std::size_t dmk = product_except(x.dims(), k);

    std::vector<BootstrapWeights> draws;
    draws.reserve(cfg.B);
    for (std::size_t b = 0; b < cfg.B; ++b) draws.push_back(bootstrap_weights(dmk, cfg.p, rng));

    const StackedUnfolding u(x, k);
    Matrix directions(static_cast<Eigen::Index>(dmk), static_cast<Eigen::Index>(cfg.B));
    for (std::size_t b = 0; b < cfg.B; ++b) directions.col(static_cast<Eigen::Index>(b)) = draws[b].apply(q);
    const Matrix projected = u.matrix() * directions;

    const auto dk = static_cast<Eigen::Index>(x.dim(k));
    const auto T = static_cast<Eigen::Index>(x.length());
    std::vector<Vector> spectra;
    std::size_t dead = 0;
    for (std::size_t b = 0; b < cfg.B; ++b) {
        const Eigen::Map<const Matrix> y(projected.col(static_cast<Eigen::Index>(b)).data(), dk, T);
        const Matrix s = y * y.transpose() / static_cast<double>(T);
        try {
            spectra.push_back(eigenvalues_sym(correlation_from_covariance(s)));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::degenerate) throw;
            ++dead;
        }
    }
    if (skipped) *skipped = dead;
    if (spectra.empty())
        throw Error(ErrorKind::degenerate, "every bootstrap correlation matrix for mode " + std::to_string(k) +
                                               " is degenerate");
    return spectra;
}

RankDecision select_rank(const std::vector<Vector>& spectra, std::size_t T, const std::vector<double>& c_grid) {
    if (spectra.empty()) throw Error(ErrorKind::invalid_argument, "no bootstrap spectra");
    if (c_grid.empty()) throw Error(ErrorKind::invalid_argument, "threshold grid is empty");
    for (std::size_t i = 0; i < c_grid.size(); ++i) {
        if (!(c_grid[i] > 0.0)) throw Error(ErrorKind::invalid_argument, "threshold constants must be positive");
        if (i > 0 && !(c_grid[i] > c_grid[i - 1]))
            throw Error(ErrorKind::invalid_argument, "threshold grid must be strictly ascending");
    }
    const auto n = static_cast<long long>(spectra.size());
    const double root_t = std::sqrt(static_cast<double>(T));

    auto ranks_at = [&](double c) {
        std::vector<std::size_t> ranks;
        ranks.reserve(spectra.size());
        for (const auto& s : spectra) ranks.push_back(count_above(s, 1.0 + c / root_t));
        return ranks;
    };

    // n(n-1) * variance, exact in integers so equal-variance plateaus compare exactly.
    RankDecision out;
    std::vector<long long> scaled(c_grid.size());
    for (std::size_t i = 0; i < c_grid.size(); ++i) {
        long long sum = 0;
        long long sum_sq = 0;
        for (std::size_t r : ranks_at(c_grid[i])) {
            sum += static_cast<long long>(r);
            sum_sq += static_cast<long long>(r * r);
        }
        scaled[i] = n * sum_sq - sum * sum;
        const double var = n > 1 ? static_cast<double>(scaled[i]) / static_cast<double>(n * (n - 1)) : 0.0;
        out.variance_curve.emplace_back(c_grid[i], var);
    }

    // Longest contiguous run at the minimum; earliest run wins ties.
    const long long best = *std::min_element(scaled.begin(), scaled.end());
    std::size_t run_start = 0, run_len = 0;
    for (std::size_t i = 0; i < scaled.size();) {
        if (scaled[i] != best) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < scaled.size() && scaled[j] == best) ++j;
        if (j - i > run_len) {
            run_start = i;
            run_len = j - i;
        }
        i = j;
    }
    const std::size_t mid = run_start + (run_len - 1) / 2;
    out.c_hat = c_grid[mid];
    out.bootstrap_ranks = ranks_at(out.c_hat);

    std::map<std::size_t, std::size_t> counts;
    for (std::size_t r : out.bootstrap_ranks) ++counts[r];
    std::size_t top = 0;
    for (const auto& [rank, count] : counts)
        if (count > top) {
            top = count;
            out.rank_hat = rank;
        }
    return out;
}

RankDecision estimate_rank(const TensorSeries& x, std::size_t k, const ProjectionState& state, const RankConfig& cfg,
                           Rng& rng) {
    std::size_t dead = 0;
    const auto spectra = bootstrap_spectra(x, k, state, cfg, rng, &dead);
    const std::size_t dmk = product_except(x.dims(), k);
    RankDecision out =
        select_rank(spectra, x.length(), cfg.c_grid.empty() ? default_c_grid(x.length(), dmk) : cfg.c_grid);
    out.mode = k;
    out.degenerate_draws = dead;
    return out;
}

} // namespace tfm
