#include "tfm/dgp.hpp"

#include "tfm/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace tfm {

bool ar_is_stationary(std::span<const double> coeffs) {
    const auto p = static_cast<Eigen::Index>(coeffs.size());
    if (p == 0) return true;
    Matrix companion = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) companion(0, i) = coeffs[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
    const Eigen::EigenSolver<Matrix> solver(companion, false);
    return (solver.eigenvalues().array().abs() < 1.0).all();
}

Vector ar_autocovariances(std::span<const double> coeffs, std::size_t max_lag) {
    if (!ar_is_stationary(coeffs)) throw Error(ErrorKind::non_stationary, "AR coefficients are not stationary");
    const std::size_t p = coeffs.size();
    // gamma_h - sum_i phi_i gamma_{|h-i|} = [h == 0], h = 0..p.
    Matrix a = Matrix::Identity(static_cast<Eigen::Index>(p + 1), static_cast<Eigen::Index>(p + 1));
    for (std::size_t h = 0; h <= p; ++h)
        for (std::size_t i = 1; i <= p; ++i) {
            const std::size_t lag = h >= i ? h - i : i - h;
            a(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(lag)) -= coeffs[i - 1];
        }
    Vector rhs = Vector::Zero(static_cast<Eigen::Index>(p + 1));
    rhs(0) = 1.0;
    const Vector head = a.partialPivLu().solve(rhs);

    Vector gamma(static_cast<Eigen::Index>(std::max(max_lag, p) + 1));
    gamma.head(head.size()) = head;
    for (std::size_t h = p + 1; h < static_cast<std::size_t>(gamma.size()); ++h) {
        double g = 0.0;
        for (std::size_t i = 1; i <= p; ++i) g += coeffs[i - 1] * gamma(static_cast<Eigen::Index>(h - i));
        gamma(static_cast<Eigen::Index>(h)) = g;
    }
    return gamma.head(static_cast<Eigen::Index>(max_lag + 1));
}

Vector gen_ar(std::size_t T, std::span<const double> coeffs, Rng& rng, std::size_t burn_in) {
    const double sd = std::sqrt(ar_autocovariances(coeffs, 0)(0));
    const std::size_t p = coeffs.size();
    const std::size_t n = burn_in + T;
    std::vector<double> path(n, 0.0);
    std::normal_distribution<double> innov(0.0, 1.0);
    for (std::size_t t = 0; t < n; ++t) {
        double v = innov(rng);
        for (std::size_t i = 1; i <= p && i <= t; ++i) v += coeffs[i - 1] * path[t - i];
        path[t] = v;
    }
    Vector out(static_cast<Eigen::Index>(T));
    for (std::size_t t = 0; t < T; ++t) out(static_cast<Eigen::Index>(t)) = path[burn_in + t] / sd;
    return out;
}

Vector gen_ar5(std::size_t T, const ArCoeffs& coeffs, Rng& rng) { return gen_ar(T, coeffs, rng); }

Matrix gen_loadings(std::size_t d, std::size_t r, double u1, double u2, std::span<const double> zeta, Rng& rng) {
    if (!(u1 < u2)) throw Error(ErrorKind::invalid_argument, "loading bounds need u1 < u2");
    if (zeta.size() != r) throw Error(ErrorKind::shape_mismatch, "one strength exponent per factor is required");
    std::uniform_real_distribution<double> unif(u1, u2);
    Matrix a(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(r));
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = unif(rng);
    for (std::size_t j = 0; j < r; ++j)
        a.col(static_cast<Eigen::Index>(j)) *= std::pow(static_cast<double>(d), -zeta[j]);
    return a;
}

Matrix random_orthogonal(std::size_t d, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
    const Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    return q;
}

std::string_view to_string(Setting s) noexcept {
    switch (s) {
    case Setting::Ia: return "Ia";
    case Setting::Ib: return "Ib";
    case Setting::IIa: return "IIa";
    case Setting::IIb: return "IIb";
    case Setting::IIIa: return "IIIa";
    case Setting::IIIb: return "IIIb";
    case Setting::custom: return "custom";
    }
    return "unknown";
}

Setting parse_setting(std::string_view tag) {
    for (Setting s : {Setting::Ia, Setting::Ib, Setting::IIa, Setting::IIb, Setting::IIIa, Setting::IIIb,
                      Setting::custom})
        if (to_string(s) == tag) return s;
    throw Error(ErrorKind::config, "unknown setting '" + std::string(tag) + "'");
}

void DgpConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, msg); };
    if (dims.empty()) fail("at least one mode is required");
    if (ranks.size() != dims.size()) fail("ranks must list one value per mode");
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (dims[k] == 0) fail("dimensions must be positive");
        if (ranks[k] == 0 || ranks[k] > dims[k]) fail("rank of mode " + std::to_string(k + 1) + " must lie in [1, d]");
    }
    if (T < 2) fail("T must be at least 2");
    if (!(u1 < u2)) fail("u1 must be below u2");
    if (!zeta.empty() && zeta.size() != dims.size()) fail("zeta must list one group per mode");
    for (const auto& row : zeta) {
        if (row.empty()) fail("zeta groups must be non-empty");
        for (double z : row)
            if (!(z >= 0.0 && z <= 0.5)) fail("zeta values must lie in [0, 0.5]");
    }
    if (!(psi_sparsity >= 0.0 && psi_sparsity <= 1.0)) fail("psi_sparsity must lie in [0, 1]");
    if (!(sigma_eig_lo > 0.0 && sigma_eig_lo <= sigma_eig_hi)) fail("sigma eigenvalue bounds need 0 < lo <= hi");
    for (const ArCoeffs* c : {&ar_factor, &ar_common, &ar_idio})
        if (!ar_is_stationary(*c)) throw Error(ErrorKind::non_stationary, "AR coefficients are not stationary");
}

std::vector<double> DgpConfig::zeta_for(std::size_t k) const {
    const std::size_t r = ranks.at(k);
    if (zeta.empty()) return std::vector<double>(r, 0.0);
    std::vector<double> out = zeta.at(k);
    if (out.size() > r) out.resize(r);
    while (out.size() < r) out.push_back(out.back());
    return out;
}

DgpConfig apply_setting(DgpConfig cfg, Setting s) {
    if (s == Setting::custom) return cfg;
    std::vector<double> z;
    switch (s) {
    case Setting::Ia:
    case Setting::Ib: z = {0.0}; break;
    case Setting::IIa:
    case Setting::IIb: z = {0.0, 0.2}; break;
    default: z = {0.1, 0.2}; break;
    }
    const bool b_family = s == Setting::Ib || s == Setting::IIb || s == Setting::IIIb;
    cfg.u1 = b_family ? 0.0 : -2.0;
    cfg.u2 = 2.0;
    cfg.zeta.assign(cfg.dims.size(), z);
    return cfg;
}

namespace {

Matrix ar_block(std::size_t rows, std::size_t T, const ArCoeffs& coeffs, Rng& rng) {
    Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(T));
    for (std::size_t i = 0; i < rows; ++i) out.row(static_cast<Eigen::Index>(i)) = gen_ar5(T, coeffs, rng).transpose();
    return out;
}

Matrix sparse_gaussian(std::size_t rows, std::size_t cols, double zero_prob, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution zero(zero_prob);
    Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < out.cols(); ++j)
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            const double v = normal(rng);
            out(i, j) = zero(rng) ? 0.0 : v;
        }
    return out;
}

} // namespace

TensorSeries gen_noise_series(const DgpConfig& cfg, Rng& rng) {
    cfg.validate();
    const std::size_t d1 = cfg.dims[0];
    const std::size_t fibres = product_except(cfg.dims, 0);
    const auto rows = static_cast<Eigen::Index>(d1);
    Matrix cols = Matrix::Zero(static_cast<Eigen::Index>(d1 * fibres), static_cast<Eigen::Index>(cfg.T));

    Matrix psi;
    if (cfg.shared_psi) psi = sparse_gaussian(d1, cfg.r_e, cfg.psi_sparsity, rng);
    const Matrix common = ar_block(cfg.r_e, cfg.T, cfg.ar_common, rng);

    std::uniform_real_distribution<double> eig(cfg.sigma_eig_lo, cfg.sigma_eig_hi);
    for (std::size_t l = 0; l < fibres; ++l) {
        auto block = cols.middleRows(static_cast<Eigen::Index>(l * d1), rows);
        if (!cfg.shared_psi) psi = sparse_gaussian(d1, cfg.r_e, cfg.psi_sparsity, rng);
        if (cfg.r_e > 0) block.noalias() += psi * common;
        const Matrix q = random_orthogonal(d1, rng);
        Vector root(rows);
        for (Eigen::Index i = 0; i < rows; ++i) root(i) = std::sqrt(eig(rng));
        const Matrix sigma_root = q * root.asDiagonal() * q.transpose();
        block.noalias() += sigma_root * ar_block(d1, cfg.T, cfg.ar_idio, rng);
    }
    return {cfg.dims, std::move(cols)};
}

DgpGroundTruth simulate(const DgpConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const std::size_t K = cfg.dims.size();
    const std::size_t n = product(cfg.dims);

    std::normal_distribution<double> normal(0.0, 1.0);
    Vector mu(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < mu.size(); ++i) mu(i) = normal(rng);

    std::vector<Matrix> loadings;
    std::vector<Matrix> bases;
    for (std::size_t k = 0; k < K; ++k) {
        loadings.push_back(gen_loadings(cfg.dims[k], cfg.ranks[k], cfg.u1, cfg.u2, cfg.zeta_for(k), rng));
        const Eigen::JacobiSVD<Matrix> svd(loadings.back(), Eigen::ComputeThinU);
        bases.push_back(svd.matrixU());
    }

    const Matrix factors = ar_block(product(cfg.ranks), cfg.T, cfg.ar_factor, rng);
    Matrix cols = kron_chain_minus_k(std::span<const Matrix>(loadings), K) * factors;
    cols.colwise() += mu;
    if (cfg.noise) cols += gen_noise_series(cfg, rng).columns();
    return {std::move(loadings), std::move(bases), Tensor(cfg.dims, mu), TensorSeries(cfg.dims, std::move(cols))};
}

DgpGroundTruth simulate_setting(const DgpConfig& cfg, Setting s) { return simulate(apply_setting(cfg, s)); }

namespace {

Eigen::ArrayXd centered_market(const Matrix& y, const Vector& x, double& sxx) {
    if (y.rows() != x.size()) throw Error(ErrorKind::shape_mismatch, "panel and market series differ in length");
    if (x.size() < 2) throw Error(ErrorKind::invalid_argument, "need at least two observations");
    const Eigen::ArrayXd xc = x.array() - x.mean();
    sxx = xc.square().sum();
    if (!(sxx > 1e-24 * x.squaredNorm()) || !(sxx > 0.0))
        throw Error(ErrorKind::degenerate, "market series is constant");
    return xc;
}

} // namespace

Vector capm_betas(const Matrix& y, const Vector& x) {
    double sxx = 0.0;
    const Eigen::ArrayXd xc = centered_market(y, x, sxx);
    const Matrix yc = y.rowwise() - y.colwise().mean();
    return yc.transpose() * xc.matrix() / sxx;
}

Matrix capm_residuals(const Matrix& y, const Vector& x) {
    double sxx = 0.0;
    const Eigen::ArrayXd xc = centered_market(y, x, sxx);
    const Matrix yc = y.rowwise() - y.colwise().mean();
    const Vector beta = yc.transpose() * xc.matrix() / sxx;
    return yc - xc.matrix() * beta.transpose();
}

} // namespace tfm
