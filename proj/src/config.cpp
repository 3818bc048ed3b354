#include "tfm/config.hpp"

#include "tfm/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

namespace tfm {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

[[noreturn]] void bad(const std::string& what, const std::string& value, const std::string& expected) {
    throw Error(ErrorKind::config, what + ": '" + value + "' is not " + expected);
}

} // namespace

KeyValues KeyValues::parse(std::istream& is, std::string source) {
    KeyValues kv;
    kv.source_ = std::move(source);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = kv.source_ + ":" + std::to_string(line_no);
        if (eq == std::string::npos) throw Error(ErrorKind::config, where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw Error(ErrorKind::config, where + ": empty key");
        if (kv.entries_.contains(key))
            throw Error(ErrorKind::config, where + ": key '" + key + "' repeats line " +
                                               std::to_string(kv.entries_[key].line));
        kv.entries_[key] = Entry{value, line_no};
    }
    return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::io, "cannot read '" + path.string() + "'");
    return parse(is, path.string());
}

std::optional<std::string> KeyValues::take(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    used_.insert(key);
    return it->second.value;
}

void KeyValues::finish() const {
    for (const auto& [key, entry] : entries_)
        if (!used_.contains(key))
            throw Error(ErrorKind::config, source_ + ":" + std::to_string(entry.line) + ": unknown key '" + key + "'");
}

std::size_t parse_size(const std::string& s, const std::string& what) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) bad(what, s, "a non-negative integer");
    return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) bad(what, s, "a 64-bit unsigned integer");
    return v;
}

double parse_real(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v))
        bad(what, s, "a finite number");
    return v;
}

bool parse_bool(const std::string& s, const std::string& what) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    bad(what, s, "a boolean");
}

std::vector<std::size_t> parse_size_list(const std::string& s, const std::string& what) {
    std::vector<std::size_t> out;
    for (const auto& tok : split(s, ',')) out.push_back(parse_size(tok, what));
    return out;
}

std::vector<double> parse_real_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) out.push_back(parse_real(tok, what));
    return out;
}

std::vector<double> parse_c_grid(const std::string& s) {
    if (s == "auto") return {};
    if (s.find(':') == std::string::npos) return parse_real_list(s, "c_grid");
    const auto parts = split(s, ':');
    if (parts.size() != 3) bad("c_grid", s, "of the form lo:step:hi");
    const double lo = parse_real(parts[0], "c_grid");
    const double step = parse_real(parts[1], "c_grid");
    const double hi = parse_real(parts[2], "c_grid");
    if (!(step > 0.0) || hi < lo) bad("c_grid", s, "an increasing range");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    std::vector<double> out;
    for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

namespace {

ArCoeffs parse_ar(const std::string& s, const std::string& what) {
    const auto v = parse_real_list(s, what);
    if (v.size() != 5) bad(what, s, "a list of five coefficients");
    return {v[0], v[1], v[2], v[3], v[4]};
}

// A single value is broadcast to every mode.
std::vector<std::size_t> per_mode(const std::string& s, const std::string& what, std::optional<std::size_t> K) {
    auto v = parse_size_list(s, what);
    if (K && v.size() == 1) v.assign(*K, v[0]);
    if (K && v.size() != *K)
        throw Error(ErrorKind::config, what + " lists " + std::to_string(v.size()) + " values for K = " +
                                           std::to_string(*K));
    return v;
}

SimulateSpec read_dgp_keys(KeyValues& kv) {
    SimulateSpec spec;
    DgpConfig& c = spec.dgp;
    if (auto v = kv.take("setting")) spec.setting = parse_setting(*v);

    std::optional<std::size_t> K;
    if (auto v = kv.take("K")) {
        K = parse_size(*v, "K");
        if (*K == 0) throw Error(ErrorKind::config, "K must be positive");
    }
    if (auto v = kv.take("d")) c.dims = per_mode(*v, "d", K);
    else if (K) c.dims.assign(*K, c.dims.front());
    K = c.dims.size();
    if (auto v = kv.take("r")) c.ranks = per_mode(*v, "r", K);
    else c.ranks.assign(*K, c.ranks.front());
    if (auto v = kv.take("T")) c.T = parse_size(*v, "T");
    if (auto v = kv.take("r_e")) c.r_e = parse_size(*v, "r_e");

    const bool custom = spec.setting == Setting::custom;
    for (const char* key : {"u1", "u2", "zeta"})
        if (kv.contains(key) && !custom)
            throw Error(ErrorKind::config, std::string("key '") + key + "' is only allowed with setting = custom");
    if (auto v = kv.take("u1")) c.u1 = parse_real(*v, "u1");
    if (auto v = kv.take("u2")) c.u2 = parse_real(*v, "u2");
    if (auto v = kv.take("zeta")) {
        const auto groups = split(*v, ';');
        if (groups.size() == 1) c.zeta.assign(*K, parse_real_list(groups[0], "zeta"));
        else
            for (const auto& g : groups) c.zeta.push_back(parse_real_list(g, "zeta"));
    }

    if (auto v = kv.take("ar_factor")) c.ar_factor = parse_ar(*v, "ar_factor");
    if (auto v = kv.take("ar_common")) c.ar_common = parse_ar(*v, "ar_common");
    if (auto v = kv.take("ar_idio")) c.ar_idio = parse_ar(*v, "ar_idio");
    if (auto v = kv.take("psi_sparsity")) c.psi_sparsity = parse_real(*v, "psi_sparsity");
    if (auto v = kv.take("sigma_eig_bounds")) {
        const auto b = parse_real_list(*v, "sigma_eig_bounds");
        if (b.size() != 2) bad("sigma_eig_bounds", *v, "a pair lo,hi");
        c.sigma_eig_lo = b[0];
        c.sigma_eig_hi = b[1];
    }
    if (auto v = kv.take("shared_psi")) c.shared_psi = parse_bool(*v, "shared_psi");
    if (auto v = kv.take("noise")) c.noise = parse_bool(*v, "noise");
    if (auto v = kv.take("seed")) c.seed = parse_u64(*v, "seed");
    return spec;
}

} // namespace

SimulateSpec read_simulate_config(KeyValues& kv) {
    SimulateSpec spec = read_dgp_keys(kv);
    kv.finish();
    apply_setting(spec.dgp, spec.setting).validate();
    return spec;
}

BenchConfig read_bench_config(KeyValues& kv) {
    const SimulateSpec spec = read_dgp_keys(kv);
    BenchConfig b;
    b.setting = spec.setting;
    b.dgp = spec.dgp;
    b.seed = spec.dgp.seed;
    if (auto v = kv.take("R")) b.R = parse_size(*v, "R");
    if (auto v = kv.take("estimators")) {
        b.estimators.clear();
        for (const auto& name : split(*v, ',')) b.estimators.push_back(parse_estimator(name));
    }
    if (auto v = kv.take("threads")) b.threads = parse_size(*v, "threads");
    if (auto v = kv.take("timing")) b.timing = parse_bool(*v, "timing");
    if (auto v = kv.take("m0")) b.pre.m0 = parse_size(*v, "m0");
    if (auto v = kv.take("m")) b.pre.m = parse_size(*v, "m");
    if (auto v = kv.take("n_frac")) b.pre.n_frac = parse_real(*v, "n_frac");
    if (auto v = kv.take("iters")) b.refine.max_iters = parse_size(*v, "iters");
    if (auto v = kv.take("tol")) b.refine.tolerance = parse_real(*v, "tol");
    if (auto v = kv.take("hooi_iters")) b.hooi_iters = parse_size(*v, "hooi_iters");
    if (auto v = kv.take("B")) b.rank.B = parse_size(*v, "B");
    if (auto v = kv.take("p")) b.rank.p = parse_real(*v, "p");
    if (auto v = kv.take("c_grid")) b.rank.c_grid = parse_c_grid(*v);
    kv.finish();
    b.validate();
    return b;
}

} // namespace tfm
