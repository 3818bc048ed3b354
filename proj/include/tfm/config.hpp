#pragma once

#include "tfm/bench.hpp"
#include "tfm/dgp.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tfm {

/// Flat `key = value` text, one pair per line, `#` starts a comment.
/// Every key must be consumed with take() before finish(), so typos surface
/// as errors instead of silently falling back to defaults.
class KeyValues {
public:
    static KeyValues parse(std::istream& is, std::string source = "<config>");
    static KeyValues load(const std::filesystem::path& path);

    [[nodiscard]] std::optional<std::string> take(const std::string& key);
    [[nodiscard]] bool contains(const std::string& key) const { return entries_.contains(key); }
    /// Throws ErrorKind::config naming the first unused key.
    void finish() const;
    [[nodiscard]] const std::string& source() const noexcept { return source_; }

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };
    std::map<std::string, Entry> entries_;
    std::set<std::string> used_;
    std::string source_;
};

[[nodiscard]] std::size_t parse_size(const std::string& s, const std::string& what);
[[nodiscard]] std::uint64_t parse_u64(const std::string& s, const std::string& what);
[[nodiscard]] double parse_real(const std::string& s, const std::string& what);
[[nodiscard]] bool parse_bool(const std::string& s, const std::string& what);
[[nodiscard]] std::vector<std::size_t> parse_size_list(const std::string& s, const std::string& what);
[[nodiscard]] std::vector<double> parse_real_list(const std::string& s, const std::string& what);
/// Either a comma list or `lo:step:hi` (inclusive, step > 0).
/// "auto" yields an empty grid, i.e. the data-dependent default.
[[nodiscard]] std::vector<double> parse_c_grid(const std::string& s);

struct SimulateSpec {
    Setting setting = Setting::Ia;
    DgpConfig dgp;
};

/// Reads the data-generating keys (see README) and applies the setting.
[[nodiscard]] SimulateSpec read_simulate_config(KeyValues& kv);
/// Data-generating keys plus the benchmark and estimator keys.
[[nodiscard]] BenchConfig read_bench_config(KeyValues& kv);

} // namespace tfm
