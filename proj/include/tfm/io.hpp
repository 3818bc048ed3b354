#pragma once

#include "tfm/tensor.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace tfm {

/// Text tensor series format:
///   tsrs 1
///   K T d_1 ... d_K
///   T * prod(d) values, time-major, each step in storage order.
/// Values are printed with 17 significant digits so a round trip is exact.
void write_series(std::ostream& os, const TensorSeries& x);
void write_series(const std::filesystem::path& path, const TensorSeries& x);
[[nodiscard]] TensorSeries read_series(std::istream& is);
[[nodiscard]] TensorSeries read_series(const std::filesystem::path& path);

/// Labelled matrix blocks: "matrix <label> <rows> <cols>" followed by the
/// values row by row.
using LabelledMatrices = std::map<std::string, Matrix>;
void write_matrices(const std::filesystem::path& path, const std::vector<std::pair<std::string, Matrix>>& blocks);
[[nodiscard]] LabelledMatrices read_matrices(const std::filesystem::path& path);

/// Plain numeric CSV; a first row that does not parse as numbers is taken as a header.
[[nodiscard]] Matrix read_numeric_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header = {});

/// Shortest round-trip representation with 17 significant digits.
[[nodiscard]] std::string format_double(double v);

} // namespace tfm
