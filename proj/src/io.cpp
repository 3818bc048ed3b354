#include "tfm/io.hpp"

#include "tfm/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace tfm {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::io, "cannot read '" + path.string() + "'");
    return is;
}

double parse_double(std::string_view tok) {
    double v = 0.0;
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    if (!tok.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw Error(ErrorKind::parse, "not a number: '" + std::string(tok) + "'");
    return v;
}

std::size_t parse_count(const std::string& tok, const char* what) {
    std::size_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw Error(ErrorKind::parse, std::string("bad ") + what + ": '" + tok + "'");
    return v;
}

void check_stream(const std::ostream& os, const std::string& what) {
    if (!os) throw Error(ErrorKind::io, "write failed for " + what);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    }
    return out;
}

} // namespace

void write_series(std::ostream& os, const TensorSeries& x) {
    os << "tsrs 1\n" << x.order() << ' ' << x.length();
    for (std::size_t d : x.dims()) os << ' ' << d;
    os << '\n';
    const Matrix& c = x.columns();
    for (Eigen::Index t = 0; t < c.cols(); ++t) {
        for (Eigen::Index i = 0; i < c.rows(); ++i) {
            if (i > 0) os << ' ';
            os << format_double(c(i, t));
        }
        os << '\n';
    }
}

void write_series(const std::filesystem::path& path, const TensorSeries& x) {
    auto os = open_out(path);
    write_series(os, x);
    os.flush();
    check_stream(os, path.string());
}

TensorSeries read_series(std::istream& is) {
    std::string magic, version;
    if (!(is >> magic >> version) || magic != "tsrs" || version != "1")
        throw Error(ErrorKind::parse, "missing 'tsrs 1' header");
    std::string tok;
    if (!(is >> tok)) throw Error(ErrorKind::parse, "missing order");
    const std::size_t K = parse_count(tok, "order");
    if (!(is >> tok)) throw Error(ErrorKind::parse, "missing length");
    const std::size_t T = parse_count(tok, "length");
    if (K == 0) throw Error(ErrorKind::parse, "order must be positive");
    Dims dims(K);
    for (auto& d : dims) {
        if (!(is >> tok)) throw Error(ErrorKind::parse, "missing dimension");
        d = parse_count(tok, "dimension");
        if (d == 0) throw Error(ErrorKind::parse, "dimensions must be positive");
    }
    const std::size_t n = product(dims);
    Matrix cols(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(T));
    for (Eigen::Index t = 0; t < cols.cols(); ++t)
        for (Eigen::Index i = 0; i < cols.rows(); ++i) {
            if (!(is >> tok))
                throw Error(ErrorKind::parse, "expected " + std::to_string(n * T) + " values, found " +
                                                  std::to_string(static_cast<std::size_t>(t) * n +
                                                                 static_cast<std::size_t>(i)));
            cols(i, t) = parse_double(tok);
        }
    if (is >> tok) throw Error(ErrorKind::parse, "trailing values after " + std::to_string(n * T) + " entries");
    return {std::move(dims), std::move(cols)};
}

TensorSeries read_series(const std::filesystem::path& path) {
    auto is = open_in(path);
    return read_series(is);
}

void write_matrices(const std::filesystem::path& path, const std::vector<std::pair<std::string, Matrix>>& blocks) {
    auto os = open_out(path);
    for (const auto& [label, m] : blocks) {
        os << "matrix " << label << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << format_double(m(i, j));
            os << '\n';
        }
    }
    os.flush();
    check_stream(os, path.string());
}

LabelledMatrices read_matrices(const std::filesystem::path& path) {
    auto is = open_in(path);
    LabelledMatrices out;
    std::string word;
    while (is >> word) {
        if (word != "matrix") throw Error(ErrorKind::parse, "expected 'matrix', got '" + word + "'");
        std::string label, r, c;
        if (!(is >> label >> r >> c)) throw Error(ErrorKind::parse, "truncated matrix header");
        Matrix m(static_cast<Eigen::Index>(parse_count(r, "rows")), static_cast<Eigen::Index>(parse_count(c, "cols")));
        std::string tok;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (!(is >> tok)) throw Error(ErrorKind::parse, "truncated matrix '" + label + "'");
                m(i, j) = parse_double(tok);
            }
        out[label] = std::move(m);
    }
    return out;
}

Matrix read_numeric_csv(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    std::size_t width = 0;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split(line, ',');
        std::vector<double> row;
        try {
            for (const auto& f : fields) row.push_back(parse_double(f));
        } catch (const Error&) {
            if (first) {
                first = false;
                continue;
            }
            throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
        }
        first = false;
        if (rows.empty()) width = row.size();
        if (row.size() != width)
            throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                              std::to_string(width) + " fields");
        rows.push_back(std::move(row));
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header) {
    auto os = open_out(path);
    for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
    if (!header.empty()) os << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
        os << '\n';
    }
    os.flush();
    check_stream(os, path.string());
}

} // namespace tfm
