#include "fhmor/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fhmor {

namespace {

struct LineReader {
    std::ifstream in;
    std::string path;
    long line_no = 0;

    explicit LineReader(const std::string& p) : in(p), path(p) {
        if (!in) throw IoError("matrix market: cannot open " + p);
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(path + ":" + std::to_string(line_no) + ": " + msg);
    }

    // Next non-comment, non-blank line; comments start with '%'.
    bool next_data_line(std::string& out) {
        while (std::getline(in, out)) {
            ++line_no;
            const auto first = out.find_first_not_of(" \t\r\n");
            if (first == std::string::npos) continue;
            if (out[first] == '%') continue;
            return true;
        }
        return false;
    }
};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_value(LineReader& reader, std::istringstream& ls) {
    double v;
    if (!(ls >> v)) reader.fail("expected a numeric value");
    return v;
}

}  // namespace

Eigen::MatrixXd read_matrix_market(const std::string& path) {
    LineReader reader(path);

    std::string header;
    if (!std::getline(reader.in, header)) reader.fail("empty file");
    reader.line_no = 1;
    std::istringstream hs(header);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") reader.fail("missing %%MatrixMarket banner");
    object = lower(object);
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (object != "matrix") reader.fail("unsupported object '" + object + "'");
    if (format != "array" && format != "coordinate")
        reader.fail("unsupported format '" + format + "'");
    if (field != "real" && field != "integer") reader.fail("unsupported field '" + field + "'");
    if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric")
        reader.fail("unsupported symmetry '" + symmetry + "'");

    std::string line;
    if (!reader.next_data_line(line)) reader.fail("missing size line");
    std::istringstream size_line(line);
    long rows = 0, cols = 0, nnz = 0;
    if (!(size_line >> rows >> cols)) reader.fail("malformed size line");
    if (rows <= 0 || cols <= 0) reader.fail("dimensions must be positive");
    const bool sym = symmetry != "general";
    if (sym && rows != cols) reader.fail("symmetric matrix must be square");

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, cols);

    if (format == "array") {
        // Column-major; symmetric variants store the lower triangle only.
        for (long j = 0; j < cols; ++j) {
            const long i0 = sym ? (symmetry == "skew-symmetric" ? j + 1 : j) : 0;
            for (long i = i0; i < rows; ++i) {
                if (!reader.next_data_line(line)) reader.fail("unexpected end of data");
                std::istringstream ls(line);
                const double v = parse_value(reader, ls);
                M(i, j) = v;
                if (sym && i != j) M(j, i) = symmetry == "skew-symmetric" ? -v : v;
            }
        }
    } else {
        if (!(size_line >> nnz)) reader.fail("coordinate format needs an entry count");
        for (long e = 0; e < nnz; ++e) {
            if (!reader.next_data_line(line)) reader.fail("unexpected end of data");
            std::istringstream ls(line);
            long i, j;
            if (!(ls >> i >> j)) reader.fail("malformed coordinate entry");
            if (i < 1 || i > rows || j < 1 || j > cols) reader.fail("index out of bounds");
            const double v = parse_value(reader, ls);
            M(i - 1, j - 1) = v;
            if (sym && i != j) M(j - 1, i - 1) = symmetry == "skew-symmetric" ? -v : v;
        }
    }
    return M;
}

void write_matrix_market(const Eigen::MatrixXd& M, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("matrix market: cannot write " + path);
    out << "%%MatrixMarket matrix array real general\n";
    out << M.rows() << " " << M.cols() << "\n";
    char buf[64];
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", M(i, j));
            out << buf << "\n";
        }
    if (!out) throw IoError("matrix market: write failed for " + path);
}

}  // namespace fhmor
