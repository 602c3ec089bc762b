#include "reserve/triangle.hpp"

#include <cmath>
#include <charconv>
#include <istream>
#include <limits>
#include <sstream>

namespace reserve {

Triangle::Triangle(int n, Flavor flavor, Mask mask)
    : n_(n), flavor_(flavor), mask_(mask),
      cells_(static_cast<std::size_t>(n) * n,
             std::numeric_limits<double>::quiet_NaN()) {
    if (n < 2)
        throw TriangleError("triangle dimension must be >= 2, got " +
                            std::to_string(n));
}

void Triangle::check(int i, int j) const {
    if (i < 1 || i > n_ || j < 1 || j > n_)
        throw TriangleError("cell (" + std::to_string(i) + "," +
                            std::to_string(j) + ") out of range for n=" +
                            std::to_string(n_));
    if (!defined(i, j))
        throw MaskError("cell (" + std::to_string(i) + "," +
                        std::to_string(j) +
                        ") is below the diagonal of an upper-only triangle");
}

Triangle Triangle::masked_upper() const {
    Triangle out(n_, flavor_, Mask::UpperOnly);
    for (int i = 1; i <= n_; ++i)
        for (int j = 1; j <= n_ - i + 1; ++j)
            out.set(i, j, at(i, j));
    return out;
}

Triangle to_cumulative(const Triangle& t) {
    if (t.flavor() != Flavor::Incremental)
        throw TriangleError("to_cumulative expects an incremental triangle");
    Triangle out(t.n(), Flavor::Cumulative, t.mask());
    for (int i = 1; i <= t.n(); ++i) {
        double run = 0.0;
        for (int j = 1; j <= t.row_len(i); ++j) {
            run += t.at(i, j);
            out.set(i, j, run);
        }
    }
    return out;
}

Triangle to_incremental(const Triangle& t) {
    if (t.flavor() != Flavor::Cumulative)
        throw TriangleError("to_incremental expects a cumulative triangle");
    Triangle out(t.n(), Flavor::Incremental, t.mask());
    for (int i = 1; i <= t.n(); ++i) {
        out.set(i, 1, t.at(i, 1));
        for (int j = 2; j <= t.row_len(i); ++j)
            out.set(i, j, t.at(i, j) - t.at(i, j - 1));
    }
    return out;
}

UltimateClaim ultimate(const Triangle& t) {
    if (t.mask() != Mask::Full)
        throw MaskError("ultimate requires a full square, not upper-only");
    const Triangle* cum = &t;
    Triangle tmp(t.n(), Flavor::Cumulative, Mask::Full);
    if (t.flavor() == Flavor::Incremental) {
        tmp = to_cumulative(t);
        cum = &tmp;
    }
    double uc = 0.0;
    for (int i = 1; i <= cum->n(); ++i)
        uc += cum->at(i, cum->n());
    return UltimateClaim{uc};
}

namespace {

std::vector<std::vector<double>> read_rows(std::istream& in,
                                           bool skip_header) {
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<double> row;
        std::size_t pos = 0;
        int col = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            std::string field = line.substr(
                pos, comma == std::string::npos ? std::string::npos
                                                : comma - pos);
            ++col;
            // trim spaces
            std::size_t b = field.find_first_not_of(" \t");
            std::size_t e = field.find_last_not_of(" \t");
            if (b == std::string::npos) {
                throw ParseError("empty field", lineno, col);
            }
            field = field.substr(b, e - b + 1);
            double v;
            auto [p, ec] =
                std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc{} || p != field.data() + field.size()) {
                if (first && skip_header) {
                    row.clear();
                    break;
                }
                throw ParseError("not a number: '" + field + "'", lineno, col);
            }
            row.push_back(v);
            if (comma == std::string::npos)
                break;
            pos = comma + 1;
        }
        if (first && skip_header && row.empty()) {
            first = false;
            continue;
        }
        first = false;
        if (!row.empty())
            rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

Triangle parse_csv(std::istream& in, Flavor flavor, bool skip_header) {
    auto rows = read_rows(in, skip_header);
    if (rows.size() < 2)
        throw ShapeError("need at least 2 rows, got " +
                         std::to_string(rows.size()));
    const int n = static_cast<int>(rows[0].size());
    if (n < 2)
        throw ShapeError("first row has " + std::to_string(n) +
                         " values; need n >= 2");
    if (static_cast<int>(rows.size()) != n)
        throw ShapeError("expected " + std::to_string(n) + " rows, got " +
                         std::to_string(rows.size()));
    bool upper = rows.back().size() == 1 && n > 1;
    Mask mask = upper ? Mask::UpperOnly : Mask::Full;
    Triangle t(n, flavor, mask);
    for (int i = 1; i <= n; ++i) {
        const auto& row = rows[i - 1];
        const int want = upper ? n - i + 1 : n;
        if (static_cast<int>(row.size()) != want)
            throw ShapeError("row " + std::to_string(i) + " has " +
                             std::to_string(row.size()) + " values, expected " +
                             std::to_string(want));
        for (int j = 1; j <= want; ++j)
            t.set(i, j, row[j - 1]);
    }
    return t;
}

Triangle parse_csv(const std::string& text, Flavor flavor, bool skip_header) {
    std::istringstream in(text);
    return parse_csv(in, flavor, skip_header);
}

std::string emit_csv(const Triangle& t) {
    std::ostringstream out;
    out.precision(17);
    for (int i = 1; i <= t.n(); ++i) {
        for (int j = 1; j <= t.row_len(i); ++j) {
            if (j > 1)
                out << ',';
            out << t.at(i, j);
        }
        out << '\n';
    }
    return out.str();
}

} // namespace reserve
