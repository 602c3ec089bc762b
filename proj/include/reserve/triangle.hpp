#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace reserve {

enum class Flavor { Incremental, Cumulative };
enum class Mask { UpperOnly, Full };

struct TriangleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MaskError : TriangleError {
    using TriangleError::TriangleError;
};

struct ParseError : TriangleError {
    ParseError(const std::string& what, int row, int col)
        : TriangleError(what + " (row " + std::to_string(row) + ", column " +
                        std::to_string(col) + ")"),
          row(row), col(col) {}
    int row;
    int col;
};

struct ShapeError : TriangleError {
    using TriangleError::TriangleError;
};

/// Run-off triangle: n x n claim array. Indices are 1-based to match the
/// usual actuarial notation; cell (i, j) is accident year i, delay j.
/// With Mask::UpperOnly, only cells with i + j <= n + 1 are defined and
/// touching a lower cell throws MaskError.
class Triangle {
public:
    Triangle(int n, Flavor flavor, Mask mask);

    int n() const { return n_; }
    Flavor flavor() const { return flavor_; }
    Mask mask() const { return mask_; }

    bool defined(int i, int j) const {
        return mask_ == Mask::Full || i + j <= n_ + 1;
    }

    double at(int i, int j) const {
        check(i, j);
        return cells_[idx(i, j)];
    }
    void set(int i, int j, double v) {
        check(i, j);
        cells_[idx(i, j)] = v;
    }

    /// Number of defined cells in row i.
    int row_len(int i) const {
        return mask_ == Mask::Full ? n_ : n_ - i + 1;
    }

    Triangle masked_upper() const;

private:
    void check(int i, int j) const;
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i - 1) * n_ + (j - 1);
    }

    int n_;
    Flavor flavor_;
    Mask mask_;
    std::vector<double> cells_;
};

Triangle to_cumulative(const Triangle& t);
Triangle to_incremental(const Triangle& t);

struct UltimateClaim {
    double value;
};

/// UC = sum_i C_{i,n}; requires a Full cumulative triangle.
UltimateClaim ultimate(const Triangle& t);

/// Parse the CSV triangle format: row i carries n-i+1 values (UpperOnly)
/// or n values (Full); shape is inferred from the first row.
Triangle parse_csv(std::istream& in, Flavor flavor, bool skip_header = false);
Triangle parse_csv(const std::string& text, Flavor flavor,
                   bool skip_header = false);

std::string emit_csv(const Triangle& t);

} // namespace reserve
