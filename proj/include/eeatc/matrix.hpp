// matrix.hpp — small dense row-major matrix of doubles.
//
// Feature matrices in this toolkit are N rows by a handful of columns, so
// this stays deliberately minimal: storage, indexing, row views, and the
// column-append helper the two-phase pipeline uses.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eeatc/error.hpp"

namespace eeatc {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) {
        return {data_.data() + r * cols_, cols_};
    }

    // Appends one row; sets the column count on first use.
    void push_row(std::span<const double> values) {
        if (cols_ == 0)
            cols_ = values.size();
        if (values.size() != cols_)
            throw ShapeMismatch("push_row: expected " + std::to_string(cols_) +
                                " values, got " + std::to_string(values.size()));
        data_.insert(data_.end(), values.begin(), values.end());
        ++rows_;
    }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            out[r] = (*this)(r, c);
        return out;
    }

    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// New matrix with `col` appended as the last column.
inline Matrix with_column(const Matrix& m, std::span<const double> col) {
    if (col.size() != m.rows())
        throw ShapeMismatch("with_column: column length " + std::to_string(col.size()) +
                            " does not match row count " + std::to_string(m.rows()));
    Matrix out(m.rows(), m.cols() + 1);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c)
            out(r, c) = m(r, c);
        out(r, m.cols()) = col[r];
    }
    return out;
}

} // namespace eeatc
