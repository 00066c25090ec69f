#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lexigp {

/// Dense row-major matrix of doubles.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw std::invalid_argument("Matrix: data size does not match shape");
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    std::span<const double> values() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Population x active-cases matrix of nonnegative finite errors. Row i belongs
/// to individual i. Construction validates the shape and every entry.
class ErrorMatrix {
  public:
    ErrorMatrix(std::size_t rows, std::size_t cols, std::vector<double> errors);
    explicit ErrorMatrix(Matrix errors);

    std::size_t rows() const noexcept { return m_.rows(); }
    std::size_t cols() const noexcept { return m_.cols(); }
    double operator()(std::size_t i, std::size_t t) const { return m_(i, t); }
    std::span<const double> row(std::size_t i) const { return m_.row(i); }
    const Matrix& matrix() const noexcept { return m_; }

    /// Same matrix with every entry multiplied by `factor` (> 0).
    ErrorMatrix scaled(double factor) const;

  private:
    void validate() const;
    Matrix m_;
};

} // namespace lexigp
