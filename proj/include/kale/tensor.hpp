#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace kale {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape) noexcept;
std::string shape_to_string(const Shape& shape);

/// Dense row-major tensor of 64-bit reals; the universal data carrier.
///
/// The default-constructed tensor is an order-0 scalar holding 0.
class Tensor {
public:
    Tensor() : data_(1, 0.0) {}
    explicit Tensor(Shape shape, double fill = 0.0);
    /// Throws ShapeError unless data.size() == shape_size(shape).
    Tensor(Shape shape, std::vector<double> data);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t order() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t mode) const { return shape_.at(mode); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    double& operator[](std::size_t flat) noexcept { return data_[flat]; }
    double operator[](std::size_t flat) const noexcept { return data_[flat]; }

    /// Multi-index access; bounds are checked.
    double& at(std::initializer_list<std::size_t> index);
    double at(std::initializer_list<std::size_t> index) const;
    std::size_t flat_index(std::span<const std::size_t> index) const;

    /// Same data, new shape of equal size.
    Tensor reshaped(Shape shape) const;
    void fill(double v) noexcept;
    bool all_finite() const noexcept;

    Tensor& operator+=(const Tensor& other);
    Tensor& operator-=(const Tensor& other);
    Tensor& operator*=(double s) noexcept;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(double s, Tensor a);

/// Row-major dense matrix; the order-2 case kept as its own type so that
/// projection matrices and unfoldings cannot be mixed up with samples.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    /// Requires an order-2 tensor.
    static Matrix from_tensor(const Tensor& t);
    Tensor to_tensor() const;

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    Matrix transposed() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// a * a^T.
Matrix gram(const Matrix& a);
double frobenius_norm(const Matrix& a) noexcept;
double frobenius_norm(const Tensor& a) noexcept;
double max_abs_diff(std::span<const double> a, std::span<const double> b);

/// Mode-n unfolding. Rows index shape[mode]; columns enumerate the remaining
/// modes in row-major order with the lowest-numbered remaining mode varying
/// slowest.
Matrix unfold(const Tensor& x, std::size_t mode);

/// Inverse of unfold for a tensor of the given shape.
Tensor fold(const Matrix& m, std::size_t mode, const Shape& shape);

/// x ×_mode u. Requires u.cols() == x.dim(mode); the result has
/// shape[mode] = u.rows(). Equal to fold(u * unfold(x, mode)).
Tensor mode_product(const Tensor& x, const Matrix& u, std::size_t mode);

struct SymmetricEigen {
    std::vector<double> values;  // descending
    Matrix vectors;              // column i is the unit eigenvector for values[i]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps until the off-diagonal Frobenius norm falls below 1e-12 * ||a||_F
/// (at most 100 sweeps). Eigenpairs are sorted by descending eigenvalue
/// (stable on ties) and each eigenvector is signed so that its
/// largest-magnitude entry is positive, the first such entry on ties.
SymmetricEigen sym_eig_desc(const Matrix& a);

}  // namespace kale
