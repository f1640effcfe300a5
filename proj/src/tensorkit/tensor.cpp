#include "kale/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "kale/errors.hpp"

namespace kale {

std::size_t shape_size(const Shape& shape) noexcept {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_)) {
        throw ShapeError("tensor of shape " + shape_to_string(shape_) + " needs " +
                         std::to_string(shape_size(shape_)) + " values, got " + std::to_string(data_.size()));
    }
}

std::size_t Tensor::flat_index(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) {
        throw ShapeError("index of order " + std::to_string(index.size()) + " for tensor of order " +
                         std::to_string(shape_.size()));
    }
    std::size_t flat = 0;
    for (std::size_t m = 0; m < index.size(); ++m) {
        if (index[m] >= shape_[m]) throw ShapeError("index out of range in mode " + std::to_string(m));
        flat = flat * shape_[m] + index[m];
    }
    return flat;
}

double& Tensor::at(std::initializer_list<std::size_t> index) {
    return data_[flat_index(std::span(index.begin(), index.size()))];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
    return data_[flat_index(std::span(index.begin(), index.size()))];
}

Tensor Tensor::reshaped(Shape shape) const {
    return Tensor(std::move(shape), data_);
}

void Tensor::fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor& Tensor::operator+=(const Tensor& other) {
    if (other.shape_ != shape_) throw ShapeError("shape mismatch in +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
    if (other.shape_ != shape_) throw ShapeError("shape mismatch in -=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(double s) noexcept {
    for (auto& v : data_) v *= s;
    return *this;
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(double s, Tensor a) { return a *= s; }

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw ShapeError("matrix data length does not match rows*cols");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_tensor(const Tensor& t) {
    if (t.order() != 2) throw ShapeError("matrix needs an order-2 tensor, got " + shape_to_string(t.shape()));
    return Matrix(t.dim(0), t.dim(1), t.values());
}

Tensor Matrix::to_tensor() const { return Tensor({rows_, cols_}, data_); }

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul of " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " by " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Matrix gram(const Matrix& a) {
    Matrix g(a.rows(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto ri = a.row(i);
        for (std::size_t j = i; j < a.rows(); ++j) {
            const auto rj = a.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += ri[k] * rj[k];
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

double frobenius_norm(const Matrix& a) noexcept {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

double frobenius_norm(const Tensor& a) noexcept {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("max_abs_diff on spans of different length");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

namespace {

struct ModeSplit {
    std::size_t outer = 1;  // product of dims before the mode
    std::size_t extent = 1;
    std::size_t inner = 1;  // product of dims after the mode
};

ModeSplit split_at(const Shape& shape, std::size_t mode) {
    if (mode >= shape.size()) {
        throw ShapeError("mode " + std::to_string(mode) + " out of range for tensor of order " +
                         std::to_string(shape.size()));
    }
    ModeSplit s;
    for (std::size_t m = 0; m < mode; ++m) s.outer *= shape[m];
    s.extent = shape[mode];
    for (std::size_t m = mode + 1; m < shape.size(); ++m) s.inner *= shape[m];
    return s;
}

}  // namespace

Matrix unfold(const Tensor& x, std::size_t mode) {
    const auto s = split_at(x.shape(), mode);
    Matrix m(s.extent, s.outer * s.inner);
    const auto src = x.data();
    for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t i = 0; i < s.extent; ++i) {
            const double* from = src.data() + (o * s.extent + i) * s.inner;
            std::copy(from, from + s.inner, &m(i, o * s.inner));
        }
    return m;
}

Tensor fold(const Matrix& m, std::size_t mode, const Shape& shape) {
    const auto s = split_at(shape, mode);
    if (m.rows() != s.extent || m.cols() != s.outer * s.inner) {
        throw ShapeError("cannot fold a " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " matrix into shape " + shape_to_string(shape) + " along mode " + std::to_string(mode));
    }
    Tensor x(shape);
    auto dst = x.data();
    for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t i = 0; i < s.extent; ++i) {
            const double* from = m.data().data() + i * m.cols() + o * s.inner;
            std::copy(from, from + s.inner, dst.data() + (o * s.extent + i) * s.inner);
        }
    return x;
}

Tensor mode_product(const Tensor& x, const Matrix& u, std::size_t mode) {
    const auto s = split_at(x.shape(), mode);
    if (u.cols() != s.extent) {
        throw ShapeError("mode-" + std::to_string(mode) + " product needs a matrix with " +
                         std::to_string(s.extent) + " columns, got " + std::to_string(u.cols()));
    }
    Shape out_shape = x.shape();
    out_shape[mode] = u.rows();
    Tensor y(out_shape);
    const auto src = x.data();
    auto dst = y.data();
    for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t r = 0; r < u.rows(); ++r) {
            double* out = dst.data() + (o * u.rows() + r) * s.inner;
            for (std::size_t k = 0; k < s.extent; ++k) {
                const double urk = u(r, k);
                const double* in = src.data() + (o * s.extent + k) * s.inner;
                for (std::size_t j = 0; j < s.inner; ++j) out[j] += urk * in[j];
            }
        }
    return y;
}

SymmetricEigen sym_eig_desc(const Matrix& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw ShapeError("eigendecomposition needs a square matrix");

    double max_abs = 0.0;
    for (double v : a.data()) max_abs = std::max(max_abs, std::abs(v));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(a(i, j) - a(j, i)) > 1e-10 * max_abs) throw ValueError("matrix is not symmetric");

    Matrix w = a;
    // Work on the exactly symmetric part.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) w(i, j) = w(j, i) = 0.5 * (a(i, j) + a(j, i));
    Matrix v = Matrix::identity(n);

    const double tol = 1e-12 * frobenius_norm(a);
    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += w(i, j) * w(i, j);
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 100 && off_norm() > tol; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = w(p, q);
                if (apq == 0.0) continue;
                const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 0.5 / theta;
                } else {
                    t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double wkp = w(k, p), wkq = w(k, q);
                    w(k, p) = c * wkp - s * wkq;
                    w(k, q) = s * wkp + c * wkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double wpk = w(p, k), wqk = w(q, k);
                    w(p, k) = c * wpk - s * wqk;
                    w(q, k) = s * wpk + c * wqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return w(i, i) > w(j, j); });

    SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        out.values[c] = w(src, src);
        std::size_t arg = 0;
        for (std::size_t r = 1; r < n; ++r)
            if (std::abs(v(r, src)) > std::abs(v(arg, src))) arg = r;
        const double sign = v(arg, src) < 0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = sign * v(r, src);
    }
    return out;
}

}  // namespace kale
