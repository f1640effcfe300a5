#include <algorithm>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "kale/embed.hpp"
#include "kale/errors.hpp"
#include "kale/loaddata.hpp"

namespace kale {

namespace {

/// Scatter sum over samples of unfold(x, mode) * unfold(x, mode)^T.
Matrix mode_scatter(std::span<const Tensor> xs, std::size_t mode) {
    const std::size_t dim = xs.front().dim(mode);
    Matrix s(dim, dim);
    for (const auto& x : xs) {
        const auto g = gram(unfold(x, mode));
        for (std::size_t i = 0; i < g.data().size(); ++i) s.data()[i] += g.data()[i];
    }
    return s;
}

/// Leading `count` eigenvectors as rows.
Matrix leading_rows(const SymmetricEigen& eig, std::size_t count) {
    const std::size_t dim = eig.vectors.rows();
    Matrix u(count, dim);
    for (std::size_t r = 0; r < count; ++r)
        for (std::size_t c = 0; c < dim; ++c) u(r, c) = eig.vectors(c, r);
    return u;
}

}  // namespace

std::size_t components_for_ratio(std::span<const double> eigenvalues_desc, double ratio) {
    const std::size_t n = eigenvalues_desc.size();
    if (n == 0) throw ValueError("no eigenvalues");
    if (ratio >= 1.0) return n;
    const double total = std::accumulate(eigenvalues_desc.begin(), eigenvalues_desc.end(), 0.0);
    if (!(total > 0)) return 1;
    double cum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        cum += eigenvalues_desc[k];
        if (cum >= ratio * total) return k + 1;
    }
    return n;
}

MpcaModel MpcaModel::fit(std::span<const Tensor> samples, double variance_ratio, std::size_t max_iters) {
    if (samples.size() < 2) throw ValueError("MPCA needs at least 2 samples");
    if (!(variance_ratio > 0 && variance_ratio <= 1)) throw ValueError("MPCA variance ratio must lie in (0, 1]");
    const Shape& shape = samples.front().shape();
    if (shape.size() < 2) throw ShapeError("MPCA needs samples of order at least 2");
    for (const auto& s : samples)
        if (s.shape() != shape) throw ShapeError("MPCA samples have different shapes");

    MpcaModel m;
    m.variance_ratio_ = variance_ratio;
    m.max_iters_ = max_iters;
    const std::size_t order = shape.size();

    m.mean_ = Tensor(shape);
    for (const auto& s : samples) m.mean_ += s;
    m.mean_ *= 1.0 / static_cast<double>(samples.size());

    std::vector<Tensor> centered;
    centered.reserve(samples.size());
    for (const auto& s : samples) centered.push_back(s - m.mean_);

    m.projected_shape_.resize(order);
    m.projections_.resize(order);
    m.mode_eigenvalues_.resize(order);
    for (std::size_t n = 0; n < order; ++n) {
        const auto eig = sym_eig_desc(mode_scatter(centered, n));
        m.mode_eigenvalues_[n] = eig.values;
        m.projected_shape_[n] = components_for_ratio(eig.values, variance_ratio);
        m.projections_[n] = leading_rows(eig, m.projected_shape_[n]);
    }

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        for (std::size_t n = 0; n < order; ++n) {
            std::vector<Tensor> partial;
            partial.reserve(centered.size());
            for (const auto& x : centered) {
                Tensor y = x;
                for (std::size_t k = 0; k < order; ++k)
                    if (k != n) y = mode_product(y, m.projections_[k], k);
                partial.push_back(std::move(y));
            }
            const auto eig = sym_eig_desc(mode_scatter(partial, n));
            m.projections_[n] = leading_rows(eig, m.projected_shape_[n]);
        }
    }
    m.fitted_ = true;

    const std::size_t n_features = m.feature_count();
    std::vector<double> sum(n_features, 0.0), sum_sq(n_features, 0.0);
    for (const auto& s : samples) {
        const auto y = m.transform(s);
        for (std::size_t i = 0; i < n_features; ++i) {
            sum[i] += y[i];
            sum_sq[i] += y[i] * y[i];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(samples.size());
    m.feature_variances_.resize(n_features);
    for (std::size_t i = 0; i < n_features; ++i) {
        const double mu = sum[i] * inv_n;
        m.feature_variances_[i] = std::max(sum_sq[i] * inv_n - mu * mu, 0.0);
    }
    m.feature_order_.resize(n_features);
    std::iota(m.feature_order_.begin(), m.feature_order_.end(), std::size_t{0});
    std::stable_sort(m.feature_order_.begin(), m.feature_order_.end(), [&](std::size_t a, std::size_t b) {
        return m.feature_variances_[a] > m.feature_variances_[b];
    });
    return m;
}

void MpcaModel::require_fitted() const {
    if (!fitted_) throw StateError("MPCA model is not fitted");
}

Tensor MpcaModel::transform(const Tensor& x) const {
    require_fitted();
    if (x.shape() != mean_.shape()) {
        throw ShapeError("MPCA fitted on " + shape_to_string(mean_.shape()) + ", got " + shape_to_string(x.shape()));
    }
    Tensor y = x - mean_;
    for (std::size_t n = 0; n < projections_.size(); ++n) y = mode_product(y, projections_[n], n);
    return y;
}

std::vector<double> MpcaModel::transform_vector(const Tensor& x, std::optional<std::size_t> n_features) const {
    const auto y = transform(x);
    const std::size_t k = n_features.value_or(feature_count());
    if (k > feature_count()) {
        throw ValueError("requested " + std::to_string(k) + " features, model has " + std::to_string(feature_count()));
    }
    std::vector<double> v(k);
    for (std::size_t i = 0; i < k; ++i) v[i] = y[feature_order_[i]];
    return v;
}

Tensor MpcaModel::inverse_transform(const Tensor& y) const {
    require_fitted();
    if (y.shape() != projected_shape_) {
        throw ShapeError("MPCA inverse expects " + shape_to_string(projected_shape_) + ", got " +
                         shape_to_string(y.shape()));
    }
    Tensor x = y;
    for (std::size_t n = 0; n < projections_.size(); ++n) x = mode_product(x, projections_[n].transposed(), n);
    return x += mean_;
}

Tensor MpcaModel::inverse_transform_vector(std::span<const double> v) const {
    require_fitted();
    if (v.size() > feature_count()) {
        throw ShapeError("vector of " + std::to_string(v.size()) + " features exceeds model's " +
                         std::to_string(feature_count()));
    }
    Tensor y(projected_shape_);
    for (std::size_t i = 0; i < v.size(); ++i) y[feature_order_[i]] = v[i];
    return inverse_transform(y);
}

void MpcaModel::save(const std::filesystem::path& dir) const {
    require_fitted();
    std::filesystem::create_directories(dir);
    save_ktf(dir / "mean.ktf", mean_);
    for (std::size_t n = 0; n < projections_.size(); ++n)
        save_ktf(dir / ("proj" + std::to_string(n) + ".ktf"), projections_[n].to_tensor());
    save_ktf(dir / "order.ktf",
             Tensor({feature_order_.size()}, std::vector<double>(feature_order_.begin(), feature_order_.end())));
    save_ktf(dir / "variances.ktf", Tensor({feature_variances_.size()}, feature_variances_));

    nlohmann::json manifest{{"format", "kale-mpca"},
                            {"sample_shape", mean_.shape()},
                            {"projected_shape", projected_shape_},
                            {"variance_ratio", variance_ratio_},
                            {"max_iters", max_iters_},
                            {"mode_eigenvalues", mode_eigenvalues_}};
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write MPCA manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

MpcaModel MpcaModel::load(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw IoError("cannot read MPCA manifest in " + dir.string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad MPCA manifest: ") + e.what());
    }
    MpcaModel m;
    m.mean_ = load_ktf(dir / "mean.ktf");
    m.projected_shape_ = manifest.at("projected_shape").get<Shape>();
    m.variance_ratio_ = manifest.at("variance_ratio").get<double>();
    m.max_iters_ = manifest.at("max_iters").get<std::size_t>();
    m.mode_eigenvalues_ = manifest.at("mode_eigenvalues").get<std::vector<std::vector<double>>>();
    if (m.mean_.shape() != manifest.at("sample_shape").get<Shape>()) throw FormatError("MPCA mean shape mismatch");
    for (std::size_t n = 0; n < m.projected_shape_.size(); ++n) {
        auto u = Matrix::from_tensor(load_ktf(dir / ("proj" + std::to_string(n) + ".ktf")));
        if (u.rows() != m.projected_shape_[n] || u.cols() != m.mean_.dim(n)) {
            throw FormatError("MPCA projection " + std::to_string(n) + " has the wrong shape");
        }
        m.projections_.push_back(std::move(u));
    }
    const auto order = load_ktf(dir / "order.ktf");
    for (double v : order.data()) m.feature_order_.push_back(static_cast<std::size_t>(v));
    m.feature_variances_ = load_ktf(dir / "variances.ktf").values();
    if (m.feature_order_.size() != m.feature_count() || m.feature_variances_.size() != m.feature_count()) {
        throw FormatError("MPCA feature order has the wrong length");
    }
    m.fitted_ = true;
    return m;
}

}  // namespace kale
