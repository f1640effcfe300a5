#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "kale/nn.hpp"
#include "kale/rng.hpp"
#include "kale/tensor.hpp"

namespace kale {

/// Fitted multilinear PCA: one projection matrix per tensor mode.
///
/// Fitting centers the samples, initializes each mode's projection from the
/// leading eigenvectors of the full mode-n scatter, and then alternates: for
/// each mode in turn, the samples are projected along every other mode and the
/// mode-n scatter of the partial projections is re-decomposed. The number of
/// retained components P_n is fixed at initialization as the smallest count
/// whose leading eigenvalues reach `variance_ratio` of that mode's total
/// (all components when the ratio is 1).
class MpcaModel {
public:
    static MpcaModel fit(std::span<const Tensor> samples, double variance_ratio, std::size_t max_iters = 1);

    bool fitted() const noexcept { return fitted_; }
    const Tensor& mean() const noexcept { return mean_; }
    const Shape& sample_shape() const noexcept { return mean_.shape(); }
    /// (P_1, ..., P_N).
    const Shape& projected_shape() const noexcept { return projected_shape_; }
    /// U^(n), P_n x I_n with orthonormal rows.
    const std::vector<Matrix>& projections() const noexcept { return projections_; }
    /// Eigenvalues of each mode's full scatter (initialization), descending.
    const std::vector<std::vector<double>>& mode_eigenvalues() const noexcept { return mode_eigenvalues_; }
    double variance_ratio() const noexcept { return variance_ratio_; }
    std::size_t max_iters() const noexcept { return max_iters_; }
    std::size_t feature_count() const noexcept { return shape_size(projected_shape_); }
    /// Flat projected indices sorted by descending training variance (stable).
    const std::vector<std::size_t>& feature_order() const noexcept { return feature_order_; }
    /// Training variance of each flat projected entry.
    const std::vector<double>& feature_variances() const noexcept { return feature_variances_; }

    /// (x - M) x_1 U^(1) ... x_N U^(N).
    Tensor transform(const Tensor& x) const;
    /// Flattened projection reordered by feature_order and truncated to the
    /// first n_features entries (all when absent).
    std::vector<double> transform_vector(const Tensor& x, std::optional<std::size_t> n_features = std::nullopt) const;

    /// y x_1 U^(1)T ... x_N U^(N)T + M.
    Tensor inverse_transform(const Tensor& y) const;
    /// Vector form in feature order; entries past v.size() count as 0.
    Tensor inverse_transform_vector(std::span<const double> v) const;

    /// KTF bundle: manifest.json, mean.ktf, proj<n>.ktf, order.ktf, variances.ktf.
    void save(const std::filesystem::path& dir) const;
    static MpcaModel load(const std::filesystem::path& dir);

private:
    void require_fitted() const;

    Tensor mean_;
    Shape projected_shape_;
    std::vector<Matrix> projections_;
    std::vector<std::vector<double>> mode_eigenvalues_;
    std::vector<std::size_t> feature_order_;
    std::vector<double> feature_variances_;
    double variance_ratio_ = 1.0;
    std::size_t max_iters_ = 1;
    bool fitted_ = false;
};

inline MpcaModel mpca_fit(std::span<const Tensor> samples, double variance_ratio, std::size_t max_iters = 1) {
    return MpcaModel::fit(samples, variance_ratio, max_iters);
}
inline Tensor mpca_transform(const MpcaModel& m, const Tensor& x) { return m.transform(x); }
inline Tensor mpca_inverse_transform(const MpcaModel& m, const Tensor& y) { return m.inverse_transform(y); }

/// Smallest count of leading eigenvalues whose sum reaches ratio * total.
std::size_t components_for_ratio(std::span<const double> eigenvalues_desc, double ratio);

struct ExtractorSpec {
    enum class Kind { small_vector_mlp, sequence_cnn };
    Kind kind = Kind::small_vector_mlp;

    // small_vector_mlp: input_dim -> hidden... -> output_dim, relu after every dense.
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden;

    // sequence_cnn: embedding -> (conv1d, relu)... -> global max pool
    // [-> dense(output_dim), relu when output_dim differs from the last filter count].
    std::size_t vocab_size = 0;
    std::size_t seq_len = 0;
    std::size_t embedding_dim = 0;
    std::vector<std::size_t> filters;
    std::vector<std::size_t> kernels;

    /// 0 for sequence_cnn means "last filter count".
    std::size_t output_dim = 0;

    static ExtractorSpec small_vector_mlp(std::size_t input_dim, std::vector<std::size_t> hidden,
                                          std::size_t output_dim);
    static ExtractorSpec sequence_cnn(std::size_t vocab_size, std::size_t seq_len, std::size_t embedding_dim,
                                      std::vector<std::size_t> filters, std::vector<std::size_t> kernels,
                                      std::size_t output_dim = 0);
};

nn::Net build_feature_extractor(const ExtractorSpec& spec, RngStream rng);

}  // namespace kale
