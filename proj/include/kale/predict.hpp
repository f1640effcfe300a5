#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kale/nn.hpp"
#include "kale/rng.hpp"

namespace kale {

/// Row-major feature matrix: `rows` samples of `cols` features.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
    static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);
};

enum class LinearKind { logistic, linear_svm };

std::string to_string(LinearKind kind);
LinearKind linear_kind_from_string(const std::string& name);

struct LinearFitOptions {
    double lambda_reg = 1e-3;
    std::size_t epochs = 500;
    double lr = 0.1;
};

/// Binary linear classifier trained by full-batch gradient descent from zero
/// weights on mean logistic or hinge loss plus lambda_reg * |w|^2 / 2 (bias
/// unregularized). The hinge subgradient at margin exactly 1 is taken as 0.
class LinearClassifier {
public:
    /// Labels must be 0/1 with both classes present. The rng is accepted for
    /// interface uniformity; zero initialization never draws from it.
    static LinearClassifier fit(LinearKind kind, const FeatureMatrix& x, std::span<const double> labels,
                                const LinearFitOptions& options, RngStream rng = RngStream(0));

    /// Hand-built classifier, e.g. for loading.
    LinearClassifier(LinearKind kind, std::vector<double> weights, double bias, double lambda_reg);

    LinearKind kind() const noexcept { return kind_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double bias() const noexcept { return bias_; }
    double lambda_reg() const noexcept { return lambda_reg_; }
    /// Objective before each epoch's update and after the last (epochs + 1 entries).
    const std::vector<double>& loss_history() const noexcept { return loss_history_; }

    /// w . x + b per row.
    std::vector<double> decision_function(const FeatureMatrix& x) const;
    /// 1 where the score is strictly positive, 0 otherwise (ties go to class 0).
    std::vector<int> predict(const FeatureMatrix& x) const;

    /// Regularized mean loss on (x, labels).
    double objective(const FeatureMatrix& x, std::span<const double> labels) const;

    void save(const std::filesystem::path& dir) const;
    static LinearClassifier load(const std::filesystem::path& dir);

private:
    LinearClassifier() = default;

    LinearKind kind_ = LinearKind::logistic;
    std::vector<double> weights_;
    double bias_ = 0.0;
    double lambda_reg_ = 0.0;
    std::vector<double> loss_history_;
};

inline LinearClassifier fit_linear_classifier(LinearKind kind, const FeatureMatrix& x, std::span<const double> labels,
                                              const LinearFitOptions& options, RngStream rng = RngStream(0)) {
    return LinearClassifier::fit(kind, x, labels, options, rng);
}
inline std::vector<double> decision_function(const LinearClassifier& clf, const FeatureMatrix& x) {
    return clf.decision_function(x);
}
inline std::vector<int> classifier_predict(const LinearClassifier& clf, const FeatureMatrix& x) {
    return clf.predict(x);
}

struct HeadSpec {
    enum class Kind { class_head, domain_head, mlp_decoder };
    Kind kind = Kind::class_head;
    std::size_t feature_dim = 0;
    std::size_t classes = 2;              // class_head
    std::size_t domain_hidden = 16;       // domain_head
    std::vector<std::size_t> hidden;      // mlp_decoder

    static HeadSpec class_head(std::size_t feature_dim, std::size_t classes) {
        return {Kind::class_head, feature_dim, classes, 0, {}};
    }
    static HeadSpec domain_head(std::size_t feature_dim, std::size_t hidden = 16) {
        return {Kind::domain_head, feature_dim, 2, hidden, {}};
    }
    static HeadSpec mlp_decoder(std::size_t input_dim, std::vector<std::size_t> hidden) {
        return {Kind::mlp_decoder, input_dim, 0, 0, std::move(hidden)};
    }
};

/// class_head: dense to C logits. domain_head: dense -> relu -> dense to 2
/// logits. mlp_decoder: (dense -> relu) per hidden width, then dense to one
/// output.
nn::Net build_head(const HeadSpec& spec, RngStream rng);

}  // namespace kale
