#include "kale/predict.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "kale/errors.hpp"
#include "kale/loaddata.hpp"

namespace kale {

namespace {

/// log(1 + exp(-m)) without overflow.
double softplus_neg(double m) { return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

/// d/dm log(1 + exp(-m)) = -1 / (1 + exp(m)).
double softplus_neg_grad(double m) {
    if (m > 0) {
        const double e = std::exp(-m);
        return -e / (1.0 + e);
    }
    return -1.0 / (1.0 + std::exp(m));
}

void check_labels(std::span<const double> labels, std::size_t rows) {
    if (labels.size() != rows) throw ShapeError("label count does not match feature rows");
    bool seen[2] = {false, false};
    for (double y : labels) {
        if (y != 0.0 && y != 1.0) throw ValueError("linear classifier labels must be 0 or 1");
        seen[y == 1.0] = true;
    }
    if (!seen[0] || !seen[1]) throw ValueError("linear classifier needs both classes in the training labels");
}

}  // namespace

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    FeatureMatrix m;
    m.rows = rows.size();
    m.cols = rows.empty() ? 0 : rows.front().size();
    m.values.reserve(m.rows * m.cols);
    for (const auto& r : rows) {
        if (r.size() != m.cols) throw ShapeError("ragged feature rows");
        m.values.insert(m.values.end(), r.begin(), r.end());
    }
    return m;
}

std::string to_string(LinearKind kind) { return kind == LinearKind::logistic ? "logistic" : "linear_svm"; }

LinearKind linear_kind_from_string(const std::string& name) {
    if (name == "logistic") return LinearKind::logistic;
    if (name == "linear_svm") return LinearKind::linear_svm;
    throw ValueError("unknown linear classifier kind '" + name + "'");
}

LinearClassifier::LinearClassifier(LinearKind kind, std::vector<double> weights, double bias, double lambda_reg)
    : kind_(kind), weights_(std::move(weights)), bias_(bias), lambda_reg_(lambda_reg) {}

double LinearClassifier::objective(const FeatureMatrix& x, std::span<const double> labels) const {
    const auto scores = decision_function(x);
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double m = (2.0 * labels[i] - 1.0) * scores[i];
        loss += kind_ == LinearKind::logistic ? softplus_neg(m) : std::max(0.0, 1.0 - m);
    }
    loss /= static_cast<double>(x.rows);
    double w2 = 0.0;
    for (double w : weights_) w2 += w * w;
    return loss + 0.5 * lambda_reg_ * w2;
}

LinearClassifier LinearClassifier::fit(LinearKind kind, const FeatureMatrix& x, std::span<const double> labels,
                                       const LinearFitOptions& options, RngStream /*rng*/) {
    if (x.rows == 0 || x.cols == 0) throw ShapeError("linear classifier needs a non-empty feature matrix");
    check_labels(labels, x.rows);
    for (double v : x.values)
        if (!std::isfinite(v)) throw NonFiniteError("non-finite feature value");
    if (!(options.lambda_reg >= 0) || !(options.lr >= 0)) throw ValueError("lambda_reg and lr must be non-negative");

    LinearClassifier clf(kind, std::vector<double>(x.cols, 0.0), 0.0, options.lambda_reg);
    std::vector<double> grad_w(x.cols);
    const double inv_n = 1.0 / static_cast<double>(x.rows);
    for (std::size_t epoch = 0; epoch <= options.epochs; ++epoch) {
        std::fill(grad_w.begin(), grad_w.end(), 0.0);
        double grad_b = 0.0, loss = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            const auto row = x.row(i);
            double score = clf.bias_;
            for (std::size_t j = 0; j < x.cols; ++j) score += clf.weights_[j] * row[j];
            const double y = 2.0 * labels[i] - 1.0;
            const double m = y * score;
            double dm;  // d loss_i / d margin
            if (kind == LinearKind::logistic) {
                loss += softplus_neg(m);
                dm = softplus_neg_grad(m);
            } else {
                loss += std::max(0.0, 1.0 - m);
                dm = m < 1.0 ? -1.0 : 0.0;
            }
            const double ds = dm * y * inv_n;
            grad_b += ds;
            for (std::size_t j = 0; j < x.cols; ++j) grad_w[j] += ds * row[j];
        }
        double w2 = 0.0;
        for (double w : clf.weights_) w2 += w * w;
        clf.loss_history_.push_back(loss * inv_n + 0.5 * options.lambda_reg * w2);
        if (epoch == options.epochs) break;
        for (std::size_t j = 0; j < x.cols; ++j)
            clf.weights_[j] -= options.lr * (grad_w[j] + options.lambda_reg * clf.weights_[j]);
        clf.bias_ -= options.lr * grad_b;
    }
    return clf;
}

std::vector<double> LinearClassifier::decision_function(const FeatureMatrix& x) const {
    if (x.cols != weights_.size()) {
        throw ShapeError("classifier has " + std::to_string(weights_.size()) + " weights, features have " +
                         std::to_string(x.cols) + " columns");
    }
    std::vector<double> s(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto row = x.row(i);
        double acc = bias_;
        for (std::size_t j = 0; j < x.cols; ++j) acc += weights_[j] * row[j];
        s[i] = acc;
    }
    return s;
}

std::vector<int> LinearClassifier::predict(const FeatureMatrix& x) const {
    const auto s = decision_function(x);
    std::vector<int> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] > 0.0 ? 1 : 0;
    return out;
}

void LinearClassifier::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    save_ktf(dir / "weights.ktf", Tensor({weights_.size()}, weights_));
    nlohmann::json manifest{{"format", "kale-linear"},
                            {"kind", to_string(kind_)},
                            {"bias", bias_},
                            {"lambda_reg", lambda_reg_},
                            {"features", weights_.size()}};
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write classifier manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

LinearClassifier LinearClassifier::load(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw IoError("cannot read classifier manifest in " + dir.string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad classifier manifest: ") + e.what());
    }
    auto w = load_ktf(dir / "weights.ktf");
    if (w.size() != manifest.at("features").get<std::size_t>()) throw FormatError("classifier weight count mismatch");
    return LinearClassifier(linear_kind_from_string(manifest.at("kind").get<std::string>()), w.values(),
                            manifest.at("bias").get<double>(), manifest.at("lambda_reg").get<double>());
}

nn::Net build_head(const HeadSpec& spec, RngStream rng) {
    using nn::LayerSpec;
    if (spec.feature_dim == 0) throw ValueError("head feature dim must be positive");
    switch (spec.kind) {
        case HeadSpec::Kind::class_head:
            if (spec.classes < 2) throw ValueError("class head needs at least 2 classes");
            return nn::Net({spec.feature_dim}, {LayerSpec::dense(spec.feature_dim, spec.classes)}, rng);
        case HeadSpec::Kind::domain_head:
            if (spec.domain_hidden == 0) throw ValueError("domain head hidden width must be positive");
            return nn::Net({spec.feature_dim},
                           {LayerSpec::dense(spec.feature_dim, spec.domain_hidden), LayerSpec::relu(),
                            LayerSpec::dense(spec.domain_hidden, 2)},
                           rng);
        case HeadSpec::Kind::mlp_decoder: {
            if (spec.hidden.empty()) throw ValueError("mlp decoder needs at least one hidden layer");
            std::vector<LayerSpec> layers;
            std::size_t prev = spec.feature_dim;
            for (auto h : spec.hidden) {
                if (h == 0) throw ValueError("mlp decoder hidden widths must be positive");
                layers.push_back(LayerSpec::dense(prev, h));
                layers.push_back(LayerSpec::relu());
                prev = h;
            }
            layers.push_back(LayerSpec::dense(prev, 1));
            return nn::Net({spec.feature_dim}, std::move(layers), rng);
        }
    }
    throw ValueError("unknown head kind");
}

}  // namespace kale
