#pragma once

#include <span>
#include <string>

namespace kale {

struct MetricValue {
    std::string name;
    double value = 0.0;
};

/// Fraction of positions where pred == truth.
double accuracy(std::span<const int> pred, std::span<const int> truth);

/// Pairwise AUC with ties counted 1/2. Labels are 0/1; throws
/// UndefinedMetricError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Over pairs with observed_i > observed_j: 1 if predicted_i > predicted_j,
/// 1/2 on a predicted tie. Pairs tied in observed are skipped.
double concordance_index(std::span<const double> predicted, std::span<const double> observed);

}  // namespace kale
