#include "kale/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "kale/errors.hpp"

namespace kale {

double accuracy(std::span<const int> pred, std::span<const int> truth) {
    if (pred.empty()) throw ValueError("accuracy of an empty prediction");
    if (pred.size() != truth.size()) {
        throw ShapeError("accuracy: " + std::to_string(pred.size()) + " predictions vs " +
                         std::to_string(truth.size()) + " labels");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ShapeError("roc_auc: scores and labels differ in length");
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw ValueError("roc_auc labels must be 0 or 1");
        if (!std::isfinite(scores[i])) throw NonFiniteError("roc_auc: non-finite score");
        n_pos += labels[i] == 1;
    }
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("roc_auc needs both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Twice the Mann-Whitney U: each positive counts 2 per lower negative and 1 per tied negative.
    std::size_t twice_u = 0, neg_below = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i, pos = 0, neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] == 1 ? pos : neg) += 1;
            ++j;
        }
        twice_u += pos * (2 * neg_below + neg);
        neg_below += neg;
        i = j;
    }
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double concordance_index(std::span<const double> predicted, std::span<const double> observed) {
    if (predicted.size() != observed.size()) throw ShapeError("concordance_index: length mismatch");
    if (predicted.size() < 2) throw UndefinedMetricError("concordance_index needs at least 2 entries");
    std::size_t twice_score = 0, pairs = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        for (std::size_t j = 0; j < observed.size(); ++j) {
            if (!(observed[i] > observed[j])) continue;
            ++pairs;
            if (predicted[i] > predicted[j]) twice_score += 2;
            else if (predicted[i] == predicted[j]) twice_score += 1;
        }
    }
    if (pairs == 0) throw UndefinedMetricError("concordance_index: no pairs with distinct observed values");
    return static_cast<double>(twice_score) / (2.0 * static_cast<double>(pairs));
}

}  // namespace kale
