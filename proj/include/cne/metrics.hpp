#ifndef CNE_METRICS_HPP
#define CNE_METRICS_HPP

#include "data.hpp"
#include "neighbor_graph.hpp"
#include "types.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <span>
#include <vector>

/**
 * @file metrics.hpp
 *
 * @brief Exact embedding quality measures.
 */

namespace cne {

/**
 * @brief Mean fraction of each sample's `k` input-space neighbors that are also
 * among its `k` embedding-space neighbors.
 */
template<typename Float>
double knn_recall(const Matrix<Float>& points, const Matrix<Float>& coords, Index k) {
    if (points.rows() != coords.rows()) {
        throw std::invalid_argument("knn_recall: sample count mismatch");
    }
    const auto high = exact_knn(points, k);
    const auto low = exact_knn(coords, k);
    const Index n = points.rows();
    std::vector<Index> a(static_cast<std::size_t>(k)), b(static_cast<std::size_t>(k));
    std::size_t hits = 0;
    for (Index i = 0; i < n; ++i) {
        for (Index c = 0; c < k; ++c) {
            a[static_cast<std::size_t>(c)] = high(i, c);
            b[static_cast<std::size_t>(c)] = low(i, c);
        }
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::vector<Index> common;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
        hits += common.size();
    }
    return static_cast<double>(hits) / (static_cast<double>(n) * static_cast<double>(k));
}

/**
 * @brief Leave-one-out `k`-nearest-neighbor classification accuracy in the embedding.
 *
 * Majority vote among the `k` nearest other samples; vote ties go to the
 * smaller label id.
 */
template<typename Float>
double knn_accuracy(std::span<const int> labels, const Matrix<Float>& coords, Index k) {
    if (static_cast<Index>(labels.size()) != coords.rows()) {
        throw std::invalid_argument("knn_accuracy: label count mismatch");
    }
    if (labels.empty() || std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels.front(); })) {
        throw std::invalid_argument("knn_accuracy needs at least two classes");
    }
    const int n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
    const auto nn = exact_knn(coords, k);
    std::vector<int> votes(static_cast<std::size_t>(n_classes));
    std::size_t correct = 0;
    for (Index i = 0; i < coords.rows(); ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        for (Index c = 0; c < k; ++c) {
            ++votes[static_cast<std::size_t>(labels[static_cast<std::size_t>(nn(i, c))])];
        }
        const auto winner = std::max_element(votes.begin(), votes.end()) - votes.begin();
        if (winner == labels[static_cast<std::size_t>(i)]) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(coords.rows());
}

/**
 * @brief Mean silhouette coefficient with Euclidean distances.
 *
 * For each sample, `a` is the mean distance to the rest of its class and `b`
 * the smallest mean distance to another class; the sample scores
 * `(b - a) / max(a, b)`, or 0 when both are 0.
 */
template<typename Float>
double silhouette(std::span<const int> labels, const Matrix<Float>& coords) {
    const Index n = coords.rows();
    if (static_cast<Index>(labels.size()) != n) {
        throw std::invalid_argument("silhouette: label count mismatch");
    }
    if (n == 0) {
        throw std::invalid_argument("silhouette: empty embedding");
    }
    const int n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<Index> sizes(static_cast<std::size_t>(n_classes), 0);
    for (int l : labels) {
        ++sizes[static_cast<std::size_t>(l)];
    }
    int present = 0;
    for (Index s : sizes) {
        if (s == 1) {
            throw std::invalid_argument("silhouette needs every class to have at least 2 samples");
        }
        present += s > 0;
    }
    if (present < 2) {
        throw std::invalid_argument("silhouette needs at least two classes");
    }

    std::vector<double> sums(static_cast<std::size_t>(n_classes));
    double total = 0;
    for (Index i = 0; i < n; ++i) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (Index j = 0; j < n; ++j) {
            if (j != i) {
                sums[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] +=
                    static_cast<double>((coords.row(i) - coords.row(j)).norm());
            }
        }
        const int own = labels[static_cast<std::size_t>(i)];
        const double a = sums[static_cast<std::size_t>(own)] / static_cast<double>(sizes[static_cast<std::size_t>(own)] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < n_classes; ++c) {
            if (c != own && sizes[static_cast<std::size_t>(c)] > 0) {
                b = std::min(b, sums[static_cast<std::size_t>(c)] / static_cast<double>(sizes[static_cast<std::size_t>(c)]));
            }
        }
        const double denom = std::max(a, b);
        total += denom > 0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

struct QualityReport {
    std::optional<double> knn_recall;
    std::optional<double> knn_accuracy;
    std::optional<double> silhouette;
    Index k_recall = 15;
    Index k_accuracy = 10;
};

/**
 * Compute every measure the data supports. `k` values are capped at `N - 1`;
 * label-based measures are left empty when their preconditions fail.
 */
template<typename Float>
QualityReport evaluate_quality(const Dataset<Float>& data, const Embedding<Float>& emb, Index k_recall = 15,
                               Index k_accuracy = 10)
{
    QualityReport r;
    r.k_recall = std::min(k_recall, data.size() - 1);
    r.k_accuracy = std::min(k_accuracy, data.size() - 1);
    r.knn_recall = knn_recall(data.points, emb.coords, r.k_recall);
    if (data.labels) {
        try {
            r.knn_accuracy = knn_accuracy<Float>(*data.labels, emb.coords, r.k_accuracy);
        } catch (const std::invalid_argument&) {
        }
        try {
            r.silhouette = silhouette<Float>(*data.labels, emb.coords);
        } catch (const std::invalid_argument&) {
        }
    }
    return r;
}

}

#endif
