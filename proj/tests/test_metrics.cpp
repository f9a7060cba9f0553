#include "doctest.h"
#include "helpers.hpp"

#include <algorithm>
#include <map>
#include <numeric>

using namespace cne;
using namespace cne_test;

namespace {

/// k nearest neighbors of row i by full sort, ties by index.
std::vector<Index> naive_knn(const Mat& x, Index i, Index k) {
    std::vector<std::pair<double, Index>> d;
    for (Index j = 0; j < x.rows(); ++j) {
        if (j != i) {
            d.emplace_back((x.row(i) - x.row(j)).squaredNorm(), j);
        }
    }
    std::sort(d.begin(), d.end());
    std::vector<Index> out;
    for (Index c = 0; c < k; ++c) {
        out.push_back(d[static_cast<std::size_t>(c)].second);
    }
    return out;
}

double naive_recall(const Mat& x, const Mat& z, Index k) {
    double total = 0;
    for (Index i = 0; i < x.rows(); ++i) {
        auto a = naive_knn(x, i, k), b = naive_knn(z, i, k);
        Index common = 0;
        for (Index u : a) {
            common += std::count(b.begin(), b.end(), u);
        }
        total += static_cast<double>(common) / static_cast<double>(k);
    }
    return total / static_cast<double>(x.rows());
}

double naive_accuracy(const std::vector<int>& labels, const Mat& z, Index k) {
    const int classes = *std::max_element(labels.begin(), labels.end()) + 1;
    Index correct = 0;
    for (Index i = 0; i < z.rows(); ++i) {
        std::vector<int> votes(static_cast<std::size_t>(classes));
        for (Index j : naive_knn(z, i, k)) {
            ++votes[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])];
        }
        int best = 0;
        for (int c = 1; c < classes; ++c) {
            if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) {
                best = c;
            }
        }
        correct += best == labels[static_cast<std::size_t>(i)];
    }
    return static_cast<double>(correct) / static_cast<double>(z.rows());
}

double naive_silhouette(const std::vector<int>& labels, const Mat& z) {
    const Index n = z.rows();
    double total = 0;
    for (Index i = 0; i < n; ++i) {
        std::map<int, std::pair<double, int>> per;
        for (Index j = 0; j < n; ++j) {
            if (j != i) {
                auto& e = per[labels[static_cast<std::size_t>(j)]];
                e.first += (z.row(i) - z.row(j)).norm();
                e.second += 1;
            }
        }
        const int own = labels[static_cast<std::size_t>(i)];
        const double a = per[own].first / per[own].second;
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [c, e] : per) {
            if (c != own) {
                b = std::min(b, e.first / e.second);
            }
        }
        const double m = std::max(a, b);
        total += m > 0 ? (b - a) / m : 0;
    }
    return total / static_cast<double>(n);
}

Mat shuffled_rows(const Mat& x, std::mt19937_64& rng) {
    std::vector<Index> perm(static_cast<std::size_t>(x.rows()));
    std::iota(perm.begin(), perm.end(), Index(0));
    std::shuffle(perm.begin(), perm.end(), rng);
    Mat out(x.rows(), x.cols());
    for (Index r = 0; r < x.rows(); ++r) {
        out.row(r) = x.row(perm[static_cast<std::size_t>(r)]);
    }
    return out;
}

/// Two classes around (-10, 0) and (10, 0) with unit jitter.
Mat two_clusters(Index per_class, std::uint64_t seed, std::vector<int>& labels) {
    Mat z = random_matrix(2 * per_class, 2, seed);
    labels.assign(static_cast<std::size_t>(2 * per_class), 0);
    for (Index i = 0; i < 2 * per_class; ++i) {
        const bool second = i >= per_class;
        z(i, 0) += second ? 10 : -10;
        labels[static_cast<std::size_t>(i)] = second ? 1 : 0;
    }
    return z;
}

}

TEST_SUITE("metrics") {

TEST_CASE("recall of an isometric copy is 1") {
    const Mat x = random_matrix(80, 6, 1);
    const Mat z = x * random_rotation(6, 2);
    CHECK(knn_recall(x, z, 10) == 1.0);
    CHECK(knn_recall(x, Mat(z * 3.5), 10) == 1.0);
}

TEST_CASE("recall of a monotone map of three collinear points is 1") {
    const Mat x = on_line({0, 1, 10}, 1);
    const Mat z = on_line({-5, -4.9, 100}, 1);
    CHECK(knn_recall(x, z, 1) == 1.0);
}

TEST_CASE("recall of shuffled rows is near k / (N - 1)") {
    const Index n = 100, k = 10;
    const Mat x = random_matrix(n, 5, 3);
    std::mt19937_64 rng(4);
    std::vector<double> values;
    for (int t = 0; t < 100; ++t) {
        values.push_back(knn_recall(x, shuffled_rows(x, rng), k));
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / 100;
    // Each of the N*k input-space neighbors is kept with probability about k/(N-1);
    // treating them as independent gives the standard error of the mean over trials.
    const double p = static_cast<double>(k) / static_cast<double>(n - 1);
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n * k)) / std::sqrt(100.0);
    CHECK(std::abs(mean - p) <= 3 * sigma);
}

TEST_CASE("accuracy on separated clusters and shuffled labels") {
    std::vector<int> labels;
    const Mat z = two_clusters(50, 5, labels);
    CHECK(knn_accuracy<double>(labels, z, 5) == 1.0);

    std::mt19937_64 rng(6);
    const int trials = 100;
    std::vector<double> acc;
    for (int t = 0; t < trials; ++t) {
        auto shuffled = labels;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        acc.push_back(knn_accuracy<double>(shuffled, z, 5));
    }
    const double mean = std::accumulate(acc.begin(), acc.end(), 0.0) / trials;
    double var = 0;
    for (double a : acc) {
        var += (a - mean) * (a - mean);
    }
    const double stderr_mean = std::sqrt(var / (trials - 1) / trials);
    // With k = 5 and two classes there are no vote ties. A sample is classified
    // correctly when at least 3 of its 5 neighbors share its label; after a
    // shuffle, those neighbors are a draw without replacement from the other 99
    // samples, 49 of which share it.
    auto choose = [](int n, int r) { return std::tgamma(n + 1.0) / (std::tgamma(r + 1.0) * std::tgamma(n - r + 1.0)); };
    double expected = 0;
    for (int same = 3; same <= 5; ++same) {
        expected += choose(49, same) * choose(50, 5 - same) / choose(99, 5);
    }
    CHECK(expected == doctest::Approx(0.5).epsilon(0.05));
    CHECK(std::abs(mean - expected) <= 3 * stderr_mean);

    CHECK_THROWS(knn_accuracy<double>(std::vector<int>(100, 0), z, 5));
    CHECK_THROWS(knn_accuracy<double>(std::vector<int>{0, 1}, z, 5));
}

TEST_CASE("accuracy with duplicated points and k = 1") {
    Mat z = random_matrix(20, 2, 7, 10.0);
    Mat doubled(40, 2);
    std::vector<int> labels;
    for (Index i = 0; i < 20; ++i) {
        doubled.row(2 * i) = z.row(i);
        doubled.row(2 * i + 1) = z.row(i);
        labels.push_back(static_cast<int>(i % 3));
        labels.push_back(static_cast<int>(i % 3));
    }
    CHECK(knn_accuracy<double>(labels, doubled, 1) == 1.0);
}

TEST_CASE("accuracy vote ties go to the smaller label") {
    const Mat z = on_line({0, 1, -1}, 2);
    // Samples 0 and 2 each see one vote per class and resolve the tie to 0.
    const std::vector<int> labels = {0, 1, 0};
    const std::vector<int> flipped = {1, 1, 0};
    CHECK(knn_accuracy<double>(labels, z, 2) == doctest::Approx(2.0 / 3.0));
    CHECK(knn_accuracy<double>(flipped, z, 2) == doctest::Approx(0.0));
}

TEST_CASE("silhouette") {
    std::vector<int> labels;
    const Mat z = two_clusters(30, 8, labels);
    CHECK(silhouette<double>(labels, Mat(z * 10)) > 0.9);

    const Mat same = random_matrix(200, 2, 9);
    std::vector<int> split(200);
    for (std::size_t i = 0; i < split.size(); ++i) {
        split[i] = static_cast<int>(i % 2);
    }
    CHECK(std::abs(silhouette<double>(split, same)) < 0.1);

    Mat twin(40, 2);
    twin << same.topRows(20), same.topRows(20);
    std::vector<int> halves(40, 0);
    std::fill(halves.begin() + 20, halves.end(), 1);
    CHECK(silhouette<double>(halves, twin) <= 0.0);

    CHECK_THROWS(silhouette<double>(std::vector<int>{0, 0, 1}, on_line({0, 1, 2})));
    CHECK_THROWS(silhouette<double>(std::vector<int>{0, 0, 0}, on_line({0, 1, 2})));
}

TEST_CASE("metrics are invariant under rigid motions") {
    std::vector<int> labels;
    const Mat z = two_clusters(40, 10, labels);
    const Mat x = random_matrix(80, 5, 11);
    Mat moved = z * random_rotation(2, 12);
    moved.rowwise() += Eigen::RowVector2d(3, -7);
    CHECK(knn_recall(x, moved, 10) == knn_recall(x, z, 10));
    CHECK(knn_accuracy<double>(labels, moved, 10) == knn_accuracy<double>(labels, z, 10));
    CHECK(silhouette<double>(labels, moved) == doctest::Approx(silhouette<double>(labels, z)).epsilon(1e-12));
}

TEST_CASE("metrics match naive references") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Index n = 40 + static_cast<Index>(seed) * 16;
        const Mat x = random_matrix(n, 6, seed);
        const Mat z = random_matrix(n, 2, seed + 50);
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) {
            labels[static_cast<std::size_t>(i)] = static_cast<int>((i * 7 + static_cast<Index>(seed)) % 3);
        }
        for (Index k : {1, 5, 15}) {
            CHECK(knn_recall(x, z, k) == doctest::Approx(naive_recall(x, z, k)).epsilon(1e-15));
            CHECK(knn_accuracy<double>(labels, z, k) == doctest::Approx(naive_accuracy(labels, z, k)).epsilon(1e-15));
        }
        CHECK(silhouette<double>(labels, z) == doctest::Approx(naive_silhouette(labels, z)).epsilon(1e-12));
    }
}

TEST_CASE("quality report") {
    auto data = make_blobs<double>(20, 3, 4, 20.0, 1);
    Embedding<double> emb{data.points.leftCols(2)};
    auto q = evaluate_quality(data, emb);
    CHECK(q.knn_recall.has_value());
    CHECK(q.knn_accuracy.has_value());
    CHECK(q.silhouette.has_value());
    CHECK(q.k_recall == 15);
    CHECK(q.k_accuracy == 10);

    data.labels.reset();
    q = evaluate_quality(data, emb);
    CHECK(q.knn_recall.has_value());
    CHECK_FALSE(q.knn_accuracy.has_value());
    CHECK_FALSE(q.silhouette.has_value());

    const auto small = make_blobs<double>(3, 2, 3, 20.0, 2);
    q = evaluate_quality(small, Embedding<double>{small.points.leftCols(2)});
    CHECK(q.k_recall == 5);
    CHECK_THROWS(knn_recall(data.points, emb.coords, 0));
    CHECK_THROWS(knn_recall(data.points, emb.coords, data.size()));
}

}
