#ifndef CNE_NEIGHBOR_GRAPH_HPP
#define CNE_NEIGHBOR_GRAPH_HPP

#include "types.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

/**
 * @file neighbor_graph.hpp
 *
 * @brief Exact k-nearest-neighbor search and the symmetric binary affinity graph.
 */

namespace cne {

/**
 * Row `i` holds the `k` nearest neighbors of sample `i`, closest first.
 */
using NeighborLists = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/**
 * @brief Brute-force exact k-nearest neighbors under squared Euclidean distance.
 *
 * A sample is never its own neighbor. Equal distances are ordered by ascending
 * index, so the result is fully deterministic.
 */
template<typename Derived>
NeighborLists exact_knn(const Eigen::MatrixBase<Derived>& points, Index k) {
    using Float = typename Derived::Scalar;
    const Index n = points.rows();
    if (k < 1 || k > n - 1) {
        throw std::invalid_argument("k must lie in [1, N-1] (k=" + std::to_string(k) + ", N=" + std::to_string(n) + ")");
    }

    NeighborLists out(n, k);
    std::vector<std::pair<Float, Index>> cand(static_cast<std::size_t>(n - 1));
    for (Index i = 0; i < n; ++i) {
        std::size_t pos = 0;
        for (Index j = 0; j < n; ++j) {
            if (j != i) {
                cand[pos++] = {(points.row(i) - points.row(j)).squaredNorm(), j};
            }
        }
        auto kth = cand.begin() + k;
        std::partial_sort(cand.begin(), kth, cand.end());
        for (Index c = 0; c < k; ++c) {
            out(i, c) = cand[static_cast<std::size_t>(c)].second;
        }
    }
    return out;
}

/**
 * @brief Symmetric kNN graph holding the positive-pair set.
 *
 * An unordered pair `{i, j}` is an edge when either endpoint is among the
 * other's `k` nearest neighbors. Each edge is stored once with `i < j`, and
 * every edge carries the same affinity `1 / num_edges()`.
 */
class NeighborGraph {
public:
    NeighborGraph() = default;

    NeighborGraph(Index n, Index k, std::vector<std::pair<Index, Index>> edges) : n_(n), k_(k), edges_(std::move(edges)) {
        for (auto& e : edges_) {
            if (e.first == e.second || e.first < 0 || e.second < 0 || e.first >= n || e.second >= n) {
                throw std::invalid_argument("invalid edge");
            }
            if (e.first > e.second) {
                std::swap(e.first, e.second);
            }
        }
        std::sort(edges_.begin(), edges_.end());
        edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

        offsets_.assign(static_cast<std::size_t>(n + 1), 0);
        for (const auto& e : edges_) {
            ++offsets_[static_cast<std::size_t>(e.first + 1)];
            ++offsets_[static_cast<std::size_t>(e.second + 1)];
        }
        for (std::size_t i = 1; i < offsets_.size(); ++i) {
            offsets_[i] += offsets_[i - 1];
        }
        adjacency_.resize(edges_.size() * 2);
        auto fill = offsets_;
        for (const auto& e : edges_) {
            adjacency_[static_cast<std::size_t>(fill[static_cast<std::size_t>(e.first)]++)] = e.second;
            adjacency_[static_cast<std::size_t>(fill[static_cast<std::size_t>(e.second)]++)] = e.first;
        }
        for (Index i = 0; i < n; ++i) {
            auto nb = neighbors_mut(i);
            std::sort(nb.begin(), nb.end());
        }
    }

    Index num_samples() const { return n_; }
    Index k() const { return k_; }
    Index num_edges() const { return static_cast<Index>(edges_.size()); }
    bool empty() const { return edges_.empty(); }

    /// Edges sorted lexicographically, each with `first < second`.
    const std::vector<std::pair<Index, Index>>& edges() const { return edges_; }

    /// Sorted neighbors of sample `i`.
    std::span<const Index> neighbors(Index i) const {
        const auto b = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(i)]);
        const auto e = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(i + 1)]);
        return {adjacency_.data() + b, e - b};
    }

    Index degree(Index i) const { return static_cast<Index>(neighbors(i).size()); }

    bool contains(Index i, Index j) const {
        if (i < 0 || j < 0 || i >= n_ || j >= n_ || i == j) {
            return false;
        }
        auto nb = neighbors(i);
        return std::binary_search(nb.begin(), nb.end(), j);
    }

private:
    std::span<Index> neighbors_mut(Index i) {
        const auto b = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(i)]);
        const auto e = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(i + 1)]);
        return {adjacency_.data() + b, e - b};
    }

    Index n_ = 0;
    Index k_ = 0;
    std::vector<std::pair<Index, Index>> edges_;
    std::vector<Index> offsets_;
    std::vector<Index> adjacency_;
};

/**
 * Build the union-symmetrized exact kNN graph of `points`.
 */
template<typename Derived>
NeighborGraph knn_graph(const Eigen::MatrixBase<Derived>& points, Index k) {
    const auto nn = exact_knn(points, k);
    std::vector<std::pair<Index, Index>> edges;
    edges.reserve(static_cast<std::size_t>(nn.size()));
    for (Index i = 0; i < nn.rows(); ++i) {
        for (Index c = 0; c < nn.cols(); ++c) {
            edges.emplace_back(i, nn(i, c));
        }
    }
    return NeighborGraph(points.rows(), k, std::move(edges));
}

/**
 * Binary normalized affinity: `1 / |P|` on edges, zero elsewhere.
 */
template<typename Float = double>
Float affinity(const NeighborGraph& graph, Index i, Index j) {
    if (i == j) {
        throw std::invalid_argument("affinity is undefined for i == j");
    }
    if (i < 0 || j < 0 || i >= graph.num_samples() || j >= graph.num_samples()) {
        throw std::out_of_range("affinity index out of range");
    }
    return graph.contains(i, j) ? Float(1) / static_cast<Float>(graph.num_edges()) : Float(0);
}

/**
 * Edge list, one `i,j` per line with `i < j`, in ascending lexicographic order.
 */
inline void write_edge_list(const NeighborGraph& graph, std::ostream& out) {
    for (const auto& [i, j] : graph.edges()) {
        out << i << ',' << j << '\n';
    }
}

inline void write_edge_list(const NeighborGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    write_edge_list(graph, out);
}

}

#endif
