#ifndef CNE_SAMPLER_HPP
#define CNE_SAMPLER_HPP

#include "neighbor_graph.hpp"
#include "types.hpp"

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

/**
 * @file sampler.hpp
 *
 * @brief Minibatches of anchor/positive edges with negative, mid-near and
 * label-positive companions.
 */

namespace cne {

/**
 * @brief Splittable seed source.
 *
 * `engine(a, b, ...)` returns a fresh generator that depends only on the
 * master seed and the stream ids, so any batch can be regenerated on its own
 * regardless of which batches were drawn before it.
 */
class SeedStream {
public:
    explicit SeedStream(std::uint64_t seed = 0) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::mt19937_64 engine(std::initializer_list<std::uint64_t> stream) const {
        std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
        for (auto s : stream) {
            words.push_back(static_cast<std::uint32_t>(s));
            words.push_back(static_cast<std::uint32_t>(s >> 32));
        }
        std::seed_seq seq(words.begin(), words.end());
        return std::mt19937_64(seq);
    }

private:
    std::uint64_t seed_;
};

/**
 * @brief Pair weights with a linearly annealed mid-near weight.
 *
 * `w_u(t)` moves linearly from `w_u_init` to `w_u_final` over the first
 * `anneal_fraction * T` epochs and stays at `w_u_final` afterwards.
 */
template<typename Float = double>
struct ScheduleSpec {
    Float w_p = 1;
    Float w_u_init = 1;
    Float w_u_final = 0;
    Float anneal_fraction = 0.5;

    void validate() const {
        if (!(w_p > 0)) {
            throw std::invalid_argument("w_p must be positive");
        }
        if (!(w_u_init >= 0) || !(w_u_final >= 0)) {
            throw std::invalid_argument("w_u weights must be non-negative");
        }
        if (!(anneal_fraction >= 0 && anneal_fraction <= 1)) {
            throw std::invalid_argument("anneal_fraction must lie in [0, 1]");
        }
    }

    Float w_u(int epoch, int total_epochs) const {
        const Float span = anneal_fraction * static_cast<Float>(total_epochs);
        const auto t = static_cast<Float>(epoch);
        if (!(t < span)) {
            return w_u_final;
        }
        return w_u_init + (w_u_final - w_u_init) * (t / span);
    }
};

/**
 * @brief One minibatch of anchors with their companions.
 *
 * All companion indices are sample indices. `negatives` and `midnears` are
 * flattened with strides `m` and `n_midnear`. The set-valued companions are
 * empty (no per-anchor entries at all) unless the sampler was asked for them.
 */
struct PairBatch {
    std::vector<Index> anchors;
    std::vector<Index> positives;

    Index m = 0;
    std::vector<Index> negatives;

    /// Per anchor, ordered by increasing high-dimensional distance.
    Index n_midnear = 0;
    std::vector<Index> midnears;

    /// Same-label samples among the batch anchors, plus the anchor's own
    /// positive when it shares the label. Sorted, unique, anchor excluded.
    std::vector<std::vector<Index>> label_positives;

    /// Graph neighbors of the anchor among the batch anchors, plus the
    /// anchor's own positive. Sorted, unique.
    std::vector<std::vector<Index>> neighbor_positives;

    Index size() const { return static_cast<Index>(anchors.size()); }

    std::span<const Index> negatives_of(Index b) const {
        return {negatives.data() + b * m, static_cast<std::size_t>(m)};
    }

    std::span<const Index> midnears_of(Index b) const {
        return {midnears.data() + b * n_midnear, static_cast<std::size_t>(n_midnear)};
    }
};

namespace detail {

inline Index uniform_index(std::mt19937_64& rng, Index n) {
    std::uniform_int_distribution<Index> dist(0, n - 1);
    return dist(rng);
}

/// Uniform over `{0..n-1} \ {excluded}`.
inline Index uniform_index_except(std::mt19937_64& rng, Index n, Index excluded) {
    Index x = uniform_index(rng, n - 1);
    return x >= excluded ? x + 1 : x;
}

}

/**
 * @brief Draw `batch_size` edges uniformly with replacement plus `m` uniform negatives each.
 *
 * The anchor end of each edge is chosen by a fair coin. Negatives are drawn
 * uniformly from all samples except the anchor and are not filtered against
 * the graph.
 */
inline PairBatch sample_edge_batch(const NeighborGraph& graph, Index batch_size, Index m, std::mt19937_64& rng) {
    if (graph.empty()) {
        throw std::invalid_argument("cannot sample from an empty graph");
    }
    if (batch_size < 1 || m < 1) {
        throw std::invalid_argument("batch_size and m must be >= 1");
    }
    const Index n = graph.num_samples();
    const Index n_edges = graph.num_edges();

    PairBatch batch;
    batch.m = m;
    batch.anchors.resize(static_cast<std::size_t>(batch_size));
    batch.positives.resize(static_cast<std::size_t>(batch_size));
    batch.negatives.resize(static_cast<std::size_t>(batch_size * m));

    std::bernoulli_distribution coin;
    for (Index b = 0; b < batch_size; ++b) {
        const auto& e = graph.edges()[static_cast<std::size_t>(detail::uniform_index(rng, n_edges))];
        const bool flip = coin(rng);
        const Index anchor = flip ? e.second : e.first;
        batch.anchors[static_cast<std::size_t>(b)] = anchor;
        batch.positives[static_cast<std::size_t>(b)] = flip ? e.first : e.second;
        for (Index s = 0; s < m; ++s) {
            batch.negatives[static_cast<std::size_t>(b * m + s)] = detail::uniform_index_except(rng, n, anchor);
        }
    }
    return batch;
}

namespace detail {

template<typename Derived>
std::vector<std::pair<typename Derived::Scalar, Index>> midnear_pool(const Eigen::MatrixBase<Derived>& points, Index anchor,
                                                                     Index pool, std::mt19937_64& rng)
{
    const Index n = points.rows();
    if (pool < 2) {
        throw std::invalid_argument("mid-near pool must be >= 2");
    }
    if (n <= pool) {
        throw std::invalid_argument("mid-near sampling needs N > pool (N=" + std::to_string(n) +
                                    ", pool=" + std::to_string(pool) + ")");
    }
    std::vector<Index> chosen;
    chosen.reserve(static_cast<std::size_t>(pool));
    while (static_cast<Index>(chosen.size()) < pool) {
        const Index c = uniform_index_except(rng, n, anchor);
        if (std::find(chosen.begin(), chosen.end(), c) == chosen.end()) {
            chosen.push_back(c);
        }
    }
    std::vector<std::pair<typename Derived::Scalar, Index>> ranked;
    ranked.reserve(chosen.size());
    for (Index c : chosen) {
        ranked.emplace_back((points.row(anchor) - points.row(c)).squaredNorm(), c);
    }
    std::sort(ranked.begin(), ranked.end());
    return ranked;
}

}

/**
 * Draw `pool` distinct non-anchor samples and return the second nearest to
 * the anchor in the input space (ties by index).
 */
template<typename Derived>
Index sample_midnear(const Eigen::MatrixBase<Derived>& points, Index anchor, Index pool, std::mt19937_64& rng) {
    return detail::midnear_pool(points, anchor, pool, rng)[1].second;
}

/**
 * Positions of batch members sharing the label of the anchor at `position`,
 * excluding `position` itself.
 */
inline std::vector<Index> label_positive_set(std::span<const int> labels, std::span<const Index> batch, Index position) {
    if (position < 0 || position >= static_cast<Index>(batch.size())) {
        throw std::out_of_range("anchor position out of range");
    }
    auto label_of = [&](Index sample) {
        if (sample < 0 || sample >= static_cast<Index>(labels.size())) {
            throw std::out_of_range("no label for sample " + std::to_string(sample));
        }
        return labels[static_cast<std::size_t>(sample)];
    };
    const int mine = label_of(batch[static_cast<std::size_t>(position)]);
    std::vector<Index> out;
    for (Index p = 0; p < static_cast<Index>(batch.size()); ++p) {
        if (p != position && label_of(batch[static_cast<std::size_t>(p)]) == mine) {
            out.push_back(p);
        }
    }
    return out;
}

/**
 * @brief Stateless batch generator for one training run.
 *
 * `draw(epoch, step)` depends only on the master seed and its arguments.
 */
template<typename Float = double>
class BatchSampler {
public:
    struct Options {
        Index batch_size = 1024;
        Index m = 5;
        Index n_midnear = 0;
        Index midnear_pool = 6;
        bool label_positives = false;
        bool neighbor_positives = false;
    };

    BatchSampler(const NeighborGraph& graph, const Matrix<Float>& points, const std::vector<int>* labels, Options options,
                 std::uint64_t seed)
        : graph_(&graph), points_(&points), labels_(labels), options_(options), seeds_(seed)
    {
        if (options_.label_positives && !labels_) {
            throw std::invalid_argument("label-positive sets need labels");
        }
        if (options_.n_midnear > 0 && points.rows() <= options_.midnear_pool) {
            throw std::invalid_argument("mid-near sampling needs N > pool");
        }
    }

    const Options& options() const { return options_; }

    Index steps_per_epoch() const {
        return std::max<Index>(1, (graph_->num_edges() + options_.batch_size - 1) / options_.batch_size);
    }

    PairBatch draw(int epoch, Index step) const {
        auto rng = seeds_.engine({static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(step)});
        PairBatch batch = sample_edge_batch(*graph_, options_.batch_size, options_.m, rng);

        if (options_.n_midnear > 0) {
            batch.n_midnear = options_.n_midnear;
            batch.midnears.resize(static_cast<std::size_t>(batch.size() * options_.n_midnear));
            std::vector<std::pair<Float, Index>> picked;
            for (Index b = 0; b < batch.size(); ++b) {
                const Index a = batch.anchors[static_cast<std::size_t>(b)];
                picked.clear();
                for (Index u = 0; u < options_.n_midnear; ++u) {
                    const Index c = sample_midnear(*points_, a, options_.midnear_pool, rng);
                    picked.emplace_back((points_->row(a) - points_->row(c)).squaredNorm(), c);
                }
                std::sort(picked.begin(), picked.end());
                for (Index u = 0; u < options_.n_midnear; ++u) {
                    batch.midnears[static_cast<std::size_t>(b * options_.n_midnear + u)] = picked[static_cast<std::size_t>(u)].second;
                }
            }
        }

        if (options_.label_positives) {
            fill_label_positives(batch);
        }
        if (options_.neighbor_positives) {
            fill_neighbor_positives(batch);
        }
        return batch;
    }

private:
    void fill_label_positives(PairBatch& batch) const {
        const auto& labels = *labels_;
        const int n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
        std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(n_classes));
        for (Index a : batch.anchors) {
            by_class[static_cast<std::size_t>(labels[static_cast<std::size_t>(a)])].push_back(a);
        }
        for (auto& members : by_class) {
            std::sort(members.begin(), members.end());
            members.erase(std::unique(members.begin(), members.end()), members.end());
        }

        batch.label_positives.resize(batch.anchors.size());
        for (std::size_t b = 0; b < batch.anchors.size(); ++b) {
            const Index a = batch.anchors[b];
            const Index p = batch.positives[b];
            const int la = labels[static_cast<std::size_t>(a)];
            auto& out = batch.label_positives[b];
            out = by_class[static_cast<std::size_t>(la)];
            auto self = std::lower_bound(out.begin(), out.end(), a);
            if (self != out.end() && *self == a) {
                out.erase(self);
            }
            if (labels[static_cast<std::size_t>(p)] == la) {
                auto it = std::lower_bound(out.begin(), out.end(), p);
                if (it == out.end() || *it != p) {
                    out.insert(it, p);
                }
            }
        }
    }

    void fill_neighbor_positives(PairBatch& batch) const {
        std::vector<char> in_batch(static_cast<std::size_t>(graph_->num_samples()), 0);
        for (Index a : batch.anchors) {
            in_batch[static_cast<std::size_t>(a)] = 1;
        }
        batch.neighbor_positives.resize(batch.anchors.size());
        for (std::size_t b = 0; b < batch.anchors.size(); ++b) {
            auto& out = batch.neighbor_positives[b];
            out.push_back(batch.positives[b]);
            for (Index j : graph_->neighbors(batch.anchors[b])) {
                if (in_batch[static_cast<std::size_t>(j)] && j != batch.positives[b]) {
                    out.push_back(j);
                }
            }
            std::sort(out.begin(), out.end());
        }
    }

    const NeighborGraph* graph_;
    const Matrix<Float>* points_;
    const std::vector<int>* labels_;
    Options options_;
    SeedStream seeds_;
};

}

#endif
