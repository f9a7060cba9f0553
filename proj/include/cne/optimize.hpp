#ifndef CNE_OPTIMIZE_HPP
#define CNE_OPTIMIZE_HPP

#include "data.hpp"
#include "encoder.hpp"
#include "loss.hpp"
#include "neighbor_graph.hpp"
#include "sampler.hpp"
#include "types.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

/**
 * @file optimize.hpp
 *
 * @brief Training loops: free embedding coordinates, or an encoder network.
 */

namespace cne {

enum class Mode { nonparametric, parametric };

inline std::string_view mode_name(Mode m) {
    return m == Mode::parametric ? "parametric" : "nonparametric";
}

inline Mode parse_mode(std::string_view s) {
    if (s == "nonparametric") {
        return Mode::nonparametric;
    }
    if (s == "parametric") {
        return Mode::parametric;
    }
    throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

/**
 * @brief SGD-with-momentum settings shared by both training modes.
 */
template<typename Float = double>
struct OptimConfig {
    Mode mode = Mode::nonparametric;
    int epochs = 250;
    Float learning_rate = 10;
    /// Decay the learning rate linearly from `learning_rate` at epoch 0 towards 0 at the last epoch.
    bool lr_decay = true;
    /**
     * Largest per-coordinate displacement `lr * |grad|` a single gradient may
     * contribute before momentum; 0 disables clipping. Only used by the
     * non-parametric mode, where the `1/d^2`-type repulsion of nearly coincident
     * points would otherwise fling them far apart.
     */
    Float max_step = Float(0.01);
    Float momentum = 0.9;
    Index batch_size = 1024;
    std::uint64_t seed = 0;
    bool deterministic = false;
    /// Embedding dimension.
    Index dim = 2;
    /// Candidates drawn per mid-near sample.
    Index midnear_pool = 6;
    /// Hidden layer widths of the parametric encoder.
    std::vector<Index> hidden = {64, 64};
    /// Gradient-evaluation threads; 0 picks the hardware concurrency.
    unsigned workers = 0;

    static OptimConfig defaults(Mode mode) {
        OptimConfig cfg;
        cfg.mode = mode;
        if (mode == Mode::parametric) {
            cfg.epochs = 100;
            cfg.learning_rate = Float(0.01);
            cfg.lr_decay = false;
            cfg.max_step = 0;
        }
        return cfg;
    }

    void validate() const {
        if (epochs < 1) {
            throw std::invalid_argument("epochs must be >= 1");
        }
        if (!(learning_rate >= 0) || !std::isfinite(learning_rate)) {
            throw std::invalid_argument("learning rate must be non-negative");
        }
        if (!(max_step >= 0) || !std::isfinite(max_step)) {
            throw std::invalid_argument("max step must be non-negative");
        }
        if (!(momentum >= 0 && momentum < 1)) {
            throw std::invalid_argument("momentum must lie in [0, 1)");
        }
        if (batch_size < 1) {
            throw std::invalid_argument("batch size must be >= 1");
        }
        if (dim < 1) {
            throw std::invalid_argument("embedding dimension must be >= 1");
        }
    }

    /// Learning rate used throughout `epoch`.
    Float learning_rate_at(int epoch) const {
        if (!lr_decay) {
            return learning_rate;
        }
        return learning_rate * (Float(1) - static_cast<Float>(epoch) / static_cast<Float>(epochs));
    }
};

struct EpochRecord {
    int epoch = 0;
    double mean_loss = 0;
    double wall_ms = 0;
    double w_u = 0;
};

using TrainingLog = std::vector<EpochRecord>;

template<typename Float = double>
struct FitResult {
    Embedding<Float> embedding;
    TrainingLog log;
};

template<typename Float = double>
struct ParametricFit {
    Encoder<Float> encoder;
    Embedding<Float> embedding;
    TrainingLog log;
};

/**
 * @brief Top-`d` principal component scores, each rescaled to standard deviation `target_sd`.
 *
 * Each component's sign is fixed so that its largest-magnitude loading is positive.
 */
template<typename Float>
Matrix<Float> pca_init(const Matrix<Float>& points, Index d, Float target_sd = Float(1e-2)) {
    if (d > points.cols()) {
        throw std::invalid_argument("cannot take more principal components than features");
    }
    Matrix<Float> centered = points.rowwise() - points.colwise().mean();
    Eigen::Matrix<Float, Eigen::Dynamic, Eigen::Dynamic> cov = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Float, Eigen::Dynamic, Eigen::Dynamic>> eig(cov);
    const Index D = points.cols();

    Eigen::Matrix<Float, Eigen::Dynamic, Eigen::Dynamic> basis(D, d);
    for (Index c = 0; c < d; ++c) {
        auto v = eig.eigenvectors().col(D - 1 - c);
        Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        basis.col(c) = v(arg) < 0 ? Eigen::Matrix<Float, Eigen::Dynamic, 1>(-v) : Eigen::Matrix<Float, Eigen::Dynamic, 1>(v);
    }

    Matrix<Float> out = centered * basis;
    for (Index c = 0; c < d; ++c) {
        const Float sd = std::sqrt(out.col(c).squaredNorm() / static_cast<Float>(out.rows()));
        if (sd > 0) {
            out.col(c) *= target_sd / sd;
        }
    }
    return out;
}

namespace detail {

template<typename Float>
void check_fit_inputs(const Dataset<Float>& data, const NeighborGraph& graph, const LossSpec<Float>& spec,
                      const OptimConfig<Float>& cfg)
{
    check_dataset(data, spec.supervised());
    spec.validate();
    cfg.validate();
    if (graph.num_samples() != data.size()) {
        throw std::invalid_argument("graph was built for a different number of samples");
    }
    if (graph.empty()) {
        throw std::invalid_argument("neighbor graph has no edges");
    }
    if (cfg.dim >= data.dim()) {
        throw std::invalid_argument("embedding dimension must be smaller than the input dimension");
    }
}

template<typename Float>
BatchSampler<Float> make_sampler(const Dataset<Float>& data, const NeighborGraph& graph, const LossSpec<Float>& spec,
                                 const OptimConfig<Float>& cfg)
{
    typename BatchSampler<Float>::Options opt;
    opt.batch_size = cfg.batch_size;
    opt.m = spec.m;
    opt.n_midnear = spec.midnears_per_anchor();
    opt.midnear_pool = cfg.midnear_pool;
    opt.label_positives = spec.supervised();
    opt.neighbor_positives = spec.needs_neighbor_sets();
    return BatchSampler<Float>(graph, data.points, data.labels ? &*data.labels : nullptr, opt, cfg.seed);
}

inline LossContext make_context(int epoch, int total, bool deterministic, unsigned workers) {
    LossContext ctx;
    ctx.epoch = epoch;
    ctx.total_epochs = total;
    ctx.deterministic = deterministic;
    ctx.workers = workers == 0 ? default_workers() : workers;
    return ctx;
}

/**
 * Run `step`, turning any numerical failure inside it into a divergence error
 * that names the epoch and step.
 */
template<typename Step>
auto guarded(int epoch, std::int64_t step, const char* what, Step&& fn) {
    try {
        return fn();
    } catch (const DivergenceError&) {
        throw;
    } catch (const NumericalError& e) {
        throw DivergenceError(std::string(what) + " diverged at epoch " + std::to_string(epoch) + ", step " +
                                  std::to_string(step) + ": " + e.what(),
                              epoch, step);
    }
}

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}

/**
 * @brief Optimize the embedding coordinates directly.
 *
 * Starts from `pca_init` (or `init` when given), then runs
 * `epochs * ceil(|P| / batch_size)` momentum steps. Each step draws a fresh
 * batch and updates `v = momentum * v - lr * grad; z += v`, where `lr` is
 * `cfg.learning_rate_at(epoch)` and each gradient entry is first clipped to
 * `max_step / lr` in magnitude when `cfg.max_step > 0`.
 *
 * @throws DivergenceError if any coordinate stops being finite.
 */
template<typename Float>
FitResult<Float> fit_nonparametric(const Dataset<Float>& data, const NeighborGraph& graph, const LossSpec<Float>& spec,
                                   const OptimConfig<Float>& cfg, std::optional<Matrix<Float>> init = std::nullopt)
{
    detail::check_fit_inputs(data, graph, spec, cfg);
    const auto sampler = detail::make_sampler(data, graph, spec, cfg);

    FitResult<Float> out;
    Matrix<Float>& z = out.embedding.coords;
    z = init ? std::move(*init) : pca_init(data.points, cfg.dim);
    if (z.rows() != data.size() || z.cols() != cfg.dim) {
        throw std::invalid_argument("initial embedding has the wrong shape");
    }
    Matrix<Float> velocity = Matrix<Float>::Zero(z.rows(), z.cols());
    Matrix<Float> grad;

    const Index steps = sampler.steps_per_epoch();
    std::int64_t global_step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        const auto ctx = detail::make_context(epoch, cfg.epochs, cfg.deterministic, cfg.workers);
        const Float lr = cfg.learning_rate_at(epoch);
        double total = 0;
        for (Index s = 0; s < steps; ++s, ++global_step) {
            const PairBatch batch = sampler.draw(epoch, s);
            const auto stats = detail::guarded(epoch, global_step, "embedding",
                                               [&] { return evaluate_dense(batch, z, spec, ctx, grad); });
            total += static_cast<double>(stats.value);
            if (cfg.max_step > 0 && lr > 0) {
                const Float limit = cfg.max_step / lr;
                grad = grad.cwiseMax(-limit).cwiseMin(limit);
            }
            velocity = cfg.momentum * velocity - lr * grad;
            z += velocity;
            if (!z.allFinite()) {
                throw DivergenceError("embedding diverged at epoch " + std::to_string(epoch) + ", step " +
                                          std::to_string(global_step),
                                      epoch, global_step);
            }
        }
        out.log.push_back({epoch, total / static_cast<double>(steps), detail::elapsed_ms(start),
                           static_cast<double>(spec.schedule.w_u(epoch, cfg.epochs))});
    }
    return out;
}

/**
 * Encode every row of `points`.
 */
template<typename Float>
Embedding<Float> transform(const Encoder<Float>& encoder, const Matrix<Float>& points) {
    if (points.cols() != encoder.input_dim()) {
        throw std::invalid_argument("transform: expected " + std::to_string(encoder.input_dim()) + " features, got " +
                                    std::to_string(points.cols()));
    }
    return Embedding<Float>{encoder.forward(points)};
}

namespace detail {

/**
 * Rewrite the batch so that sample indices refer to positions in `members`.
 */
inline PairBatch localize(const PairBatch& batch, const std::vector<Index>& members, std::vector<Index>& slot) {
    for (std::size_t p = 0; p < members.size(); ++p) {
        slot[static_cast<std::size_t>(members[p])] = static_cast<Index>(p);
    }
    PairBatch out = batch;
    auto remap = [&](std::vector<Index>& v) {
        for (auto& i : v) {
            i = slot[static_cast<std::size_t>(i)];
        }
    };
    remap(out.anchors);
    remap(out.positives);
    remap(out.negatives);
    remap(out.midnears);
    for (auto* sets : {&out.label_positives, &out.neighbor_positives}) {
        for (auto& s : *sets) {
            remap(s);
        }
    }
    return out;
}

template<typename Float>
void momentum_step(EncoderParams<Float>& params, EncoderParams<Float>& velocity, const EncoderParams<Float>& grad,
                   Float momentum, Float lr)
{
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        velocity.weights[l] = momentum * velocity.weights[l] - lr * grad.weights[l];
        params.weights[l] += velocity.weights[l];
        velocity.biases[l] = momentum * velocity.biases[l] - lr * grad.biases[l];
        params.biases[l] += velocity.biases[l];
    }
}

}

/**
 * @brief Train an encoder `[D, hidden..., d]` so that its outputs minimize the loss.
 *
 * Each step encodes only the samples the batch touches, evaluates the loss
 * gradient with respect to those outputs and back-propagates it into the
 * weights before a momentum update.
 *
 * @throws DivergenceError if any weight stops being finite.
 */
template<typename Float>
ParametricFit<Float> fit_parametric(const Dataset<Float>& data, const NeighborGraph& graph, const LossSpec<Float>& spec,
                                    const OptimConfig<Float>& cfg)
{
    detail::check_fit_inputs(data, graph, spec, cfg);
    const auto sampler = detail::make_sampler(data, graph, spec, cfg);

    std::vector<Index> sizes{data.dim()};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(cfg.dim);

    ParametricFit<Float> out;
    out.encoder = Encoder<Float>(sizes, cfg.seed);
    auto velocity = out.encoder.params().zeros_like();
    typename Encoder<Float>::Cache cache;
    std::vector<Index> slot(static_cast<std::size_t>(data.size()), -1);
    Matrix<Float> grad;

    const Index steps = sampler.steps_per_epoch();
    std::int64_t global_step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        const auto ctx = detail::make_context(epoch, cfg.epochs, cfg.deterministic, cfg.workers);
        const Float lr = cfg.learning_rate_at(epoch);
        double total = 0;
        for (Index s = 0; s < steps; ++s, ++global_step) {
            const PairBatch batch = sampler.draw(epoch, s);
            const auto members = participants(batch);
            const PairBatch local = detail::localize(batch, members, slot);

            Matrix<Float> x(static_cast<Index>(members.size()), data.dim());
            for (std::size_t p = 0; p < members.size(); ++p) {
                x.row(static_cast<Index>(p)) = data.points.row(members[p]);
            }
            const Matrix<Float> z = out.encoder.forward(x, cache);
            const auto stats = detail::guarded(epoch, global_step, "encoder",
                                               [&] { return evaluate_dense(local, z, spec, ctx, grad); });
            total += static_cast<double>(stats.value);

            const auto pgrad = out.encoder.backward(cache, grad);
            detail::momentum_step(out.encoder.params(), velocity, pgrad, cfg.momentum, lr);
            if (!out.encoder.params().all_finite()) {
                throw DivergenceError("encoder diverged at epoch " + std::to_string(epoch) + ", step " +
                                          std::to_string(global_step),
                                      epoch, global_step);
            }
        }
        out.log.push_back({epoch, total / static_cast<double>(steps), detail::elapsed_ms(start),
                           static_cast<double>(spec.schedule.w_u(epoch, cfg.epochs))});
    }
    out.embedding = transform(out.encoder, data.points);
    return out;
}

}

#endif
