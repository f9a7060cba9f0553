#ifndef CNE_LOSS_HPP
#define CNE_LOSS_HPP

#include "kernel.hpp"
#include "parallel.hpp"
#include "sampler.hpp"
#include "types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

/**
 * @file loss.hpp
 *
 * @brief The contrastive neighbor-embedding loss family and its analytic gradients.
 *
 * Every loss is a sum of per-anchor terms that depend on the embedding only
 * through squared pairwise distances `s`. Each term reports its value and
 * `dL/ds` for each pair it touches, and the chain rule through
 * `s = ||z_a - z_b||^2` turns that into coordinate gradients. Values and
 * gradients are averaged over the anchors that contribute to the batch.
 */

namespace cne {

enum class LossKind { tsne, umap, nce, trimap, pacmap, infonce, sscl, snn, supcon, sup_snn, tscne };

inline constexpr std::array<LossKind, 11> all_loss_kinds = {
    LossKind::tsne,   LossKind::umap, LossKind::nce, LossKind::trimap,  LossKind::pacmap, LossKind::infonce,
    LossKind::sscl,   LossKind::snn,  LossKind::supcon, LossKind::sup_snn, LossKind::tscne,
};

inline std::string_view loss_name(LossKind kind) {
    switch (kind) {
        case LossKind::tsne: return "tsne";
        case LossKind::umap: return "umap";
        case LossKind::nce: return "nce";
        case LossKind::trimap: return "trimap";
        case LossKind::pacmap: return "pacmap";
        case LossKind::infonce: return "infonce";
        case LossKind::sscl: return "sscl";
        case LossKind::snn: return "snn";
        case LossKind::supcon: return "supcon";
        case LossKind::sup_snn: return "sup_snn";
        case LossKind::tscne: return "tscne";
    }
    return "";
}

inline LossKind parse_loss_kind(std::string_view name) {
    for (auto k : all_loss_kinds) {
        if (loss_name(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

struct LossFlags {
    /// Forces the literal forms: no log around ratios, literal PaCMAP negative term.
    bool paper_as_written = false;
    /// Wrap TriMap / t-SCNE ratios in a log, InfoNCE style.
    bool log_ratio = false;
    /// PaCMAP negatives contribute `+phi/(phi+1)` instead of `-(1 - phi/(phi+1))`.
    bool corrected_pacmap_sign = true;
    /// Temperature losses also put the positive(s) in the softmax denominator.
    bool denominator_includes_positive = false;
};

/**
 * @brief Selection of one loss from the family plus its hyperparameters.
 *
 * `tau` is read only by the temperature losses (sscl, snn, supcon, sup_snn);
 * `schedule` only by trimap, pacmap and tscne.
 */
template<typename Float = double>
struct LossSpec {
    LossKind kind = LossKind::umap;
    Index m = 5;
    Float tau = 1;
    ScheduleSpec<Float> schedule;
    LossFlags flags;

    bool supervised() const {
        return kind == LossKind::supcon || kind == LossKind::sup_snn || kind == LossKind::tscne;
    }

    bool uses_temperature() const {
        return kind == LossKind::sscl || kind == LossKind::snn || kind == LossKind::supcon || kind == LossKind::sup_snn;
    }

    bool uses_schedule() const {
        return kind == LossKind::trimap || kind == LossKind::pacmap || kind == LossKind::tscne;
    }

    /// Mid-near samples the sampler must attach to each anchor.
    Index midnears_per_anchor() const {
        switch (kind) {
            case LossKind::trimap: return 2;
            case LossKind::pacmap:
            case LossKind::tscne: return 1;
            default: return 0;
        }
    }

    bool needs_neighbor_sets() const { return kind == LossKind::snn; }

    /// Flags after `paper_as_written` has overridden the corrections.
    LossFlags effective_flags() const {
        LossFlags f = flags;
        if (f.paper_as_written) {
            f.log_ratio = false;
            f.corrected_pacmap_sign = false;
        }
        return f;
    }

    void validate() const {
        if (m < 1) {
            throw std::invalid_argument("m must be >= 1");
        }
        if (!(tau > 0)) {
            throw std::invalid_argument("tau must be positive");
        }
        schedule.validate();
    }
};

/**
 * @brief Loss value plus the gradient rows of every sample the batch touches.
 */
template<typename Float = double>
struct LossGrad {
    Float value = 0;
    /// Sorted sample indices; row `r` of `grads` belongs to `indices[r]`.
    std::vector<Index> indices;
    Matrix<Float> grads;
    Index contributing_anchors = 0;
    /// Anchors dropped because their positive set was empty.
    Index skipped_anchors = 0;

    RowVector<Float> gradient_of(Index sample) const {
        auto it = std::lower_bound(indices.begin(), indices.end(), sample);
        if (it == indices.end() || *it != sample) {
            return RowVector<Float>::Zero(grads.cols());
        }
        return grads.row(it - indices.begin());
    }
};

struct LossContext {
    /// Epoch index, used by the mid-near weight schedule.
    int epoch = 0;
    int total_epochs = 1;
    /// Fixed chunking so results are independent of the thread count.
    bool deterministic = true;
    unsigned workers = 1;
};

template<typename Float = double>
struct LossStats {
    Float value = 0;
    Index contributing_anchors = 0;
    Index skipped_anchors = 0;
};

/**
 * Sorted unique sample indices referenced by the batch.
 */
inline std::vector<Index> participants(const PairBatch& batch) {
    std::vector<Index> out;
    out.insert(out.end(), batch.anchors.begin(), batch.anchors.end());
    out.insert(out.end(), batch.positives.begin(), batch.positives.end());
    out.insert(out.end(), batch.negatives.begin(), batch.negatives.end());
    out.insert(out.end(), batch.midnears.begin(), batch.midnears.end());
    for (const auto* sets : {&batch.label_positives, &batch.neighbor_positives}) {
        for (const auto& s : *sets) {
            out.insert(out.end(), s.begin(), s.end());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace detail {

template<typename Float>
Float log_sum_exp(const std::vector<Float>& a) {
    const Float mx = *std::max_element(a.begin(), a.end());
    Float acc = 0;
    for (Float x : a) {
        acc += std::exp(x - mx);
    }
    return mx + std::log(acc);
}

template<typename Float>
class LossEvaluator {
public:
    LossEvaluator(const PairBatch& batch, const Matrix<Float>& z, const LossSpec<Float>& spec, LossKind kind,
                  const LossContext& ctx)
        : batch_(batch), z_(z), spec_(spec), kind_(kind), flags_(spec.effective_flags()),
          w_u_(spec.schedule.w_u(ctx.epoch, ctx.total_epochs)) {}

    /// Accumulates the unnormalized term of anchor `b`; false if the anchor is skipped.
    bool anchor(Index b, Float& value, Matrix<Float>& grad) const {
        switch (kind_) {
            case LossKind::umap:
            case LossKind::nce: return umap(b, value, grad);
            case LossKind::trimap: return trimap(b, value, grad);
            case LossKind::pacmap: return pacmap(b, value, grad);
            case LossKind::infonce: return infonce(b, value, grad);
            case LossKind::sscl: {
                const Index j = batch_.positives[static_cast<std::size_t>(b)];
                return mean_of_logs(b, std::span<const Index>(&j, 1), value, grad);
            }
            case LossKind::snn: {
                if (!batch_.neighbor_positives.empty()) {
                    return log_of_sum(b, batch_.neighbor_positives[static_cast<std::size_t>(b)], false, value, grad);
                }
                const Index j = batch_.positives[static_cast<std::size_t>(b)];
                return log_of_sum(b, std::span<const Index>(&j, 1), false, value, grad);
            }
            case LossKind::supcon: return mean_of_logs(b, label_set(b), value, grad);
            case LossKind::sup_snn: return log_of_sum(b, label_set(b), true, value, grad);
            case LossKind::tscne: return tscne(b, value, grad);
            case LossKind::tsne: break;
        }
        throw std::logic_error("tsne has no per-anchor form");
    }

    /// t-SNE couples all anchors through the in-batch partition sum.
    Float tsne(Matrix<Float>& grad) const {
        const Index n_b = batch_.size();
        std::vector<Sq> sq_pos(static_cast<std::size_t>(n_b));
        std::vector<Float> phi(static_cast<std::size_t>(n_b));
        Float partition = 0;
        Float neg_log = 0;
        for (Index b = 0; b < n_b; ++b) {
            const auto u = static_cast<std::size_t>(b);
            sq_pos[u] = sq(batch_.anchors[u], batch_.positives[u]);
            phi[u] = Float(1) / (Float(1) + sq_pos[u].s);
            partition += phi[u];
            neg_log += std::log1p(sq_pos[u].s);
        }
        const Float inv_b = Float(1) / static_cast<Float>(n_b);
        for (Index b = 0; b < n_b; ++b) {
            const auto u = static_cast<std::size_t>(b);
            const Float coef = phi[u] * (inv_b - phi[u] / partition);
            push(grad, batch_.anchors[u], batch_.positives[u], coef * sq_pos[u].live);
        }
        return neg_log * inv_b + std::log(partition);
    }

private:
    struct Sq {
        Float s;
        Float live;
    };

    Sq sq(Index a, Index c) const {
        const Float raw = (z_.row(a) - z_.row(c)).squaredNorm();
        if (raw > min_sq_dist<Float>) {
            return {raw, Float(1)};
        }
        return {min_sq_dist<Float>, Float(0)};
    }

    static Float cauchy_of(const Sq& q) { return Float(1) / (Float(1) + q.s); }

    void push(Matrix<Float>& grad, Index a, Index c, Float coef) const {
        if (coef == 0) {
            return;
        }
        if (!std::isfinite(coef)) {
            throw NumericalError("non-finite gradient on pair (" + std::to_string(a) + ", " + std::to_string(c) + ")");
        }
        grad.row(a) += (2 * coef) * (z_.row(a) - z_.row(c));
        grad.row(c) -= (2 * coef) * (z_.row(a) - z_.row(c));
    }

    std::span<const Index> label_set(Index b) const {
        if (batch_.label_positives.empty()) {
            throw std::invalid_argument(std::string(loss_name(kind_)) + " needs label-positive sets in the batch");
        }
        return batch_.label_positives[static_cast<std::size_t>(b)];
    }

    bool umap(Index b, Float& value, Matrix<Float>& grad) const {
        const Index i = batch_.anchors[static_cast<std::size_t>(b)];
        const Index j = batch_.positives[static_cast<std::size_t>(b)];
        const auto p = sq(i, j);
        value += std::log1p(p.s);
        push(grad, i, j, p.live / (Float(1) + p.s));
        for (Index k : batch_.negatives_of(b)) {
            const auto q = sq(i, k);
            value += std::log1p(q.s) - std::log(q.s);
            push(grad, i, k, -q.live / (q.s * (Float(1) + q.s)));
        }
        return true;
    }

    /// Adds `-w * r` (or `-w * log r`) with `r = phi_a / (phi_a + phi_c)`.
    void triplet(Index i, Index a, Index c, Float w, Float& value, Matrix<Float>& grad) const {
        const auto qa = sq(i, a);
        const auto qc = sq(i, c);
        const Float pa = cauchy_of(qa);
        const Float pc = cauchy_of(qc);
        const Float total = pa + pc;
        if (flags_.log_ratio) {
            value += w * std::log1p(pc / pa);
            push(grad, i, a, qa.live * w * pa * pc / total);
            push(grad, i, c, -qc.live * w * pc * pc / total);
        } else {
            value -= w * pa / total;
            const Float t2 = total * total;
            push(grad, i, a, qa.live * w * pc * pa * pa / t2);
            push(grad, i, c, -qc.live * w * pa * pc * pc / t2);
        }
    }

    bool trimap(Index b, Float& value, Matrix<Float>& grad) const {
        const Index i = batch_.anchors[static_cast<std::size_t>(b)];
        const Index j = batch_.positives[static_cast<std::size_t>(b)];
        for (Index k : batch_.negatives_of(b)) {
            triplet(i, j, k, Float(1), value, grad);
        }
        if (batch_.n_midnear >= 2) {
            auto mn = batch_.midnears_of(b);
            triplet(i, mn[0], mn[1], w_u_, value, grad);
        }
        return true;
    }

    bool pacmap(Index b, Float& value, Matrix<Float>& grad) const {
        const Index i = batch_.anchors[static_cast<std::size_t>(b)];
        const Index j = batch_.positives[static_cast<std::size_t>(b)];
        // phi / (phi + 1) == 1 / (s + 2) for the Cauchy kernel.
        const Float w_p = spec_.schedule.w_p;
        const auto p = sq(i, j);
        const Float gp = Float(1) / (p.s + Float(2));
        value -= w_p * gp;
        push(grad, i, j, p.live * w_p * gp * gp);
        for (Index u : batch_.midnears_of(b)) {
            const auto q = sq(i, u);
            const Float g = Float(1) / (q.s + Float(2));
            value -= w_u_ * g;
            push(grad, i, u, q.live * w_u_ * g * g);
        }
        for (Index k : batch_.negatives_of(b)) {
            const auto q = sq(i, k);
            const Float g = Float(1) / (q.s + Float(2));
            value += flags_.corrected_pacmap_sign ? g : -(Float(1) - g);
            push(grad, i, k, -q.live * g * g);
        }
        return true;
    }

    bool infonce(Index b, Float& value, Matrix<Float>& grad) const {
        const Index i = batch_.anchors[static_cast<std::size_t>(b)];
        const Index j = batch_.positives[static_cast<std::size_t>(b)];
        const auto p = sq(i, j);
        const Float pj = cauchy_of(p);
        Float neg = 0;
        for (Index k : batch_.negatives_of(b)) {
            neg += cauchy_of(sq(i, k));
        }
        const Float total = pj + neg;
        value += std::log1p(neg / pj);
        push(grad, i, j, p.live * pj * neg / total);
        for (Index k : batch_.negatives_of(b)) {
            const auto q = sq(i, k);
            const Float pk = cauchy_of(q);
            push(grad, i, k, -q.live * pk * pk / total);
        }
        return true;
    }

    /// Exponent `-sqrt(s)/tau` and its derivative with respect to `s`.
    std::pair<Float, Float> exponent(const Sq& q) const {
        return {exp_sim_exponent(q.s, spec_.tau), q.live * exp_sim_exponent_derivative(q.s, spec_.tau)};
    }

    /// `(1/|P|) sum_p -log(e_p / sum_k e_k)`; sscl and supcon.
    bool mean_of_logs(Index b, std::span<const Index> pos, Float& value, Matrix<Float>& grad) const {
        if (pos.empty()) {
            return false;
        }
        const Index i = batch_.anchors[static_cast<std::size_t>(b)];
        auto negs = batch_.negatives_of(b);
        const Float inv_p = Float(1) / static_cast<Float>(pos.size());

        std::vector<Float> a_neg, d_neg;
        for (Index k : negs) {
            auto [a, d] = exponent(sq(i, k));
            a_neg.push_back(a);
            d_neg.push_back(d);
        }
        std::vector<Float> coef_neg(negs.size(), Float(0));

        if (!flags_.denominator_includes_positive) {
            const Float lse = log_sum_exp(a_neg);
            for (Index p : pos) {
                auto [a, d] = exponent(sq(i, p));
                value += inv_p * (lse - a);
                push(grad, i, p, -inv_p * d);
            }
            for (std::size_t k = 0; k < negs.size(); ++k) {
                coef_neg[k] = std::exp(a_neg[k] - lse);
            }
        } else {
            std::vector<Float> all(a_neg.size() + 1);
            std::copy(a_neg.begin(), a_neg.end(), all.begin() + 1);
            for (Index p : pos) {
                auto [a, d] = exponent(sq(i, p));
                all[0] = a;
                const Float lse = log_sum_exp(all);
                value += inv_p * (lse - a);
                push(grad, i, p, inv_p * (std::exp(a - lse) - Float(1)) * d);
                for (std::size_t k = 0; k < negs.size(); ++k) {
                    coef_neg[k] += inv_p * std::exp(a_neg[k] - lse);
                }
            }
        }
        for (std::size_t k = 0; k < negs.size(); ++k) {
            push(grad, i, negs[k], coef_neg[k] * d_neg[k]);
        }
        return true;
    }

    /// `-log(sum_p e_p / sum_k e_k)`; snn, and sup_snn with the `1/|P|` average.
    bool log_of_sum(Index b, std::span<const Index> pos, bool average, Float& value, Matrix<Float>& grad) const {
        if (pos.empty()) {
            return false;
        }
        const Index i = batch_.anchors[static_cast<std::size_t>(b)];
        auto negs = batch_.negatives_of(b);

        std::vector<Float> a_pos, d_pos, a_den, d_den;
        for (Index p : pos) {
            auto [a, d] = exponent(sq(i, p));
            a_pos.push_back(a);
            d_pos.push_back(d);
        }
        for (Index k : negs) {
            auto [a, d] = exponent(sq(i, k));
            a_den.push_back(a);
            d_den.push_back(d);
        }
        if (flags_.denominator_includes_positive) {
            a_den.insert(a_den.end(), a_pos.begin(), a_pos.end());
        }
        const Float lse_pos = log_sum_exp(a_pos);
        const Float lse_den = log_sum_exp(a_den);
        value += lse_den - lse_pos;
        if (average) {
            value += std::log(static_cast<Float>(pos.size()));
        }

        for (std::size_t p = 0; p < pos.size(); ++p) {
            Float c = -std::exp(a_pos[p] - lse_pos);
            if (flags_.denominator_includes_positive) {
                c += std::exp(a_pos[p] - lse_den);
            }
            push(grad, i, pos[p], c * d_pos[p]);
        }
        for (std::size_t k = 0; k < negs.size(); ++k) {
            push(grad, i, negs[k], std::exp(a_den[k] - lse_den) * d_den[k]);
        }
        return true;
    }

    bool tscne(Index b, Float& value, Matrix<Float>& grad) const {
        auto pos = label_set(b);
        if (pos.empty()) {
            return false;
        }
        const Index i = batch_.anchors[static_cast<std::size_t>(b)];
        const Float inv_p = Float(1) / static_cast<Float>(pos.size());

        Float s_neg = 0;
        for (Index k : batch_.negatives_of(b)) {
            s_neg += cauchy_of(sq(i, k));
        }

        // Coefficient that every negative's dL/dphi_k shares.
        Float neg_factor = 0;
        for (Index p : pos) {
            const auto q = sq(i, p);
            const Float phi = cauchy_of(q);
            if (flags_.log_ratio) {
                value += inv_p * std::log1p(s_neg / phi);
                push(grad, i, p, q.live * inv_p * phi * s_neg / (phi + s_neg));
                neg_factor += inv_p / (phi + s_neg);
            } else {
                value -= inv_p * phi / s_neg;
                push(grad, i, p, q.live * inv_p * phi * phi / s_neg);
                neg_factor += inv_p * phi / (s_neg * s_neg);
            }
        }
        for (Index k : batch_.negatives_of(b)) {
            const auto q = sq(i, k);
            const Float phi = cauchy_of(q);
            push(grad, i, k, -q.live * neg_factor * phi * phi);
        }

        if (batch_.n_midnear > 0) {
            const Index j = batch_.positives[static_cast<std::size_t>(b)];
            const auto qj = sq(i, j);
            const Float pj = cauchy_of(qj);
            Float s_mid = 0;
            for (Index u : batch_.midnears_of(b)) {
                s_mid += cauchy_of(sq(i, u));
            }
            Float mid_factor = 0;
            if (flags_.log_ratio) {
                value += w_u_ * std::log1p(s_mid / pj);
                push(grad, i, j, qj.live * w_u_ * pj * s_mid / (pj + s_mid));
                mid_factor = w_u_ / (pj + s_mid);
            } else {
                value -= w_u_ * pj / s_mid;
                push(grad, i, j, qj.live * w_u_ * pj * pj / s_mid);
                mid_factor = w_u_ * pj / (s_mid * s_mid);
            }
            for (Index u : batch_.midnears_of(b)) {
                const auto q = sq(i, u);
                const Float phi = cauchy_of(q);
                push(grad, i, u, -q.live * mid_factor * phi * phi);
            }
        }
        return true;
    }

    const PairBatch& batch_;
    const Matrix<Float>& z_;
    const LossSpec<Float>& spec_;
    LossKind kind_;
    LossFlags flags_;
    Float w_u_;
};

template<typename Float>
void check_batch(const PairBatch& batch, Index n) {
    if (batch.anchors.empty() || batch.positives.size() != batch.anchors.size()) {
        throw std::invalid_argument("malformed batch");
    }
    if (static_cast<Index>(batch.negatives.size()) != batch.size() * batch.m ||
        static_cast<Index>(batch.midnears.size()) != batch.size() * batch.n_midnear) {
        throw std::invalid_argument("malformed batch companions");
    }
    for (const auto* sets : {&batch.label_positives, &batch.neighbor_positives}) {
        if (!sets->empty() && static_cast<Index>(sets->size()) != batch.size()) {
            throw std::invalid_argument("malformed batch positive sets");
        }
    }
    auto check = [&](Index i) {
        if (i < 0 || i >= n) {
            throw std::out_of_range("batch index " + std::to_string(i) + " out of range");
        }
    };
    for (const auto* v : {&batch.anchors, &batch.positives, &batch.negatives, &batch.midnears}) {
        std::for_each(v->begin(), v->end(), check);
    }
}

}

/**
 * @brief Evaluate the loss selected by `spec.kind` and write the dense gradient.
 *
 * `grad` is resized to the shape of `coords` and overwritten; rows of samples
 * outside the batch are zero.
 */
template<typename Float>
LossStats<Float> evaluate_dense(const PairBatch& batch, const Matrix<Float>& coords, const LossSpec<Float>& spec,
                                const LossContext& ctx, Matrix<Float>& grad)
{
    detail::check_batch<Float>(batch, coords.rows());
    if (!coords.allFinite()) {
        throw NumericalError("embedding coordinates are not finite");
    }
    spec.validate();
    grad.setZero(coords.rows(), coords.cols());

    detail::LossEvaluator<Float> eval(batch, coords, spec, spec.kind, ctx);
    LossStats<Float> stats;

    if (spec.kind == LossKind::tsne) {
        stats.value = eval.tsne(grad);
        stats.contributing_anchors = batch.size();
    } else {
        const int chunks = ctx.deterministic ? deterministic_chunks : static_cast<int>(std::max(1u, ctx.workers));
        std::vector<Matrix<Float>> partial(static_cast<std::size_t>(chunks));
        std::vector<Float> values(static_cast<std::size_t>(chunks), Float(0));
        std::vector<Index> used(static_cast<std::size_t>(chunks), 0);
        parallel_chunks(batch.size(), chunks, ctx.workers, [&](int c, Index begin, Index end) {
            auto& g = partial[static_cast<std::size_t>(c)];
            g.setZero(coords.rows(), coords.cols());
            for (Index b = begin; b < end; ++b) {
                if (eval.anchor(b, values[static_cast<std::size_t>(c)], g)) {
                    ++used[static_cast<std::size_t>(c)];
                }
            }
        });
        grad.swap(partial[0]);
        for (int c = 1; c < chunks; ++c) {
            grad += partial[static_cast<std::size_t>(c)];
        }
        Float total = 0;
        for (int c = 0; c < chunks; ++c) {
            total += values[static_cast<std::size_t>(c)];
            stats.contributing_anchors += used[static_cast<std::size_t>(c)];
        }
        if (stats.contributing_anchors > 0) {
            const Float scale = Float(1) / static_cast<Float>(stats.contributing_anchors);
            stats.value = total * scale;
            grad *= scale;
        }
    }
    stats.skipped_anchors = batch.size() - stats.contributing_anchors;
    if (!std::isfinite(stats.value)) {
        throw NumericalError(std::string(loss_name(spec.kind)) + ": non-finite loss value");
    }
    return stats;
}

/**
 * @brief Evaluate the loss selected by `spec.kind`, returning sparse gradients.
 */
template<typename Float>
LossGrad<Float> evaluate(const PairBatch& batch, const Matrix<Float>& coords, const LossSpec<Float>& spec,
                         const LossContext& ctx = {})
{
    Matrix<Float> dense;
    const auto stats = evaluate_dense(batch, coords, spec, ctx, dense);
    LossGrad<Float> out;
    out.value = stats.value;
    out.contributing_anchors = stats.contributing_anchors;
    out.skipped_anchors = stats.skipped_anchors;
    out.indices = participants(batch);
    out.grads.resize(static_cast<Index>(out.indices.size()), coords.cols());
    for (std::size_t r = 0; r < out.indices.size(); ++r) {
        out.grads.row(static_cast<Index>(r)) = dense.row(out.indices[r]);
    }
    return out;
}

namespace detail {

template<typename Float>
LossGrad<Float> evaluate_as(LossKind kind, const PairBatch& batch, const Matrix<Float>& coords, LossSpec<Float> spec,
                            const LossContext& ctx)
{
    spec.kind = kind;
    return evaluate(batch, coords, spec, ctx);
}

}

/// In-batch t-SNE: `mean_b(-log phi_b) + log(sum_b phi_b)`.
template<typename Float>
LossGrad<Float> loss_tsne(const PairBatch& batch, const Matrix<Float>& coords, const LossSpec<Float>& spec, const LossContext& ctx = {}) {
    return detail::evaluate_as(LossKind::tsne, batch, coords, spec, ctx);
}

/// UMAP's effective loss, which is the same expression as NCE with the Cauchy kernel.
template<typename Float>
LossGrad<Float> loss_umap_nce(const PairBatch& batch, const Matrix<Float>& coords, const LossSpec<Float>& spec, const LossContext& ctx = {}) {
    return detail::evaluate_as(LossKind::umap, batch, coords, spec, ctx);
}

template<typename Float>
LossGrad<Float> loss_trimap(const PairBatch& batch, const Matrix<Float>& coords, const LossSpec<Float>& spec, const LossContext& ctx = {}) {
    return detail::evaluate_as(LossKind::trimap, batch, coords, spec, ctx);
}

template<typename Float>
LossGrad<Float> loss_pacmap(const PairBatch& batch, const Matrix<Float>& coords, const LossSpec<Float>& spec, const LossContext& ctx = {}) {
    return detail::evaluate_as(LossKind::pacmap, batch, coords, spec, ctx);
}

template<typename Float>
LossGrad<Float> loss_infonce(const PairBatch& batch, const Matrix<Float>& coords, const LossSpec<Float>& spec, const LossContext& ctx = {}) {
    return detail::evaluate_as(LossKind::infonce, batch, coords, spec, ctx);
}

template<typename Float>
LossGrad<Float> loss_sscl(const PairBatch& batch, const Matrix<Float>& coords, const LossSpec<Float>& spec, const LossContext& ctx = {}) {
    return detail::evaluate_as(LossKind::sscl, batch, coords, spec, ctx);
}

template<typename Float>
LossGrad<Float> loss_snn(const PairBatch& batch, const Matrix<Float>& coords, const LossSpec<Float>& spec, const LossContext& ctx = {}) {
    return detail::evaluate_as(LossKind::snn, batch, coords, spec, ctx);
}

template<typename Float>
LossGrad<Float> loss_supcon(const PairBatch& batch, const Matrix<Float>& coords, const LossSpec<Float>& spec, const LossContext& ctx = {}) {
    return detail::evaluate_as(LossKind::supcon, batch, coords, spec, ctx);
}

template<typename Float>
LossGrad<Float> loss_sup_snn(const PairBatch& batch, const Matrix<Float>& coords, const LossSpec<Float>& spec, const LossContext& ctx = {}) {
    return detail::evaluate_as(LossKind::sup_snn, batch, coords, spec, ctx);
}

template<typename Float>
LossGrad<Float> loss_tscne(const PairBatch& batch, const Matrix<Float>& coords, const LossSpec<Float>& spec, const LossContext& ctx = {}) {
    return detail::evaluate_as(LossKind::tscne, batch, coords, spec, ctx);
}

/**
 * @brief Compare analytic gradients against central finite differences.
 *
 * Every coordinate of every sample the batch touches is perturbed by `+-eps`.
 * Returns the maximum of `|analytic - numeric| / max(1, |numeric|)`.
 * `corrupt` scales the analytic gradient and exists only as a negative control.
 */
template<typename Float>
Float grad_check(const LossSpec<Float>& spec, const PairBatch& batch, const Matrix<Float>& coords, Float eps,
                 const LossContext& ctx = {}, Float corrupt = 1)
{
    if (!(eps >= Float(1e-7) && eps <= Float(1e-3))) {
        throw std::invalid_argument("grad_check: eps must lie in [1e-7, 1e-3]");
    }
    const auto analytic = evaluate(batch, coords, spec, ctx);
    Matrix<Float> work = coords;
    Matrix<Float> scratch;
    Float worst = 0;
    for (std::size_t r = 0; r < analytic.indices.size(); ++r) {
        const Index i = analytic.indices[r];
        for (Index c = 0; c < coords.cols(); ++c) {
            const Float orig = work(i, c);
            work(i, c) = orig + eps;
            const Float up = evaluate_dense(batch, work, spec, ctx, scratch).value;
            work(i, c) = orig - eps;
            const Float down = evaluate_dense(batch, work, spec, ctx, scratch).value;
            work(i, c) = orig;
            const Float numeric = (up - down) / (2 * eps);
            const Float err = std::abs(corrupt * analytic.grads(static_cast<Index>(r), c) - numeric) /
                              std::max(Float(1), std::abs(numeric));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}

#endif
