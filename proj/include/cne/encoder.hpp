#ifndef CNE_ENCODER_HPP
#define CNE_ENCODER_HPP

#include "types.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

/**
 * @file encoder.hpp
 *
 * @brief Fully connected encoder mapping input points to embedding coordinates.
 */

namespace cne {

/**
 * Weights and biases of every layer. Layer `l` maps row vectors of width
 * `sizes[l]` to width `sizes[l+1]` as `x * weights[l] + biases[l]`.
 */
template<typename Float = double>
struct EncoderParams {
    std::vector<Matrix<Float>> weights;
    std::vector<RowVector<Float>> biases;

    EncoderParams zeros_like() const {
        EncoderParams out;
        for (const auto& w : weights) {
            out.weights.push_back(Matrix<Float>::Zero(w.rows(), w.cols()));
        }
        for (const auto& b : biases) {
            out.biases.push_back(RowVector<Float>::Zero(b.cols()));
        }
        return out;
    }

    bool all_finite() const {
        for (const auto& w : weights) {
            if (!w.allFinite()) {
                return false;
            }
        }
        for (const auto& b : biases) {
            if (!b.allFinite()) {
                return false;
            }
        }
        return true;
    }
};

/**
 * @brief Multilayer perceptron with rectifier hidden layers and a linear output.
 */
template<typename Float = double>
class Encoder {
public:
    /// Activations kept by `forward` for `backward`.
    struct Cache {
        /// `inputs[l]` is the input of layer `l`; `pre[l]` its pre-activation.
        std::vector<Matrix<Float>> inputs;
        std::vector<Matrix<Float>> pre;
    };

    Encoder() = default;

    /**
     * Uniform fan-in initialization: every weight and bias of a layer with
     * `fan_in` inputs is drawn from `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
     */
    Encoder(std::vector<Index> sizes, std::uint64_t seed) : sizes_(std::move(sizes)) {
        check_sizes();
        std::mt19937_64 rng(seed);
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
            std::uniform_real_distribution<double> dist(-bound, bound);
            Matrix<Float> w(sizes_[l], sizes_[l + 1]);
            for (Index i = 0; i < w.size(); ++i) {
                w.data()[i] = static_cast<Float>(dist(rng));
            }
            RowVector<Float> b(sizes_[l + 1]);
            for (Index i = 0; i < b.size(); ++i) {
                b(i) = static_cast<Float>(dist(rng));
            }
            params_.weights.push_back(std::move(w));
            params_.biases.push_back(std::move(b));
        }
    }

    Encoder(std::vector<Index> sizes, EncoderParams<Float> params) : sizes_(std::move(sizes)), params_(std::move(params)) {
        check_sizes();
        if (params_.weights.size() + 1 != sizes_.size() || params_.biases.size() + 1 != sizes_.size()) {
            throw std::invalid_argument("encoder parameter count does not match layer sizes");
        }
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            if (params_.weights[l].rows() != sizes_[l] || params_.weights[l].cols() != sizes_[l + 1] ||
                params_.biases[l].cols() != sizes_[l + 1]) {
                throw std::invalid_argument("encoder parameter shape mismatch at layer " + std::to_string(l));
            }
        }
    }

    const std::vector<Index>& layer_sizes() const { return sizes_; }
    Index input_dim() const { return sizes_.front(); }
    Index output_dim() const { return sizes_.back(); }
    std::size_t num_layers() const { return params_.weights.size(); }

    const EncoderParams<Float>& params() const { return params_; }
    EncoderParams<Float>& params() { return params_; }

    Matrix<Float> forward(const Matrix<Float>& x) const {
        check_input(x);
        Matrix<Float> a = x;
        for (std::size_t l = 0; l < num_layers(); ++l) {
            Matrix<Float> z = a * params_.weights[l];
            z.rowwise() += params_.biases[l];
            a = (l + 1 < num_layers()) ? Matrix<Float>(z.cwiseMax(Float(0))) : z;
        }
        return a;
    }

    Matrix<Float> forward(const Matrix<Float>& x, Cache& cache) const {
        check_input(x);
        cache.inputs.assign(1, x);
        cache.pre.clear();
        for (std::size_t l = 0; l < num_layers(); ++l) {
            Matrix<Float> z = cache.inputs.back() * params_.weights[l];
            z.rowwise() += params_.biases[l];
            cache.pre.push_back(z);
            if (l + 1 < num_layers()) {
                cache.inputs.push_back(z.cwiseMax(Float(0)));
            } else {
                return z;
            }
        }
        return cache.inputs.back();
    }

    /**
     * Back-propagate `d_out` (gradient of the loss with respect to the outputs
     * of the cached forward pass) to every weight and bias.
     */
    EncoderParams<Float> backward(const Cache& cache, const Matrix<Float>& d_out) const {
        EncoderParams<Float> grad;
        grad.weights.resize(num_layers());
        grad.biases.resize(num_layers());
        Matrix<Float> delta = d_out;
        for (std::size_t l = num_layers(); l-- > 0;) {
            grad.weights[l].noalias() = cache.inputs[l].transpose() * delta;
            grad.biases[l] = delta.colwise().sum();
            if (l > 0) {
                Matrix<Float> upstream = delta * params_.weights[l].transpose();
                delta = upstream.cwiseProduct((cache.pre[l - 1].array() > Float(0)).template cast<Float>().matrix());
            }
        }
        return grad;
    }

private:
    void check_sizes() const {
        if (sizes_.size() < 2) {
            throw std::invalid_argument("encoder needs at least an input and an output size");
        }
        for (Index s : sizes_) {
            if (s < 1) {
                throw std::invalid_argument("encoder layer sizes must be >= 1");
            }
        }
    }

    void check_input(const Matrix<Float>& x) const {
        if (x.cols() != input_dim()) {
            throw std::invalid_argument("encoder expects inputs of dimension " + std::to_string(input_dim()) + ", got " +
                                        std::to_string(x.cols()));
        }
    }

    std::vector<Index> sizes_;
    EncoderParams<Float> params_;
};

/**
 * Checkpoint layout, all integers and reals little-endian:
 *
 *     8 bytes   magic "CNEENC01"
 *     u64       number of layer sizes L
 *     u64 x L   layer sizes
 *     per layer l = 0..L-2:
 *         f64 x (sizes[l] * sizes[l+1])   weights, row-major, input index major
 *         f64 x sizes[l+1]                biases
 */
inline constexpr std::array<char, 8> encoder_magic = {'C', 'N', 'E', 'E', 'N', 'C', '0', '1'};

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) {
        buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    out.write(buf, 8);
}

inline std::uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) {
        throw std::runtime_error("truncated encoder checkpoint");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    return v;
}

}

template<typename Float>
void save_encoder(const Encoder<Float>& enc, std::ostream& out) {
    out.write(encoder_magic.data(), encoder_magic.size());
    detail::put_u64(out, enc.layer_sizes().size());
    for (Index s : enc.layer_sizes()) {
        detail::put_u64(out, static_cast<std::uint64_t>(s));
    }
    for (std::size_t l = 0; l < enc.num_layers(); ++l) {
        const auto& w = enc.params().weights[l];
        for (Index r = 0; r < w.rows(); ++r) {
            for (Index c = 0; c < w.cols(); ++c) {
                detail::put_u64(out, std::bit_cast<std::uint64_t>(static_cast<double>(w(r, c))));
            }
        }
        for (Index c = 0; c < enc.params().biases[l].cols(); ++c) {
            detail::put_u64(out, std::bit_cast<std::uint64_t>(static_cast<double>(enc.params().biases[l](c))));
        }
    }
}

template<typename Float>
void save_encoder(const Encoder<Float>& enc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    save_encoder(enc, out);
}

template<typename Float = double>
Encoder<Float> load_encoder(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != encoder_magic) {
        throw std::runtime_error("not an encoder checkpoint");
    }
    const auto n_sizes = detail::get_u64(in);
    if (n_sizes < 2 || n_sizes > 64) {
        throw std::runtime_error("implausible layer count in encoder checkpoint");
    }
    std::vector<Index> sizes;
    for (std::uint64_t i = 0; i < n_sizes; ++i) {
        sizes.push_back(static_cast<Index>(detail::get_u64(in)));
    }
    EncoderParams<Float> params;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Matrix<Float> w(sizes[l], sizes[l + 1]);
        for (Index r = 0; r < w.rows(); ++r) {
            for (Index c = 0; c < w.cols(); ++c) {
                w(r, c) = static_cast<Float>(std::bit_cast<double>(detail::get_u64(in)));
            }
        }
        RowVector<Float> b(sizes[l + 1]);
        for (Index c = 0; c < b.cols(); ++c) {
            b(c) = static_cast<Float>(std::bit_cast<double>(detail::get_u64(in)));
        }
        params.weights.push_back(std::move(w));
        params.biases.push_back(std::move(b));
    }
    return Encoder<Float>(std::move(sizes), std::move(params));
}

template<typename Float = double>
Encoder<Float> load_encoder(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    return load_encoder<Float>(in);
}

}

#endif
