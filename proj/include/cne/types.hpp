#ifndef CNE_TYPES_HPP
#define CNE_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

/**
 * @file types.hpp
 *
 * @brief Dense matrix aliases and error types shared across the library.
 */

namespace cne {

using Index = Eigen::Index;

/**
 * Row-major dense matrix. Samples are rows, so `m.row(i)` is contiguous.
 */
template<typename Float = double>
using Matrix = Eigen::Matrix<Float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template<typename Float = double>
using Vector = Eigen::Matrix<Float, Eigen::Dynamic, 1>;

template<typename Float = double>
using RowVector = Eigen::Matrix<Float, 1, Eigen::Dynamic>;

/**
 * Raised when a computation produces a non-finite value.
 */
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Raised by the training loops when parameters stop being finite.
 */
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, int epoch, std::int64_t step)
        : NumericalError(what), epoch_(epoch), step_(step) {}

    int epoch() const { return epoch_; }
    std::int64_t step() const { return step_; }

private:
    int epoch_;
    std::int64_t step_;
};

}

#endif
