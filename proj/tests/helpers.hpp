#ifndef CNE_TEST_HELPERS_HPP
#define CNE_TEST_HELPERS_HPP

#include "cne/cne.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace cne_test {

using cne::Index;
using Mat = cne::Matrix<double>;

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("cne_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path.string();
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline Mat random_matrix(Index rows, Index cols, std::uint64_t seed, double scale = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0, scale);
    Mat out(rows, cols);
    for (Index i = 0; i < out.size(); ++i) {
        out.data()[i] = normal(rng);
    }
    return out;
}

/// Random rotation (Haar-distributed orthogonal matrix with det +1).
inline Eigen::MatrixXd random_rotation(Index d, std::uint64_t seed) {
    Eigen::MatrixXd g = random_matrix(d, d, seed);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    if (q.determinant() < 0) {
        q.col(0) *= -1;
    }
    return q;
}

/// Points on a line: row i is (x_i, 0, ..., 0).
inline Mat on_line(std::initializer_list<double> xs, Index dim = 2) {
    Mat out = Mat::Zero(static_cast<Index>(xs.size()), dim);
    Index r = 0;
    for (double x : xs) {
        out(r++, 0) = x;
    }
    return out;
}

/// Batch with one anchor, one positive and the given negatives.
inline cne::PairBatch single_anchor(Index anchor, Index positive, std::vector<Index> negatives) {
    cne::PairBatch b;
    b.anchors = {anchor};
    b.positives = {positive};
    b.m = static_cast<Index>(negatives.size());
    b.negatives = std::move(negatives);
    return b;
}

/// Coordinate at distance sqrt(s) from the origin along axis `axis` of a 2-D embedding.
inline Eigen::RowVector2d at_sq(double s, int axis = 0) {
    Eigen::RowVector2d v = Eigen::RowVector2d::Zero();
    v(axis) = std::sqrt(s);
    return v;
}

}

#endif
