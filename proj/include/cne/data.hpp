#ifndef CNE_DATA_HPP
#define CNE_DATA_HPP

#include "types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

/**
 * @file data.hpp
 *
 * @brief Dataset and embedding containers, CSV input/output and synthetic generators.
 */

namespace cne {

/**
 * @brief N samples of D-dimensional points with optional dense class labels.
 *
 * Labels, when present, are always densified to `0..C-1`.
 */
template<typename Float = double>
struct Dataset {
    Matrix<Float> points;
    std::optional<std::vector<int>> labels;
    std::vector<std::string> ids;

    Index size() const { return points.rows(); }
    Index dim() const { return points.cols(); }
    bool has_labels() const { return labels.has_value(); }

    int num_classes() const {
        if (!labels || labels->empty()) {
            return 0;
        }
        return *std::max_element(labels->begin(), labels->end()) + 1;
    }
};

/**
 * @brief Low-dimensional coordinates, one row per sample.
 */
template<typename Float = double>
struct Embedding {
    Matrix<Float> coords;

    Index size() const { return coords.rows(); }
    Index dim() const { return coords.cols(); }
};

/**
 * Check the dataset invariants: at least two samples, at least one feature,
 * finite coordinates, consistent label/id lengths and non-negative labels.
 * If `need_two_classes` is set, the labels must also hold at least two distinct values.
 */
template<typename Float>
void check_dataset(const Dataset<Float>& data, bool need_two_classes = false) {
    if (data.size() < 2) {
        throw std::invalid_argument("dataset needs at least 2 samples, got " + std::to_string(data.size()));
    }
    if (data.dim() < 1) {
        throw std::invalid_argument("dataset needs at least 1 feature");
    }
    if (!data.points.allFinite()) {
        throw std::invalid_argument("dataset contains non-finite coordinates");
    }
    if (!data.ids.empty() && static_cast<Index>(data.ids.size()) != data.size()) {
        throw std::invalid_argument("dataset id count does not match sample count");
    }
    if (data.labels) {
        if (static_cast<Index>(data.labels->size()) != data.size()) {
            throw std::invalid_argument("dataset label count does not match sample count");
        }
        for (int l : *data.labels) {
            if (l < 0) {
                throw std::invalid_argument("dataset labels must be non-negative");
            }
        }
    }
    if (need_two_classes) {
        if (!data.labels) {
            throw std::invalid_argument("a supervised loss requires class labels");
        }
        const auto& l = *data.labels;
        if (std::all_of(l.begin(), l.end(), [&](int x) { return x == l.front(); })) {
            throw std::invalid_argument("a supervised loss requires at least two distinct labels");
        }
    }
}

/**
 * Map arbitrary label strings to dense integers in first-appearance order.
 */
inline std::vector<int> densify_labels(const std::vector<std::string>& raw) {
    std::unordered_map<std::string, int> seen;
    std::vector<int> out;
    out.reserve(raw.size());
    for (const auto& r : raw) {
        auto it = seen.find(r);
        if (it == seen.end()) {
            it = seen.emplace(r, static_cast<int>(seen.size())).first;
        }
        out.push_back(it->second);
    }
    return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        auto cell = trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') {
            cell = cell.substr(1, cell.size() - 2);
        }
        cells.emplace_back(cell);
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return cells;
}

/**
 * Strict decimal parse; the whole cell must be consumed.
 */
inline std::optional<double> parse_real(std::string_view s) {
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    double value = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

inline bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline std::optional<std::size_t> resolve_column(const std::optional<std::string>& which,
                                                 const std::vector<std::string>& header,
                                                 std::size_t width,
                                                 const char* role)
{
    if (!which) {
        return std::nullopt;
    }
    auto it = std::find(header.begin(), header.end(), *which);
    if (it != header.end()) {
        return static_cast<std::size_t>(it - header.begin());
    }
    if (all_digits(*which)) {
        auto idx = static_cast<std::size_t>(std::stoull(*which));
        if (idx >= width) {
            throw std::invalid_argument(std::string(role) + " column index " + *which + " out of range");
        }
        return idx;
    }
    throw std::invalid_argument(std::string(role) + " column '" + *which + "' not found in header");
}

}

enum class HeaderMode { automatic, present, absent };

struct CsvOptions {
    /// Label column, by header name or zero-based index.
    std::optional<std::string> label_column;
    /// Column holding sample identifiers; excluded from the features.
    std::optional<std::string> id_column;
    /// With `automatic`, the first row is a header when none of its cells parse as numbers.
    HeaderMode header = HeaderMode::automatic;
};

/**
 * @brief Read a comma-separated file into a `Dataset`.
 *
 * Every non-label, non-id cell must parse as a finite real. Labels are
 * densified in first-appearance order. Sample ids come from the id column if
 * given, otherwise from the zero-based row number.
 */
template<typename Float = double>
Dataset<Float> load_csv(const std::string& path, const CsvOptions& options = {}) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }

    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) {
            continue;
        }
        rows.push_back(detail::split_csv_line(line));
        line_numbers.push_back(lineno);
    }
    if (rows.empty()) {
        throw std::runtime_error("'" + path + "' is empty");
    }

    bool has_header = options.header == HeaderMode::present;
    if (options.header == HeaderMode::automatic) {
        has_header = std::none_of(rows.front().begin(), rows.front().end(),
                                  [](const std::string& c) { return detail::parse_real(c).has_value(); });
    }
    std::vector<std::string> header;
    if (has_header) {
        header = rows.front();
    }
    const std::size_t first = has_header ? 1 : 0;
    const std::size_t width = rows.front().size();
    if ((options.label_column || options.id_column) && !has_header) {
        for (const auto* col : {&options.label_column, &options.id_column}) {
            if (*col && !detail::all_digits(**col)) {
                throw std::invalid_argument("column '" + **col + "' selected by name but the file has no header");
            }
        }
    }

    auto label_col = detail::resolve_column(options.label_column, header, width, "label");
    auto id_col = detail::resolve_column(options.id_column, header, width, "id");

    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < width; ++c) {
        if (c != label_col && c != id_col) {
            feature_cols.push_back(c);
        }
    }

    const std::size_t n = rows.size() - first;
    if (n < 2) {
        throw std::runtime_error("'" + path + "' has " + std::to_string(n) + " data rows; at least 2 are required");
    }

    Dataset<Float> data;
    data.points.resize(static_cast<Index>(n), static_cast<Index>(feature_cols.size()));
    std::vector<std::string> raw_labels;
    data.ids.reserve(n);

    auto column_name = [&](std::size_t c) {
        return has_header ? "'" + header[c] + "'" : std::to_string(c);
    };

    for (std::size_t r = 0; r < n; ++r) {
        const auto& cells = rows[first + r];
        const auto ln = line_numbers[first + r];
        if (cells.size() != width) {
            throw std::runtime_error("line " + std::to_string(ln) + " has " + std::to_string(cells.size()) +
                                     " cells, expected " + std::to_string(width));
        }
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            const auto& cell = cells[feature_cols[f]];
            auto value = detail::parse_real(cell);
            if (!value || !std::isfinite(*value)) {
                throw std::runtime_error("line " + std::to_string(ln) + ", column " + column_name(feature_cols[f]) +
                                         ": '" + cell + "' is not a finite real");
            }
            data.points(static_cast<Index>(r), static_cast<Index>(f)) = static_cast<Float>(*value);
        }
        if (label_col) {
            raw_labels.push_back(cells[*label_col]);
        }
        data.ids.push_back(id_col ? cells[*id_col] : std::to_string(r));
    }

    if (label_col) {
        data.labels = densify_labels(raw_labels);
    }
    check_dataset(data);
    return data;
}

/**
 * Format a real with 17 significant digits, which round-trips doubles exactly.
 */
inline std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/**
 * Write features as `x1..xD` plus a trailing `label` column when labels exist.
 */
template<typename Float>
void write_csv(const Dataset<Float>& data, std::ostream& out) {
    for (Index c = 0; c < data.dim(); ++c) {
        out << (c ? "," : "") << 'x' << (c + 1);
    }
    if (data.labels) {
        out << ",label";
    }
    out << '\n';
    for (Index r = 0; r < data.size(); ++r) {
        for (Index c = 0; c < data.dim(); ++c) {
            out << (c ? "," : "") << format_real(static_cast<double>(data.points(r, c)));
        }
        if (data.labels) {
            out << ',' << (*data.labels)[static_cast<std::size_t>(r)];
        }
        out << '\n';
    }
}

template<typename Float>
void write_csv(const Dataset<Float>& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    write_csv(data, out);
}

/**
 * Per-feature zero mean and unit variance. Constant features are only centered.
 */
template<typename Float>
Dataset<Float> standardize(Dataset<Float> data) {
    const auto n = static_cast<Float>(data.size());
    RowVector<Float> mean = data.points.colwise().mean();
    data.points.rowwise() -= mean;
    RowVector<Float> sd = (data.points.array().square().colwise().sum() / n).sqrt();
    for (Index c = 0; c < data.dim(); ++c) {
        if (sd(c) > 0) {
            data.points.col(c) /= sd(c);
        }
    }
    return data;
}

namespace detail {

inline Matrix<double> blob_centers(Index n_classes, Index dim, double separation, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Matrix<double> centers(n_classes, dim);
    if (n_classes <= dim) {
        Eigen::MatrixXd g(dim, dim);
        for (Index i = 0; i < g.size(); ++i) {
            g.data()[i] = normal(rng);
        }
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        Eigen::MatrixXd q = qr.householderQ();
        const double scale = separation / std::sqrt(2.0);
        for (Index c = 0; c < n_classes; ++c) {
            centers.row(c) = scale * q.col(c).transpose();
        }
    } else {
        Eigen::VectorXd u(dim);
        for (Index i = 0; i < dim; ++i) {
            u(i) = normal(rng);
        }
        u.normalize();
        for (Index c = 0; c < n_classes; ++c) {
            centers.row(c) = static_cast<double>(c) * separation * u.transpose();
        }
    }
    return centers;
}

}

/**
 * Class centers used by `make_blobs` for the same arguments, one per row.
 */
inline Matrix<double> blob_centers(Index n_classes, Index dim, double separation, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return detail::blob_centers(n_classes, dim, separation, rng);
}

/**
 * @brief Isotropic Gaussian clusters with unit variance.
 *
 * Class centers are mutually at distance >= `separation`: when `n_classes <= dim`
 * they sit on a random orthonormal frame scaled by `separation / sqrt(2)` (every
 * pair exactly `separation` apart), otherwise they are spaced along a random line.
 * Samples are ordered by class.
 */
template<typename Float = double>
Dataset<Float> make_blobs(Index n_per_class, Index n_classes, Index dim, Float separation, std::uint64_t seed) {
    if (n_per_class < 1 || n_classes < 1 || dim < 1) {
        throw std::invalid_argument("make_blobs: counts must be >= 1");
    }
    if (!(separation > 0)) {
        throw std::invalid_argument("make_blobs: separation must be positive");
    }

    std::mt19937_64 rng(seed);
    const Matrix<double> centers = detail::blob_centers(n_classes, dim, static_cast<double>(separation), rng);
    std::normal_distribution<double> normal;

    Dataset<Float> data;
    const Index n = n_per_class * n_classes;
    data.points.resize(n, dim);
    data.labels.emplace();
    data.labels->reserve(static_cast<std::size_t>(n));
    data.ids.reserve(static_cast<std::size_t>(n));
    for (Index c = 0; c < n_classes; ++c) {
        for (Index s = 0; s < n_per_class; ++s) {
            const Index r = c * n_per_class + s;
            for (Index j = 0; j < dim; ++j) {
                data.points(r, j) = static_cast<Float>(centers(c, j) + normal(rng));
            }
            data.labels->push_back(static_cast<int>(c));
            data.ids.push_back(std::to_string(r));
        }
    }
    return data;
}

/**
 * @brief Two interleaving half circles in 2-D.
 *
 * Class 0 lies on the upper unit half circle, class 1 on the shifted lower one;
 * `noise` is the standard deviation of the added Gaussian jitter.
 */
template<typename Float = double>
Dataset<Float> make_moons(Index n, Float noise, std::uint64_t seed) {
    if (n < 2) {
        throw std::invalid_argument("make_moons: n must be >= 2");
    }
    if (!(noise >= 0)) {
        throw std::invalid_argument("make_moons: noise must be non-negative");
    }
    const Index n_outer = (n + 1) / 2;
    const Index n_inner = n - n_outer;
    const double pi = std::acos(-1.0);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;

    Dataset<Float> data;
    data.points.resize(n, 2);
    data.labels.emplace();
    auto step = [&](Index i, Index count) {
        return count > 1 ? pi * static_cast<double>(i) / static_cast<double>(count - 1) : 0.0;
    };
    for (Index i = 0; i < n_outer; ++i) {
        const double t = step(i, n_outer);
        data.points(i, 0) = static_cast<Float>(std::cos(t));
        data.points(i, 1) = static_cast<Float>(std::sin(t));
        data.labels->push_back(0);
    }
    for (Index i = 0; i < n_inner; ++i) {
        const double t = step(i, n_inner);
        data.points(n_outer + i, 0) = static_cast<Float>(1.0 - std::cos(t));
        data.points(n_outer + i, 1) = static_cast<Float>(0.5 - std::sin(t));
        data.labels->push_back(1);
    }
    if (noise > 0) {
        for (Index i = 0; i < data.points.size(); ++i) {
            data.points.data()[i] += static_cast<Float>(static_cast<double>(noise) * normal(rng));
        }
    }
    for (Index i = 0; i < n; ++i) {
        data.ids.push_back(std::to_string(i));
    }
    return data;
}

}

#endif
