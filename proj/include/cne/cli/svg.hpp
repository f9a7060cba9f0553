#ifndef CNE_CLI_SVG_HPP
#define CNE_CLI_SVG_HPP

#include "../types.hpp"

#include <array>
#include <ostream>
#include <string>
#include <vector>

/**
 * @file svg.hpp
 *
 * @brief Deterministic scatter plots of 2-dimensional embeddings.
 */

namespace cne::cli {

/// Fill colors cycled by label.
inline constexpr std::array<const char*, 10> svg_palette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
};

/// Fill color of every point when no labels are given.
inline constexpr const char* svg_unlabeled = "#808080";

inline constexpr double svg_canvas = 600;
inline constexpr double svg_radius = 2;

/**
 * @brief Write one circle per sample.
 *
 * The first two embedding coordinates are plotted (the second is taken as 0
 * for 1-dimensional embeddings). Both axes share one scale so that distances
 * are not distorted; the data's bounding box plus a 5% margin on each side is
 * centered in a square canvas. Coordinates are printed with fixed precision, so
 * equal inputs give byte-identical files.
 *
 * @param labels Empty, or one label per row of `coords`.
 * @throws std::invalid_argument on an empty embedding or mismatched labels.
 */
void emit_svg(const Matrix<double>& coords, const std::vector<int>& labels, std::ostream& out);

/**
 * @throws std::runtime_error if `path` cannot be written.
 */
void emit_svg(const Matrix<double>& coords, const std::vector<int>& labels, const std::string& path);

}

#endif
