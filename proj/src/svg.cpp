#include "cne/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cne::cli {

namespace {

std::string fixed(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", x);
    // Avoid "-0.000", which would make otherwise equal plots differ.
    if (std::string(buf) == "-0.000") {
        return "0.000";
    }
    return buf;
}

}

void emit_svg(const Matrix<double>& coords, const std::vector<int>& labels, std::ostream& out) {
    const Index n = coords.rows();
    if (n == 0 || coords.cols() == 0) {
        throw std::invalid_argument("cannot plot an empty embedding");
    }
    if (!labels.empty() && static_cast<Index>(labels.size()) != n) {
        throw std::invalid_argument("label count does not match the embedding");
    }
    if (!coords.allFinite()) {
        throw std::invalid_argument("cannot plot non-finite coordinates");
    }

    auto y_of = [&](Index i) { return coords.cols() > 1 ? coords(i, 1) : 0.0; };
    double xmin = coords(0, 0), xmax = xmin, ymin = y_of(0), ymax = ymin;
    for (Index i = 1; i < n; ++i) {
        xmin = std::min(xmin, coords(i, 0));
        xmax = std::max(xmax, coords(i, 0));
        ymin = std::min(ymin, y_of(i));
        ymax = std::max(ymax, y_of(i));
    }

    // Square data window around the bounding box, padded by 5% per side.
    double span = std::max(xmax - xmin, ymax - ymin);
    if (!(span > 0)) {
        span = 1;
    }
    const double window = span * 1.1;
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    const double scale = svg_canvas / window;

    const std::string size = fixed(svg_canvas);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
        << size << ' ' << size << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    for (Index i = 0; i < n; ++i) {
        const double px = 0.5 * svg_canvas + (coords(i, 0) - cx) * scale;
        const double py = 0.5 * svg_canvas - (y_of(i) - cy) * scale;
        const char* fill = svg_unlabeled;
        if (!labels.empty()) {
            const int l = labels[static_cast<std::size_t>(i)];
            fill = svg_palette[static_cast<std::size_t>(((l % 10) + 10) % 10)];
        }
        out << "<circle cx=\"" << fixed(px) << "\" cy=\"" << fixed(py) << "\" r=\"" << fixed(svg_radius) << "\" fill=\""
            << fill << "\"/>\n";
    }
    out << "</svg>\n";
}

void emit_svg(const Matrix<double>& coords, const std::vector<int>& labels, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    emit_svg(coords, labels, out);
    if (!out) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

}
