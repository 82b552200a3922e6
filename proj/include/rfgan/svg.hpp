#pragma once

#include <array>
#include <string>
#include <vector>

#include "rfgan/tensor.hpp"

namespace rfgan {

using Point2 = std::array<double, 2>;

// Flattens a [n,2] tensor into a point list.
template <class T>
std::vector<Point2> to_points(const Tensor<T>& t) {
    require(t.rank() == 2 && t.cols() == 2, "to_points: expected a [n,2] tensor");
    std::vector<Point2> out(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i)
        out[i] = {double(t.at(i, 0)), double(t.at(i, 1))};
    return out;
}

// Standalone scatter plot over a fixed [-3,3] x [-3,3] viewport: sample dots
// plus mode-mean markers. Byte output is deterministic for fixed input; an
// empty point list yields a valid plot with only the mean markers.
std::string scatter_svg(const std::vector<Point2>& points, const std::vector<Point2>& means);
void emit_scatter_svg(const std::vector<Point2>& points, const std::vector<Point2>& means,
                      const std::string& path);

} // namespace rfgan
