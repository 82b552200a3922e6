#include "rfgan/svg.hpp"

#include <cstdio>
#include <fstream>

#include "rfgan/common.hpp"

namespace rfgan {

namespace {

void append_num(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    out += buf;
}

void append_circle(std::string& out, double cx, double cy, const char* rest) {
    out += "<circle cx=\"";
    append_num(out, cx);
    out += "\" cy=\"";
    append_num(out, cy);
    out += "\" ";
    out += rest;
    out += "/>\n";
}

} // namespace

std::string scatter_svg(const std::vector<Point2>& points, const std::vector<Point2>& means) {
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" "
           "viewBox=\"-3 -3 6 6\">\n";
    out += "<rect x=\"-3\" y=\"-3\" width=\"6\" height=\"6\" fill=\"#ffffff\"/>\n";
    // flip y so the data's y axis points up
    out += "<g transform=\"scale(1,-1)\">\n";
    for (const Point2& p : points)
        append_circle(out, p[0], p[1], "r=\"0.025\" fill=\"#1f77b4\" fill-opacity=\"0.45\"");
    for (const Point2& m : means)
        append_circle(out, m[0], m[1],
                      "r=\"0.32\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"0.035\"");
    out += "</g>\n</svg>\n";
    return out;
}

void emit_scatter_svg(const std::vector<Point2>& points, const std::vector<Point2>& means,
                      const std::string& path) {
    const std::string svg = scatter_svg(points, means);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    require(bool(os), "scatter_svg: cannot open '" + path + "'");
    os.write(svg.data(), std::streamsize(svg.size()));
    require(bool(os), "scatter_svg: write failed for '" + path + "'");
}

} // namespace rfgan
