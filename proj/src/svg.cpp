#include "qp2loc/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace qp2loc {

namespace {
std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}
}  // namespace

SvgCanvas::SvgCanvas(double width, double height) : width_(width), height_(height) {}

void SvgCanvas::rect(double x, double y, double w, double h, const std::string& fill) {
  body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
           num(h) + "\" fill=\"" + fill + "\"/>\n";
}

void SvgCanvas::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double width) {
  body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
           num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& pts,
                         const std::string& stroke, double width) {
  body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) +
           "\" points=\"";
  for (const auto& [x, y] : pts) body_ += num(x) + "," + num(y) + " ";
  body_ += "\"/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& s, int font_size) {
  body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" +
           std::to_string(font_size) + "\" font-family=\"monospace\">" + s + "</text>\n";
}

std::string SvgCanvas::str() const {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" "
         "width=\"" +
         num(width_) + "\" height=\"" + num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " +
         num(height_) + "\">\n" + body_ + "</svg>\n";
}

void SvgCanvas::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << str();
}

std::string gray_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int v = static_cast<int>(t * 255.0 + 0.5);
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", v, v, v);
  return buf;
}

std::string flag_color(bool good) { return good ? "#2a8a2a" : "#b03030"; }

void svg_heatmap(const std::string& path, const std::vector<std::vector<double>>& values,
                 const std::string& title) {
  if (values.empty() || values.front().empty()) throw std::invalid_argument("svg_heatmap: empty grid");
  const std::size_t rows = values.size(), cols = values.front().size();
  const double cell = std::max(2.0, 640.0 / static_cast<double>(std::max(rows, cols)));
  const double margin = 24.0;
  SvgCanvas svg(margin * 2 + cell * static_cast<double>(cols),
                margin * 2 + cell * static_cast<double>(rows));
  double lo = values[0][0], hi = values[0][0];
  for (const auto& row : values)
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  const double span = (hi > lo) ? hi - lo : 1.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      svg.rect(margin + cell * static_cast<double>(j), margin + cell * static_cast<double>(i), cell,
               cell, gray_color((values[i][j] - lo) / span));
  svg.text(margin, margin - 8.0, title);
  svg.write(path);
}

}  // namespace qp2loc
