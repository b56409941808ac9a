#pragma once

#include <string>
#include <vector>

namespace qp2loc {

// Minimal SVG writer (rect/line/polyline/text primitives only), so plots have
// no runtime dependencies.
class SvgCanvas {
 public:
  SvgCanvas(double width, double height);

  void rect(double x, double y, double w, double h, const std::string& fill);
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0);
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double width = 1.0);
  void text(double x, double y, const std::string& s, int font_size = 12);

  std::string str() const;
  void write(const std::string& path) const;

 private:
  double width_, height_;
  std::string body_;
};

// Grayscale hex color for t in [0,1] (0 = black, 1 = white).
std::string gray_color(double t);
// Two-color good/bad color.
std::string flag_color(bool good);

// values[i][j] drawn as a cell grid; cells map t through gray_color.
void svg_heatmap(const std::string& path, const std::vector<std::vector<double>>& values,
                 const std::string& title);

}  // namespace qp2loc
