#include "core/report.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace driftlens::report {

namespace {

constexpr int kCellSize = 42;
constexpr int kMarginLeft = 120;
constexpr int kMarginTop = 60;

std::string color_for(double t) {
  // Light parchment to deep blue ramp.
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(247.0 + t * (33.0 - 247.0)));
  const int g = static_cast<int>(std::lround(247.0 + t * (68.0 - 247.0)));
  const int b = static_cast<int>(std::lround(240.0 + t * (120.0 - 240.0)));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

void write_heatmap_svg(const Matrix& values,
                       const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels,
                       const std::string& title, bool inverted,
                       std::ostream& out) {
  const auto rows = values.rows();
  const auto cols = values.cols();
  if (rows != static_cast<Eigen::Index>(row_labels.size()) ||
      cols != static_cast<Eigen::Index>(col_labels.size())) {
    raise(ErrorCode::size_mismatch, "heatmap: label counts must match matrix shape");
  }
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  const double span = hi - lo;

  const long width = kMarginLeft + cols * kCellSize + 20;
  const long height = kMarginTop + rows * kCellSize + 20;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"monospace\" font-size=\"11\">\n";
  out << "  <text x=\"" << kMarginLeft << "\" y=\"18\" font-size=\"14\">" << title
      << (inverted ? " (inverted colormap)" : "") << "</text>\n";

  for (Eigen::Index c = 0; c < cols; ++c) {
    const long x = kMarginLeft + c * kCellSize + kCellSize / 2;
    out << "  <text x=\"" << x << "\" y=\"" << kMarginTop - 8
        << "\" text-anchor=\"middle\">" << col_labels[static_cast<std::size_t>(c)]
        << "</text>\n";
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    const long y = kMarginTop + r * kCellSize + kCellSize / 2 + 4;
    out << "  <text x=\"" << kMarginLeft - 8 << "\" y=\"" << y
        << "\" text-anchor=\"end\">" << row_labels[static_cast<std::size_t>(r)]
        << "</text>\n";
    for (Eigen::Index c = 0; c < cols; ++c) {
      double t = span > 0.0 ? (values(r, c) - lo) / span : 0.5;
      if (inverted) t = 1.0 - t;
      const long x = kMarginLeft + c * kCellSize;
      const long cy = kMarginTop + r * kCellSize;
      char value_text[32];
      std::snprintf(value_text, sizeof(value_text), "%.3f", values(r, c));
      out << "  <rect x=\"" << x << "\" y=\"" << cy << "\" width=\"" << kCellSize
          << "\" height=\"" << kCellSize << "\" fill=\"" << color_for(t)
          << "\" stroke=\"#888\"/>\n";
      out << "  <text x=\"" << x + kCellSize / 2 << "\" y=\"" << cy + kCellSize / 2 + 4
          << "\" text-anchor=\"middle\" fill=\"" << (t > 0.6 ? "#ffffff" : "#222222")
          << "\">" << value_text << "</text>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace driftlens::report
