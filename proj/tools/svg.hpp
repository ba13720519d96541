#pragma once

#include <string>
#include <vector>

#include "landscape/surface.hpp"

namespace lp::cli::svg {

/// Placement of a plot inside a document, in pixels.
struct Frame {
  double x = 0.0;
  double y = 0.0;
  double width = 640.0;
  double height = 420.0;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
  bool line = true;
  bool markers = false;
};

struct HLine {
  std::string label;
  double y = 0.0;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<HLine> hlines;
};

/// A <g> element drawn inside `frame`.
std::string line_plot(const std::vector<Series>& series, const PlotOptions& options, const Frame& frame = {});

struct HeatmapOptions {
  std::string title;
};

/// Cells colored on a five-stop ramp from dark purple (low) to yellow (high),
/// with a color legend, trajectory markers (class "overlay") and the reference
/// curve (class "manifold").
std::string heatmap(const SurfaceGrid& grid, const HeatmapOptions& options, const Frame& frame = {});

/// Ramp color for t in [0, 1] as "#rrggbb".
std::string ramp_color(double t);

/// Wraps plot fragments in a standalone SVG document.
std::string document(const std::vector<std::string>& parts, double width, double height);

/// Arranges equally sized frames in a grid with `columns` columns.
std::vector<Frame> panel_frames(std::size_t count, std::size_t columns, double cell_width, double cell_height);

}  // namespace lp::cli::svg
