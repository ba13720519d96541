#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>

#include "landscape/dynamics.hpp"
#include "landscape/probe.hpp"
#include "landscape/surface.hpp"
#include "landscape/train.hpp"

namespace lp {

/// 17 significant digits ("%.17g"), lossless for 64-bit reals.
std::string format_csv_double(double v);

/// alpha,J_train[,J_valid][,err_rate]
void write_curve_csv(const InterpolationCurve& curve, std::ostream& out);
/// step,alpha,alpha_hat,beta,theta_norm,residual_ratio[,J]
void write_trace_csv(const ProjectionTrace& trace, std::ostream& out);
/// Long form: <x_label>,<y_label>,J,provenance
void write_surface_csv(const SurfaceGrid& grid, std::ostream& out);
/// {"kind", "x_label", "y_label", "x", "y", "values" (rows by x), "provenance",
///  "overlay", "reference_curve"}
std::string surface_json(const SurfaceGrid& grid);
/// epoch,J_train,J_valid
void write_metrics_csv(const TrajectoryRecord& record, std::ostream& out);
/// t,discrepancy,first_order_discrepancy,shrink_factor
void write_taylor_csv(std::span<const TaylorRow> rows, std::ostream& out);
/// learning_rate,momentum,max_beta,max_residual_ratio,diverged
void write_sweep_csv(std::span<const QuadraticSweepRow> rows, std::ostream& out);

/// Writes `text` to `path`, replacing any existing file.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace lp
