#include "landscape/export.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "landscape/error.hpp"

namespace lp {

std::string format_csv_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_curve_csv(const InterpolationCurve& curve, std::ostream& out) {
  out << "alpha,J_train";
  if (curve.j_valid) out << ",J_valid";
  if (curve.err_rate) out << ",err_rate";
  out << '\n';
  for (std::size_t i = 0; i < curve.alpha.size(); ++i) {
    out << format_csv_double(curve.alpha[i]) << ',' << format_csv_double(curve.j_train[i]);
    if (curve.j_valid) out << ',' << format_csv_double((*curve.j_valid)[i]);
    if (curve.err_rate) out << ',' << format_csv_double((*curve.err_rate)[i]);
    out << '\n';
  }
}

void write_trace_csv(const ProjectionTrace& trace, std::ostream& out) {
  const bool with_j = trace.objective.size() == trace.points.size();
  out << "step,alpha,alpha_hat,beta,theta_norm,residual_ratio" << (with_j ? ",J" : "") << '\n';
  for (std::size_t i = 0; i < trace.points.size(); ++i) {
    const auto& p = trace.points[i];
    out << p.step << ',' << format_csv_double(p.alpha) << ',' << format_csv_double(p.alpha_hat) << ','
        << format_csv_double(p.beta) << ',' << format_csv_double(p.norm) << ','
        << format_csv_double(p.residual_ratio);
    if (with_j) out << ',' << format_csv_double(trace.objective[i]);
    out << '\n';
  }
}

void write_surface_csv(const SurfaceGrid& grid, std::ostream& out) {
  out << grid.x_label << ',' << grid.y_label << ",J,provenance\n";
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    const std::string& prov = i < grid.provenance.size() ? grid.provenance[i] : std::string();
    for (std::size_t j = 0; j < grid.y.size(); ++j) {
      out << format_csv_double(grid.x[i]) << ',' << format_csv_double(grid.y[j]) << ','
          << format_csv_double(grid.at(i, j)) << ',' << prov << '\n';
    }
  }
}

std::string surface_json(const SurfaceGrid& grid) {
  using nlohmann::json;
  json rows = json::array();
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < grid.y.size(); ++j) row.push_back(grid.at(i, j));
    rows.push_back(std::move(row));
  }
  json overlay = json::array();
  for (const auto& p : grid.overlay) {
    overlay.push_back({{"step", p.step}, {"x", p.x}, {"y", p.y}, {"J", p.value}});
  }
  json curve = json::array();
  for (const auto& p : grid.reference_curve) curve.push_back({p[0], p[1]});
  json doc = {
      {"kind", grid.kind},         {"x_label", grid.x_label}, {"y_label", grid.y_label},
      {"x", grid.x},               {"y", grid.y},             {"values", std::move(rows)},
      {"provenance", grid.provenance}, {"overlay", std::move(overlay)}, {"reference_curve", std::move(curve)},
  };
  return doc.dump(1) + "\n";
}

void write_metrics_csv(const TrajectoryRecord& record, std::ostream& out) {
  out << "epoch,J_train,J_valid\n";
  for (const auto& m : record.metrics) {
    out << m.epoch << ',' << format_csv_double(m.train) << ',' << format_csv_double(m.valid) << '\n';
  }
}

void write_taylor_csv(std::span<const TaylorRow> rows, std::ostream& out) {
  out << "t,discrepancy,first_order_discrepancy,shrink_factor\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << format_csv_double(rows[i].t) << ',' << format_csv_double(rows[i].discrepancy) << ','
        << format_csv_double(rows[i].first_order_discrepancy) << ',';
    // Ratio against the previous row, meaningful when t halves between rows.
    if (i > 0 && rows[i].discrepancy > 0.0) {
      out << format_csv_double(rows[i - 1].discrepancy / rows[i].discrepancy);
    }
    out << '\n';
  }
}

void write_sweep_csv(std::span<const QuadraticSweepRow> rows, std::ostream& out) {
  out << "learning_rate,momentum,max_beta,max_residual_ratio,diverged\n";
  for (const auto& r : rows) {
    out << format_csv_double(r.setting.learning_rate) << ',' << format_csv_double(r.setting.momentum) << ','
        << format_csv_double(r.max_beta) << ',' << format_csv_double(r.max_residual_ratio) << ','
        << (r.diverged ? 1 : 0) << '\n';
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace lp
