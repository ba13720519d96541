#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

#include "config.hpp"
#include "landscape/dynamics.hpp"
#include "landscape/export.hpp"
#include "landscape/parallel.hpp"
#include "landscape/probe.hpp"
#include "landscape/surface.hpp"
#include "landscape/train.hpp"
#include "svg.hpp"

#ifndef LANDSCAPE_VERSION
#define LANDSCAPE_VERSION "0.0.0"
#endif

namespace lp::cli {
namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

std::size_t resolve_threads(std::size_t requested) {
  return requested > 0 ? requested : default_thread_count();
}

fs::path prepare_dir(const fs::path& dir) {
  fs::create_directories(dir);
  return dir;
}

template <class Writer>
void write_with(const fs::path& path, Writer&& writer) {
  std::ostringstream s;
  writer(s);
  write_text_file(path, s.str());
}

std::string fmt(double v) { return format_csv_double(v); }

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(what + ": cannot parse '" + item + "'");
    }
  }
  if (values.empty()) throw UsageError(what + ": empty list");
  return values;
}

std::vector<double> column(const std::vector<ProjectionPoint>& pts, double ProjectionPoint::*field,
                           double scale = 1.0) {
  std::vector<double> v;
  v.reserve(pts.size());
  for (const auto& p : pts) v.push_back(p.*field * scale);
  return v;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::string out;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const ExperimentConfig cfg = load_config(a.config);
  const fs::path dir = prepare_dir(a.out.empty() ? cfg.output_dir : fs::path(a.out));
  const Splits data = load_data(cfg.data);
  const NetworkSpec spec = cfg.spec();
  if (data.train.examples.inputs.cols != spec.input_dim()) {
    throw ConfigError("model.layers", "input width " + std::to_string(spec.input_dim()) +
                                          " does not match the data width " +
                                          std::to_string(data.train.examples.inputs.cols));
  }
  if (data.train.examples.has_labels() && spec.output_dim() < data.train.classes) {
    throw ConfigError("model.layers", "fewer outputs than classes");
  }
  const ParamVector initial = init_params(spec, cfg.model.init_scale, cfg.model.init_seed);
  const Dataset* valid = data.valid.empty() ? nullptr : &data.valid;
  const TrajectoryRecord record = sgd_train(spec, initial, data.train, valid, cfg.train);

  save_trajectory(record, dir / "trajectory.lptraj");
  write_with(dir / "learning_curve.csv", [&](std::ostream& s) { write_metrics_csv(record, s); });

  std::ostringstream m;
  m << "tool landscape-probe " << LANDSCAPE_VERSION << "\n";
  m << "trajectory_format 1\n";
  m << "config " << fs::path(a.config).filename().string() << "\n";
  m << "spec " << spec.to_string() << "\n";
  char digest[32];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(spec.digest()));
  m << "digest " << digest << "\n";
  m << "param_count " << spec.param_count() << "\n";
  m << "init_seed " << cfg.model.init_seed << "\n";
  m << "train_seed " << cfg.train.seed << "\n";
  m << "data_seed " << cfg.data.seed << "\n";
  m << "split_seed " << cfg.data.split_seed << "\n";
  m << "train_size " << data.train.size() << "\n";
  m << "valid_size " << data.valid.size() << "\n";
  m << "test_size " << data.test.size() << "\n";
  const auto& last = record.metrics.back();
  const auto& sol = record.snapshots[record.solution_index];
  m << "epochs_run " << last.epoch << "\n";
  m << "solution_epoch " << sol.epoch << "\n";
  m << "solution_train " << fmt(record.metrics_at(sol.epoch).train) << "\n";
  m << "solution_valid " << fmt(record.metrics_at(sol.epoch).valid) << "\n";
  std::optional<double> test_error;
  if (!data.test.empty() && data.test.examples.has_labels()) {
    const LossTotal t = loss_total(spec, record.solution(), data.test);
    test_error = static_cast<double>(t.errors) / static_cast<double>(t.count);
    m << "test_loss " << fmt(t.mean) << "\n";
    m << "test_error " << fmt(*test_error) << "\n";
  }
  write_text_file(dir / "manifest.txt", m.str());

  std::vector<double> ep, tr, va;
  for (const auto& r : record.metrics) {
    ep.push_back(static_cast<double>(r.epoch));
    tr.push_back(r.train);
    va.push_back(r.valid);
  }
  std::vector<svg::Series> series = {{"J_train", ep, tr}};
  if (valid) series.push_back({"J_valid", ep, va});
  const svg::Frame frame;
  write_text_file(dir / "learning_curve.svg",
                  svg::document({svg::line_plot(series, {"learning curve", "epoch", "J", false, {}}, frame)},
                                frame.width, frame.height));

  out << "trained " << last.epoch << " epochs, solution at epoch " << sol.epoch << " (J_train "
      << fmt(record.metrics_at(sol.epoch).train) << ")\n";
  if (test_error) out << "test error " << fmt(*test_error) << "\n";
  out << "wrote " << (dir / "trajectory.lptraj").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- interp

struct InterpArgs {
  std::string config;
  std::vector<std::string> trajectories;
  std::string mode;
  std::string grid;
  std::optional<double> alpha_min;
  std::optional<double> alpha_max;
  std::optional<std::size_t> points;
  bool log_y = false;
  std::string out;
  std::size_t threads = 0;
};

int cmd_interp(const InterpArgs& a, std::ostream& out) {
  const ExperimentConfig cfg = load_config(a.config);
  const fs::path dir = prepare_dir(a.out.empty() ? cfg.output_dir : fs::path(a.out));
  const std::string mode = a.mode.empty() ? cfg.probe.mode : a.mode;
  if (mode != "init-final" && mode != "two-solutions" && mode != "random-point") {
    throw UsageError("unknown mode '" + mode + "'");
  }
  std::vector<std::string> paths = a.trajectories;
  if (paths.empty()) paths.push_back((cfg.output_dir / "trajectory.lptraj").string());
  const std::size_t needed = mode == "two-solutions" ? 2 : 1;
  if (paths.size() != needed) {
    throw UsageError("mode " + mode + " needs exactly " + std::to_string(needed) + " trajectory path" +
                     (needed == 1 ? "" : "s") + ", got " + std::to_string(paths.size()));
  }

  std::string grid_name = a.grid.empty() ? cfg.probe.grid : a.grid;
  std::optional<double> lo = a.alpha_min ? a.alpha_min : cfg.probe.alpha_min;
  std::optional<double> hi = a.alpha_max ? a.alpha_max : cfg.probe.alpha_max;
  const std::size_t points = a.points.value_or(cfg.probe.points);
  std::vector<double> grid;
  if (a.alpha_min || a.alpha_max || grid_name == "custom") {
    if (!lo || !hi) throw UsageError("a custom grid needs --alpha-min and --alpha-max");
    if (!(*hi > *lo) || points < 2) throw UsageError("custom grid needs alpha-max > alpha-min and at least 2 points");
    grid = linspace(*lo, *hi, points);
    grid_name = "custom";
  } else {
    try {
      grid = named_grid(grid_name);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  const NetworkSpec spec = cfg.spec();
  std::vector<TrajectoryRecord> records;
  for (const auto& p : paths) records.push_back(load_trajectory(p, spec));
  const Splits data = load_data(cfg.data);
  const Dataset* valid = data.valid.empty() ? nullptr : &data.valid;
  const std::size_t threads = resolve_threads(a.threads);

  InterpolationCurve curve;
  if (mode == "init-final") {
    curve = interp_curve(spec, data.train, valid, records[0].initial, records[0].solution(), grid, threads);
  } else if (mode == "two-solutions") {
    curve = two_solution_curve(spec, data.train, valid, records[0], records[1], grid, threads);
  } else {
    curve = random_point_curve(spec, data.train, valid, records[0], cfg.probe.norm_scale, cfg.probe.seed, grid,
                               threads);
  }

  const std::string stem = "interp_" + mode + "_" + grid_name;
  write_with(dir / (stem + ".csv"), [&](std::ostream& s) { write_curve_csv(curve, s); });

  std::vector<svg::Series> series = {{"J_train", curve.alpha, curve.j_train}};
  if (curve.j_valid) series.push_back({"J_valid", curve.alpha, *curve.j_valid});
  const svg::Frame frame;
  write_text_file(dir / (stem + ".svg"),
                  svg::document({svg::line_plot(series, {mode + " (" + grid_name + ")", "alpha", "J", a.log_y, {}},
                                                frame)},
                                frame.width, frame.height));

  const BumpReport bumps = bump_report(curve);
  std::ostringstream b;
  b << "points " << curve.alpha.size() << "\n";
  b << "J_start " << fmt(curve.j_train.front()) << "\n";
  b << "J_end " << fmt(curve.j_train.back()) << "\n";
  b << "tolerance " << fmt(bumps.tolerance) << "\n";
  b << "violations " << bumps.violations << "\n";
  b << "upward_mass " << fmt(bumps.upward_mass) << "\n";
  b << "max_violation " << fmt(bumps.max_violation) << "\n";
  b << "interior_minima " << bumps.minima.size() << "\n";
  for (const auto& bar : bumps.barriers) {
    b << "barrier alpha=" << fmt(bar.alpha) << " value=" << fmt(bar.value) << " height=" << fmt(bar.height) << "\n";
  }
  write_text_file(dir / (stem + "_bumps.txt"), b.str());

  out << stem << ": " << curve.alpha.size() << " points, " << bumps.violations << " upward steps, "
      << bumps.minima.size() << " interior minima, " << bumps.barriers.size() << " barriers\n";
  return kExitOk;
}

// ---------------------------------------------------------------- project

struct ProjectArgs {
  std::string trajectory;
  std::string out;
};

int cmd_project(const ProjectArgs& a, std::ostream& out) {
  const TrajectoryRecord record = load_trajectory(a.trajectory);
  const ProjectionTrace trace = projection_trace(record);
  const fs::path dir = prepare_dir(a.out.empty() ? fs::path(a.trajectory).parent_path() : fs::path(a.out));
  write_with(dir / "projection.csv", [&](std::ostream& s) { write_trace_csv(trace, s); });

  const auto frames = svg::panel_frames(2, 2, 560, 420);
  svg::Series path{"trajectory", column(trace.points, &ProjectionPoint::alpha),
                   column(trace.points, &ProjectionPoint::beta)};
  path.markers = true;
  std::vector<double> steps;
  for (const auto& p : trace.points) steps.push_back(static_cast<double>(p.step));
  svg::Series ratio{"beta / |theta|", steps, column(trace.points, &ProjectionPoint::residual_ratio)};
  ratio.markers = true;
  write_text_file(
      dir / "projection.svg",
      svg::document({svg::line_plot({path}, {"projection onto the linear path", "alpha", "beta", false, {}}, frames[0]),
                     svg::line_plot({ratio},
                                    {"residual ratio", "epoch", "beta / |theta|", false,
                                     {{"max residual ratio " + fmt(trace.max_residual_ratio), trace.max_residual_ratio}}},
                                    frames[1])},
                    1120, 420));

  std::ostringstream s;
  s << "length " << fmt(trace.length) << "\n";
  s << "max_beta " << fmt(trace.max_beta) << "\n";
  s << "max_residual_ratio " << fmt(trace.max_residual_ratio) << "\n";
  write_text_file(dir / "projection_summary.txt", s.str());
  out << "max residual ratio " << fmt(trace.max_residual_ratio) << " (beta / |theta|, Euclidean norms)\n";
  return kExitOk;
}

// ---------------------------------------------------------------- surface

struct SurfaceArgs {
  std::string config;
  std::string trajectory;
  std::string kind;
  std::optional<std::size_t> resolution;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t threads = 0;
};

int cmd_surface(const SurfaceArgs& a, std::ostream& out) {
  const ExperimentConfig cfg = load_config(a.config);
  const fs::path dir = prepare_dir(a.out.empty() ? cfg.output_dir : fs::path(a.out));
  const std::string kind = a.kind.empty() ? cfg.surface.kind : a.kind;
  if (kind != "trajectory" && kind != "random-plane" && kind != "alpha-random") {
    throw UsageError("unknown surface kind '" + kind + "'");
  }
  const fs::path path = a.trajectory.empty() ? cfg.output_dir / "trajectory.lptraj" : fs::path(a.trajectory);
  const NetworkSpec spec = cfg.spec();
  const TrajectoryRecord record = load_trajectory(path, spec);
  const Splits data = load_data(cfg.data);
  const std::size_t threads = resolve_threads(a.threads);
  const std::uint64_t seed = a.seed.value_or(cfg.surface.seed);

  SurfaceGrid grid;
  if (kind == "trajectory") {
    const std::size_t na = a.resolution.value_or(cfg.surface.alpha_points);
    const std::size_t nb = a.resolution.value_or(cfg.surface.beta_points);
    const ProjectionTrace trace = projection_trace(record);
    const auto alpha = linspace(0.0, 1.0, na);
    std::vector<double> beta;
    if (trace.max_beta > 0.0) beta = linspace(0.0, 1.2 * trace.max_beta, nb);
    grid = surface_from_trajectory(spec, data.train, record, alpha, beta, threads);
  } else if (kind == "random-plane") {
    const double norm_f = norm(record.solution());
    const double extent = cfg.surface.extent_scale * (norm_f > 0.0 ? norm_f : 1.0);
    grid = random_plane_control(spec, data.train, record.solution(), extent,
                                a.resolution.value_or(cfg.surface.resolution), seed, &record, threads);
  } else {
    const std::size_t res = a.resolution.value_or(cfg.surface.resolution);
    const auto alpha = linspace(0.0, 1.0, res);
    grid = alpha_random_control(spec, data.train, record, res, seed, alpha, threads);
  }

  const std::string stem = "surface_" + kind;
  write_with(dir / (stem + ".csv"), [&](std::ostream& s) { write_surface_csv(grid, s); });
  write_text_file(dir / (stem + ".json"), surface_json(grid));
  const svg::Frame frame{0, 0, 640, 520};
  write_text_file(dir / (stem + ".svg"),
                  svg::document({svg::heatmap(grid, {kind + " surface"}, frame)}, frame.width, frame.height));
  out << stem << ": " << grid.x.size() << " x " << grid.y.size() << " cells, coefficient of variation "
      << fmt(coefficient_of_variation(grid)) << ", " << grid.overlay.size() << " trajectory markers\n";
  return kExitOk;
}

// ---------------------------------------------------------------- control

struct ControlArgs {
  std::string kind;
  std::string dims = "1,10,100,1000";
  std::size_t steps = 0;
  std::size_t solution_step = 0;
  std::uint64_t seed = 0;
  std::size_t dim = 10000;
  std::string spectrum = "log-uniform";
  double lo = 1e-2;
  double hi = 1.0;
  std::string settings = "0.1:0,0.5:0,1:0,1.9:0,2.1:0,0.1:0.5,0.1:0.9,1:0.9";
  double extent = 2.5;
  std::size_t resolution = 101;
  std::string ts = "0.1,0.05,0.025,0.0125,0.00625";
  std::string point = "0.5,0.5";
  std::string config;
  std::string out = "out";
  std::size_t threads = 0;
};

int control_walk(const ControlArgs& a, const fs::path& dir, std::ostream& out) {
  const auto dims = parse_list(a.dims, "--dims");
  const std::size_t steps = a.steps > 0 ? a.steps : 1000;
  const std::size_t sol = a.solution_step > 0 ? a.solution_step : steps * 9 / 10;
  std::vector<ProjectionTrace> traces(dims.size());
  std::vector<WalkConfig> configs;
  for (double d : dims) {
    if (!(d >= 1.0) || d != std::floor(d)) throw UsageError("--dims entries must be positive integers");
    WalkConfig c{static_cast<std::size_t>(d), steps, sol, a.seed};
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    configs.push_back(c);
  }
  parallel_for(configs.size(), resolve_threads(a.threads),
               [&](std::size_t i) { traces[i] = random_walk_trace(configs[i]); });

  const std::size_t columns = traces.size() >= 2 ? 2 : 1;
  const auto frames = svg::panel_frames(traces.size(), columns, 480, 380);
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    const std::string name = "walk_d" + std::to_string(configs[i].dim);
    write_with(dir / (name + ".csv"), [&](std::ostream& s) { write_trace_csv(t, s); });
    const double inv = t.length > 0.0 ? 1.0 / t.length : 0.0;
    svg::Series s{"d=" + std::to_string(configs[i].dim), column(t.points, &ProjectionPoint::alpha_hat),
                  column(t.points, &ProjectionPoint::beta, inv)};
    parts.push_back(svg::line_plot({s}, {"random walk, d = " + std::to_string(configs[i].dim), "alpha / |theta_f|",
                                         "beta / |theta_f|", false, {}},
                                   frames[i]));
    out << name << ": max beta/|theta_f| " << fmt(t.max_beta * inv) << "\n";
  }
  const double rows = static_cast<double>((traces.size() + columns - 1) / columns);
  write_text_file(dir / "walk.svg", svg::document(parts, 480.0 * columns, 380.0 * rows));
  return kExitOk;
}

int control_quadratic(const ControlArgs& a, const fs::path& dir, std::ostream& out) {
  Spectrum spectrum;
  if (a.spectrum == "isotropic") {
    spectrum.kind = Spectrum::Kind::Isotropic;
  } else if (a.spectrum == "log-uniform") {
    spectrum.kind = Spectrum::Kind::LogUniform;
  } else {
    throw UsageError("--spectrum must be isotropic or log-uniform");
  }
  spectrum.lo = a.lo;
  spectrum.hi = a.hi;
  if (!(a.lo > 0.0 && a.hi >= a.lo)) throw UsageError("spectrum needs 0 < lo <= hi");
  if (a.dim < 1) throw UsageError("--dim must be >= 1");
  std::vector<QuadraticSetting> settings;
  std::stringstream ss(a.settings);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("--settings entries are learning_rate:momentum");
    const auto lr = parse_list(item.substr(0, colon), "--settings");
    const auto mu = parse_list(item.substr(colon + 1), "--settings");
    settings.push_back({lr.front(), mu.front()});
  }
  const std::size_t steps = a.steps > 0 ? a.steps : 200;
  const std::size_t threads = resolve_threads(a.threads);
  const auto rows = quadratic_sweep(a.dim, spectrum, settings, steps, a.seed, threads);
  write_with(dir / "quadratic_sweep.csv", [&](std::ostream& s) { write_sweep_csv(rows, s); });

  std::vector<ProjectionTrace> traces(settings.size());
  parallel_for(settings.size(), threads, [&](std::size_t i) {
    traces[i] = quadratic_descent_trace(a.dim, spectrum, settings[i].learning_rate, settings[i].momentum, steps, a.seed);
  });
  std::vector<svg::Series> series;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    char name[64];
    std::snprintf(name, sizeof name, "lr=%g mu=%g%s", settings[i].learning_rate, settings[i].momentum,
                  t.diverged ? " (diverged)" : "");
    const double inv = t.length > 0.0 ? 1.0 / t.length : 0.0;
    series.push_back({name, column(t.points, &ProjectionPoint::alpha_hat), column(t.points, &ProjectionPoint::beta, inv)});
    if (t.diverged) series.back().x.clear();
  }
  const svg::Frame frame{0, 0, 720, 480};
  write_text_file(dir / "quadratic.svg",
                  svg::document({svg::line_plot(series, {"gradient descent on a quadratic", "alpha / |theta_0|",
                                                         "beta / |theta_0|", false, {}},
                                                frame)},
                                frame.width, frame.height));
  for (const auto& r : rows) {
    out << "lr " << fmt(r.setting.learning_rate) << " momentum " << fmt(r.setting.momentum) << ": max residual ratio "
        << fmt(r.max_residual_ratio) << (r.diverged ? " (diverged)" : "") << "\n";
  }
  return kExitOk;
}

int control_heatmap(const ControlArgs& a, const fs::path& dir, std::ostream& out) {
  SurfaceGrid grid;
  try {
    grid = heatmap_grid(a.extent, a.resolution);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  write_with(dir / "heatmap.csv", [&](std::ostream& s) { write_surface_csv(grid, s); });
  write_text_file(dir / "heatmap.json", surface_json(grid));
  const svg::Frame frame{0, 0, 600, 520};
  write_text_file(dir / "heatmap.svg",
                  svg::document({svg::heatmap(grid, {"(1 - w1 w2)^2"}, frame)}, frame.width, frame.height));
  out << "heatmap: " << grid.x.size() << " x " << grid.y.size() << " cells, manifold w2 = 1/w1 with "
      << grid.reference_curve.size() << " samples\n";
  return kExitOk;
}

int control_taylor(const ControlArgs& a, const fs::path& dir, std::ostream& out) {
  const auto ts = parse_list(a.ts, "--ts");
  std::vector<TaylorRow> rows;
  if (!a.config.empty()) {
    const ExperimentConfig cfg = load_config(a.config);
    const Splits data = load_data(cfg.data);
    const NetworkSpec spec = cfg.spec();
    const ParamVector params = init_params(spec, cfg.model.init_scale, cfg.model.init_seed);
    rows = taylor_check(spec, params, data.train, ts);
  } else {
    const auto p = parse_list(a.point, "--point");
    if (p.size() != 2) throw UsageError("--point expects w1,w2");
    const std::size_t dims[] = {1, 1, 1};
    const NetworkSpec spec = build_deep_linear_chain(dims);
    const Dataset data = gen_scalar_regression();
    ParamVector params = ParamVector::zeros(spec.manifest());
    params[0] = p[0];
    params[1] = p[1];
    rows = taylor_check(spec, params, data, ts);
  }
  write_with(dir / "taylor.csv", [&](std::ostream& s) { write_taylor_csv(rows, s); });
  std::vector<double> t, d2, d1;
  for (const auto& r : rows) {
    t.push_back(r.t);
    d2.push_back(r.discrepancy);
    d1.push_back(r.first_order_discrepancy);
  }
  svg::Series second{"second order", t, d2};
  second.markers = true;
  svg::Series first{"first order", t, d1};
  first.markers = true;
  const svg::Frame frame;
  write_text_file(dir / "taylor.svg",
                  svg::document({svg::line_plot({second, first}, {"Taylor expansion of gradient flow", "t",
                                                                  "discrepancy", true, {}},
                                                frame)},
                                frame.width, frame.height));
  out << "t discrepancy first_order_discrepancy\n";
  for (const auto& r : rows) out << fmt(r.t) << " " << fmt(r.discrepancy) << " " << fmt(r.first_order_discrepancy) << "\n";
  return kExitOk;
}

int cmd_control(const ControlArgs& a, std::ostream& out) {
  const fs::path dir = prepare_dir(a.out);
  if (a.kind == "walk") return control_walk(a, dir, out);
  if (a.kind == "quadratic") return control_quadratic(a, dir, out);
  if (a.kind == "heatmap") return control_heatmap(a, dir, out);
  if (a.kind == "taylor") return control_taylor(a, dir, out);
  throw UsageError("unknown control kind '" + a.kind + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear-path probes of neural network loss landscapes", "landscape-probe"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LANDSCAPE_VERSION);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a network and record its trajectory");
  train_cmd->add_option("-c,--config", train.config, "Experiment config file")->required();
  train_cmd->add_option("-o,--out", train.out, "Output directory (overrides [output] dir)");

  InterpArgs interp;
  auto* interp_cmd = app.add_subcommand("interp", "Objective along a straight line in parameter space");
  interp_cmd->add_option("-c,--config", interp.config, "Experiment config file")->required();
  interp_cmd->add_option("-t,--trajectory", interp.trajectories, "Trajectory file(s)");
  interp_cmd->add_option("--mode", interp.mode, "init-final, two-solutions or random-point");
  interp_cmd->add_option("--grid", interp.grid, "coarse-50, fine-200, zoom-start-200 or zoom-end-200");
  interp_cmd->add_option("--alpha-min", interp.alpha_min, "Custom grid start");
  interp_cmd->add_option("--alpha-max", interp.alpha_max, "Custom grid end");
  interp_cmd->add_option("--points", interp.points, "Custom grid size");
  interp_cmd->add_flag("--log-y", interp.log_y, "Logarithmic y axis");
  interp_cmd->add_option("-o,--out", interp.out, "Output directory");
  interp_cmd->add_option("--threads", interp.threads, "Worker threads (default: LP_THREADS or all cores)");

  ProjectArgs project;
  auto* project_cmd = app.add_subcommand("project", "Project a trajectory onto its initial-to-solution line");
  project_cmd->add_option("-t,--trajectory", project.trajectory, "Trajectory file")->required();
  project_cmd->add_option("-o,--out", project.out, "Output directory (default: next to the trajectory)");

  SurfaceArgs surface;
  auto* surface_cmd = app.add_subcommand("surface", "Sample the cost over a two-dimensional section");
  surface_cmd->add_option("-c,--config", surface.config, "Experiment config file")->required();
  surface_cmd->add_option("-t,--trajectory", surface.trajectory, "Trajectory file");
  surface_cmd->add_option("--kind", surface.kind, "trajectory, random-plane or alpha-random");
  surface_cmd->add_option("--resolution", surface.resolution, "Points per axis");
  surface_cmd->add_option("--seed", surface.seed, "Direction seed");
  surface_cmd->add_option("-o,--out", surface.out, "Output directory");
  surface_cmd->add_option("--threads", surface.threads, "Worker threads (default: LP_THREADS or all cores)");

  ControlArgs control;
  auto* control_cmd = app.add_subcommand("control", "Synthetic control experiments");
  control_cmd->add_option("--kind", control.kind, "walk, quadratic, heatmap or taylor")->required();
  control_cmd->add_option("--dims", control.dims, "walk: comma-separated dimensions");
  control_cmd->add_option("--steps", control.steps, "walk/quadratic: number of steps");
  control_cmd->add_option("--solution-step", control.solution_step, "walk: step treated as the solution");
  control_cmd->add_option("--seed", control.seed, "Random seed");
  control_cmd->add_option("--dim", control.dim, "quadratic: dimension");
  control_cmd->add_option("--spectrum", control.spectrum, "quadratic: isotropic or log-uniform");
  control_cmd->add_option("--lo", control.lo, "quadratic: smallest eigenvalue");
  control_cmd->add_option("--hi", control.hi, "quadratic: largest eigenvalue");
  control_cmd->add_option("--settings", control.settings, "quadratic: lr:momentum pairs, comma-separated");
  control_cmd->add_option("--extent", control.extent, "heatmap: half-width of the square");
  control_cmd->add_option("--resolution", control.resolution, "heatmap: points per axis");
  control_cmd->add_option("--ts", control.ts, "taylor: comma-separated times");
  control_cmd->add_option("--point", control.point, "taylor: w1,w2 of the scalar model");
  control_cmd->add_option("-c,--config", control.config, "taylor: use the configured network at initialization");
  control_cmd->add_option("-o,--out", control.out, "Output directory");
  control_cmd->add_option("--threads", control.threads, "Worker threads (default: LP_THREADS or all cores)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train, out);
    if (*interp_cmd) return cmd_interp(interp, out);
    if (*project_cmd) return cmd_project(project, out);
    if (*surface_cmd) return cmd_surface(surface, out);
    if (*control_cmd) return cmd_control(control, out);
  } catch (const DivergedError& e) {
    err << "error: training diverged at epoch " << e.epoch() << ": " << e.what() << "\n";
    return kExitDiverged;
  } catch (const EvaluationError& e) {
    err << "error: non-finite objective: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TrajectoryError& e) {
    err << "trajectory error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const StructuralError& e) {
    err << "model error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}

}  // namespace lp::cli
