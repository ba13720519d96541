#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "landscape/dataset.hpp"
#include "landscape/train.hpp"
#include "support.hpp"

namespace lp::cli {
namespace {

namespace fs = std::filesystem;
using lp::testing::TempDir;

constexpr const char* kSmallConfig = R"(# small two-gaussians run
[model]
layers = affine(4,8),relu,affine(8,2)
loss = softmax-cross-entropy
init_scale = 0.3

[data]
source = two-gaussians
n = 200
dim = 4
separation = 4
seed = 1

[train]
learning_rate = 0.05
momentum = 0.9
batch_size = 16
max_epochs = 6
seed = 2

[output]
dir = run
)";

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "landscape-probe");
  std::ostringstream out, err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

std::size_t line_count(const std::string& text) { return count(text, "\n"); }

// Writes the small config into `dir` and trains it; returns the config path.
fs::path trained(const TempDir& dir, const std::string& text = kSmallConfig) {
  const fs::path cfg = dir / "exp.ini";
  write_file(cfg, text);
  const Result r = invoke({"train", "-c", cfg.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  return cfg;
}

// ------------------------------------------------------------------ config

TEST(Config, ParsesTheSmallConfig) {
  const ExperimentConfig c = parse_config(kSmallConfig, "/base");
  EXPECT_EQ(c.model.layers.size(), 3u);
  EXPECT_EQ(c.model.init_scale, 0.3);
  EXPECT_EQ(c.model.init_seed, 2u);
  EXPECT_EQ(c.data.n, 200u);
  EXPECT_EQ(c.data.separation, 4.0);
  EXPECT_EQ(c.train.batch_size, 16u);
  EXPECT_EQ(c.train.max_epochs, 6u);
  EXPECT_EQ(c.output_dir, fs::path("/base/run"));
}

TEST(Config, CommentsAndWhitespace) {
  const IniDocument d = IniDocument::parse("; note\n# other\n[a]\n  key   =  some value  \n\n", "x");
  EXPECT_EQ(d.sections(), std::vector<std::string>{"a"});
  IniDocument copy = d;
  EXPECT_EQ(copy.take("a", "key").value(), "some value");
  EXPECT_FALSE(copy.take("a", "missing").has_value());
  EXPECT_TRUE(copy.unused().empty());
}

TEST(Config, UnknownKeyNamesTheField) {
  std::string text = kSmallConfig;
  text += "colour = blue\n";
  try {
    parse_config(text, "/base");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "output.colour");
  }
}

TEST(Config, UnknownSection) {
  std::string text = kSmallConfig;
  text += "[extras]\nx = 1\n";
  EXPECT_THROW(parse_config(text, "/base"), ConfigError);
}

TEST(Config, DuplicateKey) {
  std::string text = kSmallConfig;
  text += "dir = again\n";
  EXPECT_THROW(parse_config(text, "/base"), ConfigError);
}

TEST(Config, MissingDataSource) {
  const std::string text = "[model]\nlayers = affine(4,2)\n[data]\nn = 10\n";
  try {
    parse_config(text, "/base");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("exactly one data source"), std::string::npos);
  }
}

TEST(Config, MalformedLine) {
  EXPECT_THROW(IniDocument::parse("[a]\nnot a pair\n", "x"), ConfigError);
  EXPECT_THROW(IniDocument::parse("[a\n", "x"), ConfigError);
}

TEST(Config, FieldValidation) {
  auto with = [](const std::string& from, const std::string& to) {
    std::string t = kSmallConfig;
    t.replace(t.find(from), from.size(), to);
    return t;
  };
  EXPECT_THROW(parse_config(with("batch_size = 16", "batch_size = 0"), "/b"), ConfigError);
  EXPECT_THROW(parse_config(with("learning_rate = 0.05", "learning_rate = -1"), "/b"), ConfigError);
  EXPECT_THROW(parse_config(with("momentum = 0.9", "momentum = 1.5"), "/b"), ConfigError);
  EXPECT_THROW(parse_config(with("init_scale = 0.3", "init_scale = 0"), "/b"), ConfigError);
  EXPECT_THROW(parse_config(with("n = 200", "n = lots"), "/b"), ConfigError);
  EXPECT_THROW(parse_config(with("affine(4,8)", "affine(5,8)"), "/b"), ConfigError);
  EXPECT_THROW(parse_config(with("affine(8,2)", "affine(8,3)"), "/b"), ConfigError);
  EXPECT_THROW(parse_config(with("relu", "tanhish"), "/b"), ConfigError);
}

TEST(Config, SplitFractions) {
  std::string text = kSmallConfig;
  text.insert(text.find("seed = 1"), "split = 0.6,0.3,0.1\n");
  const ExperimentConfig c = parse_config(text, "/b");
  EXPECT_EQ(c.data.split, (std::array<double, 3>{0.6, 0.3, 0.1}));
  const Splits s = load_data(c.data);
  EXPECT_EQ(s.train.size() + s.valid.size() + s.test.size(), 200u);
  std::string bad = kSmallConfig;
  bad.insert(bad.find("seed = 1"), "split = 0.6,0.3,0.3\n");
  EXPECT_THROW(parse_config(bad, "/b"), ConfigError);
}

TEST(Config, IdxFilesResolveAgainstTheConfigDirectory) {
  TempDir dir("cli_idx");
  const Dataset data = gen_two_gaussians(20, 4, 2.0, 0);
  Dataset scaled = data;
  for (auto& x : scaled.examples.inputs.data) x = std::clamp(0.5 + 0.1 * x, 0.0, 1.0);
  write_idx(scaled, dir / "img.idx", dir / "lab.idx", 2, 2);
  const std::string text =
      "[model]\nlayers = affine(4,2)\n[data]\nsource = idx\nimages = img.idx\nlabels = lab.idx\n";
  const ExperimentConfig c = parse_config(text, dir.path());
  EXPECT_EQ(c.data.images, dir / "img.idx");
  const Splits s = load_data(c.data);
  EXPECT_EQ(s.train.size() + s.valid.size(), 20u);
}

TEST(Config, MissingIdxFileExitsWithUsageCode) {
  TempDir dir("cli_missing");
  const fs::path cfg = dir / "exp.ini";
  write_file(cfg, "[model]\nlayers = affine(4,2)\n[data]\nsource = idx\nimages = nowhere.idx\nlabels = l.idx\n");
  const Result r = invoke({"train", "-c", cfg.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("nowhere.idx"), std::string::npos) << r.err;
}

// ------------------------------------------------------------------- usage

TEST(Cli, NoArgumentsOrUnknownCommand) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"train"}).code, kExitUsage);
}

TEST(Cli, HelpSucceeds) {
  const Result r = invoke({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE((r.out + r.err).find("train"), std::string::npos);
}

TEST(Cli, MissingConfigFile) {
  const Result r = invoke({"train", "-c", "/definitely/not/here.ini"});
  EXPECT_EQ(r.code, kExitUsage);
}

// ------------------------------------------------------------------- train

TEST(Train, WritesOutputsAndIsDeterministic) {
  TempDir a("cli_train_a");
  TempDir b("cli_train_b");
  trained(a);
  trained(b);
  for (const char* name : {"trajectory.lptraj", "learning_curve.csv", "learning_curve.svg", "manifest.txt"}) {
    ASSERT_TRUE(fs::exists(a / "run" / name)) << name;
    EXPECT_EQ(read_file(a / "run" / name), read_file(b / "run" / name)) << name;
  }
  const TrajectoryRecord r = load_trajectory(a / "run" / "trajectory.lptraj");
  EXPECT_EQ(r.snapshots.front().epoch, 0u);
  EXPECT_NE(read_file(a / "run" / "manifest.txt").find("digest"), std::string::npos);
}

TEST(Train, OutputFlagOverridesConfig) {
  TempDir dir("cli_train_o");
  const fs::path cfg = dir / "exp.ini";
  write_file(cfg, kSmallConfig);
  const Result r = invoke({"train", "-c", cfg.string(), "-o", (dir / "elsewhere").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "elsewhere" / "trajectory.lptraj"));
  EXPECT_FALSE(fs::exists(dir / "run"));
}

TEST(Train, DivergenceExitsWithCode3) {
  TempDir dir("cli_diverge");
  std::string text = kSmallConfig;
  text.replace(text.find("learning_rate = 0.05"), 20, "learning_rate = 1e6");
  const fs::path cfg = dir / "exp.ini";
  write_file(cfg, text);
  const Result r = invoke({"train", "-c", cfg.string()});
  EXPECT_EQ(r.code, kExitDiverged) << r.err;
}

// ------------------------------------------------------------------ interp

TEST(Interp, CoarseGridCsv) {
  TempDir dir("cli_interp");
  const fs::path cfg = trained(dir);
  const Result r = invoke({"interp", "-c", cfg.string(), "--grid", "coarse-50"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(dir / "run" / "interp_init-final_coarse-50.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "alpha,J_train,J_valid,err_rate");
  EXPECT_EQ(line_count(csv), 51u);
  EXPECT_TRUE(fs::exists(dir / "run" / "interp_init-final_coarse-50.svg"));
  EXPECT_TRUE(fs::exists(dir / "run" / "interp_init-final_coarse-50_bumps.txt"));
}

TEST(Interp, LogScaleAxis) {
  TempDir dir("cli_logy");
  const fs::path cfg = trained(dir);
  ASSERT_EQ(invoke({"interp", "-c", cfg.string(), "--log-y"}).code, 0);
  const std::string svg = read_file(dir / "run" / "interp_init-final_coarse-50.svg");
  EXPECT_NE(svg.find("data-scale=\"log\""), std::string::npos);
  EXPECT_NE(svg.find("class=\"ytick\""), std::string::npos);
  ASSERT_EQ(invoke({"interp", "-c", cfg.string(), "-o", (dir / "lin").string()}).code, 0);
  EXPECT_NE(read_file(dir / "lin" / "interp_init-final_coarse-50.svg").find("data-scale=\"linear\""),
            std::string::npos);
}

TEST(Interp, ThreadCountDoesNotChangeOutput) {
  TempDir dir("cli_threads");
  const fs::path cfg = trained(dir);
  ASSERT_EQ(invoke({"interp", "-c", cfg.string(), "--grid", "fine-200", "--threads", "1", "-o",
                    (dir / "one").string()})
                .code,
            0);
  ASSERT_EQ(invoke({"interp", "-c", cfg.string(), "--grid", "fine-200", "--threads", "4", "-o",
                    (dir / "four").string()})
                .code,
            0);
  EXPECT_EQ(read_file(dir / "one" / "interp_init-final_fine-200.csv"),
            read_file(dir / "four" / "interp_init-final_fine-200.csv"));
}

TEST(Interp, CustomGrid) {
  TempDir dir("cli_custom");
  const fs::path cfg = trained(dir);
  const Result r =
      invoke({"interp", "-c", cfg.string(), "--grid", "custom", "--alpha-min", "-1", "--alpha-max", "2",
              "--points", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(dir / "run" / "interp_init-final_custom.csv");
  EXPECT_EQ(line_count(csv), 8u);
  EXPECT_EQ(csv.substr(csv.find('\n') + 1, 3), "-1,");
}

TEST(Interp, TwoSolutionsNeedsTwoTrajectories) {
  TempDir dir("cli_two");
  const fs::path cfg = trained(dir);
  const Result r = invoke({"interp", "-c", cfg.string(), "--mode", "two-solutions", "-t",
                           (dir / "run" / "trajectory.lptraj").string()});
  EXPECT_EQ(r.code, kExitUsage);
}

TEST(Interp, TwoSolutionsBetweenSeeds) {
  TempDir dir("cli_two_ok");
  const fs::path cfg = trained(dir);
  std::string other = kSmallConfig;
  other.replace(other.find("seed = 2"), 8, "seed = 5");
  other.replace(other.find("dir = run"), 9, "dir = run2");
  write_file(dir / "other.ini", other);
  ASSERT_EQ(invoke({"train", "-c", (dir / "other.ini").string()}).code, 0);
  const Result r = invoke({"interp", "-c", cfg.string(), "--mode", "two-solutions", "-t",
                           (dir / "run" / "trajectory.lptraj").string(), "-t",
                           (dir / "run2" / "trajectory.lptraj").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "run" / "interp_two-solutions_coarse-50.csv"));
}

TEST(Interp, ArchitectureMismatchIsRejected) {
  TempDir dir("cli_mismatch");
  const fs::path cfg = trained(dir);
  std::string other = kSmallConfig;
  other.replace(other.find("affine(4,8),relu,affine(8,2)"), 28, "affine(4,6),relu,affine(6,2)");
  other.replace(other.find("dir = run"), 9, "dir = run2");
  write_file(dir / "other.ini", other);
  ASSERT_EQ(invoke({"train", "-c", (dir / "other.ini").string()}).code, 0);
  const Result r = invoke({"interp", "-c", cfg.string(), "--mode", "two-solutions", "-t",
                           (dir / "run" / "trajectory.lptraj").string(), "-t",
                           (dir / "run2" / "trajectory.lptraj").string()});
  EXPECT_EQ(r.code, kExitUsage);
}

TEST(Interp, RandomPoint) {
  TempDir dir("cli_random");
  const fs::path cfg = trained(dir);
  const Result r = invoke({"interp", "-c", cfg.string(), "--mode", "random-point", "--grid", "zoom-end-200"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(read_file(dir / "run" / "interp_random-point_zoom-end-200.csv")), 201u);
}

// ----------------------------------------------------------------- project

TEST(Project, WritesTableAndSummary) {
  TempDir dir("cli_project");
  trained(dir);
  const Result r = invoke({"project", "-t", (dir / "run" / "trajectory.lptraj").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("max residual ratio"), std::string::npos);
  const std::string csv = read_file(dir / "run" / "projection.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,alpha,alpha_hat,beta,theta_norm,residual_ratio,J");
  const TrajectoryRecord rec = load_trajectory(dir / "run" / "trajectory.lptraj");
  EXPECT_EQ(line_count(csv), rec.snapshots.size() + 1);
  EXPECT_TRUE(fs::exists(dir / "run" / "projection.svg"));
  EXPECT_TRUE(fs::exists(dir / "run" / "projection_summary.txt"));
}

TEST(Project, EmptyFileIsRejected) {
  TempDir dir("cli_empty");
  write_file(dir / "empty.lptraj", "");
  const Result r = invoke({"project", "-t", (dir / "empty.lptraj").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_FALSE(r.err.empty());
}

TEST(Project, CorruptFileIsRejected) {
  TempDir dir("cli_corrupt");
  trained(dir);
  std::string bytes = read_file(dir / "run" / "trajectory.lptraj");
  bytes.resize(bytes.size() / 2);
  write_file(dir / "half.lptraj", bytes);
  EXPECT_EQ(invoke({"project", "-t", (dir / "half.lptraj").string()}).code, kExitUsage);
}

// ----------------------------------------------------------------- surface

TEST(Surface, TrajectoryKind) {
  TempDir dir("cli_surface");
  const fs::path cfg = trained(dir);
  const Result r = invoke({"surface", "-c", cfg.string(), "--kind", "trajectory", "--resolution", "9"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(dir / "run" / "surface_trajectory.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "alpha,beta,J,provenance");
  EXPECT_NE(csv.find("snapshot:"), std::string::npos);
  const std::string svg = read_file(dir / "run" / "surface_trajectory.svg");
  const TrajectoryRecord rec = load_trajectory(dir / "run" / "trajectory.lptraj");
  EXPECT_EQ(count(svg, "<circle class=\"overlay\""), rec.snapshots.size());
  EXPECT_NE(svg.find("class=\"color-legend\""), std::string::npos);
  const std::string json = read_file(dir / "run" / "surface_trajectory.json");
  EXPECT_NE(json.find("\"values\""), std::string::npos);
}

TEST(Surface, RandomPlaneIsReproducible) {
  TempDir dir("cli_plane");
  const fs::path cfg = trained(dir);
  for (const char* out : {"a", "b"}) {
    const Result r = invoke({"surface", "-c", cfg.string(), "--kind", "random-plane", "--resolution", "7", "--seed",
                             "4", "-o", (dir / out).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* name : {"surface_random-plane.csv", "surface_random-plane.json", "surface_random-plane.svg"}) {
    EXPECT_EQ(read_file(dir / "a" / name), read_file(dir / "b" / name)) << name;
  }
  EXPECT_NE(read_file(dir / "a" / "surface_random-plane.csv").find("fixed-random"), std::string::npos);
}

TEST(Surface, AlphaRandomKind) {
  TempDir dir("cli_alpha");
  const fs::path cfg = trained(dir);
  const Result r = invoke({"surface", "-c", cfg.string(), "--kind", "alpha-random", "--resolution", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "run" / "surface_alpha-random.svg"));
}

TEST(Surface, UnknownKind) {
  TempDir dir("cli_kind");
  const fs::path cfg = trained(dir);
  EXPECT_EQ(invoke({"surface", "-c", cfg.string(), "--kind", "spiral"}).code, kExitUsage);
}

// ----------------------------------------------------------------- control

TEST(Control, WalkPanels) {
  TempDir dir("cli_walk");
  const Result r =
      invoke({"control", "--kind", "walk", "--dims", "1,10,100,1000", "--steps", "200", "--solution-step", "150",
              "-o", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* d : {"1", "10", "100", "1000"}) {
    const std::string csv = read_file(dir / ("walk_d" + std::string(d) + ".csv"));
    EXPECT_EQ(line_count(csv), 202u) << d;
  }
  EXPECT_EQ(count(read_file(dir / "walk.svg"), "<g class=\"plot\">"), 4u);
}

TEST(Control, WalkRejectsBadSolutionStep) {
  TempDir dir("cli_walk_bad");
  EXPECT_EQ(invoke({"control", "--kind", "walk", "--steps", "100", "--solution-step", "100", "-o",
                    dir.path().string()})
                .code,
            kExitUsage);
}

TEST(Control, QuadraticSweep) {
  TempDir dir("cli_quad");
  const Result r = invoke({"control", "--kind", "quadratic", "--dim", "500", "--steps", "100", "--settings",
                           "0.1:0,0.5:0.5,3:0", "-o", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(dir / "quadratic_sweep.csv");
  EXPECT_EQ(line_count(csv), 4u);
  EXPECT_TRUE(fs::exists(dir / "quadratic.svg"));
}

TEST(Control, HeatmapHasManifold) {
  TempDir dir("cli_heat");
  const Result r =
      invoke({"control", "--kind", "heatmap", "--extent", "2", "--resolution", "21", "-o", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string svg = read_file(dir / "heatmap.svg");
  EXPECT_EQ(count(svg, "class=\"manifold\""), 2u);
  EXPECT_EQ(line_count(read_file(dir / "heatmap.csv")), 21u * 21u + 1u);
}

TEST(Control, TaylorTable) {
  TempDir dir("cli_taylor");
  const Result r = invoke(
      {"control", "--kind", "taylor", "--ts", "0.04,0.02,0.01", "--point", "0.5,0.5", "-o", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(dir / "taylor.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,discrepancy,first_order_discrepancy,shrink_factor");
  EXPECT_EQ(line_count(csv), 4u);
  EXPECT_NE(read_file(dir / "taylor.svg").find("data-scale=\"log\""), std::string::npos);
}

TEST(Control, Deterministic) {
  TempDir dir("cli_ctl_det");
  for (const char* out : {"a", "b"}) {
    ASSERT_EQ(invoke({"control", "--kind", "walk", "--dims", "5", "--steps", "50", "--solution-step", "40",
                      "--seed", "3", "-o", (dir / out).string()})
                  .code,
              0);
  }
  EXPECT_EQ(read_file(dir / "a" / "walk_d5.csv"), read_file(dir / "b" / "walk_d5.csv"));
  EXPECT_EQ(read_file(dir / "a" / "walk.svg"), read_file(dir / "b" / "walk.svg"));
}

}  // namespace
}  // namespace lp::cli
