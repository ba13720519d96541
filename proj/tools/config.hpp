#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "landscape/dataset.hpp"
#include "landscape/network.hpp"
#include "landscape/train.hpp"

namespace lp::cli {

/// Invalid configuration; `field` is "section.key" (or the file path).
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Raw [section] key=value document, in file order.
class IniDocument {
 public:
  static IniDocument parse(const std::string& text, const std::string& origin);

  bool has(const std::string& section, const std::string& key) const;
  /// Marks the key as consumed.
  std::optional<std::string> take(const std::string& section, const std::string& key);
  /// Keys never taken, as "section.key".
  std::vector<std::string> unused() const;
  std::vector<std::string> sections() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
  };
  std::map<std::string, std::map<std::string, Entry>> data_;
  std::vector<std::string> order_;
};

enum class DataSource { TwoGaussians, ScalarRegression, Idx };

struct ModelSection {
  std::vector<Layer> layers;
  Loss loss = Loss::SoftmaxCrossEntropy;
  double init_scale = 0.05;
  std::uint64_t init_seed = 0;
};

struct DataSection {
  DataSource source = DataSource::TwoGaussians;
  std::size_t n = 1000;
  std::size_t dim = 10;
  double separation = 6.0;
  std::uint64_t seed = 0;
  std::filesystem::path images;
  std::filesystem::path labels;
  std::filesystem::path test_images;
  std::filesystem::path test_labels;
  std::array<double, 3> split{0.8, 0.2, 0.0};
  std::uint64_t split_seed = 0;
};

struct ProbeSection {
  std::string mode = "init-final";
  std::string grid = "coarse-50";
  std::optional<double> alpha_min;
  std::optional<double> alpha_max;
  std::size_t points = 50;
  double norm_scale = 1.0;
  std::uint64_t seed = 0;
};

struct SurfaceSection {
  std::string kind = "trajectory";
  std::size_t alpha_points = 64;
  std::size_t beta_points = 64;
  std::size_t resolution = 65;
  /// Random-plane half-width as a fraction of |theta_f|.
  double extent_scale = 0.1;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::filesystem::path source_path;
  ModelSection model;
  DataSection data;
  TrainConfig train;
  ProbeSection probe;
  SurfaceSection surface;
  std::filesystem::path output_dir = "out";

  NetworkSpec spec() const { return NetworkSpec(model.layers, model.loss); }
};

/// Parses and validates a config. Relative paths resolve against the config
/// file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              const std::string& origin = "<config>");

/// Generates or loads the configured data and splits it.
Splits load_data(const DataSection& data);

}  // namespace lp::cli
