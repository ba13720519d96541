#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "landscape/probe.hpp"

namespace lp::cli {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

template <class T>
T parse_value(const std::string& field, const std::string& text) {
  T v{};
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(field, "cannot parse '" + t + "' as a number");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ConfigError(field, "value must be finite");
  }
  return v;
}

class Reader {
 public:
  Reader(IniDocument& doc, const std::filesystem::path& base) : doc_(doc), base_(base) {}

  template <class T>
  void number(const std::string& section, const std::string& key, T& out) {
    if (auto v = doc_.take(section, key)) out = parse_value<T>(section + "." + key, *v);
  }
  void text(const std::string& section, const std::string& key, std::string& out) {
    if (auto v = doc_.take(section, key)) out = trim(*v);
  }
  void path(const std::string& section, const std::string& key, std::filesystem::path& out) {
    if (auto v = doc_.take(section, key)) {
      std::filesystem::path p = trim(*v);
      out = p.is_absolute() ? p : base_ / p;
    }
  }

 private:
  IniDocument& doc_;
  std::filesystem::path base_;
};

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

void require_file(const std::filesystem::path& p, const std::string& field) {
  require(!p.empty(), field, "is required for source = idx");
  require(std::filesystem::is_regular_file(p), field, "file not found: " + p.string());
}

}  // namespace

IniDocument IniDocument::parse(const std::string& text, const std::string& origin) {
  IniDocument doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where, "empty section name");
      if (!doc.data_.count(section)) doc.order_.push_back(section);
      doc.data_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where, "expected key = value");
    if (section.empty()) throw ConfigError(where, "key outside of any [section]");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError(where, "empty key");
    auto& entries = doc.data_[section];
    if (entries.count(key)) throw ConfigError(section + "." + key, "duplicate key at " + where);
    entries[key] = Entry{trim(std::string_view(line).substr(eq + 1)), line_no, false};
  }
  return doc;
}

bool IniDocument::has(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  return s != data_.end() && s->second.count(key);
}

std::optional<std::string> IniDocument::take(const std::string& section, const std::string& key) {
  const auto s = data_.find(section);
  if (s == data_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  k->second.used = true;
  return k->second.value;
}

std::vector<std::string> IniDocument::unused() const {
  std::vector<std::string> out;
  for (const auto& section : order_) {
    for (const auto& [key, entry] : data_.at(section)) {
      if (!entry.used) out.push_back(section + "." + key);
    }
  }
  return out;
}

std::vector<std::string> IniDocument::sections() const { return order_; }

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              const std::string& origin) {
  IniDocument doc = IniDocument::parse(text, origin);
  for (const auto& s : doc.sections()) {
    static const std::vector<std::string> known = {"model", "data", "train", "probe", "surface", "output"};
    require(std::find(known.begin(), known.end(), s) != known.end(), s, "unknown section");
  }
  Reader r(doc, base_dir);
  ExperimentConfig cfg;

  // [model]
  {
    auto layers = doc.take("model", "layers");
    require(layers.has_value(), "model.layers", "is required");
    try {
      cfg.model.layers = NetworkSpec::parse_layers(*layers);
    } catch (const StructuralError& e) {
      throw ConfigError("model.layers", e.what());
    }
    if (auto loss = doc.take("model", "loss")) {
      try {
        cfg.model.loss = parse_loss(*loss);
      } catch (const StructuralError& e) {
        throw ConfigError("model.loss", e.what());
      }
    }
    r.number("model", "init_scale", cfg.model.init_scale);
    require(cfg.model.init_scale > 0.0, "model.init_scale", "must be > 0");
  }

  // [train]
  r.number("train", "learning_rate", cfg.train.learning_rate);
  r.number("train", "momentum", cfg.train.momentum);
  r.number("train", "batch_size", cfg.train.batch_size);
  r.number("train", "max_epochs", cfg.train.max_epochs);
  r.number("train", "patience", cfg.train.patience);
  r.number("train", "snapshot_every", cfg.train.snapshot_every);
  r.number("train", "seed", cfg.train.seed);
  require(cfg.train.learning_rate > 0.0, "train.learning_rate", "must be > 0");
  require(cfg.train.momentum >= 0.0 && cfg.train.momentum < 1.0, "train.momentum", "must be in [0, 1)");
  require(cfg.train.batch_size >= 1, "train.batch_size", "must be >= 1");
  require(cfg.train.snapshot_every >= 1, "train.snapshot_every", "must be >= 1");
  cfg.model.init_seed = cfg.train.seed;
  r.number("model", "init_seed", cfg.model.init_seed);

  // [data]
  {
    auto source = doc.take("data", "source");
    require(source.has_value(), "data.source", "exactly one data source must be specified");
    const std::string s = trim(*source);
    if (s == "two-gaussians") {
      cfg.data.source = DataSource::TwoGaussians;
    } else if (s == "scalar-regression") {
      cfg.data.source = DataSource::ScalarRegression;
    } else if (s == "idx") {
      cfg.data.source = DataSource::Idx;
    } else {
      throw ConfigError("data.source", "unknown source '" + s + "' (two-gaussians, scalar-regression, idx)");
    }
    r.number("data", "n", cfg.data.n);
    r.number("data", "dim", cfg.data.dim);
    r.number("data", "separation", cfg.data.separation);
    r.number("data", "seed", cfg.data.seed);
    r.path("data", "images", cfg.data.images);
    r.path("data", "labels", cfg.data.labels);
    r.path("data", "test_images", cfg.data.test_images);
    r.path("data", "test_labels", cfg.data.test_labels);
    r.number("data", "split_seed", cfg.data.split_seed);
    if (auto split = doc.take("data", "split")) {
      std::array<double, 3> f{};
      std::size_t count = 0;
      std::stringstream ss(*split);
      std::string item;
      while (std::getline(ss, item, ',')) {
        require(count < 3, "data.split", "expects three fractions: train, valid, test");
        f[count++] = parse_value<double>("data.split", item);
      }
      require(count == 3, "data.split", "expects three fractions: train, valid, test");
      double sum = 0.0;
      for (double x : f) {
        require(x >= 0.0, "data.split", "fractions must be non-negative");
        sum += x;
      }
      require(std::abs(sum - 1.0) <= 1e-9, "data.split", "fractions must sum to 1");
      cfg.data.split = f;
    }
    const bool idx_paths = !cfg.data.images.empty() || !cfg.data.labels.empty() ||
                           !cfg.data.test_images.empty() || !cfg.data.test_labels.empty();
    if (cfg.data.source == DataSource::Idx) {
      require_file(cfg.data.images, "data.images");
      require_file(cfg.data.labels, "data.labels");
      require(cfg.data.test_images.empty() == cfg.data.test_labels.empty(), "data.test_images",
              "test_images and test_labels must be given together");
      if (!cfg.data.test_images.empty()) {
        require_file(cfg.data.test_images, "data.test_images");
        require_file(cfg.data.test_labels, "data.test_labels");
      }
    } else {
      require(!idx_paths, "data.images", "IDX paths given but data.source is not idx");
      if (cfg.data.source == DataSource::TwoGaussians) {
        require(cfg.data.n >= 2, "data.n", "must be >= 2");
        require(cfg.data.dim >= 1, "data.dim", "must be >= 1");
      }
    }
  }

  // [probe]
  r.text("probe", "mode", cfg.probe.mode);
  r.text("probe", "grid", cfg.probe.grid);
  if (doc.has("probe", "alpha_min")) {
    double v = 0.0;
    r.number("probe", "alpha_min", v);
    cfg.probe.alpha_min = v;
  }
  if (doc.has("probe", "alpha_max")) {
    double v = 0.0;
    r.number("probe", "alpha_max", v);
    cfg.probe.alpha_max = v;
  }
  r.number("probe", "points", cfg.probe.points);
  r.number("probe", "norm_scale", cfg.probe.norm_scale);
  r.number("probe", "seed", cfg.probe.seed);
  {
    const auto& m = cfg.probe.mode;
    require(m == "init-final" || m == "two-solutions" || m == "random-point", "probe.mode",
            "must be init-final, two-solutions or random-point");
    if (cfg.probe.grid == "custom") {
      require(cfg.probe.alpha_min && cfg.probe.alpha_max, "probe.grid", "custom grid needs alpha_min and alpha_max");
      require(*cfg.probe.alpha_max > *cfg.probe.alpha_min, "probe.alpha_max", "must exceed alpha_min");
      require(cfg.probe.points >= 2, "probe.points", "must be >= 2");
    } else {
      try {
        named_grid(cfg.probe.grid);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("probe.grid", e.what());
      }
    }
    require(cfg.probe.norm_scale >= 0.0, "probe.norm_scale", "must be >= 0");
  }

  // [surface]
  r.text("surface", "kind", cfg.surface.kind);
  r.number("surface", "alpha_points", cfg.surface.alpha_points);
  r.number("surface", "beta_points", cfg.surface.beta_points);
  r.number("surface", "resolution", cfg.surface.resolution);
  r.number("surface", "extent_scale", cfg.surface.extent_scale);
  r.number("surface", "seed", cfg.surface.seed);
  {
    const auto& k = cfg.surface.kind;
    require(k == "trajectory" || k == "random-plane" || k == "alpha-random", "surface.kind",
            "must be trajectory, random-plane or alpha-random");
    require(cfg.surface.alpha_points >= 2, "surface.alpha_points", "must be >= 2");
    require(cfg.surface.beta_points >= 2, "surface.beta_points", "must be >= 2");
    require(cfg.surface.resolution >= 2, "surface.resolution", "must be >= 2");
    require(cfg.surface.extent_scale > 0.0, "surface.extent_scale", "must be > 0");
  }

  // [output]
  r.path("output", "dir", cfg.output_dir);
  if (cfg.output_dir.is_relative()) cfg.output_dir = base_dir / cfg.output_dir;

  for (const auto& key : doc.unused()) throw ConfigError(key, "unknown key");

  try {
    const NetworkSpec spec = cfg.spec();
    if (cfg.data.source == DataSource::TwoGaussians) {
      require(spec.input_dim() == cfg.data.dim, "model.layers",
              "input width " + std::to_string(spec.input_dim()) + " does not match data.dim " +
                  std::to_string(cfg.data.dim));
      require(spec.output_dim() == 2, "model.layers", "two-gaussians needs 2 outputs");
    } else if (cfg.data.source == DataSource::ScalarRegression) {
      require(spec.input_dim() == 1 && spec.output_dim() == 1, "model.layers",
              "scalar-regression needs a 1-input, 1-output network");
      require(spec.loss() == Loss::MeanSquaredError, "model.loss", "scalar-regression needs mean-squared-error");
    }
  } catch (const StructuralError& e) {
    throw ConfigError("model.layers", e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "config file not found");
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg = parse_config(ss.str(), path.parent_path(), path.string());
  cfg.source_path = path;
  return cfg;
}

Splits load_data(const DataSection& data) {
  switch (data.source) {
    case DataSource::TwoGaussians:
      return split(gen_two_gaussians(data.n, data.dim, data.separation, data.seed), data.split, data.split_seed);
    case DataSource::ScalarRegression: {
      // A single example cannot be partitioned; it serves as both splits.
      Splits s;
      s.train = gen_scalar_regression();
      return s;
    }
    case DataSource::Idx: {
      Splits s = split(load_idx(data.images, data.labels), data.split, data.split_seed);
      if (!data.test_images.empty()) {
        s.test = load_idx(data.test_images, data.test_labels);
        s.test.tag = SplitTag::Test;
      }
      return s;
    }
  }
  return {};
}

}  // namespace lp::cli
