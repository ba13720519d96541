#include <bit>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>

#include "landscape/train.hpp"

namespace lp {
namespace {

constexpr std::string_view kMagic = "LPTRAJ1\n";
constexpr std::string_view kMagicStem = "LPTRAJ";
constexpr int kVersion = 1;

using Kind = TrajectoryError::Kind;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<unsigned char>(in[at + i])} << (8 * i);
  return v;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

template <class T>
T parse_number(const std::map<std::string, std::string>& header, const std::string& key) {
  const auto it = header.find(key);
  if (it == header.end()) throw TrajectoryError(Kind::Format, "trajectory header lacks '" + key + "'");
  T v{};
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw TrajectoryError(Kind::Format, "trajectory header field '" + key + "' is malformed");
  }
  return v;
}

std::uint64_t parse_hex(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw TrajectoryError(Kind::Format, "malformed digest");
  return v;
}

}  // namespace

std::string format_double_exact(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void save_trajectory(const TrajectoryRecord& record, const std::filesystem::path& path) {
  const std::size_t p = record.initial.size();
  std::string out(kMagic);
  auto line = [&](const std::string& key, const std::string& value) { out += key + "=" + value + "\n"; };
  line("version", std::to_string(kVersion));
  line("spec", record.spec_text);
  line("digest", hex64(record.spec_digest));
  line("learning_rate", format_double_exact(record.config.learning_rate));
  line("momentum", format_double_exact(record.config.momentum));
  line("batch_size", std::to_string(record.config.batch_size));
  line("max_epochs", std::to_string(record.config.max_epochs));
  line("patience", std::to_string(record.config.patience));
  line("snapshot_every", std::to_string(record.config.snapshot_every));
  line("seed", std::to_string(record.config.seed));
  line("param_count", std::to_string(p));
  line("snapshot_count", std::to_string(record.snapshots.size()));
  line("metric_count", std::to_string(record.metrics.size()));
  line("solution_index", std::to_string(record.solution_index));
  std::string epochs;
  for (std::size_t i = 0; i < record.snapshots.size(); ++i) {
    if (i) epochs += ',';
    epochs += std::to_string(record.snapshots[i].epoch);
  }
  line("snapshot_epochs", epochs);
  out += "end\n";

  for (double v : record.initial.values()) put_f64(out, v);
  for (const auto& s : record.snapshots) {
    if (s.params.size() != p) throw TrajectoryError(Kind::Format, "snapshot size differs from initial params");
    for (double v : s.params.values()) put_f64(out, v);
  }
  for (const auto& m : record.metrics) {
    put_u64(out, m.epoch);
    put_f64(out, m.train);
    put_f64(out, m.valid);
  }
  put_u64(out, out.size());

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw TrajectoryError(Kind::Io, "cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw TrajectoryError(Kind::Io, "write failed for " + path.string());
}

TrajectoryRecord load_trajectory(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw TrajectoryError(Kind::Io, "cannot open " + path.string());
  const std::string in{std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
  const std::string name = path.string();

  if (in.size() < kMagic.size()) {
    if (kMagic.starts_with(in)) throw TrajectoryError(Kind::Truncated, name + ": file ends inside the magic");
    throw TrajectoryError(Kind::Format, name + ": not a trajectory file");
  }
  if (!in.starts_with(kMagic)) {
    if (in.starts_with(kMagicStem)) throw TrajectoryError(Kind::Version, name + ": unsupported trajectory version");
    throw TrajectoryError(Kind::Format, name + ": not a trajectory file");
  }

  std::map<std::string, std::string> header;
  std::size_t pos = kMagic.size();
  for (;;) {
    const auto eol = in.find('\n', pos);
    if (eol == std::string::npos) throw TrajectoryError(Kind::Truncated, name + ": header is truncated");
    const std::string text = in.substr(pos, eol - pos);
    pos = eol + 1;
    if (text == "end") break;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw TrajectoryError(Kind::Format, name + ": malformed header line");
    header[text.substr(0, eq)] = text.substr(eq + 1);
  }

  if (parse_number<int>(header, "version") != kVersion) {
    throw TrajectoryError(Kind::Version, name + ": unsupported trajectory version");
  }
  const auto p = parse_number<std::size_t>(header, "param_count");
  const auto s = parse_number<std::size_t>(header, "snapshot_count");
  const auto m = parse_number<std::size_t>(header, "metric_count");
  const std::size_t expected = pos + 8 * (p * (s + 1) + 3 * m) + 8;
  if (in.size() != expected || get_u64(in, in.size() - 8) != in.size() - 8) {
    throw TrajectoryError(Kind::Truncated, name + ": payload length does not match header (truncated file?)");
  }

  TrajectoryRecord record;
  record.spec_text = header["spec"];
  record.spec_digest = parse_hex(header["digest"]);
  NetworkSpec spec = [&] {
    try {
      return NetworkSpec::parse(record.spec_text);
    } catch (const StructuralError& e) {
      throw TrajectoryError(Kind::Format, name + ": bad spec: " + e.what());
    }
  }();
  if (spec.digest() != record.spec_digest) {
    throw TrajectoryError(Kind::Digest, name + ": spec digest does not match stored spec");
  }
  if (spec.param_count() != p) throw TrajectoryError(Kind::Format, name + ": param_count disagrees with spec");

  record.config.learning_rate = parse_number<double>(header, "learning_rate");
  record.config.momentum = parse_number<double>(header, "momentum");
  record.config.batch_size = parse_number<std::size_t>(header, "batch_size");
  record.config.max_epochs = parse_number<std::size_t>(header, "max_epochs");
  record.config.patience = parse_number<std::size_t>(header, "patience");
  record.config.snapshot_every = parse_number<std::size_t>(header, "snapshot_every");
  record.config.seed = parse_number<std::uint64_t>(header, "seed");
  record.solution_index = parse_number<std::size_t>(header, "solution_index");

  std::vector<std::size_t> epochs;
  {
    const std::string& list = header["snapshot_epochs"];
    std::size_t a = 0;
    while (a < list.size()) {
      auto comma = list.find(',', a);
      if (comma == std::string::npos) comma = list.size();
      std::size_t e = 0;
      const auto [ptr, ec] = std::from_chars(list.data() + a, list.data() + comma, e);
      if (ec != std::errc{} || ptr != list.data() + comma) {
        throw TrajectoryError(Kind::Format, name + ": malformed snapshot_epochs");
      }
      epochs.push_back(e);
      a = comma + 1;
    }
  }
  if (epochs.size() != s) throw TrajectoryError(Kind::Format, name + ": snapshot_epochs count mismatch");

  auto read_params = [&] {
    std::vector<double> v(p);
    for (auto& x : v) {
      x = std::bit_cast<double>(get_u64(in, pos));
      pos += 8;
    }
    return ParamVector(spec.manifest(), std::move(v));
  };
  record.initial = read_params();
  for (std::size_t i = 0; i < s; ++i) record.snapshots.push_back({epochs[i], read_params()});
  for (std::size_t i = 0; i < m; ++i) {
    EpochMetrics em;
    em.epoch = get_u64(in, pos);
    em.train = std::bit_cast<double>(get_u64(in, pos + 8));
    em.valid = std::bit_cast<double>(get_u64(in, pos + 16));
    pos += 24;
    record.metrics.push_back(em);
  }

  if (s == 0 || record.snapshots[0].epoch != 0) {
    throw TrajectoryError(Kind::Format, name + ": first snapshot must be epoch 0");
  }
  for (std::size_t i = 1; i < s; ++i) {
    if (record.snapshots[i].epoch <= record.snapshots[i - 1].epoch) {
      throw TrajectoryError(Kind::Format, name + ": snapshot epochs are not increasing");
    }
  }
  if (record.solution_index >= s) throw TrajectoryError(Kind::Format, name + ": solution index out of range");
  return record;
}

TrajectoryRecord load_trajectory(const std::filesystem::path& path, const NetworkSpec& expected) {
  TrajectoryRecord record = load_trajectory(path);
  if (record.spec_digest != expected.digest()) {
    throw TrajectoryError(Kind::Digest, path.string() + ": trajectory belongs to a different network spec");
  }
  return record;
}

}  // namespace lp
