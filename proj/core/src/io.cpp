#include "radgest/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "radgest/error.hpp"

namespace radgest::io {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  Bytes take() { return std::move(out_); }
  void reserve(std::size_t n) { out_.reserve(n); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  Bytes out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, const char* what) : bytes_(bytes), what_(what) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError(std::string(what_) + ": truncated file");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

std::uint16_t fit16(std::size_t v, const char* name) {
  if (v > std::numeric_limits<std::uint16_t>::max()) {
    throw ArgumentError(std::string(name) + " does not fit in 16 bits");
  }
  return static_cast<std::uint16_t>(v);
}

}  // namespace

std::size_t dataset_file_size(std::size_t records, std::size_t k, std::size_t m, std::size_t n) {
  return kDatasetHeaderBytes + records * (2 + k * m * n * 8);
}

Bytes encode_dataset(const Dataset& d) {
  Writer w;
  w.reserve(dataset_file_size(d.records.size(), d.frames, d.pulses, d.samples));
  w.raw("RGC1", 4);
  w.u16(kDatasetVersion);
  w.u16(fit16(d.frames, "K"));
  w.u16(fit16(d.pulses, "M"));
  w.u16(fit16(d.samples, "N"));
  if (d.records.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ArgumentError("too many records");
  }
  w.u32(static_cast<std::uint32_t>(d.records.size()));
  w.u16(fit16(d.num_classes, "num_classes"));
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const LabeledCube& r = d.records[i];
    if (r.cube.frames != d.frames || r.cube.pulses != d.pulses || r.cube.samples != d.samples) {
      throw ArgumentError("record " + std::to_string(i) + " dims differ from the dataset header");
    }
    if (r.label >= d.num_classes) {
      throw ArgumentError("record " + std::to_string(i) + " label exceeds num_classes");
    }
    w.u16(static_cast<std::uint16_t>(r.label));
    for (const auto& z : r.cube.data) {
      w.f32(z.real());
      w.f32(z.imag());
    }
  }
  return w.take();
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "dataset");
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "RGC1", 4) != 0) {
    throw FormatError("dataset: bad magic (expected RGC1)");
  }
  r.str(4);
  const std::uint16_t version = r.u16();
  if (version != kDatasetVersion) {
    throw FormatError("dataset: unsupported version " + std::to_string(version));
  }
  Dataset d;
  d.frames = r.u16();
  d.pulses = r.u16();
  d.samples = r.u16();
  const std::size_t count = r.u32();
  d.num_classes = r.u16();
  const std::size_t expected = dataset_file_size(count, d.frames, d.pulses, d.samples);
  if (bytes.size() != expected) {
    throw FormatError("dataset: size " + std::to_string(bytes.size()) + " bytes, header implies " +
                      std::to_string(expected));
  }
  d.records.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    LabeledCube rec;
    rec.label = r.u16();
    if (rec.label >= d.num_classes) {
      throw FormatError("dataset: record " + std::to_string(i) + " label " +
                        std::to_string(rec.label) + " >= num_classes");
    }
    rec.cube = ComplexCube(d.frames, d.pulses, d.samples);
    for (auto& z : rec.cube.data) {
      const double re = r.f32();
      const double im = r.f32();
      z = {re, im};
    }
    d.records.push_back(std::move(rec));
  }
  return d;
}

Bytes encode_checkpoint(const ParamStore& params) {
  Writer w;
  w.raw("RGCK", 4);
  w.u16(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string& name = params.names()[i];
    const Tensor& t = params.tensors()[i];
    w.u16(fit16(name.size(), "parameter name length"));
    w.raw(name.data(), name.size());
    if (t.rank() > 255) throw ArgumentError("tensor rank exceeds 255");
    w.u8(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (double v : t.data()) w.f32(v);
  }
  return w.take();
}

ParamStore decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "RGCK", 4) != 0) {
    throw FormatError("checkpoint: bad magic (expected RGCK)");
  }
  Reader r(bytes, "checkpoint");
  r.str(4);
  const std::uint16_t version = r.u16();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::size_t count = r.u32();
  ParamStore store;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string name = r.str(r.u16());
    if (store.contains(name)) throw FormatError("checkpoint: duplicate entry '" + name + "'");
    const std::size_t rank = r.u8();
    Shape shape(rank);
    for (auto& d : shape) {
      d = r.u32();
      if (d == 0) throw FormatError("checkpoint: zero-length axis in '" + name + "'");
    }
    const std::size_t n = shape_numel(shape);
    if (r.remaining() / 4 < n) throw FormatError("checkpoint: truncated file");
    std::vector<double> data(n);
    for (double& v : data) v = r.f32();
    store.add(name, Tensor(std::move(shape), std::move(data)));
  }
  if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes after last entry");
  return store;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  write_file(path, encode_dataset(dataset));
}

ParamStore load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params) {
  write_file(path, encode_checkpoint(params));
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("config key '" + key + "': invalid value '" + value + "' (expected " + expected + ")");
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    if (v.empty() || v[0] == '-') throw std::invalid_argument(v);
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    bad_value(key, v, "a non-negative integer");
  }
  if (pos != v.size()) bad_value(key, v, "a non-negative integer");
  return static_cast<std::size_t>(x);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    bad_value(key, v, "a number");
  }
  if (pos != v.size() || !std::isfinite(x)) bad_value(key, v, "a finite number");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::size_t> to_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_size(key, trim(item)));
  if (out.empty()) bad_value(key, v, "a comma-separated list");
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// Shortest text that parses back to the same double.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

using Setter = std::function<void(TrainConfig&, const std::string& key, const std::string& value)>;
using Getter = std::function<std::string(const TrainConfig&)>;

struct Field {
  const char* key;
  Setter set;
  Getter get;
};

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = {
      {"regime", [](TrainConfig& c, auto&, auto& v) { c.regime = parse_regime(v); },
       [](const TrainConfig& c) { return regime_name(c.regime); }},
      {"ds", [](TrainConfig& c, auto& k, auto& v) { c.ds = to_size(k, v); },
       [](const TrainConfig& c) { return std::to_string(c.ds); }},
      {"df", [](TrainConfig& c, auto& k, auto& v) { c.df = to_size(k, v); },
       [](const TrainConfig& c) { return std::to_string(c.df); }},
      {"gamma", [](TrainConfig& c, auto& k, auto& v) { c.gamma = to_double(k, v); },
       [](const TrainConfig& c) { return num(c.gamma); }},
      {"include_sr_term", [](TrainConfig& c, auto& k, auto& v) { c.include_sr_term = to_bool(k, v); },
       [](const TrainConfig& c) { return std::string(c.include_sr_term ? "true" : "false"); }},
      {"epochs", [](TrainConfig& c, auto& k, auto& v) { c.epochs = to_size(k, v); },
       [](const TrainConfig& c) { return std::to_string(c.epochs); }},
      {"sr_epochs", [](TrainConfig& c, auto& k, auto& v) { c.sr_epochs = to_size(k, v); },
       [](const TrainConfig& c) { return std::to_string(c.sr_epochs); }},
      {"batch_size", [](TrainConfig& c, auto& k, auto& v) { c.batch_size = to_size(k, v); },
       [](const TrainConfig& c) { return std::to_string(c.batch_size); }},
      {"learning_rate", [](TrainConfig& c, auto& k, auto& v) { c.adam.learning_rate = to_double(k, v); },
       [](const TrainConfig& c) { return num(c.adam.learning_rate); }},
      {"beta1", [](TrainConfig& c, auto& k, auto& v) { c.adam.beta1 = to_double(k, v); },
       [](const TrainConfig& c) { return num(c.adam.beta1); }},
      {"beta2", [](TrainConfig& c, auto& k, auto& v) { c.adam.beta2 = to_double(k, v); },
       [](const TrainConfig& c) { return num(c.adam.beta2); }},
      {"eps", [](TrainConfig& c, auto& k, auto& v) { c.adam.eps = to_double(k, v); },
       [](const TrainConfig& c) { return num(c.adam.eps); }},
      {"seed", [](TrainConfig& c, auto& k, auto& v) { c.seed = to_size(k, v); },
       [](const TrainConfig& c) { return std::to_string(c.seed); }},
      {"noise", [](TrainConfig& c, auto& k, auto& v) { c.noise_sigma_rel = to_double(k, v); },
       [](const TrainConfig& c) { return num(c.noise_sigma_rel); }},
      {"mask_percent", [](TrainConfig& c, auto& k, auto& v) { c.mask_percent = to_double(k, v); },
       [](const TrainConfig& c) { return num(c.mask_percent); }},
      {"mask_patch", [](TrainConfig& c, auto& k, auto& v) { c.mask_patch = to_size(k, v); },
       [](const TrainConfig& c) { return std::to_string(c.mask_patch); }},
      {"val_fraction", [](TrainConfig& c, auto& k, auto& v) { c.val_fraction = to_double(k, v); },
       [](const TrainConfig& c) { return num(c.val_fraction); }},
      {"safmn.channels", [](TrainConfig& c, auto& k, auto& v) { c.safmn.channels = to_size(k, v); },
       [](const TrainConfig& c) { return std::to_string(c.safmn.channels); }},
      {"safmn.blocks", [](TrainConfig& c, auto& k, auto& v) { c.safmn.blocks = to_size(k, v); },
       [](const TrainConfig& c) { return std::to_string(c.safmn.blocks); }},
      {"safmn.ccm_expansion", [](TrainConfig& c, auto& k, auto& v) { c.safmn.ccm_expansion = to_size(k, v); },
       [](const TrainConfig& c) { return std::to_string(c.safmn.ccm_expansion); }},
      {"safmn.bias", [](TrainConfig& c, auto& k, auto& v) { c.safmn.bias = to_bool(k, v); },
       [](const TrainConfig& c) { return std::string(c.safmn.bias ? "true" : "false"); }},
      {"safmn.ln_eps", [](TrainConfig& c, auto& k, auto& v) { c.safmn.ln_eps = to_double(k, v); },
       [](const TrainConfig& c) { return num(c.safmn.ln_eps); }},
      {"classifier.num_classes", [](TrainConfig& c, auto& k, auto& v) { c.classifier.num_classes = to_size(k, v); },
       [](const TrainConfig& c) { return std::to_string(c.classifier.num_classes); }},
      {"classifier.cnn_channels", [](TrainConfig& c, auto& k, auto& v) { c.classifier.cnn_channels = to_list(k, v); },
       [](const TrainConfig& c) { return join(c.classifier.cnn_channels); }},
      {"classifier.tcn_channels", [](TrainConfig& c, auto& k, auto& v) { c.classifier.tcn_channels = to_size(k, v); },
       [](const TrainConfig& c) { return std::to_string(c.classifier.tcn_channels); }},
      {"classifier.tcn_kernel", [](TrainConfig& c, auto& k, auto& v) { c.classifier.tcn_kernel = to_size(k, v); },
       [](const TrainConfig& c) { return std::to_string(c.classifier.tcn_kernel); }},
      {"classifier.dilations", [](TrainConfig& c, auto& k, auto& v) { c.classifier.dilations = to_list(k, v); },
       [](const TrainConfig& c) { return join(c.classifier.dilations); }},
      {"classifier.hidden", [](TrainConfig& c, auto& k, auto& v) { c.classifier.hidden = to_size(k, v); },
       [](const TrainConfig& c) { return std::to_string(c.classifier.hidden); }},
  };
  return fields;
}

}  // namespace

TrainConfig parse_run_config(const std::string& text) {
  TrainConfig config;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ConfigError("config key '" + key + "' repeated on line " + std::to_string(lineno));
    }
    if (key == "d") {
      config.ds = config.df = to_size(key, value);
      continue;
    }
    bool known = false;
    for (const Field& f : schema()) {
      if (key == f.key) {
        f.set(config, key, value);
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (seen.count("d") && (seen.count("ds") || seen.count("df"))) {
    throw ConfigError("config key 'd' cannot be combined with 'ds'/'df'");
  }
  config.validate();
  return config;
}

TrainConfig load_run_config(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return parse_run_config(std::string(bytes.begin(), bytes.end()));
}

std::string format_run_config(const TrainConfig& config) {
  std::string out;
  for (const Field& f : schema()) out += std::string(f.key) + " = " + f.get(config) + "\n";
  return out;
}

std::string run_config_reference() {
  return "d = <factor>  (sets ds and df)\n" + format_run_config(TrainConfig{});
}

std::string metrics_csv_header() {
  return "epoch,regime,d,gamma,accuracy,l1,ms_ssim,psnr,ce_loss,sr_loss";
}

std::string format_metrics_row(const MetricsRecord& m) {
  auto f = [](double v) { return std::isinf(v) ? std::string(v > 0 ? "inf" : "-inf") : num(v); };
  return std::to_string(m.epoch) + "," + m.regime + "," + std::to_string(m.d) + "," + f(m.gamma) + "," +
         f(m.accuracy) + "," + f(m.l1) + "," + f(m.ms_ssim) + "," + f(m.psnr) + "," + f(m.ce_loss) + "," +
         f(m.sr_loss);
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRecord> rows) {
  std::string text = metrics_csv_header() + "\n";
  for (const MetricsRecord& r : rows) text += format_metrics_row(r) + "\n";
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Bytes encode_pgm(std::span<const double> values, std::size_t height, std::size_t width) {
  if (values.size() != height * width) throw DimensionError("encode_pgm: value count != height*width");
  const std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n65535\n";
  Bytes out(header.begin(), header.end());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo;
  for (double v : values) {
    const auto q = span > 0.0 ? static_cast<std::uint16_t>(std::lround((v - lo) / span * 65535.0)) : 0;
    out.push_back(static_cast<std::uint8_t>(q >> 8));
    out.push_back(static_cast<std::uint8_t>(q & 0xff));
  }
  return out;
}

std::string format_map_csv(std::span<const double> values, std::size_t height, std::size_t width) {
  if (values.size() != height * width) throw DimensionError("format_map_csv: value count != height*width");
  std::string out;
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      if (c) out += ',';
      out += num(values[r * width + c]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace radgest::io
