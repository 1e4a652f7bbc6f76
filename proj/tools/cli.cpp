#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <map>
#include <numeric>
#include <ostream>

#include "radgest/classifier.hpp"
#include "radgest/error.hpp"
#include "radgest/io.hpp"
#include "radgest/lr_pipeline.hpp"
#include "radgest/radar_sim.hpp"
#include "radgest/train.hpp"

namespace radgest::cli {

namespace {

namespace fs = std::filesystem;

struct SimulateArgs {
  std::size_t classes = 12;
  std::size_t per_class = 10;
  std::uint64_t seed = 0;
  std::string out;
  RadarParams radar;
};

struct DegradeArgs {
  std::string in, out;
  std::size_t ds = 2, df = 2;
  double noise = 0.01;
  std::uint64_t seed = 0;
};

struct TrainArgs {
  std::string config, hr, lr_data, ckpt, metrics;
};

struct EvalArgs {
  std::string ckpt, data, config, metrics, lr_data;
  std::string split = "val";
};

struct ExportArgs {
  std::string data, prefix, ckpt, config;
  std::size_t record = 0;
  std::size_t ds = 1, df = 1;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
  a.radar.validate();
  if (a.per_class == 0) throw ConfigError("--per-class must be >= 1");
  const auto templates = builtin_gesture_templates(a.classes);
  io::Dataset ds;
  ds.frames = a.radar.frames;
  ds.pulses = a.radar.pulses;
  ds.samples = a.radar.samples;
  ds.num_classes = a.classes;
  ds.records = generate_dataset(a.radar, templates, a.per_class, a.seed);
  io::save_dataset(a.out, ds);
  std::vector<std::size_t> hist(a.classes, 0);
  for (const auto& r : ds.records) ++hist[r.label];
  out << "records: " << ds.records.size() << "\n";
  for (std::size_t c = 0; c < a.classes; ++c) {
    out << "class " << c << " (" << templates[c].name << "): " << hist[c] << "\n";
  }
  return kExitOk;
}

int degrade(const DegradeArgs& a, std::ostream& out) {
  const DegradeSpec spec{a.ds, a.df, a.noise};
  spec.validate();
  io::Dataset in = io::load_dataset(a.in);
  if (a.ds > in.pulses) {
    throw ConfigError("--ds " + std::to_string(a.ds) + " exceeds M=" + std::to_string(in.pulses));
  }
  if (a.df > in.samples) {
    throw ConfigError("--df " + std::to_string(a.df) + " exceeds N=" + std::to_string(in.samples));
  }
  io::Dataset o;
  o.frames = in.frames;
  o.pulses = in.pulses / a.ds;
  o.samples = in.samples / a.df;
  o.num_classes = in.num_classes;
  for (std::size_t i = 0; i < in.records.size(); ++i) {
    ComplexCube cube = downsample(in.records[i].cube, a.ds, a.df);
    if (a.noise > 0.0) {
      Rng rng = make_rng(a.seed, i, 0xde6);
      cube = add_complex_noise(cube, a.noise, rng);
    }
    o.records.push_back({std::move(cube), in.records[i].label});
  }
  io::save_dataset(a.out, o);
  out << "records: " << o.records.size() << " dims: (" << o.frames << "," << o.pulses << ","
      << o.samples << ")\n";
  return kExitOk;
}

void check_classes(const io::Dataset& data, const TrainConfig& config) {
  if (data.num_classes != config.classifier.num_classes) {
    throw ConfigError("dataset has " + std::to_string(data.num_classes) +
                      " classes but config classifier.num_classes=" +
                      std::to_string(config.classifier.num_classes));
  }
}

io::Dataset load_lr(const std::string& path, const io::Dataset& hr, const TrainConfig& config) {
  io::Dataset lr = io::load_dataset(path);
  if (lr.frames != hr.frames || lr.pulses != hr.pulses / config.ds ||
      lr.samples != hr.samples / config.df) {
    throw ConfigError("LR data header (" + std::to_string(lr.frames) + "," + std::to_string(lr.pulses) +
                      "," + std::to_string(lr.samples) + ") does not match HR header / (ds, df)");
  }
  return lr;
}

int train(const TrainArgs& a, std::ostream& out) {
  const TrainConfig config = io::load_run_config(a.config);
  const io::Dataset hr = io::load_dataset(a.hr);
  check_classes(hr, config);
  io::Dataset lr;
  if (!a.lr_data.empty()) lr = load_lr(a.lr_data, hr, config);
  const TrainResult result = train_regime(hr.records, config, {}, lr.records);
  io::save_checkpoint(a.ckpt, bundle_params(result.models));
  io::write_metrics_csv(a.metrics, result.history);
  out << io::metrics_csv_header() << "\n" << io::format_metrics_row(result.history.back()) << "\n";
  return kExitOk;
}

int evaluate_cmd(const EvalArgs& a, std::ostream& out) {
  const TrainConfig config = io::load_run_config(a.config);
  const ModelBundle bundle = bundle_from_params(config, io::load_checkpoint(a.ckpt));
  const io::Dataset data = io::load_dataset(a.data);
  if (data.records.empty()) throw ArgumentError("dataset '" + a.data + "' has no records");
  check_classes(data, config);
  io::Dataset lr;
  if (!a.lr_data.empty()) lr = load_lr(a.lr_data, data, config);

  std::vector<PreparedRecord> records;
  if (a.split == "val") {
    records = validation_records(data.records, config, lr.records);
  } else {
    std::vector<std::size_t> all(data.records.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    records = lr.records.empty()
                  ? prepare_records(data.records, all, config.ds, config.df, config.noise_sigma_rel, config.seed)
                  : prepare_records_from_lr(data.records, lr.records, all, config.ds, config.df);
  }
  MetricsRecord row = evaluate(bundle, records, config);
  row.epoch = config.regime == Regime::frozen
                  ? config.epochs + (config.sr_epochs == 0 ? config.epochs : config.sr_epochs)
                  : config.epochs;
  const MetricsRecord rows[] = {row};
  if (!a.metrics.empty()) io::write_metrics_csv(a.metrics, rows);
  out << io::metrics_csv_header() << "\n" << io::format_metrics_row(row) << "\n";
  return kExitOk;
}

int export_maps(const ExportArgs& a, std::ostream& out) {
  const io::Dataset data = io::load_dataset(a.data);
  if (a.record >= data.records.size()) {
    throw ArgumentError("--record " + std::to_string(a.record) + " out of range (dataset has " +
                        std::to_string(data.records.size()) + " records)");
  }
  Tensor maps;
  {
    NoGradScope no_grad;
    if (!a.ckpt.empty()) {
      if (a.config.empty()) throw ConfigError("--ckpt requires --config");
      const TrainConfig config = io::load_run_config(a.config);
      const ModelBundle bundle = bundle_from_params(config, io::load_checkpoint(a.ckpt));
      const std::size_t idx[] = {a.record};
      const auto rec = prepare_records(data.records, idx, config.ds, config.df,
                                       config.noise_sigma_rel, config.seed);
      maps = range_doppler_frames(super_resolve(bundle, rec[0].lr, config.ds, config.df));
    } else {
      ComplexCube cube = data.records[a.record].cube;
      if (a.ds > 1 || a.df > 1) {
        if (a.ds > cube.pulses || a.df > cube.samples) throw ConfigError("factor exceeds cube axis");
        cube = downsample(cube, a.ds, a.df);
      }
      maps = to_range_doppler(complex_to_channels(cube));
    }
  }
  const std::size_t frames = maps.dim(0), h = maps.dim(1), w = maps.dim(2);
  for (std::size_t k = 0; k < frames; ++k) {
    const auto frame = maps.data().subspan(k * h * w, h * w);
    const std::string base = a.prefix + "_frame" + std::to_string(k);
    io::write_file(base + ".pgm", io::encode_pgm(frame, h, w));
    const std::string csv = io::format_map_csv(frame, h, w);
    io::write_file(base + ".csv",
                   std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
  }
  out << "wrote " << frames << " maps of " << h << "x" << w << " to " << a.prefix << "_frame*\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"radgest: radar gesture super-resolution and classification"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Synthesize a labeled gesture dataset");
  s->add_option("--classes", sim.classes, "Number of gesture classes (2-12)")->capture_default_str();
  s->add_option("--per-class", sim.per_class, "Recordings per class")->capture_default_str();
  s->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  s->add_option("--out", sim.out, "Output dataset file")->required();
  s->add_option("--frames", sim.radar.frames, "Frames per recording (K)")->capture_default_str();
  s->add_option("--pulses", sim.radar.pulses, "Pulses per frame (M)")->capture_default_str();
  s->add_option("--samples", sim.radar.samples, "Range samples per pulse (N)")->capture_default_str();
  s->add_option("--carrier", sim.radar.carrier_hz, "Carrier frequency in Hz")->capture_default_str();
  s->add_option("--prf", sim.radar.prf_hz, "Pulse repetition frequency in Hz")->capture_default_str();
  s->add_option("--r-min", sim.radar.r_min, "Near edge of the range sweep in m")->capture_default_str();
  s->add_option("--r-max", sim.radar.r_max, "Far edge of the range sweep in m")->capture_default_str();

  DegradeArgs deg;
  auto* g = app.add_subcommand("degrade", "Decimate a dataset to emulate a lower-resolution radar");
  g->add_option("--in", deg.in, "Input dataset")->required();
  g->add_option("--out", deg.out, "Output dataset")->required();
  g->add_option("--ds", deg.ds, "Slow-time decimation factor")->capture_default_str();
  g->add_option("--df", deg.df, "Fast-time decimation factor")->capture_default_str();
  g->add_option("--noise", deg.noise, "Noise std relative to the cube RMS")->capture_default_str();
  g->add_option("--seed", deg.seed, "Noise seed")->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model regime");
  t->add_option("--config", tr.config, "Run config (key = value lines)")->required();
  t->add_option("--hr", tr.hr, "High-resolution dataset")->required();
  t->add_option("--lr-data", tr.lr_data, "Pre-degraded dataset (default: degrade on the fly)");
  t->add_option("--out-ckpt", tr.ckpt, "Checkpoint output")->required();
  t->add_option("--metrics-csv", tr.metrics, "Per-epoch validation metrics output")->required();
  t->footer("Config keys and defaults:\n" + io::run_config_reference());

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint");
  e->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
  e->add_option("--data", ev.data, "High-resolution dataset")->required();
  e->add_option("--config", ev.config, "Run config used for training")->required();
  e->add_option("--metrics-csv", ev.metrics, "Write the metrics row here as CSV");
  e->add_option("--lr-data", ev.lr_data, "Pre-degraded dataset (default: degrade on the fly)");
  e->add_option("--split", ev.split, "Records to score: the validation split or all")
      ->check(CLI::IsMember({"val", "all"}))
      ->capture_default_str();

  ExportArgs ex;
  auto* x = app.add_subcommand("export-maps", "Write range-Doppler maps of one recording as PGM and CSV");
  x->add_option("--data", ex.data, "Dataset")->required();
  x->add_option("--record", ex.record, "Record index")->capture_default_str();
  x->add_option("--out-prefix", ex.prefix, "Output path prefix")->required();
  x->add_option("--ckpt", ex.ckpt, "Map the super-resolved recording of this checkpoint");
  x->add_option("--config", ex.config, "Run config of --ckpt");
  x->add_option("--ds", ex.ds, "Slow-time decimation before mapping (without --ckpt)")->capture_default_str();
  x->add_option("--df", ex.df, "Fast-time decimation before mapping (without --ckpt)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex_parse) {
    const int code = app.exit(ex_parse, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (s->parsed()) return simulate(sim, out);
    if (g->parsed()) return degrade(deg, out);
    if (t->parsed()) return train(tr, out);
    if (e->parsed()) return evaluate_cmd(ev, out);
    if (x->parsed()) return export_maps(ex, out);
  } catch (const IoError& ex_io) {
    err << "io error: " << ex_io.what() << "\n";
    return kExitIo;
  } catch (const FormatError& ex_fmt) {
    err << "format error: " << ex_fmt.what() << "\n";
    return kExitFormat;
  } catch (const ConfigError& ex_cfg) {
    err << "config error: " << ex_cfg.what() << "\n";
    return kExitConfig;
  } catch (const ArgumentError& ex_arg) {
    err << "argument error: " << ex_arg.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace radgest::cli
