#pragma once

// On-disk formats. Every multi-byte field is little-endian except the PGM
// payload, whose 16-bit samples are big-endian as the PGM format requires.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "radgest/param_store.hpp"
#include "radgest/radar_sim.hpp"
#include "radgest/train.hpp"

namespace radgest::io {

using Bytes = std::vector<std::uint8_t>;

// "RGC1" dataset: 18-byte header {magic, version u16, K u16, M u16, N u16,
// records u32, classes u16}, then per record a u16 label and K*M*N (re, im)
// f32 pairs.
struct Dataset {
  std::size_t frames = 0;
  std::size_t pulses = 0;
  std::size_t samples = 0;
  std::size_t num_classes = 0;
  std::vector<LabeledCube> records;
};

constexpr std::uint16_t kDatasetVersion = 1;
constexpr std::size_t kDatasetHeaderBytes = 18;

std::size_t dataset_file_size(std::size_t records, std::size_t k, std::size_t m, std::size_t n);

// Throws ArgumentError when a record's dims or label disagree with the header
// or a dim does not fit in 16 bits.
Bytes encode_dataset(const Dataset& dataset);
// Throws FormatError on bad magic, unknown version, labels >= classes or a
// byte count that disagrees with the header.
Dataset decode_dataset(std::span<const std::uint8_t> bytes);

// "RGCK" checkpoint: magic, version u16, entry count u32, then per entry a
// u16 name length, the name, rank u8, rank u32 dims and f32 data.
constexpr std::uint16_t kCheckpointVersion = 1;
Bytes encode_checkpoint(const ParamStore& params);
ParamStore decode_checkpoint(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);             // IoError
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
ParamStore load_checkpoint(const std::filesystem::path& path);
void save_checkpoint(const std::filesystem::path& path, const ParamStore& params);

// Flat `key = value` run configuration; '#' starts a comment. `d` sets both
// ds and df. Unknown keys and malformed values raise ConfigError naming the
// key and line.
TrainConfig parse_run_config(const std::string& text);
TrainConfig load_run_config(const std::filesystem::path& path);
std::string format_run_config(const TrainConfig& config);
// Accepted keys with their defaults, one per line, for --help output.
std::string run_config_reference();

std::string metrics_csv_header();  // epoch,regime,d,gamma,accuracy,l1,ms_ssim,psnr,ce_loss,sr_loss
std::string format_metrics_row(const MetricsRecord& row);
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRecord> rows);

// Binary PGM (P5, maxval 65535) of a row-major height x width map, min-max
// scaled to [0, 65535]. A constant map encodes as all zeros.
Bytes encode_pgm(std::span<const double> values, std::size_t height, std::size_t width);
std::string format_map_csv(std::span<const double> values, std::size_t height, std::size_t width);

}  // namespace radgest::io
