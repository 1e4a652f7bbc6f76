#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "radgest/error.hpp"
#include "radgest/io.hpp"
#include "radgest/random.hpp"

using namespace radgest;
namespace fs = std::filesystem;

namespace {

io::Dataset random_dataset(std::size_t records, std::size_t k, std::size_t m, std::size_t n, std::uint64_t seed) {
  io::Dataset d{k, m, n, 3, {}};
  Rng rng = make_rng(seed);
  for (std::size_t r = 0; r < records; ++r) {
    LabeledCube rec{ComplexCube(k, m, n), r % 3};
    for (auto& z : rec.cube.data)
      z = {static_cast<float>(uniform(rng, -1e3, 1e3)), static_cast<float>(uniform(rng, -1e-6, 1e-6))};
    d.records.push_back(std::move(rec));
  }
  return d;
}

std::uint32_t le(const io::Bytes& b, std::size_t at, std::size_t width) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("radgest_io_" + name); }

}  // namespace

TEST(DatasetFile, SizeForOnePaperShapedRecord) {
  EXPECT_EQ(io::dataset_file_size(1, 5, 32, 492), 629780u);
  EXPECT_EQ(io::encode_dataset(random_dataset(1, 5, 32, 492, 1)).size(), 629780u);
}

TEST(DatasetFile, HeaderFieldsAreLittleEndian) {
  const io::Bytes b = io::encode_dataset(random_dataset(2, 3, 4, 5, 2));
  ASSERT_EQ(b.size(), 18u + 2 * (2 + 3 * 4 * 5 * 8));
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "RGC1");
  EXPECT_EQ(le(b, 4, 2), 1u);
  EXPECT_EQ(le(b, 6, 2), 3u);
  EXPECT_EQ(le(b, 8, 2), 4u);
  EXPECT_EQ(le(b, 10, 2), 5u);
  EXPECT_EQ(le(b, 12, 4), 2u);
  EXPECT_EQ(le(b, 16, 2), 3u);
  EXPECT_EQ(le(b, 18, 2), 0u);  // first label
  // First sample's real part as f32 bits.
  float re;
  const std::uint32_t bits = le(b, 20, 4);
  std::memcpy(&re, &bits, 4);
  EXPECT_EQ(static_cast<double>(re), random_dataset(2, 3, 4, 5, 2).records[0].cube.data[0].real());
}

TEST(DatasetFile, RoundTripIsBitExact) {
  const io::Dataset d = random_dataset(4, 2, 6, 7, 3);
  const io::Dataset back = io::decode_dataset(io::encode_dataset(d));
  EXPECT_EQ(back.frames, 2u);
  EXPECT_EQ(back.num_classes, 3u);
  ASSERT_EQ(back.records.size(), 4u);
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_EQ(back.records[r].label, d.records[r].label);
    EXPECT_EQ(back.records[r].cube.data, d.records[r].cube.data);
  }
}

TEST(DatasetFile, CorruptInputsAreFormatErrors) {
  io::Bytes b = io::encode_dataset(random_dataset(2, 1, 2, 2, 4));
  io::Bytes bad = b;
  bad[0] = 'X';
  try {
    io::decode_dataset(bad);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
  }
  io::Bytes truncated(b.begin(), b.end() - 1);
  EXPECT_THROW(io::decode_dataset(truncated), FormatError);
  io::Bytes version = b;
  version[4] = 9;
  EXPECT_THROW(io::decode_dataset(version), FormatError);
  io::Bytes label = b;
  label[18] = 7;
  EXPECT_THROW(io::decode_dataset(label), FormatError);
  EXPECT_THROW(io::decode_dataset(io::Bytes(5, 0)), FormatError);
}

TEST(DatasetFile, EncodeRejectsInconsistentRecords) {
  io::Dataset d = random_dataset(2, 1, 2, 2, 5);
  d.records[1].label = 3;
  EXPECT_THROW(io::encode_dataset(d), ArgumentError);
  d = random_dataset(2, 1, 2, 2, 5);
  d.records[1].cube = ComplexCube(1, 2, 3);
  EXPECT_THROW(io::encode_dataset(d), ArgumentError);
}

TEST(CheckpointFile, RoundTripIsBitExact) {
  ParamStore p;
  p.add("a.weight", Tensor(Shape{2, 3}, std::vector<double>{0.5, -1.25, 3.0f, 1e-7f, -0.0, 7.0}));
  p.add("b", Tensor(Shape{1}, 0.1f));
  const ParamStore back = io::decode_checkpoint(io::encode_checkpoint(p));
  EXPECT_EQ(back.names(), p.names());
  EXPECT_TRUE(back.bitwise_equal(p));
  EXPECT_EQ(back.get("a.weight").shape(), (Shape{2, 3}));
}

TEST(CheckpointFile, CorruptInputs) {
  ParamStore p;
  p.add("w", Tensor(Shape{4}, 1.0));
  const io::Bytes b = io::encode_checkpoint(p);
  EXPECT_THROW(io::decode_checkpoint(io::Bytes(b.begin(), b.end() - 2)), FormatError);
  io::Bytes extra = b;
  extra.push_back(0);
  EXPECT_THROW(io::decode_checkpoint(extra), FormatError);
  io::Bytes magic = b;
  magic[3] = 'Q';
  EXPECT_THROW(io::decode_checkpoint(magic), FormatError);
}

TEST(Files, SaveLoadAndMissingPath) {
  const fs::path path = temp_path("ds.bin");
  const io::Dataset d = random_dataset(2, 1, 3, 4, 6);
  io::save_dataset(path, d);
  EXPECT_EQ(fs::file_size(path), io::dataset_file_size(2, 1, 3, 4));
  EXPECT_EQ(io::load_dataset(path).records[1].cube.data, d.records[1].cube.data);
  fs::remove(path);
  EXPECT_THROW(io::load_dataset(path), IoError);
  EXPECT_THROW(io::save_dataset(temp_path("missing_dir") / "x" / "y.bin", d), IoError);
}

TEST(RunConfig, ParsesKeysAndComments) {
  const TrainConfig c = io::parse_run_config(
      "# comment\n"
      "regime = SM\n"
      "d = 3\n"
      "gamma = 0.5   # trailing\n"
      "epochs=4\n"
      "learning_rate = 1e-4\n"
      "include_sr_term = false\n"
      "safmn.channels = 8\n"
      "classifier.dilations = 1,2\n"
      "\n");
  EXPECT_EQ(c.regime, Regime::multi);
  EXPECT_EQ(c.ds, 3u);
  EXPECT_EQ(c.df, 3u);
  EXPECT_EQ(c.gamma, 0.5);
  EXPECT_EQ(c.epochs, 4u);
  EXPECT_EQ(c.adam.learning_rate, 1e-4);
  EXPECT_FALSE(c.include_sr_term);
  EXPECT_EQ(c.safmn.channels, 8u);
  EXPECT_EQ(c.classifier.dilations, (std::vector<std::size_t>{1, 2}));
}

TEST(RunConfig, FormatRoundTrips) {
  TrainConfig c;
  c.regime = Regime::recursive;
  c.ds = c.df = 4;
  c.gamma = 0.3;
  c.seed = 12345678901ull;
  c.mask_percent = 12.5;
  const TrainConfig back = io::parse_run_config(io::format_run_config(c));
  EXPECT_EQ(io::format_run_config(back), io::format_run_config(c));
  EXPECT_EQ(back.gamma, 0.3);
  EXPECT_EQ(back.seed, 12345678901ull);
}

TEST(RunConfig, Errors) {
  auto message = [](const std::string& text) {
    try {
      io::parse_run_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("epochs = 2\nbogus = 1\n").find("unknown key 'bogus'"), std::string::npos);
  EXPECT_NE(message("epochs = 2\nbogus = 1\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("epochs = two\n").find("epochs"), std::string::npos);
  EXPECT_NE(message("epochs = -1\n").find("epochs"), std::string::npos);
  EXPECT_NE(message("gamma = 1\ngamma = 2\n").find("repeated"), std::string::npos);
  EXPECT_NE(message("d = 2\nds = 2\n").find("'d'"), std::string::npos);
  EXPECT_NE(message("just words\n").find("key=value"), std::string::npos);
  EXPECT_NE(message("regime = XM\n"), "no error");
  EXPECT_NE(message("gamma = -1\n"), "no error");
  EXPECT_NE(io::run_config_reference().find("mask_percent"), std::string::npos);
}

TEST(MetricsCsv, HeaderAndRow) {
  EXPECT_EQ(io::metrics_csv_header(), "epoch,regime,d,gamma,accuracy,l1,ms_ssim,psnr,ce_loss,sr_loss");
  MetricsRecord r;
  r.epoch = 3;
  r.regime = "FM";
  r.d = 2;
  r.gamma = 1;
  r.accuracy = 0.75;
  r.psnr = std::numeric_limits<double>::infinity();
  const std::string row = io::format_metrics_row(r);
  EXPECT_EQ(row.rfind("3,FM,2,1,0.75,", 0), 0u) << row;
  EXPECT_NE(row.find(",inf,"), std::string::npos) << row;
  const MetricsRecord rows[] = {r, r};
  const fs::path path = temp_path("metrics.csv");
  io::write_metrics_csv(path, rows);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 3);
  fs::remove(path);
}

TEST(Pgm, HeaderScalingAndConstantMap) {
  const std::vector<double> v{0.0, 1.0, 0.5, 2.0, 1.0, 1.5};
  const io::Bytes b = io::encode_pgm(v, 2, 3);
  const std::string header = "P5\n3 2\n65535\n";
  ASSERT_EQ(b.size(), header.size() + 12);
  EXPECT_EQ(std::string(b.begin(), b.begin() + header.size()), header);
  auto sample = [&](std::size_t i) { return (b[header.size() + 2 * i] << 8) | b[header.size() + 2 * i + 1]; };
  EXPECT_EQ(sample(0), 0);
  EXPECT_EQ(sample(3), 65535);
  EXPECT_EQ(sample(1), 32768);  // 0.5 * 65535 rounds up
  const io::Bytes flat = io::encode_pgm(std::vector<double>(6, 4.0), 2, 3);
  for (std::size_t i = header.size(); i < flat.size(); ++i) EXPECT_EQ(flat[i], 0);
  EXPECT_THROW(io::encode_pgm(v, 2, 2), DimensionError);
}

TEST(MapCsv, RowsAndColumns) {
  const std::string csv = io::format_map_csv(std::vector<double>{1, 2, 3, 4, 5, 6}, 2, 3);
  EXPECT_EQ(csv, "1,2,3\n4,5,6\n");
}
