#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "adaam/dataset.hpp"
#include "adaam/error.hpp"

using adaam::DenseMatrix;
using adaam::ErrorCode;

namespace fs = std::filesystem;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const adaam::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected adaam::Error";
  return ErrorCode::Io;
}

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("adaam_dataset_") + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace

TEST(ParseCsv, PlainNumbers) {
  const auto data = adaam::parse_csv("1,2\n3,4\n5,6\n");
  ASSERT_EQ(data.x.rows(), 3);
  ASSERT_EQ(data.x.cols(), 2);
  EXPECT_EQ(data.x(2, 1), 6.0);
  EXPECT_FALSE(data.labels.has_value());
  EXPECT_EQ(data.class_count(), 0u);
}

TEST(ParseCsv, HeaderAndNamedLabelColumn) {
  const auto data = adaam::parse_csv("a,class,b\r\n1,cat,2\r\n3,dog,4\r\n5,cat,6\r\n", adaam::LabelColumn{std::string("class")});
  ASSERT_EQ(data.x.cols(), 2);
  EXPECT_EQ(data.x(1, 0), 3.0);
  EXPECT_EQ(data.x(1, 1), 4.0);
  ASSERT_TRUE(data.labels.has_value());
  EXPECT_EQ(*data.labels, (std::vector<std::size_t>{0, 1, 0}));
  EXPECT_EQ(data.class_count(), 2u);
}

TEST(ParseCsv, IndexedLabelColumnRemapsInFirstAppearanceOrder) {
  const auto data = adaam::parse_csv("0.5,7\n1.5,3\n2.5,7\n", adaam::LabelColumn{std::size_t{1}});
  EXPECT_EQ(*data.labels, (std::vector<std::size_t>{0, 1, 0}));
  EXPECT_EQ(data.x.cols(), 1);
}

TEST(ParseCsv, SkipsBlankLinesAndAutodetectsHeader) {
  const auto data = adaam::parse_csv("x,y\n\n1,2\n\n3,4");
  EXPECT_EQ(data.x.rows(), 2);
}

TEST(ParseCsv, Errors) {
  EXPECT_EQ(code_of([] { adaam::parse_csv(""); }), ErrorCode::EmptyFile);
  EXPECT_EQ(code_of([] { adaam::parse_csv("x,y\n"); }), ErrorCode::EmptyFile);
  EXPECT_EQ(code_of([] { adaam::parse_csv("1,2\n3\n"); }), ErrorCode::RaggedRows);
  EXPECT_EQ(code_of([] { adaam::parse_csv("1,2\n3,oops\n"); }), ErrorCode::NonNumericCell);
  EXPECT_EQ(code_of([] { adaam::parse_csv("1,2\n", adaam::LabelColumn{std::size_t{5}}); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([] { adaam::parse_csv("a,b\n1,2\n", adaam::LabelColumn{std::string("z")}); }),
            ErrorCode::InvalidParams);
  try {
    adaam::parse_csv("1,2\n3,4\n5,x\n");
  } catch (const adaam::Error& e) {
    EXPECT_NE(std::string(e.what()).find("row 3, column 2"), std::string::npos) << e.what();
  }
}

TEST(BinaryFormat, RoundTripWithLabels) {
  TempDir dir;
  adaam::LabeledDataset data;
  data.x = DenseMatrix(2, 3);
  data.x << 1.0 / 3.0, -2, 1e300, 0, 5, -7.25;
  data.labels = std::vector<std::size_t>{1, 0};
  adaam::save_binary(data, dir.file("d.aam"));
  const auto back = adaam::load_binary(dir.file("d.aam"));
  EXPECT_EQ(back.x, data.x);
  EXPECT_EQ(back.labels, data.labels);
  EXPECT_EQ(adaam::load_dataset(dir.file("d.aam")).x, data.x);
  EXPECT_EQ(fs::file_size(dir.file("d.aam")), 4u + 24u + 6u * 8u + 2u * 4u);
}

TEST(BinaryFormat, RoundTripWithoutLabels) {
  TempDir dir;
  adaam::LabeledDataset data;
  data.x = DenseMatrix::Identity(3, 2);
  adaam::save_binary(data, dir.file("d.aam"));
  const auto back = adaam::load_binary(dir.file("d.aam"));
  EXPECT_EQ(back.x, data.x);
  EXPECT_FALSE(back.labels.has_value());
}

TEST(BinaryFormat, Errors) {
  TempDir dir;
  write_text(dir.file("bad.aam"), "NOPE0000000000000000000000000000");
  EXPECT_EQ(code_of([&] { adaam::load_binary(dir.file("bad.aam")); }), ErrorCode::BadMagic);
  adaam::LabeledDataset data;
  data.x = DenseMatrix::Ones(4, 4);
  adaam::save_binary(data, dir.file("ok.aam"));
  fs::resize_file(dir.file("ok.aam"), fs::file_size(dir.file("ok.aam")) - 3);
  EXPECT_EQ(code_of([&] { adaam::load_binary(dir.file("ok.aam")); }), ErrorCode::TruncatedFile);
  EXPECT_EQ(code_of([&] { adaam::load_binary(dir.file("missing.aam")); }), ErrorCode::Io);
}

TEST(CsvFile, SaveAndLoadKeepsFullPrecision) {
  TempDir dir;
  DenseMatrix x(2, 2);
  x << 0.1, 1.0 / 3.0, -2.5e-17, 12345.678901234567;
  adaam::save_csv(x, std::vector<std::size_t>{4, 2}, dir.file("x.csv"));
  const auto back = adaam::load_dataset(dir.file("x.csv"), adaam::LabelColumn{std::size_t{2}});
  EXPECT_EQ(back.x, x);
  EXPECT_EQ(*back.labels, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(back.name, "x");
}

TEST(SynthBlobs, ShapesLabelsAndSeparation) {
  const adaam::BlobSpec spec{.clusters = 4, .samples = 402, .features = 5, .separation = 10, .sigma = 2, .seed = 9};
  const auto data = adaam::synth_blobs(spec);
  ASSERT_EQ(data.x.rows(), 402);
  ASSERT_EQ(data.x.cols(), 5);
  for (std::size_t i = 0; i < 402; ++i) EXPECT_EQ((*data.labels)[i], i % 4);
  const DenseMatrix centres = adaam::blob_centres(spec);
  double closest = 1e300;
  for (Eigen::Index a = 0; a < 4; ++a)
    for (Eigen::Index b = a + 1; b < 4; ++b) closest = std::min(closest, (centres.row(a) - centres.row(b)).norm());
  EXPECT_NEAR(closest, 20.0, 1e-10);
  // Empirical within-blob spread is near sigma.
  double sq = 0.0;
  for (Eigen::Index i = 0; i < 402; ++i) sq += (data.x.row(i) - centres.row(i % 4)).squaredNorm();
  EXPECT_NEAR(std::sqrt(sq / (402.0 * 5.0)), 2.0, 0.2);
}

TEST(SynthBlobs, DeterministicAndCentresIndependentOfSampleCount) {
  const adaam::BlobSpec a{.samples = 100, .seed = 3};
  adaam::BlobSpec b = a;
  b.samples = 200;
  EXPECT_EQ(adaam::synth_blobs(a).x, adaam::synth_blobs(a).x);
  EXPECT_EQ(adaam::blob_centres(a), adaam::blob_centres(b));
  EXPECT_EQ(code_of([] { adaam::synth_blobs({.clusters = 5, .samples = 4}); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([] { adaam::synth_blobs({.sigma = 0}); }), ErrorCode::InvalidParams);
}
