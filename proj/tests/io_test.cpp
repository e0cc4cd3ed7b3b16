#include "gcrl/io.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>

namespace gcrl {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gcrl_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  std::string error_of(const std::function<void()>& f) {
    try {
      f();
    } catch (const IoError& e) {
      return e.what();
    }
    return "";
  }

  fs::path dir_;
};

TEST_F(IoTest, ReadsSmallCsv) {
  const Matrix m = read_csv_matrix(write("x.csv", "0,0.5,1\n1,0.5,0\n"));
  Matrix expected(2, 3);
  expected << 0, 0.5, 1, 1, 0.5, 0;
  EXPECT_EQ(m, expected);
  const FeatureSequence seq = ingest(dir_ / "x.csv");
  EXPECT_EQ(seq.dim(), 2);
  EXPECT_EQ(seq.length(), 3);
  EXPECT_EQ(seq.name, "x");
}

TEST_F(IoTest, IngestNormalizesAndAttachesLabels) {
  const fs::path x = write("x.csv", "0,2,4\n4,2,8\n");
  const fs::path l = write("l.csv", "0\n0\n1\n");
  const FeatureSequence seq = ingest(x, l);
  EXPECT_DOUBLE_EQ(seq.features.maxCoeff(), 1.0);
  EXPECT_DOUBLE_EQ(seq.features(0, 1), 0.25);
  EXPECT_EQ(*seq.labels, (Labels{0, 0, 1}));
  const fs::path bad = write("bad.csv", "0,1\n");
  EXPECT_NE(error_of([&] { ingest(x, bad); }).find("dimension mismatch"), std::string::npos);
}

TEST_F(IoTest, DistinctCsvErrors) {
  const std::string nan_msg = error_of([&] { read_csv_matrix(write("nan.csv", "0,1\n1,nan\n")); });
  EXPECT_NE(nan_msg.find("non-finite"), std::string::npos);
  EXPECT_NE(nan_msg.find("row 1, column 1"), std::string::npos);

  const std::string bad = error_of([&] { read_csv_matrix(write("bad.csv", "0,1\n1,x\n")); });
  EXPECT_NE(bad.find("malformed number"), std::string::npos);

  const std::string ragged = error_of([&] { read_csv_matrix(write("rag.csv", "0,1\n1\n")); });
  EXPECT_NE(ragged.find("dimension mismatch"), std::string::npos);

  const std::string missing = error_of([&] { read_csv_matrix(dir_ / "nope.csv"); });
  EXPECT_NE(missing.find("not found"), std::string::npos);
  EXPECT_NE(missing.find("nope.csv"), std::string::npos);
}

TEST_F(IoTest, CsvRoundTripIsExact) {
  Rng rng(51);
  const Matrix m = testing::uniform_matrix(rng, 5, 9);
  write_csv_matrix(dir_ / "rt.csv", m);
  EXPECT_EQ(read_csv_matrix(dir_ / "rt.csv"), m);
}

TEST_F(IoTest, BinaryRoundTripWithAndWithoutLabels) {
  Rng rng(52);
  FeatureSequence seq;
  seq.features = testing::uniform_matrix(rng, 4, 7);
  write_binary(dir_ / "a.gcrl", seq);
  EXPECT_TRUE(is_binary_features(dir_ / "a.gcrl"));
  FeatureSequence back = read_binary(dir_ / "a.gcrl");
  EXPECT_EQ(back.features, seq.features);
  EXPECT_FALSE(back.labels.has_value());

  seq.labels = Labels{0, 1, 1, 2, 2, 0, -3};
  write_binary(dir_ / "b.gcrl", seq);
  back = read_binary(dir_ / "b.gcrl");
  EXPECT_EQ(back.features, seq.features);
  EXPECT_EQ(back.labels, seq.labels);
}

TEST_F(IoTest, BinaryLayoutIsLittleEndian) {
  FeatureSequence seq;
  seq.features = Matrix(1, 2);
  seq.features << 1.0, 0.5;
  seq.labels = Labels{3, 4};
  write_binary(dir_ / "c.gcrl", seq);
  std::ifstream in(dir_ / "c.gcrl", std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ASSERT_EQ(bytes.size(), 4u + 12u + 16u + 4u + 8u);
  EXPECT_EQ(bytes.substr(0, 4), "GCRL");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 1);
  EXPECT_EQ(bytes[12], 2);
  // 1.0 = 0x3FF0000000000000
  EXPECT_EQ(static_cast<unsigned char>(bytes[16 + 7]), 0x3F);
  EXPECT_EQ(static_cast<unsigned char>(bytes[16 + 6]), 0xF0);
  EXPECT_EQ(bytes[32], 2);
  EXPECT_EQ(bytes[36], 3);
}

TEST_F(IoTest, DistinctBinaryErrors) {
  const fs::path magic = write("m.gcrl", "NOPE0000");
  const fs::path version = write("v.gcrl", std::string("GCRL\x07\0\0\0", 8));
  const fs::path truncated = write("t.gcrl", std::string("GCRL\x01\0\0\0\x02\0", 10));
  const fs::path short_data =
      write("s.gcrl", std::string("GCRL\x01\0\0\0\x02\0\0\0\x02\0\0\0\0\0\0\0\0\0\0\0", 24));
  auto read_error = [&](const fs::path& p) { return error_of([&] { read_binary(p); }); };
  EXPECT_NE(read_error(magic).find("bad magic"), std::string::npos);
  EXPECT_NE(read_error(version).find("unsupported version"), std::string::npos);
  EXPECT_NE(read_error(truncated).find("malformed header"), std::string::npos);
  EXPECT_NE(read_error(short_data).find("dimension mismatch"), std::string::npos);

  FeatureSequence seq;
  seq.features = Matrix::Zero(1, 2);
  seq.features(0, 1) = std::numeric_limits<double>::infinity();
  write_binary(dir_ / "inf.gcrl", seq);
  const std::string inf = error_of([&] { read_binary(dir_ / "inf.gcrl"); });
  EXPECT_NE(inf.find("non-finite"), std::string::npos);
  EXPECT_NE(inf.find("column 1"), std::string::npos);
}

TEST_F(IoTest, IngestDetectsBinary) {
  FeatureSequence seq;
  seq.features = Matrix(2, 3);
  seq.features << 0, 1, 2, 3, 4, 8;
  seq.labels = Labels{0, 1, 1};
  write_binary(dir_ / "d.gcrl", seq);
  const FeatureSequence back = ingest(dir_ / "d.gcrl");
  EXPECT_EQ(back.features, seq.features / 8.0);
  EXPECT_EQ(back.labels, seq.labels);
}

TEST_F(IoTest, LabelsCsvAcceptsCommasAndNewlines) {
  EXPECT_EQ(read_labels_csv(write("l.csv", "0,1,1\n2\n")), (Labels{0, 1, 1, 2}));
  EXPECT_NE(error_of([&] { read_labels_csv(write("b.csv", "0,a\n")); }).find("malformed label"),
            std::string::npos);
}

}  // namespace
}  // namespace gcrl
