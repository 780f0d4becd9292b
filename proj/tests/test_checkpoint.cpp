#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "itsr/nn/checkpoint.hpp"
#include "support.hpp"

using namespace itsr;
using namespace itsr::nn;

namespace {
std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }
}  // namespace

TEST(Checkpoint, RoundTripIsExact) {
  PolicyValueNet<float> a(lenet5_config(27, 36), 1);
  // Give the momentum buffers non-zero content too.
  for (auto* p : a.parameters()) p->momentum.setConstant(0.25f);
  const auto path = temp_file("itsr_rt.ckpt");
  save(a, path, {2, 84, 99});
  PolicyValueNet<float> b(lenet5_config(27, 36), 2);
  const auto meta = load(path, b);
  EXPECT_EQ(meta.stage, 2u);
  EXPECT_EQ(meta.epoch, 84u);
  EXPECT_EQ(meta.seed, 99u);
  const auto pa = a.parameters(), pb = b.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i]->value, pb[i]->value);
    EXPECT_EQ(pa[i]->momentum, pb[i]->momentum);
  }
  EXPECT_EQ(encode_checkpoint(to_checkpoint(a, meta)), encode_checkpoint(to_checkpoint(b, meta)));
  std::filesystem::remove(path);
}

TEST(Checkpoint, ForwardOutputsSurviveRoundTrip) {
  PolicyValueNet<float> a(small_cnn_config(32, 5), 3);
  PolicyValueNet<float> b(small_cnn_config(32, 5), 4);
  restore_checkpoint(decode_checkpoint(encode_checkpoint(to_checkpoint(a, {}))), b);
  std::mt19937_64 rng(1);
  const Image x = itsr::helpers::random_image(32, rng), y = itsr::helpers::random_image(32, rng);
  const ActionMask mask = ActionMask::Constant(5, true);
  const auto oa = a.forward(x, y, mask), ob = b.forward(x, y, mask);
  EXPECT_EQ(oa.policy, ob.policy);
  EXPECT_EQ(oa.value, ob.value);
}

TEST(Checkpoint, WrongActionCountIsShapeError) {
  const PolicyValueNet<float> a(lenet5_config(27, 36), 1);
  PolicyValueNet<float> b(lenet5_config(27, 4), 1);
  EXPECT_THROW(restore_checkpoint(to_checkpoint(a, {}), b), ShapeError);
}

TEST(Checkpoint, HeadMismatchIsShapeError) {
  const PolicyValueNet<float> a(lenet5_config(27, 4, HeadKind::Classifier), 1);
  PolicyValueNet<float> b(lenet5_config(27, 4), 1);
  EXPECT_THROW(restore_checkpoint(to_checkpoint(a, {}), b), ShapeError);
}

TEST(Checkpoint, TruncatedFileIsFormatError) {
  const PolicyValueNet<float> a(lenet5_config(27, 4), 1);
  const std::string bytes = encode_checkpoint(to_checkpoint(a, {}));
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{12}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_THROW(decode_checkpoint(bytes.substr(0, cut)), FormatError) << cut;
  }
  const auto path = temp_file("itsr_trunc.ckpt");
  std::ofstream(path, std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  EXPECT_THROW(read_checkpoint(path), FormatError);
  std::filesystem::remove(path);
}

TEST(Checkpoint, BadMagicVersionAndTrailingBytes) {
  const PolicyValueNet<float> a(lenet5_config(27, 4), 1);
  std::string bytes = encode_checkpoint(to_checkpoint(a, {}));
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  bad = bytes;
  bad[8] = 7;
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  EXPECT_THROW(decode_checkpoint(bytes + "x"), FormatError);
}

TEST(Checkpoint, LayoutHeader) {
  const PolicyValueNet<float> a(lenet5_config(27, 4), 1);
  const std::string bytes = encode_checkpoint(to_checkpoint(a, {1, 2, 3}));
  EXPECT_EQ(bytes.substr(0, 8), "ITSRCKPT");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1);  // version, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 1);  // stage
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 2);  // epoch
  EXPECT_EQ(static_cast<unsigned char>(bytes[20]), 3);  // seed
}

TEST(Checkpoint, MissingFileIsIoError) { EXPECT_THROW(read_checkpoint(temp_file("itsr_nope.ckpt")), IoError); }
