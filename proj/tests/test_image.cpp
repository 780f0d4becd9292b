#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "itsr/image.hpp"
#include "support.hpp"

using namespace itsr;

TEST(Image, ConstructionAndAccess) {
  Image im(4, 7);
  EXPECT_EQ(im.side(), 4);
  EXPECT_EQ(im.size(), 16);
  EXPECT_EQ(im(3, 3), 7);
  im(1, 2) = 200;
  EXPECT_EQ(im.data()[1 * 4 + 2], 200);
}

TEST(Image, RejectsNonSquare) {
  PixelArray p(2, 3);
  EXPECT_THROW(Image{p}, DimensionMismatch);
}

TEST(Image, EqualityIsBitExact) {
  std::mt19937_64 rng(1);
  Image a = helpers::random_image(8, rng);
  Image b = a;
  EXPECT_EQ(a, b);
  b(7, 7) ^= 1;
  EXPECT_FALSE(a == b);
  EXPECT_FALSE(Image(3) == Image(4));
}

TEST(Pgm, RoundTrip) {
  std::mt19937_64 rng(2);
  for (int side : {1, 5, 32}) {
    const Image a = helpers::random_image(side, rng);
    EXPECT_EQ(decode_pgm(encode_pgm(a)), a);
  }
}

TEST(Pgm, HeaderWithComments) {
  std::string bytes = "P5\n# made by hand\n2 2\n# another\n255\n";
  bytes += std::string{'\x00', '\x10', '\x20', '\xff'};
  const Image im = decode_pgm(bytes);
  EXPECT_EQ(im(0, 1), 0x10);
  EXPECT_EQ(im(1, 1), 0xff);
}

TEST(Pgm, MalformedInputs) {
  EXPECT_THROW(decode_pgm("P2\n2 2\n255\n0 0 0 0"), IoError);
  EXPECT_THROW(decode_pgm("P5\n2 2\n65535\n"), IoError);
  EXPECT_THROW(decode_pgm("P5\n2 2\n255\n\x01"), IoError);
  EXPECT_THROW(decode_pgm("P5\n3 2\n255\n123456"), DimensionMismatch);
}

TEST(Pgm, FilesAndDirectories) {
  const auto dir = std::filesystem::temp_directory_path() / "itsr_test_pgm";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(3);
  const Image a = helpers::random_image(6, rng), b = helpers::random_image(6, rng);
  write_pgm(b, dir / "b.pgm");
  write_pgm(a, dir / "a.pgm");
  std::ofstream(dir / "notes.txt") << "ignored";
  const auto all = load_pgm_directory(dir);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0], a);
  EXPECT_EQ(all[1], b);
  EXPECT_THROW(read_pgm(dir / "missing.pgm"), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Image, HashDistinguishes) {
  Image a(4), b(4);
  b(0, 0) = 1;
  EXPECT_NE(hash_image(a), hash_image(b));
  EXPECT_EQ(hash_image(a), hash_image(Image(4)));
}
