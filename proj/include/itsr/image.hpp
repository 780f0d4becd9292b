#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace itsr {

using PixelArray = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class DimensionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Square 8-bit grayscale image. Pixel (r, c) is row r, column c; storage is row-major.
class Image {
 public:
  Image() = default;
  explicit Image(int side, std::uint8_t fill = 0);
  explicit Image(PixelArray pixels);

  int side() const { return static_cast<int>(pixels_.rows()); }
  int size() const { return static_cast<int>(pixels_.size()); }
  bool empty() const { return pixels_.size() == 0; }

  std::uint8_t operator()(int r, int c) const { return pixels_(r, c); }
  std::uint8_t& operator()(int r, int c) { return pixels_(r, c); }

  const PixelArray& pixels() const { return pixels_; }
  PixelArray& pixels() { return pixels_; }
  const std::uint8_t* data() const { return pixels_.data(); }

  friend bool operator==(const Image& a, const Image& b) {
    return a.pixels_.rows() == b.pixels_.rows() && a.pixels_.cols() == b.pixels_.cols() &&
           (a.pixels_ == b.pixels_).all();
  }

 private:
  PixelArray pixels_;
};

std::uint64_t hash_image(const Image& image);

// Binary PGM (P5, maxval 255).
void write_pgm(const Image& image, const std::filesystem::path& path);
std::string encode_pgm(const Image& image);
Image read_pgm(const std::filesystem::path& path);
Image decode_pgm(const std::string& bytes);

/// Every *.pgm under `dir`, sorted by file name.
std::vector<Image> load_pgm_directory(const std::filesystem::path& dir);

}  // namespace itsr
