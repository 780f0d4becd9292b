#include "itsr/image.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace itsr {

Image::Image(int side, std::uint8_t fill) : pixels_(PixelArray::Constant(side, side, fill)) {}

Image::Image(PixelArray pixels) : pixels_(std::move(pixels)) {
  if (pixels_.rows() != pixels_.cols()) {
    throw DimensionMismatch("image must be square, got " + std::to_string(pixels_.rows()) + "x" +
                            std::to_string(pixels_.cols()));
  }
}

std::uint64_t hash_image(const Image& image) {
  // FNV-1a
  std::uint64_t h = 1469598103934665603ULL ^ static_cast<std::uint64_t>(image.side());
  const auto* p = image.data();
  for (int i = 0; i < image.size(); ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string encode_pgm(const Image& image) {
  std::ostringstream out;
  out << "P5\n" << image.side() << ' ' << image.side() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data()), image.size());
  return out.str();
}

void write_pgm(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const auto bytes = encode_pgm(image);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  std::string token;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    token.push_back(bytes[pos++]);
  }
  return token;
}

}  // namespace

Image decode_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P5") throw IoError("not a binary PGM (P5) file");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token(bytes, pos));
    height = std::stoi(next_token(bytes, pos));
    maxval = std::stoi(next_token(bytes, pos));
  } catch (const std::exception&) {
    throw IoError("malformed PGM header");
  }
  if (maxval != 255) throw IoError("only maxval 255 is supported");
  if (width <= 0 || height <= 0) throw IoError("bad PGM dimensions");
  if (width != height) throw DimensionMismatch("PGM image is not square");
  ++pos;  // single whitespace after maxval
  const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < pos + count) throw IoError("truncated PGM pixel data");
  PixelArray pixels(height, width);
  std::copy_n(reinterpret_cast<const std::uint8_t*>(bytes.data() + pos), count, pixels.data());
  return Image(std::move(pixels));
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_pgm(buf.str());
}

std::vector<Image> load_pgm_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Image> images;
  images.reserve(files.size());
  for (const auto& f : files) images.push_back(read_pgm(f));
  return images;
}

}  // namespace itsr
