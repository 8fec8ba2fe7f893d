#include "latent/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "latent/error.hpp"

namespace latent {

Image::Image(int h, int w, Vector v) : height(h), width(w), values(std::move(v)) {
  if (values.size() != static_cast<std::size_t>(h) * w * 3) throw DimensionError("image value count mismatch");
}

std::vector<unsigned char> encode_ppm(const Image& image, const std::vector<std::string>& comments) {
  std::string header = "P6\n";
  for (const auto& c : comments) header += "# " + c + "\n";
  header += std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(out.size() + image.values.size());
  for (double v : image.values) {
    const double clamped = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
    out.push_back(static_cast<unsigned char>(std::lround(255.0 * clamped)));
  }
  return out;
}

Image decode_ppm(const std::vector<unsigned char>& bytes) {
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_space_and_comments();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw FormatError("malformed PPM header", pos);
    int v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw FormatError("not a binary PPM", 0);
  pos = 2;
  const int w = read_int();
  const int h = read_int();
  const int maxval = read_int();
  if (maxval != 255) throw FormatError("only 8-bit PPM is supported", pos);
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() < pos + n) throw FormatError("truncated PPM payload", bytes.size());
  Image img(h, w);
  for (std::size_t i = 0; i < n; ++i) img.values[i] = bytes[pos + i] / 255.0;
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& image, const std::vector<std::string>& comments) {
  const auto bytes = encode_ppm(image, comments);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_ppm(bytes);
}

}  // namespace latent
