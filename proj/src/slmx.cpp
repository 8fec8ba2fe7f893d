// SLMX binary matrix format:
//   bytes 0..3   magic "SLMX"
//   bytes 4..7   format version, u32 little-endian (currently 1)
//   bytes 8..15  rows, u64 little-endian
//   bytes 16..23 cols, u64 little-endian
//   then rows*cols IEEE-754 binary64 entries, row-major, little-endian.

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>

#include "latent/error.hpp"
#include "latent/matrix.hpp"

namespace latent {

namespace {

constexpr unsigned char kMagic[4] = {'S', 'L', 'M', 'X'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 24;

void put_le(std::vector<unsigned char>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const unsigned char> in, std::size_t offset, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<unsigned char> encode_matrix(const Matrix& m) {
  std::vector<unsigned char> out;
  out.reserve(kHeaderSize + 8 * m.data().size());
  for (unsigned char c : kMagic) out.push_back(c);
  put_le(out, kVersion, 4);
  put_le(out, m.rows(), 8);
  put_le(out, m.cols(), 8);
  for (double v : m.data()) put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  return out;
}

Matrix decode_matrix(std::span<const unsigned char> bytes) {
  if (bytes.size() < 4) throw FormatError("truncated SLMX magic", bytes.size());
  for (std::size_t i = 0; i < 4; ++i)
    if (bytes[i] != kMagic[i]) throw FormatError("bad SLMX magic bytes", i);
  if (bytes.size() < 8) throw FormatError("truncated SLMX version", bytes.size());
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
  if (version != kVersion) throw FormatError("unsupported SLMX version " + std::to_string(version), 4);
  if (bytes.size() < kHeaderSize) throw FormatError("truncated SLMX header", bytes.size());
  const std::uint64_t rows = get_le(bytes, 8, 8);
  const std::uint64_t cols = get_le(bytes, 16, 8);
  constexpr std::uint64_t kMaxEntries = std::numeric_limits<std::uint64_t>::max() / 8;
  if (cols != 0 && rows > kMaxEntries / cols) throw FormatError("SLMX dimension overflow", 8);
  const std::uint64_t count = rows * cols;
  if (count > (std::numeric_limits<std::size_t>::max() - kHeaderSize) / 8)
    throw FormatError("SLMX dimension overflow", 8);
  const std::size_t expected = kHeaderSize + static_cast<std::size_t>(count) * 8;
  if (bytes.size() < expected) {
    const std::size_t complete = (bytes.size() - kHeaderSize) / 8;
    throw FormatError("truncated SLMX payload", kHeaderSize + complete * 8);
  }
  if (bytes.size() > expected) throw FormatError("trailing bytes after SLMX payload", expected);
  std::vector<double> entries(static_cast<std::size_t>(count));
  for (std::size_t k = 0; k < entries.size(); ++k)
    entries[k] = std::bit_cast<double>(get_le(bytes, kHeaderSize + 8 * k, 8));
  return Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(entries));
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  const auto bytes = encode_matrix(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_matrix(bytes);
}

}  // namespace latent
