#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace s2r {

// Little-endian binary encoding.
class ByteWriter {
 public:
  void raw(const void* data, std::size_t n);
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void f64(double v);

  const std::vector<unsigned char>& bytes() const { return bytes_; }
  std::vector<unsigned char> take() { return std::move(bytes_); }

 private:
  std::vector<unsigned char> bytes_;
};

// Throws CheckpointError on truncated input.
class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}
  std::uint16_t u16();
  std::uint32_t u32();
  double f64();
  bool at_end() const { return at_ == bytes_.size(); }

 private:
  std::uint64_t take(std::size_t n);
  std::span<const unsigned char> bytes_;
  std::size_t at_ = 0;
};

// Writes to a sibling temporary and renames over `path`, so readers never
// observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);
std::string read_file(const std::filesystem::path& path);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// Shortest round-trip decimal representation with '.' separator.
std::string format_double(double v);

std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace s2r
