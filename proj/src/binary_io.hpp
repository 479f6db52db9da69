#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cohere::io {

/// Little-endian byte sink; flushes to disk in one write.
class ByteWriter {
 public:
  void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void f32(float v);
  void f64(double v);
  void text(std::string_view s);  // u32 length + bytes

  const std::vector<unsigned char>& bytes() const { return bytes_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  ByteReader(std::vector<unsigned char> bytes, std::string source);
  static ByteReader load(const std::filesystem::path& path);

  void expect_magic(std::string_view m);
  std::uint16_t u16();
  std::uint32_t u32();
  float f32();
  double f64();
  std::string text();

  bool at_end() const { return pos_ == bytes_.size(); }
  void expect_end();
  const std::string& source() const { return source_; }

 private:
  void need(std::size_t n);

  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
  std::string source_;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

}  // namespace cohere::io
