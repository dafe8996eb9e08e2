#pragma once

// Shared plumbing: categorized errors, little-endian binary helpers,
// FNV-1a hashing, whole-file IO.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace specsel {

enum class ErrorKind { usage, config, io, dataset, artifact, numeric };

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::dataset: return "dataset";
    case ErrorKind::artifact: return "artifact";
    case ErrorKind::numeric: return "numeric";
  }
  return "unknown";
}

// Every failure surfaced to callers carries a category so the CLI can emit a
// single machine-parsable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// ---------------------------------------------------------------------------
// Little-endian byte encoding (explicit, host-order independent)

inline void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

inline void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline void append_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline void append_f32(std::vector<std::uint8_t>& out, float v) {
  append_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline void append_f64(std::vector<std::uint8_t>& out, double v) {
  append_u64(out, std::bit_cast<std::uint64_t>(v));
}

// Bounds-checked reader over a byte buffer; throws an artifact error on
// truncation so corrupt files fail loudly.
class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size, std::string source = "")
      : data_(data), size_(size), source_(std::move(source)) {}
  explicit ByteReader(const std::vector<std::uint8_t>& buf, std::string source = "")
      : ByteReader(buf.data(), buf.size(), std::move(source)) {}

  std::size_t remaining() const { return size_ - pos_; }

  std::uint8_t take_u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t take_u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_]) |
                      static_cast<std::uint16_t>(data_[pos_ + 1]) << 8;
    pos_ += 2;
    return v;
  }
  std::uint32_t take_u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t take_u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float take_f32() { return std::bit_cast<float>(take_u32()); }
  double take_f64() { return std::bit_cast<double>(take_u64()); }

  std::string take_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }

  void expect_magic(const char (&magic)[5]) {
    std::string got = take_string(4);
    if (got != std::string(magic, 4))
      throw Error(ErrorKind::artifact, source_ + ": bad magic bytes (expected " +
                                           std::string(magic, 4) + ")");
  }

  void expect_done() {
    if (pos_ != size_)
      throw Error(ErrorKind::artifact, source_ + ": trailing bytes after payload");
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > size_)
      throw Error(ErrorKind::artifact, source_ + ": truncated (need " + std::to_string(n) +
                                           " bytes at offset " + std::to_string(pos_) + ")");
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string source_;
};

// ---------------------------------------------------------------------------
// Hashing and file IO

inline std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size) {
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes) {
  return fnv1a64(bytes.data(), bytes.size());
}

inline std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::io, "read failed for " + path.string());
  return bytes;
}

inline void write_file(const std::filesystem::path& path, const void* data, std::size_t size) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

inline void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  write_file(path, bytes.data(), bytes.size());
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, text.data(), text.size());
}

inline std::string file_hash_hex(const std::filesystem::path& path) {
  return to_hex(fnv1a64(read_file(path)));
}

}  // namespace specsel
