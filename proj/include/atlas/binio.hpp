#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "atlas/errors.hpp"

// Little-endian primitives for the snapshot and checkpoint formats.
namespace atlas::binio {

inline void write_u64(std::ostream& out, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u8(std::ostream& out, uint8_t v) {
  out.write(reinterpret_cast<const char*>(&v), 1);
}

inline void write_i64(std::ostream& out, int64_t v) { write_u64(out, static_cast<uint64_t>(v)); }
inline void write_i32(std::ostream& out, int32_t v) { write_u32(out, static_cast<uint32_t>(v)); }

inline void write_f64(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(out, bits);
}

inline void write_str(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw DataError("truncated input while reading u64");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

inline uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DataError("truncated input while reading u32");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

inline uint8_t read_u8(std::istream& in) {
  char c;
  in.read(&c, 1);
  if (!in) throw DataError("truncated input while reading u8");
  return static_cast<uint8_t>(c);
}

inline int64_t read_i64(std::istream& in) { return static_cast<int64_t>(read_u64(in)); }
inline int32_t read_i32(std::istream& in) { return static_cast<int32_t>(read_u32(in)); }

inline double read_f64(std::istream& in) {
  const uint64_t bits = read_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

inline std::string read_str(std::istream& in, uint32_t max_len = 1u << 20) {
  const uint32_t len = read_u32(in);
  if (len > max_len) throw DataError("string length field out of range");
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("truncated input while reading string");
  return s;
}

}  // namespace atlas::binio
