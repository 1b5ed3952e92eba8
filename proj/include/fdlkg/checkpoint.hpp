#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fdlkg/noise.hpp"
#include "fdlkg/state.hpp"

namespace fdlkg {

// Binary snapshot stream. Little-endian layout:
//   magic "FDLKG1" | u16 version | u8 domain kind | u8 dimension | u32 n_modes |
//   f64 mass_squared | u8 profile length + bytes | n_modes f64 amplitudes |
//   u64 record count | records of (f64 t, n_modes f64 u, n_modes f64 v)
namespace detail {

inline void put_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}
inline void put_f64(std::string& s, double x) { put_u64(s, std::bit_cast<std::uint64_t>(x)); }

struct Reader {
  const std::string& s;
  std::size_t pos = 0;
  explicit Reader(const std::string& buf) : s(buf) {}
  void need(std::size_t n) const {
    if (pos + n > s.size()) throw config_error("checkpoint truncated");
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<unsigned char>(s[pos]);
    v |= static_cast<std::uint16_t>(static_cast<unsigned char>(s[pos + 1])) << 8;
    pos += 2;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<unsigned char>(s[pos++]);
  }
  double f64() { return std::bit_cast<double>(u64()); }
};

}  // namespace detail

struct Checkpoint {
  DomainSpec domain;
  int n_modes = 0;
  std::string profile;
  std::vector<double> amplitudes;
  std::vector<double> times;
  std::vector<FieldState> states;
};

inline void write_checkpoint(const std::string& path, const SpectralBasis& b, const NoiseSpec& n,
                             const std::vector<double>& times,
                             const std::vector<FieldState>& states) {
  if (times.size() != states.size()) throw config_error("checkpoint: times/states mismatch");
  std::string buf;
  buf.append("FDLKG1");
  detail::put_u16(buf, 1);
  buf.push_back(static_cast<char>(b.domain.kind));
  buf.push_back(static_cast<char>(b.domain.dimension));
  detail::put_u32(buf, static_cast<std::uint32_t>(b.n_modes));
  detail::put_f64(buf, b.domain.mass_squared);
  if (n.profile.size() > 255) throw config_error("checkpoint: profile name too long");
  buf.push_back(static_cast<char>(n.profile.size()));
  buf.append(n.profile);
  for (double a : n.a) detail::put_f64(buf, a);
  detail::put_u64(buf, times.size());
  for (std::size_t r = 0; r < times.size(); ++r) {
    detail::put_f64(buf, times[r]);
    for (double x : states[r].u) detail::put_f64(buf, x);
    for (double x : states[r].v) detail::put_f64(buf, x);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open checkpoint for writing: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open checkpoint: " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  detail::Reader r(buf);
  r.need(6);
  if (buf.compare(0, 6, "FDLKG1") != 0) throw config_error("checkpoint: bad magic");
  r.pos = 6;
  const std::uint16_t version = r.u16();
  if (version != 1) throw config_error("checkpoint: unsupported version");

  Checkpoint cp;
  cp.domain.kind = static_cast<DomainKind>(r.u8());
  cp.domain.dimension = r.u8();
  cp.n_modes = static_cast<int>(r.u32());
  cp.domain.mass_squared = r.f64();
  const std::uint8_t plen = r.u8();
  r.need(plen);
  cp.profile.assign(buf, r.pos, plen);
  r.pos += plen;
  cp.amplitudes.resize(cp.n_modes);
  for (auto& a : cp.amplitudes) a = r.f64();
  const std::uint64_t count = r.u64();
  cp.times.resize(count);
  cp.states.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    cp.times[i] = r.f64();
    cp.states[i].u.resize(cp.n_modes);
    cp.states[i].v.resize(cp.n_modes);
    for (auto& x : cp.states[i].u) x = r.f64();
    for (auto& x : cp.states[i].v) x = r.f64();
  }
  return cp;
}

}  // namespace fdlkg
