#pragma once

// 16-bit PCM mono RIFF/WAVE writer and reader.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdg/dsp.hpp"

namespace tdg::wav {

namespace detail {

inline void put_u16(std::vector<char>& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32(const std::vector<char>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in.at(at + i))) << (8 * i);
  return v;
}

inline std::uint16_t get_u16(const std::vector<char>& in, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(in.at(at)) |
                                    (static_cast<unsigned char>(in.at(at + 1)) << 8));
}

}  // namespace detail

inline std::int16_t to_pcm16(double x) {
  const double clipped = std::clamp(x, -1.0, 1.0);
  return static_cast<std::int16_t>(std::lround(clipped * 32767.0));
}

// Encodes the full file image; samples outside [-1, 1] are clipped.
inline std::vector<char> encode(const dsp::TimeSignal& sig) {
  const auto rate = static_cast<std::uint32_t>(std::lround(sig.sample_rate));
  const auto data_bytes = static_cast<std::uint32_t>(sig.size() * 2);
  std::vector<char> out;
  out.reserve(44 + data_bytes);
  for (char c : std::string("RIFF")) out.push_back(c);
  detail::put_u32(out, 36 + data_bytes);
  for (char c : std::string("WAVEfmt ")) out.push_back(c);
  detail::put_u32(out, 16);        // fmt chunk size
  detail::put_u16(out, 1);         // PCM
  detail::put_u16(out, 1);         // mono
  detail::put_u32(out, rate);
  detail::put_u32(out, rate * 2);  // byte rate
  detail::put_u16(out, 2);         // block align
  detail::put_u16(out, 16);        // bits per sample
  for (char c : std::string("data")) out.push_back(c);
  detail::put_u32(out, data_bytes);
  for (double s : sig.samples) detail::put_u16(out, static_cast<std::uint16_t>(to_pcm16(s)));
  return out;
}

inline void write(const std::string& path, const dsp::TimeSignal& sig) {
  const auto bytes = encode(sig);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

inline dsp::TimeSignal decode(const std::vector<char>& bytes) {
  auto tag = [&](std::size_t at, const char* s) { return std::string(bytes.begin() + at, bytes.begin() + at + 4) == s; };
  if (bytes.size() < 44 || !tag(0, "RIFF") || !tag(8, "WAVE")) throw std::runtime_error("not a RIFF/WAVE file");
  std::size_t pos = 12;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t len = detail::get_u32(bytes, pos + 4);
    if (tag(pos, "fmt ")) {
      if (detail::get_u16(bytes, pos + 8) != 1 || detail::get_u16(bytes, pos + 10) != 1 ||
          detail::get_u16(bytes, pos + 22) != 16) {
        throw std::runtime_error("only 16-bit PCM mono is supported");
      }
      rate = detail::get_u32(bytes, pos + 12);
      have_fmt = true;
    } else if (tag(pos, "data")) {
      if (!have_fmt) throw std::runtime_error("data chunk before fmt chunk");
      if (pos + 8 + len > bytes.size()) throw std::runtime_error("truncated data chunk");
      dsp::TimeSignal sig{std::vector<double>(len / 2), static_cast<double>(rate)};
      for (std::size_t i = 0; i < sig.size(); ++i)
        sig.samples[i] = static_cast<std::int16_t>(detail::get_u16(bytes, pos + 8 + 2 * i)) / 32767.0;
      return sig;
    }
    pos += 8 + len + (len & 1);
  }
  throw std::runtime_error("no data chunk");
}

inline dsp::TimeSignal read(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

}  // namespace tdg::wav
