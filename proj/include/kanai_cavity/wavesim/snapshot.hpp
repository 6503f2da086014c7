#pragma once

#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kanai_cavity/error.hpp"
#include "kanai_cavity/wavesim/field.hpp"

namespace kanai_cavity {

// Field snapshot: <base>.bin holds interleaved (re, im) little-endian float64,
// <base>.json holds {n, dx, x0, wavelength, plane_tag, count}.

namespace detail {

inline void put_le_double(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

inline double get_le_double(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace detail

inline std::string encode_snapshot_data(const ComplexField& f) {
  std::string out;
  out.reserve(f.size() * 16);
  for (const auto& v : f.samples) {
    detail::put_le_double(out, v.real());
    detail::put_le_double(out, v.imag());
  }
  return out;
}

inline nlohmann::ordered_json snapshot_sidecar(const ComplexField& f, std::size_t n) {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["dx"] = f.dx;
  j["x0"] = f.x0;
  j["wavelength"] = f.wavelength;
  j["plane_tag"] = to_string(f.plane);
  j["count"] = f.size();
  return j;
}

struct FieldSnapshot {
  std::size_t n = 0;
  ComplexField field;
};

inline FieldSnapshot decode_snapshot(const std::string& data, const nlohmann::json& sidecar) {
  FieldSnapshot s;
  try {
    s.n = sidecar.at("n").get<std::size_t>();
    s.field.dx = sidecar.at("dx").get<double>();
    s.field.x0 = sidecar.at("x0").get<double>();
    s.field.wavelength = sidecar.at("wavelength").get<double>();
    s.field.plane = plane_from_string(sidecar.at("plane_tag").get<std::string>());
    const auto count = sidecar.at("count").get<std::size_t>();
    if (data.size() != count * 16) throw ValidationError("snapshot: data length does not match count");
    s.field.samples.resize(count);
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    for (std::size_t j = 0; j < count; ++j) {
      s.field.samples[j] = {detail::get_le_double(p + 16 * j), detail::get_le_double(p + 16 * j + 8)};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("snapshot sidecar: ") + e.what());
  }
  return s;
}

inline FieldSnapshot read_snapshot(const std::string& base) {
  std::ifstream bin(base + ".bin", std::ios::binary);
  std::ifstream side(base + ".json");
  if (!bin || !side) throw ValidationError("snapshot: cannot open " + base);
  std::string data((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  nlohmann::json j;
  try {
    side >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("snapshot sidecar: ") + e.what());
  }
  return decode_snapshot(data, j);
}

}  // namespace kanai_cavity
