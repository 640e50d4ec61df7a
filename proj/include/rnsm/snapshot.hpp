#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "field.hpp"
#include "multiplier.hpp"

namespace rnsm {

// Snapshot file layout:
//   8 bytes   magic "RNSMSNP1"
//   8 bytes   little-endian uint64 header length H
//   H bytes   JSON header (grid, blocks, kinds, time, free-form metadata)
//   payload   float64 little-endian (re, im) pairs; block-major, then
//             component-major, then the row-major half spectrum.
inline constexpr char kSnapshotMagic[8] = {'R', 'N', 'S', 'M', 'S', 'N', 'P', '1'};

inline nlohmann::json to_json(const MultiplierSpec& s) {
  return {{"family", to_string(s.family)},
          {"exponent", s.exponent},
          {"alpha", s.alpha},
          {"coefficient", s.coefficient}};
}

inline MultiplierSpec multiplier_from_json(const nlohmann::json& j) {
  MultiplierSpec s;
  s.family = symbol_family_from(j.at("family").get<std::string>());
  s.exponent = j.value("exponent", 0.0);
  s.alpha = j.value("alpha", 0.0);
  s.coefficient = j.value("coefficient", 1.0);
  return s;
}

namespace detail {
inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}
inline std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated snapshot");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}
inline void put_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}
inline double get_f64(std::istream& is) {
  const std::uint64_t v = get_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}
}  // namespace detail

inline void write_snapshot(const std::string& path, const State& s, double t,
                           const nlohmann::json& meta = nlohmann::json::object()) {
  if (s.empty()) throw std::invalid_argument("empty state");
  const Grid& g = s[0].grid();
  nlohmann::json h;
  h["n_dim"] = g.dims();
  h["resolution"] = g.resolution();
  h["length"] = g.length();
  h["dealias_fraction"] = g.dealias_fraction();
  h["blocks"] = s.size();
  h["time"] = t;
  h["layout"] = "block, component, row-major half spectrum; (re, im) float64 little-endian";
  nlohmann::json kinds = nlohmann::json::array();
  for (const auto& f : s) kinds.push_back(f.kind() == FieldKind::velocity ? "velocity" : "magnetic");
  h["kinds"] = kinds;
  h["meta"] = meta;
  const std::string hs = h.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os.write(kSnapshotMagic, 8);
  detail::put_u64(os, hs.size());
  os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& f : s)
    for (int c = 0; c < f.dims(); ++c)
      for (const auto& z : f[c]) {
        detail::put_f64(os, z.real());
        detail::put_f64(os, z.imag());
      }
}

struct Snapshot {
  State state;
  double time = 0;
  nlohmann::json header;
};

inline Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kSnapshotMagic, 8) != 0)
    throw std::runtime_error(path + " is not a snapshot file");
  const auto hlen = detail::get_u64(is);
  std::string hs(hlen, '\0');
  if (!is.read(hs.data(), static_cast<std::streamsize>(hlen)))
    throw std::runtime_error("truncated snapshot header");
  Snapshot snap;
  snap.header = nlohmann::json::parse(hs);
  const auto& h = snap.header;
  auto g = make_grid(h.at("n_dim").get<int>(), h.at("resolution").get<int>(),
                     h.at("length").get<double>(), h.at("dealias_fraction").get<double>());
  snap.time = h.at("time").get<double>();
  const auto kinds = h.at("kinds");
  for (std::size_t b = 0; b < h.at("blocks").get<std::size_t>(); ++b) {
    Field f(g, kinds.at(b) == "magnetic" ? FieldKind::magnetic : FieldKind::velocity);
    for (int c = 0; c < f.dims(); ++c)
      for (auto& z : f[c]) {
        const double re = detail::get_f64(is);
        const double im = detail::get_f64(is);
        z = cplx(re, im);
      }
    snap.state.push_back(std::move(f));
  }
  return snap;
}

}  // namespace rnsm
