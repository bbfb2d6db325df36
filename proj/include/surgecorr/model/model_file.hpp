#pragma once

// SGCW weight container, all fields little-endian:
//
//   "SGCW"                      4 bytes
//   version                     u32 (= 1)
//   w_in, w_out, conv_filters,
//   conv_kernel, lstm1_units,
//   lstm2_units, dense_units    7 x u32
//   scaler min, scaler max      2 x f64 (feet)
//   epochs                      u64, then f64 training loss per epoch
//   parameter count P           u64, then P x f64 in canonical order
//   has_adam                    u8; if 1: step u64, lr, beta1, beta2, eps f64,
//                               then P x f64 first moment, P x f64 second moment

#include "surgecorr/core.hpp"
#include "surgecorr/model/trainer.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace surgecorr::model {

inline constexpr std::array<char, 4> kModelMagic = {'S', 'G', 'C', 'W'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace io {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(b, 8);
}
inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(b, 4);
}
inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error("model file: truncated");
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | b[k];
  return v;
}
inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("model file: truncated");
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | b[k];
  return v;
}
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

inline std::uint32_t narrow(std::size_t v) {
  if (v > 0xffffffffULL) throw Error("model file: config value too large");
  return static_cast<std::uint32_t>(v);
}

}  // namespace io

inline void write_model(std::ostream& out, const TrainedModel& m, bool include_adam = true) {
  const auto& c = m.config();
  out.write(kModelMagic.data(), 4);
  io::put_u32(out, kModelFormatVersion);
  for (std::size_t v : {c.w_in, c.w_out, c.conv_filters, c.conv_kernel, c.lstm1_units, c.lstm2_units, c.dense_units})
    io::put_u32(out, io::narrow(v));
  io::put_f64(out, m.scaler.min);
  io::put_f64(out, m.scaler.max);
  io::put_u64(out, m.loss_curve.size());
  for (double v : m.loss_curve) io::put_f64(out, v);
  const auto params = m.network.parameters();
  io::put_u64(out, params.size());
  for (double v : params) io::put_f64(out, v);
  const bool adam = include_adam && m.adam.has_value();
  out.put(adam ? 1 : 0);
  if (adam) {
    const auto& a = *m.adam;
    io::put_u64(out, a.t);
    for (double v : {a.lr, a.beta1, a.beta2, a.eps}) io::put_f64(out, v);
    for (double v : a.m) io::put_f64(out, v);
    for (double v : a.v) io::put_f64(out, v);
  }
  if (!out) throw Error("model file: write failed");
}

inline TrainedModel read_model(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kModelMagic) throw Error("model file: bad magic (not an SGCW file)");
  const std::uint32_t version = io::get_u32(in);
  if (version != kModelFormatVersion) throw Error("model file: unsupported version " + std::to_string(version));
  NetworkConfig c;
  c.w_in = io::get_u32(in);
  c.w_out = io::get_u32(in);
  c.conv_filters = io::get_u32(in);
  c.conv_kernel = io::get_u32(in);
  c.lstm1_units = io::get_u32(in);
  c.lstm2_units = io::get_u32(in);
  c.dense_units = io::get_u32(in);
  c.validate();
  pipeline::ScalerParams scaler{io::get_f64(in), io::get_f64(in)};
  const std::uint64_t epochs = io::get_u64(in);
  if (epochs > (1ULL << 32)) throw Error("model file: implausible epoch count");
  std::vector<double> curve(epochs);
  for (auto& v : curve) v = io::get_f64(in);
  const std::uint64_t n = io::get_u64(in);
  if (n != nn::parameter_count(c)) throw Error("model file: parameter count does not match the network config");
  std::vector<double> params(n);
  for (auto& v : params) v = io::get_f64(in);
  require_finite(std::span<const double>(params), "model file parameters");

  std::optional<nn::AdamState> adam;
  const int flag = in.get();
  if (flag == std::char_traits<char>::eof()) throw Error("model file: truncated");
  if (flag == 1) {
    nn::AdamState a;
    a.t = io::get_u64(in);
    a.lr = io::get_f64(in);
    a.beta1 = io::get_f64(in);
    a.beta2 = io::get_f64(in);
    a.eps = io::get_f64(in);
    a.m.resize(n);
    a.v.resize(n);
    for (auto& v : a.m) v = io::get_f64(in);
    for (auto& v : a.v) v = io::get_f64(in);
    a.validate();
    adam = std::move(a);
  } else if (flag != 0) {
    throw Error("model file: bad optimizer-state flag");
  }
  return TrainedModel{nn::Network(c, std::move(params)), scaler, std::move(curve), std::move(adam)};
}

inline void save_model(const std::filesystem::path& path, const TrainedModel& m, bool include_adam = true) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write model file " + path.string());
  write_model(out, m, include_adam);
}

inline TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path.string());
  return read_model(in);
}

}  // namespace surgecorr::model
