/*
 * Copyright 2026 The actif Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ACTIF_NN_WEIGHTS_IO_HPP_
#define ACTIF_NN_WEIGHTS_IO_HPP_

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "actif/error.hpp"
#include "actif/nn/model.hpp"

namespace actif::nn {

// Binary weight file, all integers and doubles little-endian:
//
//   offset  size  field
//   0       8     magic "ACTIFWT\0"
//   8       4     format version (1)
//   12      4     gate order tag "ifgo"
//   16      24    F, H, P as uint64
//   40      ...   W_ih (4H x F), W_hh (4H x H), b_gates (4H), W_pen (P x H),
//                 b_pen (P), W_out (P), b_out (1); matrices row-major
inline constexpr std::array<char, 8> kWeightMagic = {'A', 'C', 'T', 'I', 'F', 'W', 'T', '\0'};
inline constexpr std::uint32_t kWeightFormatVersion = 1;

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}
  std::uint64_t u64() { return read(8); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(read(4)); }
  double f64() { return std::bit_cast<double>(read(8)); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw DataError("weight file is truncated");
  }
  std::uint64_t read(std::size_t n) {
    need(n);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

template <class Fn>
void for_each_matrix_row_major(const LstmParameters& p, Fn&& fn) {
  auto mat = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) fn(m(r, c));
  };
  mat(p.input_weights);
  mat(p.recurrent_weights);
  for (Eigen::Index i = 0; i < p.gate_bias.size(); ++i) fn(p.gate_bias(i));
  mat(p.penult_weights);
  for (Eigen::Index i = 0; i < p.penult_bias.size(); ++i) fn(p.penult_bias(i));
  for (Eigen::Index i = 0; i < p.output_weights.size(); ++i) fn(p.output_weights(i));
  fn(p.output_bias);
}

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows,
                                        Eigen::Index cols, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw ConfigError(std::string("weight JSON: tensor ") + name + " has wrong row count");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(std::string("weight JSON: tensor ") + name + " has wrong column count");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j, Eigen::Index n, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    throw ConfigError(std::string("weight JSON: tensor ") + name + " has wrong length");
  }
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace detail

inline std::string encode_weights(const LstmRegressor& model) {
  std::string out(kWeightMagic.begin(), kWeightMagic.end());
  detail::put_u32(out, kWeightFormatVersion);
  out.append(kGateOrder);
  detail::put_u64(out, model.dims().input);
  detail::put_u64(out, model.dims().hidden);
  detail::put_u64(out, model.dims().penult);
  detail::for_each_matrix_row_major(model.params(), [&](double v) {
    detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
  });
  return out;
}

inline LstmRegressor decode_weights(const std::string& bytes) {
  detail::ByteReader in(bytes);
  const std::string magic = in.raw(kWeightMagic.size());
  if (magic != std::string(kWeightMagic.begin(), kWeightMagic.end())) {
    throw DataError("not an actif weight file (bad magic)");
  }
  if (const auto version = in.u32(); version != kWeightFormatVersion) {
    throw DataError("unsupported weight file version " + std::to_string(version));
  }
  if (in.raw(4) != kGateOrder) throw DataError("weight file gate order is not 'ifgo'");
  ModelDims dims;
  dims.input = in.u64();
  dims.hidden = in.u64();
  dims.penult = in.u64();
  LstmParameters p = LstmParameters::zeros(dims);
  auto mat = [&](Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in.f64();
  };
  auto vec = [&](Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = in.f64();
  };
  mat(p.input_weights);
  mat(p.recurrent_weights);
  vec(p.gate_bias);
  mat(p.penult_weights);
  vec(p.penult_bias);
  vec(p.output_weights);
  p.output_bias = in.f64();
  if (!in.done()) throw DataError("weight file has trailing bytes");
  return LstmRegressor(dims, std::move(p));
}

inline nlohmann::json weights_to_json(const LstmRegressor& model) {
  const auto& p = model.params();
  return nlohmann::json{
      {"format", "actif-lstm-weights"},
      {"version", kWeightFormatVersion},
      {"gate_order", std::string(kGateOrder)},
      {"dims", {{"F", model.dims().input}, {"H", model.dims().hidden}, {"P", model.dims().penult}}},
      {"W_ih", detail::matrix_to_json(p.input_weights)},
      {"W_hh", detail::matrix_to_json(p.recurrent_weights)},
      {"b_gates", std::vector<double>(p.gate_bias.data(), p.gate_bias.data() + p.gate_bias.size())},
      {"W_pen", detail::matrix_to_json(p.penult_weights)},
      {"b_pen", std::vector<double>(p.penult_bias.data(), p.penult_bias.data() + p.penult_bias.size())},
      {"W_out", std::vector<double>(p.output_weights.data(),
                                    p.output_weights.data() + p.output_weights.size())},
      {"b_out", p.output_bias}};
}

inline LstmRegressor weights_from_json(const nlohmann::json& j) {
  if (j.value("gate_order", std::string()) != kGateOrder) {
    throw ConfigError("weight JSON: gate_order must be 'ifgo'");
  }
  ModelDims dims;
  const auto& d = j.at("dims");
  dims.input = d.at("F").get<std::size_t>();
  dims.hidden = d.at("H").get<std::size_t>();
  dims.penult = d.at("P").get<std::size_t>();
  const auto F = static_cast<Eigen::Index>(dims.input);
  const auto H = static_cast<Eigen::Index>(dims.hidden);
  const auto P = static_cast<Eigen::Index>(dims.penult);
  LstmParameters p;
  p.input_weights = detail::matrix_from_json(j.at("W_ih"), 4 * H, F, "W_ih");
  p.recurrent_weights = detail::matrix_from_json(j.at("W_hh"), 4 * H, H, "W_hh");
  p.gate_bias = detail::vector_from_json(j.at("b_gates"), 4 * H, "b_gates");
  p.penult_weights = detail::matrix_from_json(j.at("W_pen"), P, H, "W_pen");
  p.penult_bias = detail::vector_from_json(j.at("b_pen"), P, "b_pen");
  p.output_weights = detail::vector_from_json(j.at("W_out"), P, "W_out");
  p.output_bias = j.at("b_out").get<double>();
  return LstmRegressor(dims, std::move(p));
}

// Dispatches on the file contents: binary if it starts with the magic,
// JSON otherwise.
inline LstmRegressor load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open weight file '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() >= kWeightMagic.size() &&
      bytes.compare(0, kWeightMagic.size(), std::string(kWeightMagic.begin(), kWeightMagic.end())) == 0) {
    return decode_weights(bytes);
  }
  try {
    return weights_from_json(nlohmann::json::parse(bytes));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("weight file '" + path + "' is neither binary nor valid JSON: " + e.what());
  }
}

inline void save_weights(const std::string& path, const LstmRegressor& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write weight file '" + path + "'");
  const std::string bytes = encode_weights(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline void save_weights_json(const std::string& path, const LstmRegressor& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write weight file '" + path + "'");
  out << weights_to_json(model).dump(2) << '\n';
}

}  // namespace actif::nn

#endif  // ACTIF_NN_WEIGHTS_IO_HPP_
