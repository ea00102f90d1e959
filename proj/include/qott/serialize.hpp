#pragma once

// Binary container for states and operators.
//
// Layout:
//   bytes 0..7   magic "QOTTBIN1"
//   bytes 8..15  little-endian uint64 header length L
//   bytes 16..   UTF-8 JSON header of length L:
//                {"kind": "pure"|"density"|"unitary",
//                 "labels": [...], "dims": [...],
//                 "out_labels"/"out_dims" for unitaries,
//                 "unnormalized": bool}
//   then         row-major little-endian float64 (re, im) pairs

#include <cstdint>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "qott/core.hpp"

namespace qott {

namespace detail {

constexpr char kMagic[9] = "QOTTBIN1";

inline void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline void write_f64(std::ostream& os, double d) {
  std::uint64_t v;
  static_assert(sizeof(v) == sizeof(d));
  std::memcpy(&v, &d, 8);
  write_u64(os, v);
}

inline double read_f64(std::istream& is) {
  std::uint64_t v = read_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

inline void write_container(std::ostream& os, const nlohmann::json& header,
                            const cplx* data, long count) {
  os.write(kMagic, 8);
  const std::string h = header.dump();
  write_u64(os, h.size());
  os.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (long i = 0; i < count; ++i) {
    write_f64(os, data[i].real());
    write_f64(os, data[i].imag());
  }
}

inline nlohmann::json read_header(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string(magic, 8) != std::string(kMagic, 8))
    throw std::runtime_error("container: bad magic");
  std::uint64_t len = read_u64(is);
  std::string h(len, '\0');
  is.read(h.data(), static_cast<std::streamsize>(len));
  if (!is) throw std::runtime_error("container: truncated header");
  return nlohmann::json::parse(h);
}

inline nlohmann::json reg_header(const Register& reg) {
  return {{"labels", reg.labels()}, {"dims", reg.dims()}};
}

inline Register reg_from_header(const nlohmann::json& j,
                                const char* labels_key = "labels",
                                const char* dims_key = "dims") {
  return Register(j.at(labels_key).get<std::vector<std::string>>(),
                  j.at(dims_key).get<std::vector<int>>());
}

}  // namespace detail

inline void save(std::ostream& os, const PureState& s) {
  nlohmann::json h = detail::reg_header(s.reg);
  h["kind"] = "pure";
  h["unnormalized"] = s.unnormalized;
  detail::write_container(os, h, s.amps.data(), s.amps.size());
}

inline void save(std::ostream& os, const DensityOperator& rho) {
  nlohmann::json h = detail::reg_header(rho.reg);
  h["kind"] = "density";
  h["unnormalized"] = rho.unnormalized;
  // row-major on disk
  RowMat rm = rho.matrix;
  detail::write_container(os, h, rm.data(), rm.size());
}

inline void save(std::ostream& os, const Unitary& u) {
  nlohmann::json h = detail::reg_header(u.in_reg);
  h["kind"] = "unitary";
  h["out_labels"] = u.out_reg.labels();
  h["out_dims"] = u.out_reg.dims();
  RowMat rm = u.matrix;
  detail::write_container(os, h, rm.data(), rm.size());
}

template <typename T>
inline void save_file(const std::string& path, const T& value) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  save(os, value);
}

inline nlohmann::json peek_header(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return detail::read_header(is);
}

inline PureState load_pure(std::istream& is) {
  nlohmann::json h = detail::read_header(is);
  if (h.at("kind") != "pure") throw std::runtime_error("container: not pure");
  Register reg = detail::reg_from_header(h);
  Vec v(reg.total_dim());
  for (long i = 0; i < v.size(); ++i) {
    double re = detail::read_f64(is);
    double im = detail::read_f64(is);
    v(i) = cplx(re, im);
  }
  if (!is) throw std::runtime_error("container: truncated payload");
  return PureState(reg, std::move(v), h.value("unnormalized", false));
}

inline DensityOperator load_density(std::istream& is) {
  nlohmann::json h = detail::read_header(is);
  if (h.at("kind") != "density")
    throw std::runtime_error("container: not density");
  Register reg = detail::reg_from_header(h);
  const long n = reg.total_dim();
  RowMat m(n, n);
  for (long i = 0; i < n * n; ++i) {
    double re = detail::read_f64(is);
    double im = detail::read_f64(is);
    m.data()[i] = cplx(re, im);
  }
  if (!is) throw std::runtime_error("container: truncated payload");
  return DensityOperator(reg, Mat(m), h.value("unnormalized", false));
}

inline Unitary load_unitary(std::istream& is) {
  nlohmann::json h = detail::read_header(is);
  if (h.at("kind") != "unitary")
    throw std::runtime_error("container: not unitary");
  Register in = detail::reg_from_header(h);
  Register out = detail::reg_from_header(h, "out_labels", "out_dims");
  const long n = in.total_dim();
  RowMat m(n, n);
  for (long i = 0; i < n * n; ++i) {
    double re = detail::read_f64(is);
    double im = detail::read_f64(is);
    m.data()[i] = cplx(re, im);
  }
  if (!is) throw std::runtime_error("container: truncated payload");
  return Unitary(in, out, Mat(m));
}

template <typename T>
inline T load_file(const std::string& path);

template <>
inline PureState load_file<PureState>(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return load_pure(is);
}

template <>
inline DensityOperator load_file<DensityOperator>(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return load_density(is);
}

template <>
inline Unitary load_file<Unitary>(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return load_unitary(is);
}

}  // namespace qott
