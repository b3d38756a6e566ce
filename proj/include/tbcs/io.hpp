#pragma once

// File formats.
//
// Container layout (all integers little-endian):
//   bytes 0..7   magic "XBCSCPX1"
//   bytes 8..11  u32 header length L
//   next L bytes UTF-8 JSON {"dims":[h,w],"dtype":"c128"|"u8","kind":...}
//   payload      row-major; c128 = interleaved (real, imag) float64,
//                u8 = one byte per mask entry
//
// The header is written with sorted keys and no whitespace, so identical
// data always produces identical bytes.

#include "tbcs/core.hpp"
#include "tbcs/grid.hpp"
#include "tbcs/sensing.hpp"
#include "tbcs/solver.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace tbcs::io {

inline constexpr std::array<char, 8> kMagic = {'X', 'B', 'C', 'S', 'C', 'P', 'X', '1'};

struct Container {
  std::string kind;  // image | kspace | mask | matrix
  Index rows = 0;
  Index cols = 0;
  std::string dtype;  // c128 | u8
  std::vector<std::uint8_t> payload;
};

namespace detail {

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

inline void put_f64(std::vector<std::uint8_t>& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  put_u64(out, bits);
}

inline double get_f64(const std::uint8_t* p) {
  const std::uint64_t bits = get_u64(p);
  double d;
  std::memcpy(&d, &bits, sizeof d);
  return d;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode(const Container& c) {
  nlohmann::json h;
  h["kind"] = c.kind;
  h["dims"] = {c.rows, c.cols};
  h["dtype"] = c.dtype;
  const std::string header = h.dump();
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  const auto len = static_cast<std::uint32_t>(header.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), c.payload.begin(), c.payload.end());
  return out;
}

inline Container decode(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw DataError("not a container file (bad magic)");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(bytes[8 + i]) << (8 * i);
  if (bytes.size() < 12 + static_cast<std::size_t>(len)) throw DataError("truncated container header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + len);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid container header: ") + e.what());
  }
  Container c;
  try {
    c.kind = h.at("kind").get<std::string>();
    c.dtype = h.at("dtype").get<std::string>();
    const auto dims = h.at("dims").get<std::vector<Index>>();
    if (dims.size() != 2) throw DataError("container dims must have two entries");
    c.rows = dims[0];
    c.cols = dims[1];
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid container header: ") + e.what());
  }
  if (c.kind != "image" && c.kind != "kspace" && c.kind != "mask" && c.kind != "matrix")
    throw DataError("unknown container kind '" + c.kind + "'");
  std::size_t elem = 0;
  if (c.dtype == "c128") elem = 16;
  else if (c.dtype == "u8") elem = 1;
  else throw DataError("unknown container dtype '" + c.dtype + "'");
  if (c.rows < 1 || c.cols < 1) throw DataError("container dims must be positive");
  const std::size_t expected = static_cast<std::size_t>(c.rows * c.cols) * elem;
  if (bytes.size() - 12 - len != expected) throw DataError("container payload length does not match dims/dtype");
  c.payload.assign(bytes.begin() + 12 + len, bytes.end());
  return c;
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("failed writing '" + path + "'");
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline Container complex_container(std::string kind, Index rows, Index cols, const Complex* data) {
  Container c{std::move(kind), rows, cols, "c128", {}};
  c.payload.reserve(static_cast<std::size_t>(rows * cols) * 16);
  for (Index i = 0; i < rows * cols; ++i) {
    detail::put_f64(c.payload, data[i].real());
    detail::put_f64(c.payload, data[i].imag());
  }
  return c;
}

inline CVector complex_payload(const Container& c) {
  if (c.dtype != "c128") throw DataError("expected a c128 container");
  CVector v(c.rows * c.cols);
  for (Index i = 0; i < v.size(); ++i) {
    const std::uint8_t* p = c.payload.data() + 16 * i;
    v[i] = Complex(detail::get_f64(p), detail::get_f64(p + 8));
  }
  return v;
}

inline Container expect_kind(Container c, const std::string& kind) {
  if (c.kind != kind) throw DataError("expected a '" + kind + "' container, got '" + c.kind + "'");
  return c;
}

inline Container to_container(const ImageGrid& x) {
  return complex_container("image", x.height(), x.width(), x.data().data());
}

inline Container to_container(const KSpaceData& k) { return complex_container("kspace", k.height, k.width, k.data.data()); }

inline Container to_container(const SamplingMask& m) {
  return Container{"mask", m.height(), m.width(), "u8", m.flags()};
}

/// Row-major n x n matrix.
inline Container matrix_container(const CMatrix& w) {
  const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = w;
  return complex_container("matrix", w.rows(), w.cols(), rm.data());
}

inline ImageGrid image_from(const Container& c) {
  expect_kind(c, "image");
  CVector v = complex_payload(c);
  if (!v.allFinite()) throw DataError("image contains non-finite samples");
  return ImageGrid(c.rows, c.cols, std::move(v));
}

inline KSpaceData kspace_from(const Container& c) {
  expect_kind(c, "kspace");
  return {c.rows, c.cols, complex_payload(c)};
}

inline SamplingMask mask_from(const Container& c) {
  expect_kind(c, "mask");
  if (c.dtype != "u8") throw DataError("mask containers must be u8");
  for (std::uint8_t b : c.payload)
    if (b > 1) throw DataError("mask entries must be 0 or 1");
  try {
    return SamplingMask(c.rows, c.cols, c.payload);
  } catch (const Error& e) {
    throw DataError(e.what());
  }
}

inline CMatrix matrix_from(const Container& c) {
  expect_kind(c, "matrix");
  const CVector v = complex_payload(c);
  CMatrix m(c.rows, c.cols);
  for (Index r = 0; r < c.rows; ++r)
    for (Index col = 0; col < c.cols; ++col) m(r, col) = v[r * c.cols + col];
  return m;
}

template <typename T>
void save(const std::string& path, const T& value) {
  write_file(path, encode(to_container(value)));
}

inline Container load(const std::string& path) { return decode(read_file(path)); }

// ---------------------------------------------------------------------------
// Run configuration (JSON, unknown keys rejected).

struct RunConfig {
  SolverParams params;
  PatchConfig patch{6, 1, true};
  std::string kspace;
  std::string mask;
  std::string ref;
  std::string out;
  std::string trace;
  std::string save_transform;
};

inline nlohmann::json to_json(const RunConfig& rc) {
  const SolverParams& p = rc.params;
  nlohmann::json j;
  j["algo"] = to_string(p.algo);
  j["nu"] = p.nu;
  j["lambda0"] = p.lambda0;
  if (p.s) j["s"] = *p.s;
  if (p.s_frac) j["sparsity_frac"] = *p.s_frac;
  if (p.eta) j["eta"] = *p.eta;
  j["energy_cap"] = p.energy_cap;
  j["inner"] = p.inner;
  j["iters"] = p.outer;
  j["schedule"] = p.sparsity_schedule;
  j["early_stop_rtol"] = p.early_stop_rtol;
  j["patch"] = rc.patch.side;
  j["stride"] = rc.patch.stride;
  j["wrap"] = rc.patch.wrap;
  j["kspace"] = rc.kspace;
  j["mask"] = rc.mask;
  j["ref"] = rc.ref;
  j["out"] = rc.out;
  j["trace"] = rc.trace;
  j["save_transform"] = rc.save_transform;
  return j;
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "a1" || s == "A1") return Algorithm::A1;
  if (s == "a2" || s == "A2") return Algorithm::A2;
  if (s == "a3" || s == "A3") return Algorithm::A3;
  throw ArgumentError("unknown algorithm '" + s + "' (expected a1, a2 or a3)");
}

/// Overlays the keys present in `j` onto `rc`. Unknown keys and wrongly
/// typed values raise DataError.
inline void apply_json(RunConfig& rc, const nlohmann::json& j) {
  static const std::set<std::string> known = {"algo",  "nu",     "lambda0", "s",      "sparsity_frac", "eta",
                                              "energy_cap", "inner", "iters", "schedule", "early_stop_rtol",
                                              "patch", "stride", "wrap",    "kspace", "mask",          "ref",
                                              "out",   "trace",  "save_transform"};
  if (!j.is_object()) throw DataError("run config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw DataError("unknown run config key '" + key + "'");
  SolverParams& p = rc.params;
  try {
    if (j.contains("algo")) p.algo = parse_algorithm(j.at("algo").get<std::string>());
    if (j.contains("nu")) p.nu = j.at("nu").get<double>();
    if (j.contains("lambda0")) p.lambda0 = j.at("lambda0").get<double>();
    if (j.contains("s")) {
      p.s = j.at("s").get<Index>();
      p.s_frac.reset();
    }
    if (j.contains("sparsity_frac")) {
      p.s_frac = j.at("sparsity_frac").get<double>();
      p.s.reset();
    }
    if (j.contains("eta")) p.eta = j.at("eta").get<double>();
    if (j.contains("energy_cap")) p.energy_cap = j.at("energy_cap").get<double>();
    if (j.contains("inner")) p.inner = j.at("inner").get<int>();
    if (j.contains("iters")) p.outer = j.at("iters").get<int>();
    if (j.contains("schedule")) p.sparsity_schedule = j.at("schedule").get<bool>();
    if (j.contains("early_stop_rtol")) p.early_stop_rtol = j.at("early_stop_rtol").get<double>();
    if (j.contains("patch")) rc.patch.side = j.at("patch").get<Index>();
    if (j.contains("stride")) rc.patch.stride = j.at("stride").get<Index>();
    if (j.contains("wrap")) rc.patch.wrap = j.at("wrap").get<bool>();
    auto str = [&](const char* key, std::string& dst) {
      if (j.contains(key)) dst = j.at(key).get<std::string>();
    };
    str("kspace", rc.kspace);
    str("mask", rc.mask);
    str("ref", rc.ref);
    str("out", rc.out);
    str("trace", rc.trace);
    str("save_transform", rc.save_transform);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid run config value: ") + e.what());
  }
}

inline RunConfig load_run_config(const std::string& path) {
  const auto bytes = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid run config JSON: ") + e.what());
  }
  RunConfig rc;
  apply_json(rc, j);
  return rc;
}

// ---------------------------------------------------------------------------
// Iteration trace CSV.

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// `offset` is subtracted from the objective column (e.g. n lambda / 2).
inline std::string trace_csv(const IterationTrace& trace, double offset = 0.0) {
  std::ostringstream os;
  os << "iter,objective,sparsification_error,fidelity,regularizer,sparsity_penalty,dx,kappa,psnr,hfen\n";
  for (const auto& r : trace.rows) {
    os << r.iter << ',' << format_number(r.objective.total - offset) << ','
       << format_number(r.objective.sparsification_error) << ',' << format_number(r.objective.fidelity) << ','
       << format_number(r.objective.regularizer) << ',' << format_number(r.objective.sparsity_penalty) << ','
       << format_number(r.dx) << ',' << format_number(r.kappa) << ',' << format_number(r.psnr) << ','
       << format_number(r.hfen) << '\n';
  }
  return os.str();
}

}  // namespace tbcs::io
