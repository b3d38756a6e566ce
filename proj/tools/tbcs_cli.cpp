// Command-line front end: phantom, mask, simulate, zerofill, reconstruct, metrics.
//
// Exit codes: 0 success, 2 usage / bad argument, 3 data error,
// 4 numerical or invariant failure.

#include "tbcs/io.hpp"
#include "tbcs/tbcs.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <regex>
#include <string>

namespace {

using namespace tbcs;

constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kNumerical = 4;

Shape parse_shape(const std::string& s) {
  static const std::regex re(R"((\d+)[xX](\d+))");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw ArgumentError("shape must look like HxW, got '" + s + "'");
  return {std::stoll(m[1]), std::stoll(m[2])};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "' for writing");
  f << text;
}

struct PhantomArgs {
  std::string kind = "shepp-logan";
  std::string shape = "64x64";
  std::uint64_t seed = 0;
  std::string out;
};

int run_phantom(const PhantomArgs& a) {
  io::save(a.out, make_phantom(a.kind, parse_shape(a.shape), a.seed));
  return 0;
}

struct MaskArgs {
  std::string shape = "64x64";
  std::string scheme = "random2d";
  double accel = 4.0;
  double density_power = 2.0;
  double center = 4.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_mask(const MaskArgs& a) {
  const Shape shape = parse_shape(a.shape);
  SamplingMask mask;
  if (a.scheme == "random2d") {
    mask = gen_mask_random2d(shape, a.accel, a.density_power, a.center, a.seed);
  } else if (a.scheme == "cartesian") {
    if (a.center < 0 || a.center != std::floor(a.center)) throw ArgumentError("cartesian --center must be a line count");
    mask = gen_mask_cartesian(shape, a.accel, a.density_power, static_cast<Index>(a.center), a.seed);
  } else {
    throw ArgumentError("unknown mask scheme '" + a.scheme + "'");
  }
  io::save(a.out, mask);
  std::cout << "m = " << mask.sampled_count() << ", acceleration = " << mask.acceleration() << "\n";
  return 0;
}

struct SimulateArgs {
  std::string image, mask, out;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

int run_simulate(const SimulateArgs& a) {
  const ImageGrid x = io::image_from(io::load(a.image));
  const SamplingMask mask = io::mask_from(io::load(a.mask));
  io::save(a.out, simulate_kspace(x, mask, a.noise_std, a.seed));
  return 0;
}

struct ZerofillArgs {
  std::string kspace, mask, out;
};

int run_zerofill(const ZerofillArgs& a) {
  const KSpaceData k = io::kspace_from(io::load(a.kspace));
  const SamplingMask mask = io::mask_from(io::load(a.mask));
  io::save(a.out, zero_fill_recon(k, mask));
  return 0;
}

struct MetricsArgs {
  std::string recon, ref, out;
};

nlohmann::json metrics_json(const ImageGrid& recon, const ImageGrid& ref) {
  const MetricReport m = evaluate_metrics(recon, ref);
  nlohmann::json j;
  // null encodes +inf (identical magnitudes).
  j["psnr_db"] = std::isfinite(m.psnr_db) ? nlohmann::json(m.psnr_db) : nlohmann::json(nullptr);
  j["hfen"] = m.hfen;
  return j;
}

int run_metrics(const MetricsArgs& a) {
  const ImageGrid recon = io::image_from(io::load(a.recon));
  const ImageGrid ref = io::image_from(io::load(a.ref));
  const std::string text = metrics_json(recon, ref).dump(2) + "\n";
  std::cout << text;
  if (!a.out.empty()) write_text(a.out, text);
  return 0;
}

struct ReconstructArgs {
  io::RunConfig rc;
  std::string algo = "a1";
  std::string schedule = "off";
  std::string config;
  bool subtract_offset = false;
};

int run_reconstruct(ReconstructArgs a, const CLI::App& sub) {
  io::RunConfig rc;
  if (!a.config.empty()) rc = io::load_run_config(a.config);
  // Explicit flags override the config file.
  auto given = [&](const char* name) { return sub.get_option(name)->count() > 0; };
  const bool from_file = !a.config.empty();
  auto pick = [&](const char* name, auto& dst, const auto& src) {
    if (!from_file || given(name)) dst = src;
  };
  SolverParams& p = rc.params;
  const SolverParams& q = a.rc.params;
  if (!from_file || given("--algo")) p.algo = io::parse_algorithm(a.algo);
  pick("--nu", p.nu, q.nu);
  pick("--lambda0", p.lambda0, q.lambda0);
  pick("--energy-cap", p.energy_cap, q.energy_cap);
  pick("--inner", p.inner, q.inner);
  pick("--iters", p.outer, q.outer);
  pick("--early-stop", p.early_stop_rtol, q.early_stop_rtol);
  pick("--patch", rc.patch.side, a.rc.patch.side);
  pick("--stride", rc.patch.stride, a.rc.patch.stride);
  pick("--wrap", rc.patch.wrap, a.rc.patch.wrap);
  pick("--kspace", rc.kspace, a.rc.kspace);
  pick("--mask", rc.mask, a.rc.mask);
  pick("--ref", rc.ref, a.rc.ref);
  pick("--out", rc.out, a.rc.out);
  pick("--trace", rc.trace, a.rc.trace);
  pick("--save-transform", rc.save_transform, a.rc.save_transform);
  if (!from_file || given("--schedule")) {
    if (a.schedule != "on" && a.schedule != "off") throw ArgumentError("--schedule must be on or off");
    p.sparsity_schedule = a.schedule == "on";
  }
  if (given("--sparsity")) {
    p.s = q.s;
    p.s_frac.reset();
  } else if (!from_file || given("--sparsity-frac")) {
    p.s_frac = q.s_frac;
    p.s.reset();
  }
  if (given("--eta")) p.eta = q.eta;

  if (rc.kspace.empty() || rc.mask.empty() || rc.out.empty())
    throw ArgumentError("reconstruct needs --kspace, --mask and --out (or a config providing them)");

  const KSpaceData k = io::kspace_from(io::load(rc.kspace));
  const SamplingMask mask = io::mask_from(io::load(rc.mask));
  std::optional<ImageGrid> ref;
  if (!rc.ref.empty()) ref = io::image_from(io::load(rc.ref));

  const Measurements meas = Measurements::fourier(k, mask);
  const SolveResult res = solve(meas, p, rc.patch, std::nullopt, {}, ref ? &*ref : nullptr);

  const auto& rows = res.trace.rows;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double prev = rows[i - 1].objective.total;
    if (rows[i].objective.total > prev + p.monotone_slack * std::abs(prev)) {
      std::cerr << "error: objective increased at iteration " << rows[i].iter << "\n";
      return kNumerical;
    }
  }

  io::save(rc.out, res.state.x);
  if (!rc.save_transform.empty()) io::write_file(rc.save_transform, io::encode(io::matrix_container(res.state.w.matrix)));
  if (!rc.trace.empty()) {
    const Index patches = rc.patch.patch_count(meas.shape());
    const double offset =
        a.subtract_offset && p.algo != Algorithm::A2 ? 0.5 * rc.patch.n() * p.lambda(patches) : 0.0;
    write_text(rc.trace, io::trace_csv(res.trace, offset));
  }
  const auto& last = rows.back();
  std::cout << "iterations = " << last.iter << ", objective = " << io::format_number(last.objective.total)
            << ", sparsity = " << io::format_number(last.sparsity_fraction);
  if (ref) std::cout << ", psnr_db = " << io::format_number(last.psnr) << ", hfen = " << io::format_number(last.hfen);
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transform-blind compressed sensing reconstruction"};
  app.require_subcommand(1);

  PhantomArgs ph;
  auto* c_ph = app.add_subcommand("phantom", "write a synthetic test image");
  c_ph->add_option("--kind", ph.kind, "shepp-logan | smooth-blobs")->capture_default_str();
  c_ph->add_option("--shape", ph.shape, "HxW")->capture_default_str();
  c_ph->add_option("--seed", ph.seed)->capture_default_str();
  c_ph->add_option("--out", ph.out)->required();

  MaskArgs mk;
  auto* c_mk = app.add_subcommand("mask", "generate a k-space sampling mask");
  c_mk->add_option("--shape", mk.shape, "HxW")->capture_default_str();
  c_mk->add_option("--scheme", mk.scheme, "random2d | cartesian")->capture_default_str();
  c_mk->add_option("--accel", mk.accel, "acceleration factor (> 1)")->capture_default_str();
  c_mk->add_option("--density-power", mk.density_power, "variable density exponent")->capture_default_str();
  c_mk->add_option("--center", mk.center, "fully sampled disk radius (random2d) or line count (cartesian)")
      ->capture_default_str();
  c_mk->add_option("--seed", mk.seed)->capture_default_str();
  c_mk->add_option("--out", mk.out)->required();

  SimulateArgs sm;
  auto* c_sm = app.add_subcommand("simulate", "simulate undersampled centered k-space");
  c_sm->add_option("--image", sm.image)->required();
  c_sm->add_option("--mask", sm.mask)->required();
  c_sm->add_option("--noise-std", sm.noise_std)->capture_default_str();
  c_sm->add_option("--seed", sm.seed)->capture_default_str();
  c_sm->add_option("--out", sm.out)->required();

  ZerofillArgs zf;
  auto* c_zf = app.add_subcommand("zerofill", "zero-filling Fourier reconstruction");
  c_zf->add_option("--kspace", zf.kspace)->required();
  c_zf->add_option("--mask", zf.mask)->required();
  c_zf->add_option("--out", zf.out)->required();

  MetricsArgs mt;
  auto* c_mt = app.add_subcommand("metrics", "PSNR and HFEN of a reconstruction against a reference");
  c_mt->add_option("--recon", mt.recon)->required();
  c_mt->add_option("--ref", mt.ref)->required();
  c_mt->add_option("--out", mt.out, "also write the JSON report here");

  ReconstructArgs rs;
  rs.rc.params.s_frac = 0.055;
  std::optional<Index> s_count;
  double s_frac = 0.055;
  double eta = 0.0;
  auto* c_rs = app.add_subcommand("reconstruct", "transform-blind CS reconstruction");
  c_rs->add_option("--config", rs.config, "JSON run config; explicit flags override it");
  c_rs->add_option("--kspace", rs.rc.kspace);
  c_rs->add_option("--mask", rs.rc.mask);
  c_rs->add_option("--algo", rs.algo, "a1 | a2 | a3")->capture_default_str();
  c_rs->add_option("--patch", rs.rc.patch.side, "patch side")->capture_default_str();
  c_rs->add_option("--stride", rs.rc.patch.stride)->capture_default_str();
  c_rs->add_flag("--wrap,!--no-wrap", rs.rc.patch.wrap, "wrap patches around the image border")->capture_default_str();
  c_rs->add_option("--nu", rs.rc.params.nu)->capture_default_str();
  c_rs->add_option("--lambda0", rs.rc.params.lambda0)->capture_default_str();
  c_rs->add_option("--sparsity-frac", s_frac, "s = frac * n * N")->capture_default_str();
  c_rs->add_option("--sparsity", s_count, "absolute sparsity budget s");
  c_rs->add_option("--eta", eta, "hard threshold (a3)");
  c_rs->add_option("--energy-cap", rs.rc.params.energy_cap, "C")->capture_default_str();
  c_rs->add_option("--inner", rs.rc.params.inner)->capture_default_str();
  c_rs->add_option("--iters", rs.rc.params.outer)->capture_default_str();
  c_rs->add_option("--schedule", rs.schedule, "on | off")->capture_default_str();
  c_rs->add_option("--early-stop", rs.rc.params.early_stop_rtol, "relative objective change, 0 = off")
      ->capture_default_str();
  c_rs->add_option("--ref", rs.rc.ref, "reference image for PSNR/HFEN columns");
  c_rs->add_option("--trace", rs.rc.trace, "CSV trace output");
  c_rs->add_option("--out", rs.rc.out);
  c_rs->add_option("--save-transform", rs.rc.save_transform);
  c_rs->add_flag("--subtract-offset", rs.subtract_offset, "subtract n*lambda/2 from the trace objective");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*c_ph) return run_phantom(ph);
    if (*c_mk) return run_mask(mk);
    if (*c_sm) return run_simulate(sm);
    if (*c_zf) return run_zerofill(zf);
    if (*c_mt) return run_metrics(mt);
    if (*c_rs) {
      rs.rc.params.s_frac = s_frac;
      rs.rc.params.s = s_count;
      if (c_rs->get_option("--eta")->count() > 0) rs.rc.params.eta = eta;
      return run_reconstruct(rs, *c_rs);
    }
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const CapabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const FeasibilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
