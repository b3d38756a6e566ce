#pragma once

// Exact image update
//   min_x sum_j ||W P_j x - b_j||^2 + nu ||A x - y||^2  s.t. ||x||_2 <= C.
//
// Two routes: a closed-form k-space update for undersampled Fourier sensing
// with stride-1 wrapped patches (G = sum_j P_j^T W^H W P_j is BCCB there), and
// a generic route (CG at mu = 0, dense EVD + Newton when the energy bound is
// active).

#include "tbcs/core.hpp"
#include "tbcs/fft.hpp"
#include "tbcs/grid.hpp"
#include "tbcs/sensing.hpp"

#include <cmath>
#include <limits>
#include <tuple>
#include <utility>
#include <vector>

namespace tbcs {

struct BccbSpectrum {
  RVector gamma;
};

struct MultiplierState {
  double mu = 0.0;
  double residual = 0.0;  // ftilde(mu) - C^2
  int iterations = 0;
};

struct ImageUpdateResult {
  ImageGrid image;
  MultiplierState multiplier;
};

/// Applies G = sum_j P_j^T W^H W P_j through patch operations.
inline ImageGrid apply_patch_gram(const CMatrix& w, const ImageGrid& v, const PatchConfig& cfg) {
  const CMatrix x = extract_patches(v, cfg);
  return adjoint_accumulate(w.adjoint() * (w * x), cfg, shape_of(v));
}

/// Eigenvalues of the BCCB matrix G on the DFT grid: gamma = sqrt(p) F a1,
/// with a1 = G e_0 the response to a unit impulse at pixel (0, 0).
inline BccbSpectrum build_bccb_spectrum(const CMatrix& w, const PatchConfig& cfg, Shape shape) {
  if (!cfg.is_circulant()) throw ConfigError("BCCB spectrum requires stride 1 with wrap-around patches");
  cfg.validate(shape);
  if (w.rows() != cfg.n() || w.cols() != cfg.n()) throw ConfigError("transform size does not match patch size");
  ImageGrid impulse(shape.height, shape.width);
  impulse.data()[0] = 1.0;
  const ImageGrid a1 = apply_patch_gram(w, impulse, cfg);
  const CVector g = std::sqrt(static_cast<double>(shape.size())) * dft2(a1.data(), shape.height, shape.width);

  const double peak = g.cwiseAbs().maxCoeff();
  if (g.imag().cwiseAbs().maxCoeff() > 1e-10 * peak) throw NumericalError("BCCB spectrum is not real to tolerance");
  BccbSpectrum spec{g.real()};
  if (!(spec.gamma.minCoeff() > 0.0)) throw NumericalError("BCCB spectrum has a non-positive eigenvalue");
  return spec;
}

struct NewtonOptions {
  double rtol = 1e-10;
  int max_iterations = 100;
};

/// Solves ftilde(mu) = C^2 for a convex, strictly decreasing ftilde on
/// [0, inf). `ftilde(mu)` returns {value, derivative}. Returns mu = 0 when
/// ftilde(0) <= C^2. Newton steps start at mu = 0 and are safeguarded by
/// bisection on [lo, hi], hi found by doubling until ftilde(hi) < C^2.
template <typename F>
MultiplierState newton_multiplier(F&& ftilde, double c, NewtonOptions opt = {}) {
  if (!(c > 0.0)) throw ArgumentError("energy bound C must be > 0");
  const double target = c * c;
  auto [f0, d0] = ftilde(0.0);
  if (f0 <= target) return {0.0, f0 - target, 0};

  double lo = 0.0;
  double hi = 1.0;
  for (int k = 0; ftilde(hi).first >= target; ++k) {
    if (k > 2000) throw ConvergenceError("could not bracket the Lagrange multiplier");
    lo = hi;
    hi *= 2.0;
  }

  double mu = 0.0;
  double f = f0;
  double df = d0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    double next = mu - (f - target) / df;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    mu = next;
    std::tie(f, df) = ftilde(mu);
    if (std::abs(f - target) <= opt.rtol * target) return {mu, f - target, it};
    (f > target ? lo : hi) = mu;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return {mu, f - target, it};
  }
  throw ConvergenceError("Newton iteration for the Lagrange multiplier did not converge");
}

/// Closed-form image update for undersampled Fourier sensing. `s0` is the
/// zero-filled k-space F F_u^H y and `mask_dft` the sampling indicator, both
/// in unshifted DFT order (see FourierSampling).
inline ImageUpdateResult mri_image_update(const CMatrix& w, const CMatrix& b, const CVector& s0, const RVector& mask_dft,
                                          double nu, double c, const BccbSpectrum& spectrum, const PatchConfig& cfg,
                                          Shape shape) {
  if (!cfg.is_circulant()) throw ConfigError("k-space image update requires stride 1 with wrap-around patches");
  if (!(nu > 0.0)) throw ArgumentError("nu must be > 0");
  const Index p = shape.size();
  if (s0.size() != p || mask_dft.size() != p || spectrum.gamma.size() != p)
    throw ConfigError("k-space data, mask and spectrum must all have p entries");

  const ImageGrid rhs = adjoint_accumulate(w.adjoint() * b, cfg, shape);
  CVector num = dft2(rhs.data(), shape.height, shape.width);
  RVector den = spectrum.gamma;
  for (Index i = 0; i < p; ++i) {
    if (mask_dft[i] != 0.0) {
      num[i] += nu * s0[i];
      den[i] += nu;
    }
  }
  const RVector num2 = num.cwiseAbs2();

  auto ftilde = [&](double mu) {
    double f = 0.0;
    double df = 0.0;
    for (Index i = 0; i < p; ++i) {
      const double inv = 1.0 / (den[i] + mu);
      const double t = num2[i] * inv * inv;
      f += t;
      df -= 2.0 * t * inv;
    }
    return std::pair{f, df};
  };
  const MultiplierState mult = newton_multiplier(ftilde, c);

  for (Index i = 0; i < p; ++i) {
    const double d = den[i] + mult.mu;
    if (!(d > 0.0)) throw NumericalError("non-positive denominator in k-space update");
    num[i] /= d;
  }
  return {ImageGrid(shape.height, shape.width, idft2(num, shape.height, shape.width)), mult};
}

/// Convenience overload taking prepared Fourier sampling data.
inline ImageUpdateResult mri_image_update(const CMatrix& w, const CMatrix& b, const FourierSampling& fs, double nu,
                                          double c, const BccbSpectrum& spectrum, const PatchConfig& cfg) {
  return mri_image_update(w, b, fs.s0, fs.mask_dft, nu, c, spectrum, cfg, fs.shape);
}

struct GenericUpdateOptions {
  bool use_cg = true;
  double cg_rtol = 1e-8;
  Index cg_max_iterations = 0;  // 0 means 10 * p
  Index dense_limit = 4096;
};

/// Dense G = sum_j P_j^T H P_j with H = W^H W, accumulated patch by patch.
inline CMatrix assemble_patch_gram(const CMatrix& w, const PatchConfig& cfg, Shape shape) {
  const CMatrix h = w.adjoint() * w;
  const Index n = cfg.n();
  CMatrix g = CMatrix::Zero(shape.size(), shape.size());
  std::vector<Index> pix(static_cast<std::size_t>(n));
  Index current = -1;
  auto flush = [&] {
    for (Index k = 0; k < n; ++k)
      for (Index l = 0; l < n; ++l) g(pix[k], pix[l]) += h(k, l);
  };
  for_each_patch_pixel(cfg, shape, [&](Index j, Index k, Index p) {
    if (j != current) {
      if (current >= 0) flush();
      current = j;
    }
    pix[static_cast<std::size_t>(k)] = p;
  });
  if (current >= 0) flush();
  return g;
}

/// Generic image update for an arbitrary sensing operator.
inline ImageUpdateResult generic_image_update(const CMatrix& w, const CMatrix& b, const SensingOperator& a,
                                              const CVector& y, double nu, double c, const PatchConfig& cfg,
                                              Shape shape, GenericUpdateOptions opt = {}) {
  if (!(nu > 0.0)) throw ArgumentError("nu must be > 0");
  if (!(c > 0.0)) throw ArgumentError("energy bound C must be > 0");
  if (!(a.shape() == shape)) throw ConfigError("sensing operator shape does not match image");
  if ((overlap_diag(cfg, shape).array() == 0.0).any())
    throw ConfigError("patches do not cover every pixel; G would be singular");
  const Index p = shape.size();

  const CVector rhs = adjoint_accumulate(w.adjoint() * b, cfg, shape).data() + nu * a.adjoint(y);

  if (opt.use_cg) {
    auto apply = [&](const CVector& v) -> CVector {
      return apply_patch_gram(w, ImageGrid(shape.height, shape.width, v), cfg).data() + nu * a.adjoint(a.apply(v));
    };
    const Index max_it = opt.cg_max_iterations > 0 ? opt.cg_max_iterations : 10 * p;
    CVector x = CVector::Zero(p);
    CVector r = rhs;
    CVector d = r;
    double rr = r.squaredNorm();
    const double stop = opt.cg_rtol * opt.cg_rtol * rhs.squaredNorm();
    Index it = 0;
    while (rr > stop) {
      if (++it > max_it) throw ConvergenceError("CG did not converge in the image update");
      const CVector ad = apply(d);
      const double alpha = rr / d.dot(ad).real();
      x += alpha * d;
      r -= alpha * ad;
      const double rr_new = r.squaredNorm();
      d = r + (rr_new / rr) * d;
      rr = rr_new;
    }
    const double xx = x.squaredNorm();
    if (std::sqrt(xx) <= c) return {ImageGrid(shape.height, shape.width, std::move(x)), {0.0, xx - c * c, 0}};
  }

  if (p > opt.dense_limit) throw CapabilityError("dense EVD image update limited to p <= 4096");
  const CMatrix am = a.materialize();
  CMatrix m = assemble_patch_gram(w, cfg, shape) + nu * (am.adjoint() * am);
  Eigen::SelfAdjointEigenSolver<CMatrix> evd(m);
  const RVector& sig = evd.eigenvalues();
  const CVector z = evd.eigenvectors().adjoint() * rhs;
  const RVector z2 = z.cwiseAbs2();
  auto ftilde = [&](double mu) {
    double f = 0.0;
    double df = 0.0;
    for (Index i = 0; i < p; ++i) {
      const double inv = 1.0 / (sig[i] + mu);
      const double t = z2[i] * inv * inv;
      f += t;
      df -= 2.0 * t * inv;
    }
    return std::pair{f, df};
  };
  const MultiplierState mult = newton_multiplier(ftilde, c);
  CVector scaled(p);
  for (Index i = 0; i < p; ++i) scaled[i] = z[i] / (sig[i] + mult.mu);
  return {ImageGrid(shape.height, shape.width, evd.eigenvectors() * scaled), mult};
}

}  // namespace tbcs
