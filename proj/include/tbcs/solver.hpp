#pragma once

// Block coordinate descent for transform-blind compressed sensing.
//
//   A1: nu||Ax-y||^2 + sum_j ||W P_j x - b_j||^2 + lambda Q(W),  ||B||_0 <= s
//   A2: same without Q, W unitary
//   A3: A1 with the budget replaced by the penalty eta^2 ||B||_0
//
// all subject to ||x||_2 <= C. Each outer iteration runs `inner`
// alternations of (transform update, sparse coding) on the patches of the
// current image, then one exact image update. Every sub-step is a global
// minimizer of its block, so the objective can only go down; the solver
// checks this after each sub-step.

#include "tbcs/core.hpp"
#include "tbcs/grid.hpp"
#include "tbcs/image_update.hpp"
#include "tbcs/metrics.hpp"
#include "tbcs/sensing.hpp"
#include "tbcs/sparse_coding.hpp"
#include "tbcs/transform.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace tbcs {

enum class Algorithm { A1, A2, A3 };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::A1: return "a1";
    case Algorithm::A2: return "a2";
    case Algorithm::A3: return "a3";
  }
  return "?";
}

struct SolverParams {
  Algorithm algo = Algorithm::A1;
  double nu = 3.81;
  double lambda0 = 0.2;  // lambda = lambda0 * N
  std::optional<Index> s;
  std::optional<double> s_frac = 0.055;
  std::optional<double> eta;
  double energy_cap = 1e5;
  int inner = 1;
  int outer = 40;
  /// Ramp the budget linearly from 60% to 100% over the first half of the
  /// outer iterations.
  bool sparsity_schedule = false;
  /// Stop once |g^t - g^{t-1}| <= early_stop_rtol * |g^{t-1}|; 0 disables.
  double early_stop_rtol = 0.0;
  /// Abort if any sub-step raises the objective by more than this (relative).
  double monotone_slack = 1e-9;
  bool check_monotone = true;

  void validate() const {
    if (!(nu > 0.0)) throw ArgumentError("nu must be > 0");
    if (!(energy_cap > 0.0)) throw ArgumentError("energy cap C must be > 0");
    if (inner < 1) throw ArgumentError("inner iterations must be >= 1");
    if (outer < 0) throw ArgumentError("outer iterations must be >= 0");
    if (algo != Algorithm::A2 && !(lambda0 > 0.0)) throw ArgumentError("lambda0 must be > 0");
    if (algo == Algorithm::A3) {
      if (!eta || !(*eta > 0.0)) throw ArgumentError("A3 requires eta > 0");
    } else {
      if (s.has_value() == s_frac.has_value()) throw ArgumentError("set exactly one of s or s_frac for A1/A2");
      if (s && *s < 0) throw ArgumentError("sparsity s must be >= 0");
      if (s_frac && !(*s_frac >= 0.0 && *s_frac <= 1.0)) throw ArgumentError("s_frac must lie in [0, 1]");
    }
  }

  double lambda(Index patch_count) const { return lambda0 * static_cast<double>(patch_count); }

  /// Target budget min(s, nN).
  Index budget(Index n, Index patch_count) const {
    const Index total = n * patch_count;
    const Index target = s ? *s : std::llround(*s_frac * static_cast<double>(total));
    return std::min(target, total);
  }

  /// Budget used in outer iteration t (1-based).
  Index budget_at(int t, Index n, Index patch_count) const {
    const Index full = budget(n, patch_count);
    if (!sparsity_schedule || outer < 2) return full;
    const double ramp_len = 0.5 * outer;
    const double frac = std::min(1.0, 0.6 + 0.4 * (t - 1) / std::max(1.0, ramp_len - 1.0));
    return std::min(full, static_cast<Index>(std::llround(frac * static_cast<double>(full))));
  }
};

/// Measurement model y = A x: either undersampled Fourier (fast image
/// update) or a generic operator.
class Measurements {
 public:
  static Measurements fourier(const KSpaceData& kspace, const SamplingMask& mask) {
    Measurements m;
    m.op_ = SensingOperator::fourier(mask);
    m.y_ = m.op_.measurements(kspace);
    m.fs_ = FourierSampling::make(kspace, mask);
    return m;
  }

  static Measurements generic(SensingOperator op, CVector y) {
    if (y.size() != op.rows()) throw ConfigError("measurement vector length does not match sensing operator");
    Measurements m;
    m.op_ = std::move(op);
    m.y_ = std::move(y);
    return m;
  }

  Shape shape() const { return op_.shape(); }
  const SensingOperator& op() const { return op_; }
  const CVector& y() const { return y_; }
  const std::optional<FourierSampling>& fourier_sampling() const { return fs_; }

  /// ||A x - y||_2^2.
  double residual_sq(const ImageGrid& x) const {
    if (fs_) return fs_->residual_sq(x);
    return (op_.apply(x.data()) - y_).squaredNorm();
  }

  /// A^+ y: zero filling for Fourier data (F_u has orthonormal rows), a
  /// minimum-norm least-squares solve otherwise.
  ImageGrid pseudo_inverse() const {
    const Shape s = shape();
    if (fs_) return ImageGrid(s.height, s.width, op_.adjoint(y_));
    const CMatrix a = op_.materialize();
    return ImageGrid(s.height, s.width, a.completeOrthogonalDecomposition().solve(y_));
  }

 private:
  SensingOperator op_;
  CVector y_;
  std::optional<FourierSampling> fs_;
};

struct ObjectiveBreakdown {
  double sparsification_error = 0.0;
  double fidelity = 0.0;
  double regularizer = 0.0;
  double sparsity_penalty = 0.0;
  double total = 0.0;
};

/// Exact objective of the chosen formulation. Constraints are checked, not
/// folded in as infinite barriers: an infeasible point raises FeasibilityError.
/// `budget` overrides the sparsity budget derived from params (A1/A2).
inline ObjectiveBreakdown eval_objective(const CMatrix& w, const CMatrix& b, const ImageGrid& x,
                                         const Measurements& meas, const SolverParams& params,
                                         const PatchConfig& cfg, std::optional<Index> budget = std::nullopt,
                                         const CMatrix* patches = nullptr) {
  const Index n = cfg.n();
  const Index big_n = cfg.patch_count(shape_of(x));
  if (w.rows() != n || w.cols() != n) throw ConfigError("transform size does not match patch size");
  if (b.rows() != n || b.cols() != big_n) throw ConfigError("sparse code matrix has the wrong shape");

  const double norm_x = x.data().norm();
  if (norm_x > params.energy_cap * (1.0 + 1e-9))
    throw FeasibilityError("energy constraint ||x||_2 <= C violated");
  const Index nnz = (b.array() != Complex(0.0)).count();
  if (params.algo != Algorithm::A3) {
    const Index s = budget ? *budget : params.budget(n, big_n);
    if (nnz > s) throw FeasibilityError("sparsity constraint ||B||_0 <= s violated");
  }
  if (params.algo == Algorithm::A2) {
    const double err = (w.adjoint() * w - CMatrix::Identity(n, n)).norm();
    if (err > 1e-10 * static_cast<double>(n)) throw FeasibilityError("unitary constraint W^H W = I violated");
  }

  ObjectiveBreakdown o;
  o.sparsification_error = patches ? (w * *patches - b).squaredNorm() : (w * extract_patches(x, cfg) - b).squaredNorm();
  o.fidelity = params.nu * meas.residual_sq(x);
  if (params.algo != Algorithm::A2) {
    const double q = eval_Q(w);
    if (!std::isfinite(q)) throw FeasibilityError("transform is singular");
    o.regularizer = params.lambda(big_n) * q;
  }
  if (params.algo == Algorithm::A3) o.sparsity_penalty = (*params.eta) * (*params.eta) * static_cast<double>(nnz);
  o.total = o.sparsification_error + o.fidelity + o.regularizer + o.sparsity_penalty;
  return o;
}

inline double condition_number(const CMatrix& w) {
  const RVector sv = Eigen::JacobiSVD<CMatrix>(w).singularValues();
  if (sv.size() == 0) return 1.0;
  const double lo = sv[sv.size() - 1];
  return lo > 0.0 ? sv[0] / lo : std::numeric_limits<double>::infinity();
}

struct SolverState {
  Transform w;
  SparseCodes b;
  ImageGrid x;
};

enum class Step { Init, Transform, SparseCode, Image };

struct IterationRecord {
  int iter = 0;
  ObjectiveBreakdown objective;
  double dx = 0.0;
  double sparsity_fraction = 0.0;
  Index nonzeros = 0;
  Index budget = 0;
  double kappa = 1.0;
  double q_value = 0.0;
  double mu = 0.0;
  double psnr = std::numeric_limits<double>::quiet_NaN();
  double hfen = std::numeric_limits<double>::quiet_NaN();
  /// Objective after every sub-step of this iteration, in execution order.
  std::vector<double> substep_objectives;
};

struct IterationTrace {
  std::vector<IterationRecord> rows;
};

struct SolverCallbacks {
  /// After every sub-step (and once for the initial point).
  std::function<void(int iter, Step, const SolverState&, const ObjectiveBreakdown&)> on_step;
  /// After every outer iteration (row 0 is the initial point).
  std::function<void(const IterationRecord&, const SolverState&)> on_iteration;
};

struct SolveResult {
  SolverState state;
  IterationTrace trace;
};

/// Sparse coding for the current algorithm.
inline SparseCodes sparse_code(const CMatrix& z, const SolverParams& params, Index budget) {
  return params.algo == Algorithm::A3 ? hard_threshold(z, *params.eta) : project_s_l0(z, budget);
}

/// W0 = patch 2D DCT, x0 = A^+ y scaled into the energy ball, B0 = exact
/// sparse codes of (W0, x0) under the first iteration's budget.
inline SolverState initialize(const Measurements& meas, const SolverParams& params, const PatchConfig& cfg) {
  params.validate();
  const Shape shape = meas.shape();
  cfg.validate(shape);
  ImageGrid x0 = meas.pseudo_inverse();
  const double nx = x0.data().norm();
  if (nx > params.energy_cap) x0.data() *= params.energy_cap / nx;
  Transform w0 = dct2_transform(cfg.side);
  const Index budget = params.budget_at(1, cfg.n(), cfg.patch_count(shape));
  SparseCodes b0 = sparse_code(w0.matrix * extract_patches(x0, cfg), params, budget);
  return {std::move(w0), std::move(b0), std::move(x0)};
}

namespace detail {

class MonotoneGuard {
 public:
  // `scale` bounds the magnitude of the summed terms; it sets a rounding floor
  // so objectives near zero are not flagged for noise-level increases.
  MonotoneGuard(const SolverParams& p, double scale)
      : params_(p), floor_(64.0 * std::numeric_limits<double>::epsilon() * scale) {}

  void reset(double value) { last_ = value; }

  void check(double value, int iter, const char* step) {
    if (params_.check_monotone) {
      const double slack = params_.monotone_slack * std::abs(last_) + floor_;
      if (value > last_ + slack) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "objective increased at iteration " << iter << " (" << step << "): " << last_ << " -> " << value;
        throw InvariantError(msg.str());
      }
    }
    last_ = value;
  }

 private:
  const SolverParams& params_;
  double floor_;
  double last_ = std::numeric_limits<double>::infinity();
};

}  // namespace detail

/// Runs the block coordinate descent. `reference`, when given, adds PSNR and
/// HFEN to the trace. `init` overrides the default initialization.
inline SolveResult solve(const Measurements& meas, const SolverParams& params, const PatchConfig& cfg,
                         std::optional<SolverState> init = std::nullopt, const SolverCallbacks& callbacks = {},
                         const ImageGrid* reference = nullptr) {
  params.validate();
  const Shape shape = meas.shape();
  cfg.validate(shape);
  const Index n = cfg.n();
  const Index big_n = cfg.patch_count(shape);
  const double lambda = params.lambda(big_n);
  const bool fast = meas.fourier_sampling().has_value() && cfg.is_circulant();

  SolverState st = init ? std::move(*init) : initialize(meas, params, cfg);
  if (st.w.n() != n) throw ConfigError("initial transform size does not match patch size");
  if (!(shape_of(st.x) == shape)) throw ConfigError("initial image shape does not match measurements");
  st.w.mode = params.algo == Algorithm::A2 ? TransformMode::Unitary : TransformMode::WellConditioned;

  SolveResult result;
  detail::MonotoneGuard guard(params, static_cast<double>(n) * st.x.data().squaredNorm() +
                                          params.nu * meas.y().squaredNorm());
  CMatrix x_patches = extract_patches(st.x, cfg);

  auto record = [&](int iter, double dx, Index budget, double mu, std::vector<double> subs,
                    const ObjectiveBreakdown& obj) {
    IterationRecord r;
    r.iter = iter;
    r.objective = obj;
    r.dx = dx;
    r.nonzeros = st.b.nonzeros();
    r.sparsity_fraction = static_cast<double>(r.nonzeros) / static_cast<double>(n * big_n);
    r.budget = budget;
    r.kappa = condition_number(st.w.matrix);
    r.q_value = eval_Q(st.w.matrix);
    r.mu = mu;
    r.substep_objectives = std::move(subs);
    if (reference) {
      r.psnr = psnr(st.x, *reference);
      r.hfen = hfen(st.x, *reference);
    }
    if (callbacks.on_iteration) callbacks.on_iteration(r, st);
    result.trace.rows.push_back(std::move(r));
  };

  {
    const Index budget0 = params.budget_at(1, n, big_n);
    const ObjectiveBreakdown obj = eval_objective(st.w.matrix, st.b.data, st.x, meas, params, cfg, budget0, &x_patches);
    guard.reset(obj.total);
    if (callbacks.on_step) callbacks.on_step(0, Step::Init, st, obj);
    record(0, 0.0, budget0, 0.0, {obj.total}, obj);
  }

  for (int t = 1; t <= params.outer; ++t) {
    const Index budget = params.budget_at(t, n, big_n);
    std::vector<double> subs;
    auto after = [&](Step step, const char* name) {
      const ObjectiveBreakdown obj = eval_objective(st.w.matrix, st.b.data, st.x, meas, params, cfg, budget, &x_patches);
      guard.check(obj.total, t, name);
      subs.push_back(obj.total);
      if (callbacks.on_step) callbacks.on_step(t, step, st, obj);
      return obj;
    };

    std::optional<TransformFactor> factor;
    if (params.algo != Algorithm::A2) factor = TransformFactor::make(x_patches, lambda);
    for (int l = 0; l < params.inner; ++l) {
      st.w = params.algo == Algorithm::A2 ? update_transform_unitary(x_patches, st.b.data)
                                          : update_transform_wellcond(x_patches, st.b.data, lambda, *factor);
      after(Step::Transform, "transform update");
      st.b = sparse_code(st.w.matrix * x_patches, params, budget);
      after(Step::SparseCode, "sparse coding");
    }

    ImageUpdateResult upd =
        fast ? mri_image_update(st.w.matrix, st.b.data, *meas.fourier_sampling(), params.nu, params.energy_cap,
                                build_bccb_spectrum(st.w.matrix, cfg, shape), cfg)
             : generic_image_update(st.w.matrix, st.b.data, meas.op(), meas.y(), params.nu, params.energy_cap, cfg,
                                    shape);
    const double dx = (upd.image.data() - st.x.data()).norm();
    st.x = std::move(upd.image);
    x_patches = extract_patches(st.x, cfg);
    const ObjectiveBreakdown obj = after(Step::Image, "image update");

    const double prev = result.trace.rows.back().objective.total;
    record(t, dx, budget, upd.multiplier.mu, std::move(subs), obj);
    if (params.early_stop_rtol > 0.0 && std::abs(prev - obj.total) <= params.early_stop_rtol * std::abs(prev)) break;
  }

  result.state = std::move(st);
  return result;
}

}  // namespace tbcs
