// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#include "agr/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include "json.hpp"
#include <sstream>

#include "agr/errors.hpp"
#include "agr/optim.hpp"
#include "agr/rng.hpp"

namespace agr::verify {

namespace {

// Stream ids keep every check's random draws independent of the others.
enum Stream : std::uint64_t {
  kContraction = 1,
  kSimplex = 2,
  kJacobian = 3,
  kRosenbrock = 4,
  kSgdRate = 5,
  kRecursion = 6,
  kPlacement = 7,
  kGradObjective = 8,
  kGradMlp = 9,
};

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t = {
      {"theorem41_norm_contraction", 1e-12},
      {"elementwise_contraction", 1e-15},
      {"coefficient_simplex", 1e-9},
      {"theorem41_jacobian_spectral", 1e-3},
      {"theorem41_jacobian_diagonal", 1e-6},
      {"theorem42_momentum_recursion", 1e-10},
      {"gradcheck_relative", 1e-4},
      {"gradcheck_absolute", 1e-8},
      {"fd_step", 1e-5},
  };
  return t;
}

std::string format_values(std::span<const double> v, std::size_t limit = 8) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < std::min(v.size(), limit); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  if (v.size() > limit) os << ",...(" << v.size() << " elements)";
  os << ']';
  return os.str();
}

std::string describe_tensor(const Tensor& t) {
  return shape_string(t.shape()) + " " + format_values(t.data());
}

Tensor apply_psi(const TrialConfig& cfg, const Tensor& g) {
  return cfg.regularizer ? cfg.regularizer(g) : regularize(g);
}

AgrCoefficients apply_coefficients(const TrialConfig& cfg, const Tensor& g) {
  return cfg.coefficients ? cfg.coefficients(g) : compute_coefficients(g);
}

// psi written out from its definition, without the library routine.
std::vector<double> reference_psi(std::span<const double> g) {
  double total = 0.0;
  for (const double v : g) total += std::abs(v);
  std::vector<double> out(g.begin(), g.end());
  if (total == 0.0) return out;
  for (auto& v : out) v = (1.0 - std::abs(v) / total) * v;
  return out;
}

bool bit_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

Tensor random_psd(Rng& rng, std::size_t dim, bool diagonal) {
  std::vector<double> a(dim * dim, 0.0);
  if (diagonal) {
    for (std::size_t i = 0; i < dim; ++i) a[i * dim + i] = rng.uniform(0.1, 5.0);
    return Tensor::from({dim, dim}, std::move(a));
  }
  const std::size_t rank = 1 + rng.below(dim);
  std::vector<double> b(dim * rank);
  for (auto& v : b) v = rng.normal();
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < rank; ++k) s += b[i * rank + k] * b[j * rank + k];
      s /= static_cast<double>(rank);
      a[i * dim + j] = s;
      a[j * dim + i] = s;
    }
  return Tensor::from({dim, dim}, std::move(a));
}

bool is_diagonal(const Tensor& a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j && a.at(i, j) != 0.0) return false;
  return true;
}

Tensor matvec(const Tensor& a, std::span<const double> w) {
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a.at(i, j) * w[j];
  return Tensor::vector(out);
}

// Jacobian of w -> psi(grad(w)) by central differences.
Tensor fd_jacobian(const std::function<Tensor(const Tensor&)>& grad, const Tensor& w, double h,
                   const std::function<Tensor(const Tensor&)>& psi) {
  const std::size_t n = w.size();
  std::vector<double> j(n * n);
  for (std::size_t c = 0; c < n; ++c) {
    Tensor plus = w, minus = w;
    plus[c] += h;
    minus[c] -= h;
    const Tensor fp = psi(grad(plus));
    const Tensor fm = psi(grad(minus));
    for (std::size_t r = 0; r < n; ++r) j[r * n + c] = (fp[r] - fm[r]) / (2.0 * h);
  }
  return Tensor::from({n, n}, std::move(j));
}

}  // namespace

double TrialConfig::tolerance(const std::string& name) const {
  if (const auto it = tolerances.find(name); it != tolerances.end()) return it->second;
  if (const auto it = default_tolerances().find(name); it != default_tolerances().end()) {
    return it->second;
  }
  throw ParameterError("no tolerance registered for " + name);
}

void TrialConfig::validate() const {
  if (trials < 1) throw ParameterError("trials must be at least 1");
  if (shapes.empty() || distributions.empty()) {
    throw ParameterError("need at least one shape and one distribution");
  }
  for (const auto& s : shapes) element_count(s);
  for (const auto& [name, tol] : tolerances) {
    if (!(tol > 0.0)) throw ParameterError("tolerance for " + name + " must be positive");
  }
  if (max_quadratic_dim < 1) throw ParameterError("max_quadratic_dim must be at least 1");
}

void CheckResult::record(double margin, double tol, const std::function<std::string()>& describe) {
  record_outcome(margin, margin < -tol || std::isnan(margin), describe);
}

void CheckResult::record_outcome(double margin, bool failed,
                                 const std::function<std::string()>& describe) {
  worst_margin = trials == 0 ? margin : std::min(worst_margin, margin);
  ++trials;
  if (failed) {
    ++failures;
    if (!example && describe) example = describe();
  }
}

bool VerifyReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed(); });
}

const CheckResult* VerifyReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string VerifyReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["pass"] = passed();
  auto& rows = doc["checks"];
  rows = nlohmann::ordered_json::object();
  for (const auto& c : checks) {
    nlohmann::ordered_json row;
    row["trials"] = c.trials;
    row["failures"] = c.failures;
    row["worst_margin"] = std::isfinite(c.worst_margin) ? c.worst_margin : 0.0;
    row["informational"] = c.informational;
    if (c.example) row["example"] = *c.example;
    rows[c.name] = std::move(row);
  }
  return doc.dump(2);
}

Tensor sample_gradient(const TrialConfig& cfg, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t seed = derive_seed(derive_seed(cfg.seed, stream), index);
  const Shape& shape = cfg.shapes[index % cfg.shapes.size()];
  const auto& dist = cfg.distributions[(index / cfg.shapes.size()) % cfg.distributions.size()];
  Tensor g = rand_fill(shape, dist, derive_seed(seed, 0));
  if (std::holds_alternative<LogNormal>(dist)) {
    const Tensor u = rand_fill(shape, Uniform{0.0, 1.0}, derive_seed(seed, 1));
    for (std::size_t i = 0; i < g.size(); ++i)
      if (u[i] < 0.5) g[i] = -g[i];
  }
  return g;
}

std::vector<CheckResult> check_norm_contraction(const TrialConfig& cfg) {
  cfg.validate();
  CheckResult row{.name = "theorem41_norm_contraction"};
  const double tol_l2 = cfg.tolerance("theorem41_norm_contraction");
  const double tol_elem = cfg.tolerance("elementwise_contraction");
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    const Tensor g = sample_gradient(cfg, kContraction, t);
    const Tensor p = apply_psi(cfg, g);
    const double l2_margin = reduce(g, Reduction::kL2) - reduce(p, Reduction::kL2);
    double elem_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
      elem_margin = std::min(elem_margin, std::abs(g[i]) - std::abs(p[i]));
    }
    const bool failed = l2_margin < -tol_l2 || elem_margin < -tol_elem;
    row.record_outcome(std::min(l2_margin, elem_margin), failed, [&] {
      return "g=" + describe_tensor(g) + " psi=" + describe_tensor(p);
    });
  }
  return {row};
}

std::vector<CheckResult> check_coefficient_simplex(const TrialConfig& cfg) {
  cfg.validate();
  CheckResult row{.name = "coefficient_simplex"};
  const double tol = cfg.tolerance("coefficient_simplex");
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    const Tensor g = sample_gradient(cfg, kSimplex, t);
    const AgrCoefficients c = apply_coefficients(cfg, g);
    if (c.degenerate()) continue;
    const double sum_err = std::abs(reduce(c.alpha, Reduction::kSum) - 1.0);
    const auto [lo, hi] = std::minmax_element(c.alpha.data().begin(), c.alpha.data().end());
    const bool failed = sum_err > tol || *lo < 0.0 || *hi > 1.0;
    const double margin = std::min({tol - sum_err, *lo, 1.0 - *hi});
    row.record_outcome(margin, failed, [&] {
      std::ostringstream os;
      os.precision(17);
      os << "g=" << describe_tensor(g) << " sum(alpha)=" << reduce(c.alpha, Reduction::kSum);
      return os.str();
    });
  }
  return {row};
}

JacobianProbe probe_jacobian(const Tensor& a, const Tensor& w, double h, const Regularizer& psi) {
  if (!(h > 0.0)) throw ParameterError("finite-difference step must be positive");
  const nn::Objective objective = nn::Objective::quadratic(a);
  if (w.size() != objective.dimension()) throw ShapeError("point dimension does not match A");
  const Regularizer reg = psi ? psi : Regularizer(regularize);
  auto grad = [&](const Tensor& x) { return matvec(a, x.data()); };

  JacobianProbe out;
  out.jacobian = fd_jacobian(grad, w.reshaped({w.size()}), h, reg);
  out.jacobian_norm = nn::spectral_norm(out.jacobian);
  out.hessian_norm = nn::spectral_norm(a);
  if (is_diagonal(a)) {
    const Tensor g = matvec(a, w.data());
    const double total = reduce(g, Reduction::kL1);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double aii = a.at(i, i);
      const double jii = out.jacobian.at(i, i);
      // (S - g_i)^2 / S^2 for g_i >= 0 and (S + g_i)^2 / S^2 otherwise.
      double factor = 1.0;
      if (total > 0.0) {
        const double num = g[i] >= 0.0 ? total - g[i] : total + g[i];
        factor = (num * num) / (total * total);
      }
      out.diagonal_ratio.push_back(aii > 0.0 ? jii / aii : jii);
      out.predicted_factor.push_back(aii > 0.0 ? factor : 0.0);
    }
  }
  return out;
}

std::vector<CheckResult> check_jacobian_bound(const TrialConfig& cfg) {
  cfg.validate();
  CheckResult spectral{.name = "theorem41_jacobian_spectral"};
  CheckResult diagonal{.name = "theorem41_jacobian_diagonal"};
  CheckResult rosen{.name = "theorem41_jacobian_rosenbrock", .informational = true};
  const double tol_spec = cfg.tolerance("theorem41_jacobian_spectral");
  const double tol_diag = cfg.tolerance("theorem41_jacobian_diagonal");
  const double h = cfg.tolerance("fd_step");
  const Regularizer psi = cfg.regularizer ? cfg.regularizer : Regularizer(regularize);

  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    Rng rng(derive_seed(derive_seed(cfg.seed, kJacobian), t));
    const std::size_t dim = 1 + rng.below(cfg.max_quadratic_dim);
    const bool diag = t % 2 == 1;
    const Tensor a = random_psd(rng, dim, diag);
    const double a_norm = nn::spectral_norm(a);

    // psi is not differentiable where a gradient coordinate crosses zero;
    // redraw points whose gradient sits within reach of the difference step.
    Tensor w = Tensor::zeros({dim});
    for (int attempt = 0; attempt < 64; ++attempt) {
      for (std::size_t i = 0; i < dim; ++i) w[i] = rng.normal();
      const Tensor g = matvec(a, w.data());
      double closest = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < dim; ++i) closest = std::min(closest, std::abs(g[i]));
      if (closest > 1e3 * h * std::max(a_norm, 1.0)) break;
    }

    const JacobianProbe probe = probe_jacobian(a, w, h, psi);
    // Relative slack to ||A||(1 + tol); a flat objective must give J = 0.
    const double margin = a_norm > 0.0 ? (1.0 + tol_spec) - probe.jacobian_norm / a_norm
                                       : -probe.jacobian_norm;
    spectral.record(margin, 0.0, [&] {
      std::ostringstream os;
      os.precision(17);
      os << "dim=" << dim << " diagonal=" << diag << " w=" << format_values(w.data())
         << " ||J||=" << probe.jacobian_norm << " ||A||=" << a_norm;
      return os.str();
    });

    if (diag) {
      double margin = std::numeric_limits<double>::infinity();
      std::size_t worst = 0;
      for (std::size_t i = 0; i < probe.diagonal_ratio.size(); ++i) {
        const double r = probe.diagonal_ratio[i];
        const double f = probe.predicted_factor[i];
        const double m = std::min({tol_diag - std::abs(r - f), r + tol_diag, 1.0 + tol_diag - r});
        if (m < margin) {
          margin = m;
          worst = i;
        }
      }
      diagonal.record(margin, 0.0, [&] {
        std::ostringstream os;
        os.precision(17);
        os << "dim=" << dim << " coord=" << worst << " ratio=" << probe.diagonal_ratio[worst]
           << " predicted=" << probe.predicted_factor[worst];
        return os.str();
      });
    }
  }

  // Non-convex landscape: reported, never asserted.
  const nn::Objective rb = nn::Objective::rosenbrock();
  const std::uint64_t rosen_trials = std::min<std::uint64_t>(cfg.trials, 1000);
  for (std::uint64_t t = 0; t < rosen_trials; ++t) {
    Rng rng(derive_seed(derive_seed(cfg.seed, kRosenbrock), t));
    const Tensor w = Tensor::vector({rng.uniform(-2.0, 2.0), rng.uniform(-1.0, 3.0)});
    auto grad = [&](const Tensor& x) { return nn::objective_eval(rb, x).gradient; };
    const Tensor j = fd_jacobian(grad, w, h, psi);
    const double hn = nn::spectral_norm(*nn::objective_eval(rb, w).hessian);
    rosen.record(1.0 - nn::spectral_norm(j) / hn, 0.0, nullptr);
  }
  return {spectral, diagonal, rosen};
}

std::vector<CheckResult> check_lr_equivalence(const TrialConfig& cfg) {
  cfg.validate();
  CheckResult rate{.name = "theorem42_sgd_rate"};
  CheckResult recursion{.name = "theorem42_momentum_recursion"};
  CheckResult split{.name = "theorem42_constant_alpha_split", .informational = true};
  const double tol = cfg.tolerance("theorem42_momentum_recursion");

  OptimizerConfig sgd = OptimizerConfig::defaults(OptimizerKind::kSgd);
  sgd.agr = AgrSchedule::on();

  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    Rng rng(derive_seed(derive_seed(cfg.seed, kSgdRate), t));
    const Tensor g = sample_gradient(cfg, kSgdRate, t);
    const Tensor w0 = rand_fill(g.shape(), Normal{}, rng.next_u64());
    sgd.lr = rng.uniform(1e-4, 1.0);

    Tensor stepped = w0;
    OptimizerState state;
    sgd_step(stepped, g, sgd, state);
    const Tensor rates = effective_rate_view(sgd.lr, compute_coefficients(g));
    const Tensor viewed = zip_binary(w0, zip_binary(rates, g, BinaryOp::kMul), BinaryOp::kSub);
    const bool same = bit_equal(stepped.data(), viewed.data());
    rate.record(same ? 0.0 : -max_abs_diff(stepped.data(), viewed.data()) - 1.0, 0.0, [&] {
      return "g=" + describe_tensor(g) + " lr=" + std::to_string(sgd.lr);
    });
  }

  // Momentum form: heavy ball with (1 - beta1) dampening against the
  // unrolled sum  w_{t+1} = w_t - lr * sum_i beta1^i (1 - beta1)(1 - alpha_{t-i}) g_{t-i}.
  OptimizerConfig sgdm = OptimizerConfig::defaults(OptimizerKind::kSgdm);
  sgdm.agr = AgrSchedule::on();
  sgdm.sgdm_dampening = true;
  sgdm.beta1 = 0.9;
  const std::size_t steps = cfg.recursion_steps;
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    Rng rng(derive_seed(derive_seed(cfg.seed, kRecursion), t));
    sgdm.lr = rng.uniform(1e-3, 0.1);
    std::vector<Tensor> grads;
    for (std::size_t s = 0; s < steps; ++s) {
      grads.push_back(sample_gradient(cfg, kRecursion, t * steps + s));
      if (s > 0 && grads.back().shape() != grads.front().shape()) {
        grads.back() = rand_fill(grads.front().shape(), Normal{}, rng.next_u64());
      }
    }
    const Shape& shape = grads.front().shape();
    Tensor w = rand_fill(shape, Normal{}, rng.next_u64());
    OptimizerState state;

    // alpha from its definition, per step.
    std::vector<std::vector<double>> alphas;
    for (const auto& g : grads) {
      double total = 0.0;
      for (const double v : g.data()) total += std::abs(v);
      std::vector<double> a(g.size(), 0.0);
      if (total > 0.0)
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(g[i]) / total;
      alphas.push_back(std::move(a));
    }

    double worst = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const Tensor before = w;
      sgdm_step(w, grads[s], sgdm, state);
      for (std::size_t i = 0; i < w.size(); ++i) {
        double sum = 0.0;
        double decay = 1.0;
        for (std::size_t back = 0; back <= s; ++back) {
          const std::size_t idx = s - back;
          sum += decay * (1.0 - sgdm.beta1) * (1.0 - alphas[idx][i]) * grads[idx][i];
          decay *= sgdm.beta1;
        }
        const double expected = before[i] - sgdm.lr * sum;
        worst = std::max(worst, std::abs(w[i] - expected));
      }
    }
    recursion.record(tol - worst, 0.0, [&] {
      std::ostringstream os;
      os << "shape=" << shape_string(shape) << " max discrepancy=" << worst;
      return os.str();
    });
  }

  // With a constant alpha the unrolled sum scales by (1 - alpha). The split
  // sqrt(1 - alpha^t)^2 = 1 - alpha^t does not, except at t = 1.
  for (std::size_t n : {2u, 4u, 16u, 256u}) {
    const double alpha = 1.0 / static_cast<double>(n);
    for (std::size_t t = 1; t <= steps; ++t) {
      const double split_factor = 1.0 - std::pow(alpha, static_cast<double>(t));
      split.record(-std::abs((1.0 - alpha) - split_factor), 0.0, nullptr);
    }
  }
  return {rate, recursion, split};
}

namespace {

class RecordingObserver : public StepObserver {
 public:
  void on_accumulator_input(std::size_t, MomentSlot slot, std::span<const double> input) override {
    inputs[slot].assign(input.begin(), input.end());
  }
  void clear() { inputs.clear(); }

  std::map<MomentSlot, std::vector<double>> inputs;
};

}  // namespace

std::vector<CheckResult> check_placement(const TrialConfig& cfg) {
  cfg.validate();
  CheckResult adamw{.name = "placement_adamw"};
  CheckResult adan{.name = "placement_adan"};
  const Shape shape = {8, 8};

  {
    OptimizerConfig c = OptimizerConfig::defaults(OptimizerKind::kAdamW);
    c.agr = AgrSchedule::on();
    c.weight_decay = 0.01;
    Rng rng(derive_seed(cfg.seed, kPlacement));
    Tensor w = rand_fill(shape, Normal{}, rng.next_u64());
    OptimizerState state;
    RecordingObserver obs;
    for (std::size_t s = 0; s < cfg.placement_steps; ++s) {
      const Tensor g = rand_fill(shape, Normal{}, rng.next_u64());
      std::vector<double> raw(g.size());
      for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = g[i] + c.weight_decay * w[i];
      const auto reg = reference_psi(raw);
      obs.clear();
      adamw_agr_step(w, g, c, state, {.observer = &obs});
      const bool ok = bit_equal(obs.inputs[MomentSlot::kSecond], raw) &&
                      bit_equal(obs.inputs[MomentSlot::kFirst], reg) && !bit_equal(raw, reg);
      adamw.record(ok ? 0.0 : -1.0, 0.0, [&] { return "step " + std::to_string(s); });
    }
  }
  {
    OptimizerConfig c = OptimizerConfig::defaults(OptimizerKind::kAdan);
    c.agr = AgrSchedule::on();
    Rng rng(derive_seed(cfg.seed + 1, kPlacement));
    Tensor w = rand_fill(shape, Normal{}, rng.next_u64());
    OptimizerState state;
    RecordingObserver obs;
    std::vector<double> prev;
    for (std::size_t s = 0; s < cfg.placement_steps; ++s) {
      const Tensor g = rand_fill(shape, Normal{}, rng.next_u64());
      const std::vector<double> raw(g.data().begin(), g.data().end());
      std::vector<double> n_input = raw;
      if (s > 0)
        for (std::size_t i = 0; i < raw.size(); ++i)
          n_input[i] = raw[i] + (1.0 - c.beta2) * (raw[i] - prev[i]);
      const auto reg = reference_psi(raw);
      obs.clear();
      adan_agr_step(w, g, c, state, {.observer = &obs});
      const bool ok = bit_equal(obs.inputs[MomentSlot::kSecond], n_input) &&
                      bit_equal(obs.inputs[MomentSlot::kFirst], reg) && !bit_equal(raw, reg);
      adan.record(ok ? 0.0 : -1.0, 0.0, [&] { return "step " + std::to_string(s); });
      prev = raw;
    }
  }
  return {adamw, adan};
}

Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f, const Tensor& w,
                                  double h) {
  if (!(h > 0.0)) throw ParameterError("finite-difference step must be positive");
  std::vector<double> out(w.size());
  Tensor probe = w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double fp = f(probe);
    probe[i] = orig - h;
    const double fm = f(probe);
    probe[i] = orig;
    out[i] = (fp - fm) / (2.0 * h);
  }
  return Tensor::from(w.shape(), std::move(out));
}

namespace {

// Margin of one analytic/numeric pair against the mixed tolerance.
double gradient_margin(double analytic, double numeric, double rel, double abs_floor) {
  const double diff = std::abs(analytic - numeric);
  const double allowed = std::max(abs_floor, rel * std::max(std::abs(analytic), std::abs(numeric)));
  return (allowed - diff) / std::max(allowed, abs_floor);
}

}  // namespace

std::vector<CheckResult> check_gradients(const TrialConfig& cfg) {
  cfg.validate();
  CheckResult objectives{.name = "gradcheck_objectives"};
  CheckResult mlp{.name = "gradcheck_mlp"};
  const double rel = cfg.tolerance("gradcheck_relative");
  const double abs_floor = cfg.tolerance("gradcheck_absolute");
  const double h = cfg.tolerance("fd_step");

  const std::uint64_t objective_trials = std::min<std::uint64_t>(cfg.trials, 500);
  for (std::uint64_t t = 0; t < objective_trials; ++t) {
    Rng rng(derive_seed(derive_seed(cfg.seed, kGradObjective), t));
    const bool quad = t % 2 == 0;
    const nn::Objective obj = quad
        ? nn::Objective::quadratic(random_psd(rng, 1 + rng.below(10), rng.below(2) == 0))
        : nn::Objective::rosenbrock(rng.uniform(0.5, 2.0), rng.uniform(1.0, 100.0));
    Tensor w = Tensor::zeros({obj.dimension()});
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-2.0, 2.0);
    const Tensor analytic = nn::objective_eval(obj, w).gradient;
    const Tensor numeric =
        finite_difference_gradient([&](const Tensor& x) { return obj.value(x.data()); }, w, h);
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.size(); ++i)
      margin = std::min(margin, gradient_margin(analytic[i], numeric[i], rel, abs_floor));
    objectives.record(margin, 0.0, [&] {
      return std::string(quad ? "quadratic" : "rosenbrock") + " w=" + describe_tensor(w) +
             " analytic=" + describe_tensor(analytic) + " numeric=" + describe_tensor(numeric);
    });
  }

  std::uint64_t case_index = 0;
  for (const std::size_t width : {2u, 8u, 32u}) {
    for (const auto act : {nn::Activation::kRelu, nn::Activation::kTanh, nn::Activation::kIdentity}) {
      for (const bool cross_entropy : {true, false}) {
        const std::uint64_t seed = derive_seed(derive_seed(cfg.seed, kGradMlp), case_index++);
        const std::vector<std::size_t> widths = {3, width, width, 3};
        nn::Mlp model = nn::Mlp::init(widths, act, seed);
        for (auto& layer : model.layers())
          layer.bias = rand_fill(layer.bias.shape(), Normal{0.0, 0.1}, derive_seed(seed, 99));
        const std::size_t batch = 4;
        const Tensor x = rand_fill({batch, 3}, Normal{}, derive_seed(seed, 100));
        const Tensor target = rand_fill({batch, 3}, Normal{}, derive_seed(seed, 101));
        const std::vector<int> labels = {0, 2, 1, 2};

        auto loss_of = [&](const Tensor& logits) {
          return cross_entropy ? nn::softmax_cross_entropy(logits, labels)
                               : nn::mse_loss(logits, target);
        };
        const auto lg = loss_of(model.forward(x));
        const auto grads = model.backward(lg.grad);

        double margin = std::numeric_limits<double>::infinity();
        std::string where;
        for (std::size_t li = 0; li < model.layers().size(); ++li) {
          for (const bool bias : {false, true}) {
            Tensor& param = bias ? model.layers()[li].bias : model.layers()[li].weight;
            const Tensor& analytic = bias ? grads[li].bias : grads[li].weight;
            const Tensor original = param;
            const Tensor numeric = finite_difference_gradient(
                [&](const Tensor& p) {
                  param = p;
                  const double l = loss_of(model.predict(x)).loss;
                  param = original;
                  return l;
                },
                original, h);
            for (std::size_t i = 0; i < numeric.size(); ++i) {
              const double m = gradient_margin(analytic[i], numeric[i], rel, abs_floor);
              if (m < margin) {
                margin = m;
                where = "layer " + std::to_string(li) + (bias ? " bias " : " weight ") +
                        std::to_string(i);
              }
            }
          }
        }
        mlp.record(margin, 0.0, [&] {
          return "width=" + std::to_string(width) + " activation=" +
                 std::string(nn::activation_name(act)) +
                 (cross_entropy ? " loss=cross_entropy " : " loss=mse ") + where;
        });
      }
    }
  }
  return {objectives, mlp};
}

std::optional<Suite> parse_suite(std::string_view name) {
  if (name == "all") return Suite::kAll;
  if (name == "theorem41") return Suite::kTheorem41;
  if (name == "theorem42") return Suite::kTheorem42;
  if (name == "placement") return Suite::kPlacement;
  if (name == "gradcheck") return Suite::kGradcheck;
  return std::nullopt;
}

VerifyReport run_suite(const TrialConfig& cfg, Suite suite) {
  cfg.validate();
  VerifyReport report;
  auto add = [&](std::vector<CheckResult> rows) {
    for (auto& r : rows) report.checks.push_back(std::move(r));
  };
  const bool all = suite == Suite::kAll;
  if (all || suite == Suite::kTheorem41) {
    add(check_norm_contraction(cfg));
    add(check_coefficient_simplex(cfg));
    add(check_jacobian_bound(cfg));
  }
  if (all || suite == Suite::kTheorem42) add(check_lr_equivalence(cfg));
  if (all || suite == Suite::kPlacement) add(check_placement(cfg));
  if (all || suite == Suite::kGradcheck) add(check_gradients(cfg));
  return report;
}

}  // namespace agr::verify
