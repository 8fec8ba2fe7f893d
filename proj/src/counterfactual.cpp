#include "latent/counterfactual.hpp"

#include <algorithm>
#include <cmath>

#include "latent/error.hpp"
#include "latent/text.hpp"

namespace latent {

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::target_reached:
      return "target_reached";
    case StopReason::plateau:
      return "plateau";
    case StopReason::iter_budget:
      return "iter_budget";
    case StopReason::cap_reached:
      return "cap_reached";
    case StopReason::numeric_failure:
      return "numeric_failure";
  }
  return "iter_budget";
}

namespace {

constexpr int kMaxHalvings = 6;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

CounterfactualResult cf_optimize(const DiffMap& classifier_on_u, std::span<const double> u, const Subspace& s,
                                 const CounterfactualConfig& cfg) {
  if (classifier_on_u.out_dim() != 1) throw DimensionError("counterfactual needs a scalar classifier");
  if (classifier_on_u.in_dim() != u.size() || s.basis.rows() != u.size())
    throw DimensionError("classifier, code and subspace dimensions differ");
  if (cfg.max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (!(cfg.step_size >= 0.0)) throw ConfigError("step size must be non-negative");
  if (!(cfg.plateau_tol >= 0.0)) throw ConfigError("plateau_tol must be non-negative");
  if (cfg.magnitude_cap && !(*cfg.magnitude_cap > 0.0)) throw ConfigError("magnitude cap must be positive");

  const Matrix& S = s.basis;
  const std::size_t d = S.cols();
  const double sign = cfg.descend ? -1.0 : 1.0;
  Vector a(d, 0.0);
  Vector point(u.begin(), u.end());
  auto code_at = [&](const Vector& coords) {
    Vector x(u.begin(), u.end());
    const Vector du = S * coords;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += du[i];
    return x;
  };

  CounterfactualResult res;
  Linearization lin = classifier_on_u.linearize(point);
  double logit = lin.value[0];
  if (!std::isfinite(logit)) throw NumericError("classifier is not finite at the starting code");
  res.trajectory.push_back({0, logit});
  res.stop_reason = StopReason::iter_budget;

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    if (cfg.target_logit && sign * logit >= sign * *cfg.target_logit) {
      res.stop_reason = StopReason::target_reached;
      break;
    }
    const double seed = 1.0;
    const Vector grad_u = lin.pullback(std::span<const double>(&seed, 1));
    if (!all_finite(grad_u)) {
      res.stop_reason = StopReason::numeric_failure;
      break;
    }
    const Vector grad_a = scaled(transpose_times(S, grad_u), sign);

    bool accepted = false, capped = false, failed = false;
    double step = cfg.step_size;
    Vector trial_a;
    Linearization trial;
    for (int h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
      trial_a = axpy(a, step, grad_a);
      capped = false;
      if (cfg.magnitude_cap) {
        const double n = norm(trial_a);
        if (n >= *cfg.magnitude_cap) {
          trial_a = scaled(trial_a, *cfg.magnitude_cap / n);
          capped = true;
        }
      }
      trial = classifier_on_u.linearize(code_at(trial_a));
      if (!std::isfinite(trial.value[0])) {
        failed = true;
        break;
      }
      if (sign * trial.value[0] > sign * logit) {
        accepted = true;
        break;
      }
    }
    if (failed) {
      res.stop_reason = StopReason::numeric_failure;
      break;
    }
    if (!accepted) {
      res.stop_reason = StopReason::plateau;
      break;
    }
    const double gain = sign * (trial.value[0] - logit);
    a = std::move(trial_a);
    lin = std::move(trial);
    logit = lin.value[0];
    res.trajectory.push_back({it, logit});
    if (capped) {
      res.stop_reason = StopReason::cap_reached;
      break;
    }
    if (gain < cfg.plateau_tol) {
      res.stop_reason = StopReason::plateau;
      break;
    }
  }
  res.delta_u = S * a;
  return res;
}

CounterfactualResult run_counterfactual(const ToyGenerator& gen, const AnalysisModels& models,
                                        std::string_view classifier, std::span<const double> u, const Subspace& s,
                                        const CounterfactualConfig& cfg) {
  const DiffMap g = gen.image_map(s.space.space);
  CounterfactualResult res = cf_optimize(compose(models.classifier(classifier), g), u, s, cfg);
  res.before = gen.generate(s.space.space, u);
  res.after = gen.generate(s.space.space, add(u, res.delta_u));
  return res;
}

Image difference_map(const Image& before, const Image& after) {
  if (before.height != after.height || before.width != after.width)
    throw DimensionError("difference map needs images of equal size");
  Image out(before.height, before.width, 0.0);
  const std::size_t n = before.pixel_count();
  Vector d(n, 0.0);
  double peak = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t c = 0; c < 3; ++c) d[p] += std::abs(after.values[3 * p + c] - before.values[3 * p + c]);
    d[p] /= 3.0;
    peak = std::max(peak, d[p]);
  }
  if (peak == 0.0) return out;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t c = 0; c < 3; ++c) out.values[3 * p + c] = d[p] / peak;
  return out;
}

double mass_fraction(const Image& map, const PixelMask& mask) {
  if (map.height != mask.height || map.width != mask.width) throw DimensionError("mask and map sizes differ");
  double inside = 0.0, total = 0.0;
  for (std::size_t p = 0; p < map.pixel_count(); ++p) {
    const double v = map.values[3 * p];
    total += v;
    if (mask.test(p)) inside += v;
  }
  return total > 0.0 ? inside / total : 0.0;
}

std::string format_trajectory_csv(const std::vector<TrajectoryPoint>& trajectory) {
  std::string out = "iteration,logit\n";
  for (const auto& p : trajectory) out += std::to_string(p.iteration) + "," + format_double(p.logit) + "\n";
  return out;
}

std::vector<TrajectoryPoint> parse_trajectory_csv(std::string_view text) {
  std::vector<TrajectoryPoint> out;
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "iteration,logit") throw ParseError("bad trajectory header", 1, 1, std::string(line));
      continue;
    }
    const auto comma = line.find(',');
    const auto it = comma == std::string_view::npos ? std::nullopt : parse_u64(line.substr(0, comma));
    const auto v = comma == std::string_view::npos ? std::nullopt : parse_double(line.substr(comma + 1));
    if (!it || !v) throw ParseError("expected iteration,logit", line_no, 1, std::string(line));
    out.push_back({static_cast<std::size_t>(*it), *v});
  }
  if (line_no == 0) throw ParseError("missing trajectory header", 1, 1, "");
  return out;
}

}  // namespace latent
