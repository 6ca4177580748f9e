#include "qduff/control.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace qduff {

namespace {

double wrap_pi(double angle) {
  double r = std::fmod(angle, std::numbers::pi);
  if (r < 0.0) r += std::numbers::pi;
  // fmod can return pi itself after the correction for tiny negatives
  if (r >= std::numbers::pi) r = 0.0;
  return r;
}

double parse_angle(std::string_view text) {
  auto number = [&](std::string_view t) {
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
      throw ConfigError("strategy: cannot parse angle '" + std::string(text) + "'");
    }
    return v;
  };
  // forms: "1.2", "pi", "pi/2", "3pi/4", "0.5pi"
  const auto pos = text.find("pi");
  if (pos == std::string_view::npos) return number(text);
  const double scale = pos == 0 ? 1.0 : number(text.substr(0, pos));
  std::string_view rest = text.substr(pos + 2);
  double div = 1.0;
  if (!rest.empty()) {
    if (rest.front() != '/') throw ConfigError("strategy: cannot parse angle '" + std::string(text) + "'");
    div = number(rest.substr(1));
  }
  return scale * std::numbers::pi / div;
}

}  // namespace

ControlStrategy ControlStrategy::fixed(double phi) {
  return {FixedPhase{wrap_pi(phi)}, 2, 1};
}

ControlStrategy ControlStrategy::adaptive_parallel(int grid_angles) {
  return {AdaptiveParallel{}, grid_angles, 1};
}

ControlStrategy ControlStrategy::adaptive_perpendicular(int grid_angles) {
  return {AdaptivePerpendicular{}, grid_angles, 1};
}

void ControlStrategy::validate() const {
  if (grid_angles < 2) throw ConfigError("grid_angles: must be >= 2");
  if (update_interval < 1) throw ConfigError("update_interval: must be >= 1");
  if (const auto* f = std::get_if<FixedPhase>(&variant)) {
    if (!(f->phi >= 0.0 && f->phi < std::numbers::pi)) {
      throw ConfigError("strategy: fixed phase must lie in [0, pi)");
    }
  }
}

ControlStrategy parse_strategy(std::string_view text) {
  if (text == "adaptive-parallel") return ControlStrategy::adaptive_parallel();
  if (text == "adaptive-perpendicular") return ControlStrategy::adaptive_perpendicular();
  constexpr std::string_view prefix = "fixed:";
  if (text.starts_with(prefix)) return ControlStrategy::fixed(parse_angle(text.substr(prefix.size())));
  throw ConfigError("strategy: expected fixed:ANGLE, adaptive-parallel or adaptive-perpendicular, got '" +
                    std::string(text) + "'");
}

std::string strategy_label(const ControlStrategy& s) {
  if (std::holds_alternative<AdaptiveParallel>(s.variant)) return "adaptive-parallel";
  if (std::holds_alternative<AdaptivePerpendicular>(s.variant)) return "adaptive-perpendicular";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), std::get<FixedPhase>(s.variant).phi);
  return "fixed:" + std::string(buf, res.ptr);
}

int count_peaks(std::span<const double> pdf, double floor) {
  // A run of equal values higher than both outer neighbours counts once;
  // symmetric states put their maximum on two equal points of an even grid.
  int peaks = 0;
  const std::size_t n = pdf.size();
  std::size_t j = 1;
  while (j + 1 < n) {
    if (!(pdf[j] > pdf[j - 1])) {
      ++j;
      continue;
    }
    std::size_t end = j;
    while (end + 1 < n && pdf[end + 1] == pdf[j]) ++end;
    if (end + 1 < n && pdf[j] > pdf[end + 1] && pdf[j] > floor) ++peaks;
    j = end + 1;
  }
  return peaks;
}

QuadratureGrid controller_grid(Eigen::Index dim) { return QuadratureGrid::covering(dim, 512); }

namespace {

Eigen::VectorXd grid_angles(int angles) {
  Eigen::VectorXd thetas(angles);
  for (int k = 0; k < angles; ++k) thetas(k) = k * std::numbers::pi / angles;
  return thetas;
}

FringeEstimate estimate_from_pdfs(const Eigen::MatrixXd& pdfs, const Eigen::VectorXd& thetas,
                                  double relative_floor) {
  const auto angles = static_cast<int>(thetas.size());
  FringeEstimate est;
  est.peak_counts.resize(angles);
  int best = -1;
  for (int k = 0; k < angles; ++k) {
    const auto col = pdfs.col(k);
    const double floor = relative_floor * col.maxCoeff();
    est.peak_counts[k] = count_peaks(std::span<const double>(col.data(), col.size()), floor);
    // strict comparison keeps the smallest angle on ties
    if (est.peak_counts[k] > best) {
      best = est.peak_counts[k];
      est.theta_max = thetas(k);
    }
  }
  return est;
}

}  // namespace

FringeEstimate find_theta_max(const FockState& state, int angles, const QuadratureBasis& basis,
                              double relative_floor) {
  if (angles < 1) throw ConfigError("grid_angles: must be >= 1");
  const Eigen::VectorXd thetas = grid_angles(angles);
  return estimate_from_pdfs(basis.pdfs(state, thetas), thetas, relative_floor);
}

FringeEstimate find_theta_max(const FockState& state, int angles, const QuadratureGrid& grid,
                              double relative_floor) {
  return find_theta_max(state, angles, QuadratureBasis(grid, state.dim()), relative_floor);
}

double choose_phase(const ControlStrategy& strategy, const FringeEstimate& estimate) {
  if (const auto* f = std::get_if<FixedPhase>(&strategy.variant)) return f->phi;
  if (std::holds_alternative<AdaptiveParallel>(strategy.variant)) {
    return wrap_pi(estimate.theta_max - std::numbers::pi / 2.0);
  }
  return wrap_pi(estimate.theta_max);
}

Controller::Controller(ControlStrategy strategy, Eigen::Index dim, double relative_floor)
    : strategy_(std::move(strategy)), relative_floor_(relative_floor) {
  strategy_.validate();
  if (const auto* f = std::get_if<FixedPhase>(&strategy_.variant)) {
    phase_ = f->phi;
  } else {
    basis_.emplace(controller_grid(dim), dim);
    thetas_ = grid_angles(strategy_.grid_angles);
  }
}

double Controller::tick(const FockState& state, long step_index) {
  if (!strategy_.adaptive()) return phase_;
  if (last_ && step_index % strategy_.update_interval != 0) return phase_;
  basis_->pdfs(state, thetas_, pdfs_, workspace_);
  last_ = estimate_from_pdfs(pdfs_, thetas_, relative_floor_);
  phase_ = choose_phase(strategy_, *last_);
  return phase_;
}

}  // namespace qduff
