#include "oprl/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oprl {

StepSchedule StepSchedule::inverse_sqrt(double eta0) {
  if (eta0 <= 0.0) throw std::invalid_argument("StepSchedule: eta0 must be positive");
  StepSchedule s;
  s.kind = Kind::inverse_sqrt;
  s.eta0 = eta0;
  return s;
}

StepSchedule StepSchedule::contraction(double c, double eta1) {
  if (c <= 0.0) throw std::invalid_argument("StepSchedule: contraction rate must be positive");
  StepSchedule s;
  s.kind = Kind::contraction;
  s.c = c;
  s.eta1 = eta1 == 0.0 ? 2.0 / c : eta1;
  if (s.eta1 < 1.0 / c || s.eta1 > 2.0 / c)
    throw std::invalid_argument("StepSchedule: eta1 must lie in [1/c, 2/c]");
  return s;
}

StepSequence::StepSequence(const StepSchedule& schedule) : schedule_(schedule) {
  if (schedule_.kind == StepSchedule::Kind::contraction) cache_.push_back(schedule_.eta1);
}

double StepSequence::eta(long long t) {
  if (t < 1) throw std::invalid_argument("StepSequence::eta: t must be >= 1");
  if (schedule_.kind == StepSchedule::Kind::inverse_sqrt)
    return schedule_.eta0 / std::sqrt(static_cast<double>(t));
  while (static_cast<long long>(cache_.size()) < t) {
    const double prev = cache_.back();
    cache_.push_back(std::exp(-0.5 * schedule_.c * prev) * prev);
  }
  return cache_[static_cast<std::size_t>(t - 1)];
}

ProjectionSet ProjectionSet::ball(double radius) {
  if (radius <= 0.0) throw std::invalid_argument("ProjectionSet: radius must be positive");
  ProjectionSet s;
  s.shape = Shape::ball;
  s.radius = radius;
  return s;
}

ProjectionSet ProjectionSet::box(Vector half_width) {
  if (half_width.size() == 0 || half_width.minCoeff() <= 0.0)
    throw std::invalid_argument("ProjectionSet: half widths must be positive");
  ProjectionSet s;
  s.shape = Shape::box;
  s.half_width = std::move(half_width);
  return s;
}

ProjectionSet ProjectionSet::box_uniform(int dim, double half_width) {
  return box(Vector::Constant(dim, half_width));
}

Vector ProjectionSet::project(const Vector& theta) const {
  if (shape == Shape::ball) {
    const double norm = theta.norm();
    if (norm <= radius) return theta;
    return theta * (radius / norm);
  }
  if (theta.size() != half_width.size())
    throw std::invalid_argument("ProjectionSet::project: dimension mismatch");
  return theta.cwiseMin(half_width).cwiseMax(-half_width);
}

bool ProjectionSet::contains(const Vector& theta, double tol) const {
  if (shape == Shape::ball) return theta.norm() <= radius + tol;
  if (theta.size() != half_width.size()) return false;
  return ((theta.array().abs() - half_width.array()) <= tol).all();
}

double ProjectionSet::norm_bound() const {
  return shape == Shape::ball ? radius : half_width.norm();
}

RunResult run(const UpdateRule& rule, std::span<const Transition> data,
              const StepSchedule& schedule, const ProjectionSet& set,
              const Vector& theta0, const RunOptions& options) {
  if (theta0.size() != rule.features.dim)
    throw std::invalid_argument("run: theta0 has wrong dimension");
  if (rule.mode == RuleMode::empirical && options.estimator == nullptr)
    throw std::invalid_argument("run: empirical mode requires an estimator");
  if (rule.mode == RuleMode::oracle && options.oracle == nullptr)
    throw std::invalid_argument("run: oracle mode requires a loss model");
  if (options.record_growth <= 1.0)
    throw std::invalid_argument("run: record growth factor must exceed 1");

  const long long horizon = static_cast<long long>(data.size());
  const bool with_oracle = options.oracle != nullptr;
  const bool with_error = with_oracle && rule.mode == RuleMode::empirical;

  StepSequence steps(schedule);
  Vector theta = theta0;
  Vector theta_sum = theta0;  // running sum over theta_0..theta_t
  long long iterate_count = 1;

  RunResult out;
  if (options.capture_iterates) out.iterates.push_back(theta);

  const auto emit = [&](long long t, double eta, double e_t, bool has_e) {
    RunRecord rec;
    rec.t = t;
    rec.eta = eta;
    rec.has_oracle = with_oracle;
    rec.has_error = has_e;
    rec.e_t = e_t;
    if (with_oracle) {
      const Vector theta_bar = theta_sum / static_cast<double>(iterate_count);
      rec.loss_gap = loss_value(*options.oracle, theta_bar) - options.oracle->l_star;
      rec.dist_sq = (theta - options.oracle->theta_star).squaredNorm();
    }
    out.records.push_back(rec);
  };

  emit(0, 0.0, 0.0, false);

  long long next_record = 1;
  for (long long t = 1; t <= horizon; ++t) {
    const Transition& z = data[static_cast<std::size_t>(t - 1)];
    if (options.estimator) options.estimator->update(z);

    StateMoments moments = rule.mode == RuleMode::empirical
                               ? empirical_state_moments(*options.estimator, rule, z.s)
                               : oracle_state_moments(*options.oracle, z.s);
    const Vector g = direction(rule, theta, z, moments);

    const bool record_now = t == next_record || t == horizon;
    double e_t = 0.0;
    if (record_now && with_error)
      e_t = (g - direction(rule, theta, z, oracle_state_moments(*options.oracle, z.s)))
                .norm();

    const double eta = steps.eta(t);
    theta = set.project(theta - eta * g);
    theta_sum += theta;
    ++iterate_count;
    if (options.capture_iterates) out.iterates.push_back(theta);

    if (record_now) {
      emit(t, eta, e_t, with_error);
      while (next_record <= t)
        next_record = std::max(next_record + 1,
                               static_cast<long long>(std::llround(
                                   static_cast<double>(next_record) * options.record_growth)));
    }
  }

  out.theta_last = theta;
  out.theta_avg = theta_sum / static_cast<double>(iterate_count);
  return out;
}

}  // namespace oprl
