#pragma once

#include "oprl/estimation.hpp"
#include "oprl/updates.hpp"

#include <span>
#include <vector>

namespace oprl {

// Step-size schedules: eta0 / sqrt(t), or the contraction recursion
// eta_{t+1} = exp(-c eta_t / 2) eta_t started from eta1 in [1/c, 2/c],
// which stays inside [1/(ct), 2/(ct)] for every t >= 1.
struct StepSchedule {
  enum class Kind { inverse_sqrt, contraction };
  Kind kind = Kind::inverse_sqrt;
  double eta0 = 1.0;  // inverse_sqrt scale
  double c = 0.0;     // contraction rate (a known lower bound c0 is fine)
  double eta1 = 0.0;  // contraction first step; 0 selects 2/c

  static StepSchedule inverse_sqrt(double eta0);
  static StepSchedule contraction(double c, double eta1 = 0.0);
};

// Evaluates eta_t (t >= 1); the contraction recursion is computed iteratively
// and cached.
class StepSequence {
 public:
  explicit StepSequence(const StepSchedule& schedule);
  double eta(long long t);

 private:
  StepSchedule schedule_;
  std::vector<double> cache_;
};

// Euclidean projection target: an origin-centered box (per-coordinate
// half-widths) or ball.
struct ProjectionSet {
  enum class Shape { box, ball };
  Shape shape = Shape::ball;
  double radius = 0.0;
  Vector half_width;

  static ProjectionSet ball(double radius);
  static ProjectionSet box(Vector half_width);
  static ProjectionSet box_uniform(int dim, double half_width);

  Vector project(const Vector& theta) const;
  bool contains(const Vector& theta, double tol = 1e-12) const;
  // C1: radius of a ball containing the set.
  double norm_bound() const;
};

// Per-iteration metrics; loss_gap = l(theta_bar_t) - l*, dist_sq =
// ||theta_t - theta*||^2, both present only when an oracle model is supplied.
// e_t = ||g_hat - g|| at this step, present in empirical mode with an oracle.
struct RunRecord {
  long long t = 0;
  double eta = 0.0;
  double loss_gap = 0.0;
  double dist_sq = 0.0;
  double e_t = 0.0;
  bool has_oracle = false;
  bool has_error = false;
};

struct RunResult {
  Vector theta_last;
  Vector theta_avg;  // (1/(T+1)) sum_{t=0}^{T} theta_t
  std::vector<RunRecord> records;
  std::vector<Vector> iterates;  // filled only when requested
};

struct RunOptions {
  // Exact model enabling loss_gap/dist_sq (and e_t in empirical mode).
  const LossModel* oracle = nullptr;
  // Estimator owned by the caller; required in empirical mode, one per run.
  EmpiricalModel* estimator = nullptr;
  // Records are written at geometrically spaced t (plus t = 0 and t = T).
  double record_growth = 1.1;
  bool capture_iterates = false;
};

// Projected approximate stochastic iteration over the data stream:
// update the estimator with z_t, evaluate g_hat at (theta_t, z_t), step by
// eta_t, project. Returns the last iterate, the running average, and the
// metric trace. Never silently skips a step.
RunResult run(const UpdateRule& rule, std::span<const Transition> data,
              const StepSchedule& schedule, const ProjectionSet& set,
              const Vector& theta0, const RunOptions& options = {});

}  // namespace oprl
