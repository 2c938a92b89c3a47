#pragma once

// Conditional (ball-truncated) Monte Carlo for the spiked model.

#include <cstddef>
#include <span>
#include <vector>

#include "modspike/linalg.hpp"
#include "modspike/model.hpp"
#include "modspike/rng.hpp"

namespace modspike::estimator {

/// N(0,1) conditioned on |g| <= c.
double truncated_normal(double c, rngstat::RngStream& rng);

/// Weighted ratio estimator sum(w f) / sum(w) for several statistics at once,
/// with delta-method standard errors. Partial accumulators add exactly.
class RatioAccumulator {
 public:
  explicit RatioAccumulator(std::size_t stats = 0);
  void add(double weight, std::span<const double> values);
  void merge(const RatioAccumulator& other);

  std::size_t stats() const { return wf_.size(); }
  std::size_t draws() const { return draws_; }
  std::size_t accepted() const { return accepted_; }
  double weight_sum() const { return w_; }
  double mean(std::size_t s) const;
  double standard_error(std::size_t s) const;

 private:
  std::size_t draws_ = 0;
  std::size_t accepted_ = 0;
  double w_ = 0.0;
  double w2_ = 0.0;
  std::vector<double> wf_, w2f_, w2f2_;
};

/// Draws X = sqrt(nu) xi u + Z conditioned on |X| <= R. When the acceptance
/// probability is below 1% the component along u is drawn from its truncated
/// range given the orthogonal part and the draw carries that range's mass as
/// its weight; otherwise plain rejection (weight 0 or 1).
class SpikedBallSampler {
 public:
  SpikedBallSampler(const model::SpikedModel& model, double radius);
  bool importance_sampled() const { return importance_; }
  /// Writes a draw to `x` and returns its weight (0 = rejected).
  double draw(rngstat::RngStream& rng, std::span<double> x) const;

 private:
  std::vector<double> u_;
  double nu_;
  double radius_;
  bool importance_;
};

/// Ball-conditional second moment of z = P x for an m x k projection P, from
/// `draws` sampler draws split into fixed substream blocks.
struct ProjectedBallMoment {
  linalg::Matrix mean;            ///< m x m
  linalg::Matrix standard_error;  ///< m x m
  std::size_t draws = 0;
  std::size_t accepted = 0;
  bool importance_sampled = false;
};

ProjectedBallMoment ball_moment_mc(const model::SpikedModel& model, double radius,
                                   const linalg::Matrix& projection, std::size_t draws,
                                   rngstat::RngStream& rng, bool diagonal_only = false);

}  // namespace modspike::estimator
