#include "modspike/ball_sampler.hpp"

#include <cmath>
#include <numbers>

#include "modspike/error.hpp"
#include "modspike/estimator.hpp"
#include "modspike/stats.hpp"

namespace modspike::estimator {

double truncated_normal(double c, rngstat::RngStream& rng) {
  if (c >= 1.0) {
    // Acceptance >= Pr(|g| <= 1) ~ 0.68.
    while (true) {
      const double g = rng.gaussian();
      if (std::abs(g) <= c) return g;
    }
  }
  // Uniform proposal on [-c, c]; acceptance >= exp(-1/2).
  while (true) {
    const double g = c * (2.0 * rng.uniform() - 1.0);
    if (rng.uniform() <= std::exp(-0.5 * g * g)) return g;
  }
}

RatioAccumulator::RatioAccumulator(std::size_t stats) : wf_(stats), w2f_(stats), w2f2_(stats) {}

void RatioAccumulator::add(double weight, std::span<const double> values) {
  ++draws_;
  if (weight <= 0.0) return;
  ++accepted_;
  w_ += weight;
  const double w2 = weight * weight;
  w2_ += w2;
  for (std::size_t s = 0; s < wf_.size(); ++s) {
    const double f = values[s];
    wf_[s] += weight * f;
    w2f_[s] += w2 * f;
    w2f2_[s] += w2 * f * f;
  }
}

void RatioAccumulator::merge(const RatioAccumulator& o) {
  draws_ += o.draws_;
  accepted_ += o.accepted_;
  w_ += o.w_;
  w2_ += o.w2_;
  for (std::size_t s = 0; s < wf_.size(); ++s) {
    wf_[s] += o.wf_[s];
    w2f_[s] += o.w2f_[s];
    w2f2_[s] += o.w2f2_[s];
  }
}

double RatioAccumulator::mean(std::size_t s) const { return w_ > 0.0 ? wf_[s] / w_ : 0.0; }

double RatioAccumulator::standard_error(std::size_t s) const {
  if (w_ <= 0.0) return 0.0;
  const double mu = mean(s);
  // sum w^2 (f - mu)^2 / (sum w)^2
  const double num = w2f2_[s] - 2.0 * mu * w2f_[s] + mu * mu * w2_;
  return std::sqrt(std::max(num, 0.0)) / w_;
}

SpikedBallSampler::SpikedBallSampler(const model::SpikedModel& model, double radius)
    : u_(model.u()), nu_(model.nu()), radius_(radius) {
  if (!(radius > 0.0)) throw DomainError("SpikedBallSampler: radius must be > 0");
  importance_ = p_ball(nu_, u_.size(), radius_).value < 0.01;
}

double SpikedBallSampler::draw(rngstat::RngStream& rng, std::span<double> x) const {
  const std::size_t k = u_.size();
  const double r2 = radius_ * radius_;
  if (!importance_) {
    const double spike = std::sqrt(nu_) * rng.gaussian();
    double n2 = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      x[j] = spike * u_[j] + rng.gaussian();
      n2 += x[j] * x[j];
    }
    return n2 <= r2 ? 1.0 : 0.0;
  }
  // X = a u + P with a ~ N(0, 1 + nu) independent of P = (I - u u^T) Z.
  double proj = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    x[j] = rng.gaussian();
    proj += x[j] * u_[j];
  }
  double p2 = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    x[j] -= proj * u_[j];
    p2 += x[j] * x[j];
  }
  const double budget = r2 - p2;
  if (budget <= 0.0) return 0.0;
  const double scale = std::sqrt(1.0 + nu_);
  const double c = std::sqrt(budget) / scale;
  const double a = scale * truncated_normal(c, rng);
  for (std::size_t j = 0; j < k; ++j) x[j] += a * u_[j];
  return rngstat::erf(c / std::numbers::sqrt2);
}

ProjectedBallMoment ball_moment_mc(const model::SpikedModel& model, double radius,
                                   const linalg::Matrix& projection, std::size_t draws,
                                   rngstat::RngStream& rng, bool diagonal_only) {
  const std::size_t k = model.k();
  if (projection.cols() != k) throw DomainError("ball_moment_mc: projection width must equal k");
  const std::size_t m = projection.rows();
  const std::size_t stats = diagonal_only ? m : m * (m + 1) / 2;
  const SpikedBallSampler sampler(model, radius);

  constexpr std::size_t kDrawsPerBlock = 4096;
  const std::size_t blocks = (draws + kDrawsPerBlock - 1) / kDrawsPerBlock;
  const std::uint64_t family = rng.next_u64();
  std::vector<RatioAccumulator> partial(blocks, RatioAccumulator(stats));

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(blocks); ++bi) {
    const auto b = static_cast<std::size_t>(bi);
    rngstat::RngStream local(rng.master_seed(), rngstat::derive_stream_id(family, b));
    std::vector<double> x(k), z(m), f(stats);
    const std::size_t end = std::min(draws, (b + 1) * kDrawsPerBlock);
    for (std::size_t d = b * kDrawsPerBlock; d < end; ++d) {
      const double w = sampler.draw(local, x);
      if (w > 0.0) {
        for (std::size_t r = 0; r < m; ++r) z[r] = linalg::dot(projection.row(r), x);
        std::size_t s = 0;
        for (std::size_t i = 0; i < m; ++i) {
          if (diagonal_only) {
            f[s++] = z[i] * z[i];
          } else {
            for (std::size_t j = i; j < m; ++j) f[s++] = z[i] * z[j];
          }
        }
      }
      partial[b].add(w, f);
    }
  }

  RatioAccumulator total(stats);
  for (const auto& p : partial) total.merge(p);

  ProjectedBallMoment out;
  out.mean = linalg::Matrix(m, m);
  out.standard_error = linalg::Matrix(m, m);
  out.draws = total.draws();
  out.accepted = total.accepted();
  out.importance_sampled = sampler.importance_sampled();
  std::size_t s = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (diagonal_only) {
      out.mean(i, i) = total.mean(s);
      out.standard_error(i, i) = total.standard_error(s);
      ++s;
      continue;
    }
    for (std::size_t j = i; j < m; ++j, ++s) {
      out.mean(i, j) = out.mean(j, i) = total.mean(s);
      out.standard_error(i, j) = out.standard_error(j, i) = total.standard_error(s);
    }
  }
  return out;
}

}  // namespace modspike::estimator
