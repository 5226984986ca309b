#include "gbnns/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "gbnns/common.hpp"
#include "gbnns/quadrature.hpp"

namespace gbnns {
namespace {

using std::numbers::pi;

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

// Volume of p^{-1}(U) where U is the projected region whose angular width at
// radius r = sqrt(1 - rhat^2 t) is `width(t)`:
//
//   (d-1) rhat^(d-1) / (4 pi) * int_0^1 width(t) t^((d-3)/2) dt.
//
// Substituting t = s^2 turns the t^((d-3)/2) weight into 2 s^(d-2), which is
// bounded for every d >= 2.
double projected_volume(int d, double rhat, const std::function<double(double)>& width) {
  if (rhat <= 0.0) return 0.0;
  const double prefactor = (d - 1) * std::pow(rhat, d - 1) / (4.0 * pi);
  if (prefactor == 0.0) return 0.0;
  auto integrand = [&](double s) {
    const double t = s * s;
    return width(t) * 2.0 * std::pow(s, d - 2);
  };
  quadrature::Options options;
  options.abs_tol = 1e-10 / std::max(prefactor, 1.0);
  return prefactor * quadrature::integrate(integrand, 0.0, 1.0, options);
}

double cap_fraction(double gamma, int d) {
  if (d == 1) return std::acos(clamp_unit(gamma)) / pi;
  const double rhat = std::sqrt(std::max(0.0, 1.0 - gamma * gamma));
  // width(t) = 2 arccos(gamma / r) = 2 arcsin(rhat sqrt((1 - t) / (1 - rhat^2 t)))
  auto width = [rhat](double t) {
    const double ratio = (1.0 - t) / (1.0 - rhat * rhat * t);
    return 2.0 * std::asin(clamp_unit(rhat * std::sqrt(std::max(0.0, ratio))));
  };
  return projected_volume(d, rhat, width);
}

// Exact arc overlap on S^1: arcs of half-widths acos(alpha), acos(beta)
// centred theta apart.
double circle_intersection(double alpha, double beta, double theta) {
  const double a = std::acos(clamp_unit(alpha));
  const double b = std::acos(clamp_unit(beta));
  const double len = std::min(a, theta + b) - std::max(-a, theta - b);
  return std::max(0.0, len) / (2.0 * pi);
}

void check_samples(std::uint64_t samples) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "Monte Carlo needs at least one sample");
}

// Squared norm of the remaining `dof` Gaussian coordinates.
class TailNorm {
 public:
  explicit TailNorm(int dof) : dof_(dof), chi2_(dof > 0 ? dof : 1) {}
  template <typename Rng>
  double operator()(Rng& rng) {
    return dof_ > 0 ? chi2_(rng) : 0.0;
  }

 private:
  int dof_;
  std::chi_squared_distribution<double> chi2_;
};

VolumeEstimate mc_estimate(std::uint64_t hits, std::uint64_t samples) {
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  return {p, VolumeMethod::MonteCarlo, std::sqrt(p * (1.0 - p) / static_cast<double>(samples))};
}

}  // namespace

CapSpec::CapSpec(double gamma, int d) : gamma_(gamma), d_(d) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "cap height must lie in [0, 1]");
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "sphere dimension must be >= 1");
}

double CapSpec::radius_hat() const noexcept { return std::sqrt(1.0 - gamma_ * gamma_); }

IntersectionSpec::IntersectionSpec(double alpha, double beta, double theta, int d)
    : alpha_(alpha), beta_(beta), theta_(theta), d_(d) {
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "cap heights must lie in [0, 1]");
  if (!(theta > 0.0 && theta < pi))
    throw Error(ErrorCode::InvalidArgument, "angle between centres must lie in (0, pi)");
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "sphere dimension must be >= 1");
}

VolumeEstimate cap_volume(const CapSpec& spec) {
  return {cap_fraction(spec.gamma(), spec.d()), VolumeMethod::Quadrature, 0.0};
}

double gamma_param(const IntersectionSpec& spec) {
  const double a = spec.alpha();
  const double b = spec.beta();
  // a^2 + b^2 - 2ab cos(theta), rearranged to avoid cancellation at small theta.
  const double half = std::sin(spec.theta() / 2.0);
  const double num = (a - b) * (a - b) + 4.0 * a * b * half * half;
  return std::sqrt(std::max(0.0, num)) / std::sin(spec.theta());
}

IntersectionCase classify_intersection(const IntersectionSpec& spec) {
  const double cos_theta = std::cos(spec.theta());
  const bool beta_inside = spec.alpha() <= spec.beta() * cos_theta;
  const bool alpha_inside = spec.beta() <= spec.alpha() * cos_theta;
  if (gamma_param(spec) <= 1.0) {
    if (beta_inside) return IntersectionCase::ContainedBeta;
    if (alpha_inside) return IntersectionCase::ContainedAlpha;
    return IntersectionCase::Lens;
  }
  if (!beta_inside && !alpha_inside) return IntersectionCase::Disjoint;
  return IntersectionCase::Nested;
}

VolumeEstimate intersection_volume(const IntersectionSpec& spec) {
  // Normalise so that alpha <= beta: only ContainedBeta, Lens, Disjoint and
  // Nested remain, and swapping the arguments cannot change a single bit.
  const IntersectionSpec s = spec.alpha() <= spec.beta() ? spec : spec.swapped();
  const double alpha = s.alpha();
  const double beta = s.beta();
  const double theta = s.theta();
  const int d = s.d();

  auto result = [](double v) { return VolumeEstimate{std::clamp(v, 0.0, 1.0), VolumeMethod::Quadrature, 0.0}; };

  if (d == 1) return result(circle_intersection(alpha, beta, theta));
  if (alpha == 0.0 && beta == 0.0) return result((pi - theta) / (2.0 * pi));

  const double gamma = gamma_param(s);
  switch (classify_intersection(s)) {
    case IntersectionCase::Disjoint:
      return result(0.0);
    case IntersectionCase::Nested:
      return result(cap_fraction(beta, d));
    case IntersectionCase::ContainedAlpha:  // unreachable after normalisation
    case IntersectionCase::ContainedBeta:
    case IntersectionCase::Lens:
      break;
  }

  const double rhat = std::sqrt(std::max(0.0, 1.0 - gamma * gamma));
  const double alpha_at_crossing = std::acos(clamp_unit(alpha / gamma));
  const double beta_at_crossing = std::acos(clamp_unit(beta / gamma));
  auto radius = [rhat](double t) { return std::sqrt(std::max(0.0, 1.0 - rhat * rhat * t)); };
  auto g_alpha = [&](double t) { return std::acos(clamp_unit(alpha / radius(t))) - alpha_at_crossing; };
  auto g_beta = [&](double t) { return std::acos(clamp_unit(beta / radius(t))) - beta_at_crossing; };

  if (classify_intersection(s) == IntersectionCase::Lens) {
    return result(projected_volume(d, rhat, [&](double t) { return g_alpha(t) + g_beta(t); }));
  }
  // ContainedBeta: subtract the sliver of the beta cap that pokes out of the
  // alpha cap beyond the chord crossing.
  const double outside =
      projected_volume(d, rhat, [&](double t) { return std::max(0.0, g_beta(t) - g_alpha(t)); });
  return result(cap_fraction(beta, d) - outside);
}

VolumeEstimate cap_volume_mc(const CapSpec& spec, std::uint64_t samples, std::uint64_t seed) {
  check_samples(samples);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  TailNorm tail(spec.d());
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double x0 = normal(rng);
    const double norm = std::sqrt(x0 * x0 + tail(rng));
    if (x0 >= spec.gamma() * norm) ++hits;
  }
  return mc_estimate(hits, samples);
}

VolumeEstimate intersection_volume_mc(const IntersectionSpec& spec, std::uint64_t samples,
                                      std::uint64_t seed) {
  check_samples(samples);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  TailNorm tail(spec.d() - 1);
  const double c = std::cos(spec.theta());
  const double s = std::sin(spec.theta());
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double x0 = normal(rng);
    const double x1 = normal(rng);
    const double norm = std::sqrt(x0 * x0 + x1 * x1 + tail(rng));
    if (x0 >= spec.alpha() * norm && c * x0 + s * x1 >= spec.beta() * norm) ++hits;
  }
  return mc_estimate(hits, samples);
}

}  // namespace gbnns
