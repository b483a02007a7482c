#include "gpe_optctl/potentials.hpp"

#include <cmath>
#include <sstream>

#include "gpe_optctl/errors.hpp"

namespace gpe_optctl {

void PotentialFamily::check_lambda(double lambda) const {
  if (!std::isfinite(lambda)) throw NumericalError("control parameter is not finite");
  if (bounds && (lambda < bounds->first || lambda > bounds->second)) {
    std::ostringstream msg;
    msg << kind() << ": lambda = " << lambda << " outside [" << bounds->first << ", " << bounds->second << "]";
    throw ControlOutOfBounds(msg.str());
  }
}

SplittingPolyPotential::SplittingPolyPotential(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("splitting_poly requires alpha > 0 and beta > 0");
}

std::map<std::string, double> SplittingPolyPotential::coefficients() const {
  return {{"alpha", alpha_}, {"beta", beta_}};
}

double SplittingPolyPotential::value(double x, double lambda) const {
  const double x2 = x * x;
  return beta_ * x2 * x2 + alpha_ * (1.0 - 2.0 * lambda) * x2;
}

double SplittingPolyPotential::d_dlambda(double x, double) const { return -2.0 * alpha_ * x * x; }

double SplittingPolyPotential::d2_dlambda2(double, double) const { return 0.0; }

ShakingShiftedPotential::ShakingShiftedPotential(double mass, double omega, double c4, double c6)
    : harmonic_(0.5 * mass * omega * omega), mass_(mass), omega_(omega), c4_(c4), c6_(c6) {
  if (!(mass > 0.0)) throw ConfigError("shaking_shifted requires mass > 0");
  if (c4 < 0.0 || c6 < 0.0) throw ConfigError("shaking_shifted requires c4, c6 >= 0 to stay confining");
}

std::map<std::string, double> ShakingShiftedPotential::coefficients() const {
  return {{"mass", mass_}, {"omega", omega_}, {"c4", c4_}, {"c6", c6_}};
}

double ShakingShiftedPotential::base(double y) const {
  const double y2 = y * y;
  return y2 * (harmonic_ + y2 * (c4_ + c6_ * y2));
}

double ShakingShiftedPotential::base_d1(double y) const {
  const double y2 = y * y;
  return y * (2.0 * harmonic_ + y2 * (4.0 * c4_ + 6.0 * c6_ * y2));
}

double ShakingShiftedPotential::base_d2(double y) const {
  const double y2 = y * y;
  return 2.0 * harmonic_ + y2 * (12.0 * c4_ + 30.0 * c6_ * y2);
}

double ShakingShiftedPotential::value(double x, double lambda) const { return base(x - lambda); }

double ShakingShiftedPotential::d_dlambda(double x, double lambda) const { return -base_d1(x - lambda); }

double ShakingShiftedPotential::d2_dlambda2(double x, double lambda) const { return base_d2(x - lambda); }

namespace {

double require(const std::map<std::string, double>& c, const std::string& kind, const std::string& key) {
  const auto it = c.find(key);
  if (it == c.end()) throw ConfigError(kind + ": missing coefficient '" + key + "'");
  return it->second;
}

double optional(const std::map<std::string, double>& c, const std::string& key, double fallback) {
  const auto it = c.find(key);
  return it == c.end() ? fallback : it->second;
}

template <typename Fn>
std::vector<double> sample(const PotentialFamily& family, const SpatialGrid& grid, double lambda, Fn fn) {
  family.check_lambda(lambda);
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) out[j] = fn(grid.x(j));
  return out;
}

}  // namespace

PotentialPtr make_potential(const std::string& kind, const std::map<std::string, double>& c) {
  if (kind == "splitting_poly") {
    return std::make_shared<SplittingPolyPotential>(require(c, kind, "alpha"), require(c, kind, "beta"));
  }
  if (kind == "shaking_shifted") {
    return std::make_shared<ShakingShiftedPotential>(require(c, kind, "mass"), require(c, kind, "omega"),
                                                     optional(c, "c4", 0.0), optional(c, "c6", 0.0));
  }
  throw ConfigError("unknown potential kind '" + kind + "'");
}

std::vector<double> evaluate(const PotentialFamily& family, const SpatialGrid& grid, double lambda) {
  return sample(family, grid, lambda, [&](double x) { return family.value(x, lambda); });
}

std::vector<double> d_dlambda(const PotentialFamily& family, const SpatialGrid& grid, double lambda) {
  return sample(family, grid, lambda, [&](double x) { return family.d_dlambda(x, lambda); });
}

std::vector<double> d2_dlambda2(const PotentialFamily& family, const SpatialGrid& grid, double lambda) {
  return sample(family, grid, lambda, [&](double x) { return family.d2_dlambda2(x, lambda); });
}

}  // namespace gpe_optctl
