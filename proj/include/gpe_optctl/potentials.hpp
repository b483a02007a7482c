#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gpe_optctl/grid.hpp"

namespace gpe_optctl {

/// A confinement potential V(x, lambda) controlled by one real parameter, with analytic
/// first and second lambda-derivatives.
///
/// New families (for example an RF-dressed trap) derive from this class; optimizers and
/// propagators only see this interface.
class PotentialFamily {
 public:
  virtual ~PotentialFamily() = default;

  virtual std::string kind() const = 0;
  /// Unit of the control parameter, for reporting.
  virtual std::string lambda_unit() const = 0;
  virtual std::map<std::string, double> coefficients() const = 0;

  virtual double value(double x, double lambda) const = 0;
  virtual double d_dlambda(double x, double lambda) const = 0;
  virtual double d2_dlambda2(double x, double lambda) const = 0;

  /// Optional admissible range [lo, hi] for lambda.
  std::optional<std::pair<double, double>> bounds;

  /// Throws ConfigError when lambda lies outside the admissible range.
  void check_lambda(double lambda) const;
};

using PotentialPtr = std::shared_ptr<const PotentialFamily>;

/// V = beta x^4 + alpha (1 - 2 lambda) x^2.
///
/// lambda = 0 is a single well, lambda = 1 a double well with minima at +-sqrt(alpha / (2 beta)).
class SplittingPolyPotential final : public PotentialFamily {
 public:
  SplittingPolyPotential(double alpha, double beta);

  std::string kind() const override { return "splitting_poly"; }
  std::string lambda_unit() const override { return "dimensionless"; }
  std::map<std::string, double> coefficients() const override;

  double value(double x, double lambda) const override;
  double d_dlambda(double x, double lambda) const override;
  double d2_dlambda2(double x, double lambda) const override;

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

 private:
  double alpha_;
  double beta_;
};

/// Anharmonic well displaced to lambda: V = V0(x - lambda),
/// V0(y) = M omega^2 y^2 / 2 + c4 y^4 + c6 y^6. lambda is a length in micrometres.
class ShakingShiftedPotential final : public PotentialFamily {
 public:
  ShakingShiftedPotential(double mass, double omega, double c4, double c6);

  std::string kind() const override { return "shaking_shifted"; }
  std::string lambda_unit() const override { return "um"; }
  std::map<std::string, double> coefficients() const override;

  double value(double x, double lambda) const override;
  double d_dlambda(double x, double lambda) const override;
  double d2_dlambda2(double x, double lambda) const override;

  double base(double y) const;
  double base_d1(double y) const;
  double base_d2(double y) const;

 private:
  double harmonic_;  // M omega^2 / 2
  double mass_;
  double omega_;
  double c4_;
  double c6_;
};

/// Builds a family from its kind name and coefficient map; unknown kinds or missing
/// coefficients raise ConfigError.
PotentialPtr make_potential(const std::string& kind, const std::map<std::string, double>& coefficients);

std::vector<double> evaluate(const PotentialFamily& family, const SpatialGrid& grid, double lambda);
std::vector<double> d_dlambda(const PotentialFamily& family, const SpatialGrid& grid, double lambda);
std::vector<double> d2_dlambda2(const PotentialFamily& family, const SpatialGrid& grid, double lambda);

}  // namespace gpe_optctl
