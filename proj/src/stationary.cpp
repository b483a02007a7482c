#include "gpe_optctl/stationary.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <cmath>
#include <sstream>

#include "gpe_optctl/errors.hpp"
#include "gpe_optctl/fft.hpp"

namespace gpe_optctl {
namespace {

struct Hamiltonian {
  const SpatialGrid& grid;
  std::vector<double> potential;
  std::vector<double> kinetic;  // k^2 / 2M
  double kappa;
  Fft fft;

  Hamiltonian(const SpatialGrid& g, std::vector<double> v, const PhysicalParams& phys)
      : grid(g), potential(std::move(v)), kinetic(g.size()), kappa(phys.kappa), fft(g.size()) {
    const auto k = g.wavenumbers();
    for (std::size_t j = 0; j < k.size(); ++j) kinetic[j] = k[j] * k[j] / (2.0 * phys.mass);
  }

  std::vector<cplx> kinetic_applied(std::span<const cplx> psi) {
    std::vector<cplx> out(psi.begin(), psi.end());
    fft.forward(out);
    const double inv_n = 1.0 / static_cast<double>(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] *= kinetic[j] * inv_n;
    fft.backward(out);
    return out;
  }

  std::vector<cplx> applied(std::span<const cplx> psi) {
    auto out = kinetic_applied(psi);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += (potential[j] + kappa * std::norm(psi[j])) * psi[j];
    return out;
  }

  double mu(std::span<const cplx> psi) {
    const auto h = applied(psi);
    cplx sum{0.0, 0.0};
    for (std::size_t j = 0; j < psi.size(); ++j) sum += std::conj(psi[j]) * h[j];
    return sum.real() * grid.dx();
  }

  double residual(std::span<const cplx> psi) {
    const auto h = applied(psi);
    cplx num{0.0, 0.0};
    for (std::size_t j = 0; j < psi.size(); ++j) num += std::conj(psi[j]) * h[j];
    const double m = num.real() * grid.dx();
    double r = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) r += std::norm(h[j] - m * psi[j]);
    return std::sqrt(r * grid.dx());
  }

  double energy(std::span<const cplx> psi) {
    const auto t = kinetic_applied(psi);
    double e = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) {
      const double rho = std::norm(psi[j]);
      e += (std::conj(psi[j]) * t[j]).real() + potential[j] * rho + 0.5 * kappa * rho * rho;
    }
    return e * grid.dx();
  }
};

/// Dense grid matrix of T + V + kappa rho, with T the spectral kinetic operator. T is the
/// circulant with first column t(m) = (1/N) sum_k E_k cos(k m dx).
Eigen::MatrixXd hamiltonian_matrix(const Hamiltonian& ham, const std::vector<double>& density) {
  const std::size_t n = ham.grid.size();
  const auto k = ham.grid.wavenumbers();
  std::vector<double> column(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    double sum = 0.0;
    for (std::size_t q = 0; q < n; ++q) sum += ham.kinetic[q] * std::cos(k[q] * static_cast<double>(m) * ham.grid.dx());
    column[m] = sum / static_cast<double>(n);
  }
  Eigen::MatrixXd h(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) h(i, j) = column[(i + n - j) % n];
    h(i, i) += ham.potential[i] + ham.kappa * density[i];
  }
  return h;
}

/// Self-consistent field iteration: the state is eigenvector `index` (counted from the lowest)
/// of the grid operator T + V + kappa rho, and rho is mixed towards the density of that state
/// until the full nonlinear residual is below tolerance.
StationaryState solve(const PotentialFamily& family, double lambda, const PhysicalParams& phys, const GridPtr& grid,
                      std::size_t index, const StationaryOptions& options) {
  phys.validate();
  Hamiltonian ham(*grid, evaluate(family, *grid, lambda), phys);
  const std::size_t n = grid->size();
  if (index >= n) throw ConfigError("stationary state index exceeds the number of grid points");
  const double dx = grid->dx();
  const bool symmetric = is_mirror_symmetric(ham.potential, *grid);

  // Anderson-accelerated fixed point iteration on the density: rho -> |psi[rho]|^2.
  std::vector<double> density(n, 0.0);
  std::vector<cplx> psi(n);
  double residual = std::numeric_limits<double>::infinity();
  long iterations = 0;
  // For mirror-symmetric V the problem splits into parity sectors; state m has parity (-1)^m
  // and is eigenvector m/2 of its sector. This keeps nearly degenerate double-well pairs apart.
  Eigen::MatrixXd basis;
  std::size_t sector_index = index;
  if (symmetric) {
    const double sign = index % 2 == 0 ? 1.0 : -1.0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t m = grid->mirror_index(j);
      if (j < m || (j == m && sign > 0.0)) pairs.emplace_back(j, m);
    }
    basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      const auto [j, m] = pairs[c];
      const auto col = static_cast<Eigen::Index>(c);
      if (j == m) {
        basis(static_cast<Eigen::Index>(j), col) = 1.0;
      } else {
        basis(static_cast<Eigen::Index>(j), col) = std::sqrt(0.5);
        basis(static_cast<Eigen::Index>(m), col) = sign * std::sqrt(0.5);
      }
    }
    sector_index = index / 2;
    if (sector_index >= pairs.size()) throw ConfigError("stationary state index exceeds the parity sector size");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  constexpr int history = 6;
  std::vector<Eigen::VectorXd> rho_hist;
  std::vector<Eigen::VectorXd> f_hist;
  const double beta = options.mixing;
  for (;;) {
    const Eigen::MatrixXd h = hamiltonian_matrix(ham, density);
    if (symmetric) {
      solver.compute(basis.transpose() * h * basis);
    } else {
      solver.compute(h);
    }
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed for the stationary state");
    const Eigen::VectorXd v = symmetric ? Eigen::VectorXd(basis * solver.eigenvectors().col(static_cast<Eigen::Index>(sector_index)))
                                        : Eigen::VectorXd(solver.eigenvectors().col(static_cast<Eigen::Index>(index)));
    const double scale = 1.0 / std::sqrt(dx * v.squaredNorm());
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    const double sign = v(big) >= 0.0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < n; ++j) psi[j] = sign * scale * v(static_cast<Eigen::Index>(j));
    ++iterations;

    residual = ham.residual(psi);
    if (residual <= options.residual_tolerance || phys.kappa == 0.0) break;
    if (iterations >= options.max_iterations) break;

    Eigen::VectorXd rho(n);
    Eigen::VectorXd f(n);
    for (std::size_t j = 0; j < n; ++j) {
      double out = std::norm(psi[j]);
      if (symmetric) out = 0.5 * (out + std::norm(psi[grid->mirror_index(j)]));
      rho(static_cast<Eigen::Index>(j)) = density[j];
      f(static_cast<Eigen::Index>(j)) = out - density[j];
    }
    rho_hist.push_back(rho);
    f_hist.push_back(f);
    if (static_cast<int>(rho_hist.size()) > history + 1) {
      rho_hist.erase(rho_hist.begin());
      f_hist.erase(f_hist.begin());
    }
    Eigen::VectorXd next = rho + beta * f;
    const auto m = static_cast<Eigen::Index>(rho_hist.size()) - 1;
    if (m > 0) {
      Eigen::MatrixXd df(n, m);
      Eigen::MatrixXd dr(n, m);
      for (Eigen::Index i = 0; i < m; ++i) {
        df.col(i) = f_hist[i + 1] - f_hist[i];
        dr.col(i) = rho_hist[i + 1] - rho_hist[i];
      }
      const Eigen::VectorXd g = df.colPivHouseholderQr().solve(f);
      next -= (dr + beta * df) * g;
    }
    for (std::size_t j = 0; j < n; ++j) density[j] = std::max(0.0, next(static_cast<Eigen::Index>(j)));
  }

  if (!(residual <= options.residual_tolerance)) {
    std::ostringstream msg;
    msg << "stationary state did not converge: residual " << residual << " after " << iterations
        << " self-consistent iterations (tolerance " << options.residual_tolerance << ")";
    throw NumericalError(msg.str());
  }

  StationaryState out{WaveFunction(grid, psi, WaveRole::state), 0.0, 0.0, residual, iterations};
  out.energy = ham.energy(psi);
  out.chemical_potential = ham.mu(psi);
  return out;
}

}  // namespace

bool is_mirror_symmetric(const std::vector<double>& potential, const SpatialGrid& grid) {
  if (!grid.is_centered()) return false;
  for (std::size_t j = 0; j < potential.size(); ++j) {
    const double a = potential[j];
    const double b = potential[grid.mirror_index(j)];
    if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a))) return false;
  }
  return true;
}

StationaryState ground_state(const PotentialFamily& potential, double lambda, const PhysicalParams& phys,
                             const GridPtr& grid, const StationaryOptions& options) {
  return solve(potential, lambda, phys, grid, 0, options);
}

StationaryState excited_state(const PotentialFamily& potential, double lambda, const PhysicalParams& phys,
                              const GridPtr& grid, int order, const StationaryOptions& options) {
  if (order < 1) throw ConfigError("excited state order must be >= 1");
  return solve(potential, lambda, phys, grid, static_cast<std::size_t>(order), options);
}

double gpe_energy(const WaveFunction& psi, const PotentialFamily& potential, double lambda, const PhysicalParams& phys) {
  Hamiltonian ham(psi.grid(), evaluate(potential, psi.grid(), lambda), phys);
  return ham.energy(psi.amplitudes());
}

double chemical_potential(const WaveFunction& psi, const PotentialFamily& potential, double lambda,
                          const PhysicalParams& phys) {
  Hamiltonian ham(psi.grid(), evaluate(potential, psi.grid(), lambda), phys);
  return ham.mu(psi.amplitudes());
}

double stationary_residual(const WaveFunction& psi, const PotentialFamily& potential, double lambda,
                           const PhysicalParams& phys) {
  Hamiltonian ham(psi.grid(), evaluate(potential, psi.grid(), lambda), phys);
  return ham.residual(psi.amplitudes());
}

int count_nodes(const WaveFunction& psi, double rel_threshold) {
  const auto a = psi.amplitudes();
  const auto big = std::max_element(a.begin(), a.end(), [](cplx x, cplx y) { return std::norm(x) < std::norm(y); });
  if (big == a.end() || std::abs(*big) == 0.0) return 0;
  const cplx phase = std::conj(*big) / std::abs(*big);
  const double cut = rel_threshold * std::abs(*big);
  int nodes = 0;
  int last_sign = 0;
  for (const auto& v : a) {
    if (std::abs(v) < cut) continue;
    const int sign = (v * phase).real() >= 0.0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign) ++nodes;
    last_sign = sign;
  }
  return nodes;
}

}  // namespace gpe_optctl
