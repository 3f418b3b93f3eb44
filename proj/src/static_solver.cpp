#include "capsid/static_solver.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace capsid {

namespace {

constexpr double kKktTolerance = 1e-8;

// Solves min 1/2 U^T Upsilon U - F.U subject to u_{i,3} = -h_i for every i in
// `constrained`, via block elimination on the saddle system. Returns the
// minimiser and one multiplier per constrained vertex.
std::pair<Displacement, std::vector<double>> equality_solve(
    const Eigen::LLT<Eigen::MatrixXd>& upsilon_llt, const CapsidGeometry& geom,
    const ForceArray& f, const std::vector<int>& constrained) {
  const Displacement unconstrained = upsilon_llt.solve(f);
  if (constrained.empty()) {
    return {unconstrained, {}};
  }

  const int na = static_cast<int>(constrained.size());
  Eigen::MatrixXd selector_rhs = Eigen::MatrixXd::Zero(kDofCount, na);
  Eigen::VectorXd bounds(na);
  for (int k = 0; k < na; ++k) {
    selector_rhs(z_index(constrained[k]), k) = 1.0;
    bounds(k) = -contact_height(geom, constrained[k]);
  }

  const Eigen::MatrixXd w = upsilon_llt.solve(selector_rhs);  // Upsilon^{-1} A^T
  Eigen::MatrixXd schur(na, na);
  Eigen::VectorXd rhs(na);
  for (int k = 0; k < na; ++k) {
    for (int l = 0; l < na; ++l) {
      schur(k, l) = w(z_index(constrained[k]), l);
    }
    rhs(k) = bounds(k) - unconstrained(z_index(constrained[k]));
  }

  Eigen::LLT<Eigen::MatrixXd> schur_llt(schur);
  if (schur_llt.info() != Eigen::Success) {
    throw SolverFailure("equality_solve: singular KKT system", unconstrained, {});
  }
  const Eigen::VectorXd lambda = schur_llt.solve(rhs);

  Displacement u = unconstrained + w * lambda;
  // Make the pinned coordinates exact; the multiplier solve leaves them a few
  // ulps off the bound.
  for (int k = 0; k < na; ++k) {
    u(z_index(constrained[k])) = bounds(k);
  }
  return {u, std::vector<double>(lambda.data(), lambda.data() + na)};
}

std::vector<int> validated_vertex_set(const std::vector<int>& vertices, const char* who) {
  std::set<int> unique(vertices.begin(), vertices.end());
  for (int i : unique) {
    if (i < 1 || i > kFreeVertexCount) {
      throw std::invalid_argument(std::string(who) + ": vertex index out of range");
    }
  }
  return {unique.begin(), unique.end()};
}

// Primal-dual active set iteration with a set of permanently pinned vertices
// (equalities) plus inequality constraints on the rest. Terminates when the
// active set repeats.
ObstacleSolution pdas(const EnergyModel& model, const ForceArray& f,
                      const std::vector<int>& pinned, std::vector<int> active,
                      int max_iterations) {
  const Eigen::LLT<Eigen::MatrixXd> upsilon_llt(model.upsilon);
  if (upsilon_llt.info() != Eigen::Success) {
    throw SolverFailure("solve_obstacle: Upsilon is not positive definite", Displacement::Zero(kDofCount), {});
  }

  Displacement u = Displacement::Zero(kDofCount);
  std::vector<double> multipliers;
  std::vector<int> constrained;

  for (int iter = 1; iter <= max_iterations; ++iter) {
    constrained = pinned;
    for (int i : active) {
      if (!std::binary_search(pinned.begin(), pinned.end(), i)) constrained.push_back(i);
    }
    std::sort(constrained.begin(), constrained.end());

    std::tie(u, multipliers) = equality_solve(upsilon_llt, model.geom, f, constrained);

    // Classify: keep an active vertex while its multiplier pushes up, activate
    // a vertex that penetrates. Zero gap or zero multiplier counts as inactive.
    std::vector<int> next_active;
    for (int i = 1; i <= kFreeVertexCount; ++i) {
      if (std::binary_search(pinned.begin(), pinned.end(), i)) continue;
      const auto pos = std::find(constrained.begin(), constrained.end(), i);
      if (pos != constrained.end()) {
        const double lambda = multipliers[pos - constrained.begin()];
        if (lambda > 0.0) next_active.push_back(i);
      } else {
        const double gap = contact_height(model.geom, i) + u(z_index(i));
        if (gap < 0.0) next_active.push_back(i);
      }
    }

    if (next_active == active) {
      ObstacleSolution solution;
      solution.u = u;
      solution.iterations = iter;
      for (size_t k = 0; k < constrained.size(); ++k) {
        solution.contact.active.push_back(constrained[k]);
        solution.contact.multipliers.push_back(multipliers[k]);
      }
      solution.residual = kkt_residual(model, f, u, solution.contact, pinned);
      if (solution.residual.max() > kKktTolerance) {
        throw SolverFailure("solve_obstacle: stationary active set with large KKT residual", u,
                            solution.residual);
      }
      return solution;
    }
    active = std::move(next_active);
  }

  ContactState last;
  for (size_t k = 0; k < constrained.size(); ++k) {
    last.active.push_back(constrained[k]);
    last.multipliers.push_back(multipliers[k]);
  }
  throw SolverFailure("solve_obstacle: active set did not settle within max_iterations", u,
                      kkt_residual(model, f, u, last, pinned));
}

}  // namespace

double KktResidual::max() const {
  return std::max({stationarity, feasibility, complementarity, dual_feasibility});
}

KktResidual kkt_residual(const EnergyModel& model, const ForceArray& f, const Displacement& u,
                         const ContactState& contact, const std::vector<int>& equality_pins) {
  KktResidual res;
  Eigen::VectorXd stationarity = model.upsilon * u - f;
  for (size_t k = 0; k < contact.active.size(); ++k) {
    stationarity(z_index(contact.active[k])) -= contact.multipliers[k];
    const bool pinned = std::binary_search(equality_pins.begin(), equality_pins.end(), contact.active[k]);
    if (!pinned) {
      res.dual_feasibility = std::max(res.dual_feasibility, -contact.multipliers[k]);
    }
    const double gap = contact_height(model.geom, contact.active[k]) + u(z_index(contact.active[k]));
    res.complementarity = std::max(res.complementarity, std::abs(contact.multipliers[k] * gap));
  }
  res.stationarity = stationarity.lpNorm<Eigen::Infinity>();
  for (int i = 1; i <= kFreeVertexCount; ++i) {
    const double gap = contact_height(model.geom, i) + u(z_index(i));
    res.feasibility = std::max(res.feasibility, -gap);
  }
  res.feasibility = std::max(res.feasibility, 0.0);
  res.dual_feasibility = std::max(res.dual_feasibility, 0.0);
  return res;
}

ObstacleSolution solve_obstacle(const EnergyModel& model, const ForceArray& f,
                                const PdasOptions& options) {
  if (f.size() != kDofCount || !f.allFinite()) {
    throw std::invalid_argument("solve_obstacle: force must be a finite 33-vector");
  }
  return pdas(model, f, {}, validated_vertex_set(options.initial_active, "solve_obstacle"),
              options.max_iterations);
}

AdhesionEquilibrium solve_adhesion_equilibrium(const EnergyModel& model,
                                               const std::vector<int>& pinned) {
  const std::vector<int> pins = validated_vertex_set(pinned, "solve_adhesion_equilibrium");
  const ForceArray zero_force = ForceArray::Zero(kDofCount);

  const Eigen::LLT<Eigen::MatrixXd> upsilon_llt(model.upsilon);
  if (upsilon_llt.info() != Eigen::Success) {
    throw SolverFailure("solve_adhesion_equilibrium: Upsilon is not positive definite",
                        Displacement::Zero(kDofCount), {});
  }

  AdhesionEquilibrium eq;
  eq.pinned = pins;
  std::tie(eq.u, eq.multipliers) = equality_solve(upsilon_llt, model.geom, zero_force, pins);

  // The pins alone may push a free vertex through the plane; if so, resolve
  // with the remaining vertices treated as inequality constraints.
  bool feasible = true;
  for (int i = 1; i <= kFreeVertexCount; ++i) {
    if (contact_height(model.geom, i) + eq.u(z_index(i)) < -1e-12 * model.geom.edge_length) {
      feasible = false;
    }
  }
  if (!feasible) {
    eq.inequality_was_binding = true;
    ObstacleSolution constrained = pdas(model, zero_force, pins, {}, 100);
    eq.u = constrained.u;
    eq.multipliers.clear();
    for (size_t k = 0; k < constrained.contact.active.size(); ++k) {
      if (std::binary_search(pins.begin(), pins.end(), constrained.contact.active[k])) {
        eq.multipliers.push_back(constrained.contact.multipliers[k]);
      }
    }
    eq.residual = constrained.residual.max();
    return eq;
  }

  Eigen::VectorXd stationarity = model.upsilon * eq.u;
  for (size_t k = 0; k < eq.pinned.size(); ++k) {
    stationarity(z_index(eq.pinned[k])) -= eq.multipliers[k];
  }
  eq.residual = stationarity.lpNorm<Eigen::Infinity>();
  for (int i : eq.pinned) {
    eq.residual = std::max(eq.residual, std::abs(contact_height(model.geom, i) + eq.u(z_index(i))));
  }
  return eq;
}

Displacement oracle_projected_gradient(const EnergyModel& model, const ForceArray& f, double tol,
                                       long max_iterations) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("oracle_projected_gradient: tol must be positive");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(model.upsilon);
  const double step = 1.0 / eigs.eigenvalues().maxCoeff();

  Displacement v = Displacement::Zero(kDofCount);
  for (long iter = 0; iter < max_iterations; ++iter) {
    const Eigen::VectorXd grad = model.upsilon * v - f;
    Displacement next = v - step * grad;
    for (int i = 1; i <= kFreeVertexCount; ++i) {
      next(z_index(i)) = std::max(next(z_index(i)), -contact_height(model.geom, i));
    }
    // Energy decrease of the step through the quadratic identity
    // q(v) - q(v + d) = -(g.d + 1/2 d^T Upsilon d); subtracting the two
    // energies directly would drown the stopping test in cancellation.
    const Eigen::VectorXd d = next - v;
    const double decrease = -(grad.dot(d) + 0.5 * d.dot(model.upsilon * d));
    v = std::move(next);
    if (decrease < tol) {
      return v;
    }
  }
  throw OracleFailure("oracle_projected_gradient: iteration cap reached");
}

}  // namespace capsid
