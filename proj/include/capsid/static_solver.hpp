#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "capsid/energy.hpp"

namespace capsid {

// Vertices resting on the plane together with their contact forces.
struct ContactState {
  std::vector<int> active;          // vertex indices in {1..11}, ascending
  std::vector<double> multipliers;  // one per active vertex
};

struct KktResidual {
  double stationarity = 0.0;     // | Upsilon U - F - A^T lambda |_inf
  double feasibility = 0.0;      // worst penetration below the plane
  double complementarity = 0.0;  // max |lambda_i * gap_i|
  double dual_feasibility = 0.0; // max(0, -min lambda)

  double max() const;
};

struct ObstacleSolution {
  Displacement u;
  ContactState contact;
  int iterations = 0;
  KktResidual residual;
};

struct PdasOptions {
  int max_iterations = 100;
  std::vector<int> initial_active;  // empty = start from the unconstrained solve
};

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, Displacement last_iterate, KktResidual residual)
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}

  const Displacement& last_iterate() const { return last_iterate_; }
  const KktResidual& residual() const { return residual_; }

 private:
  Displacement last_iterate_;
  KktResidual residual_;
};

// Minimises 1/2 V^T Upsilon V - F.V subject to (P_i + v_i).e_3 >= 0 by the
// primal-dual active set method. Throws SolverFailure (carrying the last
// iterate and its residuals) if the active set does not settle within
// options.max_iterations.
ObstacleSolution solve_obstacle(const EnergyModel& model, const ForceArray& f,
                                const PdasOptions& options = {});

struct AdhesionEquilibrium {
  Displacement u;
  std::vector<int> pinned;          // ascending
  std::vector<double> multipliers;  // one per pinned vertex, sign free
  double residual = 0.0;
  // True if keeping the remaining vertices above the plane required extra
  // active constraints on top of the pins.
  bool inequality_was_binding = false;
};

// Releases the force and minimises 1/2 V^T Upsilon V with the pinned vertices
// held on the plane (irreversible adhesion). The non-pinned vertices are kept
// feasible as well.
AdhesionEquilibrium solve_adhesion_equilibrium(const EnergyModel& model,
                                               const std::vector<int>& pinned);

class OracleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Projected-gradient descent on the obstacle problem with fixed step
// 1/lambda_max(Upsilon); the projection clamps v_{i,3} to -P_i.e_3. Stops
// once the energy decrease of a step falls below tol. Independent check for
// solve_obstacle.
Displacement oracle_projected_gradient(const EnergyModel& model, const ForceArray& f, double tol,
                                       long max_iterations = 1000000);

// KKT residual of (u, contact) for the obstacle problem with force f.
// Vertices listed in equality_pins are held by equality constraints, so their
// multiplier sign is unrestricted.
KktResidual kkt_residual(const EnergyModel& model, const ForceArray& f, const Displacement& u,
                         const ContactState& contact, const std::vector<int>& equality_pins = {});

}  // namespace capsid
