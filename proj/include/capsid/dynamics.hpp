#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "capsid/energy.hpp"

namespace capsid {

using ForceFunction = std::function<ForceArray(double)>;

// Penalised hyperbolic problem: find U with
//   U'' + Upsilon U + (1/kappa) N(U) = F,  U(0) = u0, U'(0) = u1,
// where N acts on the plane gaps through their negative parts. u0 must keep
// every vertex strictly above the plane.
struct PenaltyProblem {
  EnergyModel model;
  ForceFunction force;  // F(t), 33 components
  double kappa = 0.0;
  Displacement u0;
  Displacement u1;
  double horizon = 0.0;  // T
};

enum class Integrator { SemiImplicitEuler, Leapfrog, RungeKutta4 };

struct TrajectorySample {
  double t = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  double kinetic = 0.0;          // 1/2 |v|^2
  double elastic = 0.0;          // 1/2 u^T Upsilon u
  double penalty = 0.0;          // (1/2 kappa) sum of squared penetrations
  double max_penetration = 0.0;  // max_i {(P_i + u_i).e_3}^-
};

struct Trajectory {
  std::vector<TrajectorySample> samples;  // first at t=0, last at t=T, <= ~10^4
  double dt = 0.0;                        // actual step used
  long steps = 0;
  // Aggregates taken over every step, not only the stored samples.
  double sup_penetration = 0.0;
  double max_penalty_energy = 0.0;
  // Largest excess of kinetic+elastic+penalty energy over the Gronwall bound
  // [E(0) + 1/2 int |F|^2] e^t along the run.
  double max_gronwall_excess = 0.0;
};

// N(U): block i is -{(P_i + u_i).e_3}^- e_3; zero above the plane.
Eigen::VectorXd penalty_operator(const CapsidGeometry& geom, const Displacement& u);

// (1/kappa) N(U), the penalty term as it enters the equation of motion.
Eigen::VectorXd penalty_force(const CapsidGeometry& geom, const Displacement& u, double kappa);

double max_penetration(const CapsidGeometry& geom, const Displacement& u);
double penalty_energy(const CapsidGeometry& geom, const Displacement& u, double kappa);

// Largest stable step for the explicit schemes: 0.5 / sqrt(lambda_max + 1/kappa).
double stability_dt(const EnergyModel& model, double kappa);

class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(const std::string& what, long step, double time)
      : std::runtime_error(what), step_(step), time_(time) {}
  long step() const { return step_; }
  double time() const { return time_; }

 private:
  long step_ = 0;
  double time_ = 0.0;
};

// Integrates the first-order system X1' = X2, X2' = F - Upsilon X1 - (1/k)N(X1)
// on [0, T]. The requested dt is rounded down so the grid lands on T exactly.
// Throws InstabilityError when the energy exceeds 1000x its Gronwall bound.
Trajectory integrate(const PenaltyProblem& problem, double dt,
                     Integrator scheme = Integrator::SemiImplicitEuler);

struct SweepEntry {
  double kappa = 0.0;
  double sup_penetration = 0.0;
  double max_penalty_energy = 0.0;
  std::optional<Trajectory> trajectory;
  std::string error;  // non-empty if this kappa failed; the sweep continues
};

// Integrates the template problem once per kappa with identical initial data,
// force, and dt. Entries are ordered like `kappas`; instability in one run is
// reported in its entry without aborting the rest.
std::vector<SweepEntry> kappa_sweep(const PenaltyProblem& base, const std::vector<double>& kappas,
                                    double dt, Integrator scheme = Integrator::SemiImplicitEuler);

}  // namespace capsid
