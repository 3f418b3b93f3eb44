#include "capsid/dynamics.hpp"

#include <cmath>
#include <future>

namespace capsid {

namespace {

void validate(const PenaltyProblem& problem) {
  if (!(problem.kappa > 0.0)) throw std::invalid_argument("integrate: kappa must be positive");
  if (!(problem.horizon > 0.0)) throw std::invalid_argument("integrate: horizon must be positive");
  if (!problem.force) throw std::invalid_argument("integrate: missing force function");
  if (problem.u0.size() != kDofCount || problem.u1.size() != kDofCount ||
      !problem.u0.allFinite() || !problem.u1.allFinite()) {
    throw std::invalid_argument("integrate: initial data must be finite 33-vectors");
  }
  for (int i = 1; i <= kFreeVertexCount; ++i) {
    if (!(contact_height(problem.model.geom, i) + problem.u0(z_index(i)) > 0.0)) {
      throw std::invalid_argument("integrate: u0 must leave every vertex strictly above the plane");
    }
  }
}

}  // namespace

Eigen::VectorXd penalty_operator(const CapsidGeometry& geom, const Displacement& u) {
  Eigen::VectorXd n = Eigen::VectorXd::Zero(kDofCount);
  for (int i = 1; i <= kFreeVertexCount; ++i) {
    const double gap = contact_height(geom, i) + u(z_index(i));
    n(z_index(i)) = std::min(gap, 0.0);  // equals -{gap}^-
  }
  return n;
}

Eigen::VectorXd penalty_force(const CapsidGeometry& geom, const Displacement& u, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("penalty_force: kappa must be positive");
  return penalty_operator(geom, u) / kappa;
}

double max_penetration(const CapsidGeometry& geom, const Displacement& u) {
  double worst = 0.0;
  for (int i = 1; i <= kFreeVertexCount; ++i) {
    const double gap = contact_height(geom, i) + u(z_index(i));
    worst = std::max(worst, -gap);
  }
  return worst;
}

double penalty_energy(const CapsidGeometry& geom, const Displacement& u, double kappa) {
  double sum = 0.0;
  for (int i = 1; i <= kFreeVertexCount; ++i) {
    const double gap = contact_height(geom, i) + u(z_index(i));
    sum += std::min(gap, 0.0) * std::min(gap, 0.0);
  }
  return 0.5 * sum / kappa;
}

double stability_dt(const EnergyModel& model, double kappa) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(model.upsilon);
  return 0.5 / std::sqrt(eigs.eigenvalues().maxCoeff() + 1.0 / kappa);
}

Trajectory integrate(const PenaltyProblem& problem, double dt, Integrator scheme) {
  validate(problem);
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");

  const long steps = static_cast<long>(std::ceil(problem.horizon / dt - 1e-12));
  const double h = problem.horizon / static_cast<double>(steps);
  const long stride = steps / 10000 + 1;

  const EnergyModel& model = problem.model;
  const CapsidGeometry& geom = model.geom;
  const double kappa = problem.kappa;

  Eigen::VectorXd x = problem.u0;
  Eigen::VectorXd v = problem.u1;

  auto accel = [&](const Eigen::VectorXd& pos, double t) -> Eigen::VectorXd {
    return problem.force(t) - model.upsilon * pos - penalty_operator(geom, pos) / kappa;
  };

  Trajectory traj;
  traj.dt = h;
  traj.steps = steps;

  double force_square_integral = 0.0;
  const double initial_energy = 0.5 * v.squaredNorm() + 0.5 * x.dot(model.upsilon * x) +
                                penalty_energy(geom, x, kappa);

  auto record = [&](long step, double t) {
    const double kinetic = 0.5 * v.squaredNorm();
    const double elastic = 0.5 * x.dot(model.upsilon * x);
    const double pen = penalty_energy(geom, x, kappa);
    const double total = kinetic + elastic + pen;
    const double penetration = max_penetration(geom, x);

    traj.sup_penetration = std::max(traj.sup_penetration, penetration);
    traj.max_penalty_energy = std::max(traj.max_penalty_energy, pen);

    const double bound = (initial_energy + 0.5 * force_square_integral) * std::exp(t);
    traj.max_gronwall_excess = std::max(traj.max_gronwall_excess, total - bound);
    if (!std::isfinite(total) || total > 1e3 * (bound + 1.0)) {
      throw InstabilityError("integrate: energy exceeded 1000x its Gronwall bound at step " +
                                 std::to_string(step),
                             step, t);
    }

    if (step % stride == 0 || step == steps) {
      traj.samples.push_back({t, x, v, kinetic, elastic, pen, penetration});
    }
  };

  record(0, 0.0);

  for (long n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * h;
    const double t_mid = t + 0.5 * h;

    switch (scheme) {
      case Integrator::SemiImplicitEuler: {
        v += h * accel(x, t_mid);
        x += h * v;
        break;
      }
      case Integrator::Leapfrog: {
        // Drift-kick-drift with the force sampled at the step midpoint.
        x += 0.5 * h * v;
        v += h * accel(x, t_mid);
        x += 0.5 * h * v;
        break;
      }
      case Integrator::RungeKutta4: {
        const Eigen::VectorXd k1x = v;
        const Eigen::VectorXd k1v = accel(x, t);
        const Eigen::VectorXd k2x = v + 0.5 * h * k1v;
        const Eigen::VectorXd k2v = accel(x + 0.5 * h * k1x, t_mid);
        const Eigen::VectorXd k3x = v + 0.5 * h * k2v;
        const Eigen::VectorXd k3v = accel(x + 0.5 * h * k2x, t_mid);
        const Eigen::VectorXd k4x = v + h * k3v;
        const Eigen::VectorXd k4v = accel(x + h * k3x, t + h);
        x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        break;
      }
    }

    force_square_integral += h * problem.force(t_mid).squaredNorm();
    record(n + 1, (n + 1 == steps) ? problem.horizon : static_cast<double>(n + 1) * h);
  }

  return traj;
}

std::vector<SweepEntry> kappa_sweep(const PenaltyProblem& base, const std::vector<double>& kappas,
                                    double dt, Integrator scheme) {
  std::vector<std::future<SweepEntry>> futures;
  futures.reserve(kappas.size());
  for (double kappa : kappas) {
    futures.push_back(std::async(std::launch::async, [&base, kappa, dt, scheme]() {
      SweepEntry entry;
      entry.kappa = kappa;
      PenaltyProblem problem = base;
      problem.kappa = kappa;
      try {
        Trajectory traj = integrate(problem, dt, scheme);
        entry.sup_penetration = traj.sup_penetration;
        entry.max_penalty_energy = traj.max_penalty_energy;
        entry.trajectory = std::move(traj);
      } catch (const std::exception& e) {
        entry.error = e.what();
      }
      return entry;
    }));
  }

  std::vector<SweepEntry> report;
  report.reserve(kappas.size());
  for (auto& f : futures) {
    report.push_back(f.get());
  }
  return report;
}

}  // namespace capsid
