#include <doctest.h>

#include <cmath>
#include <random>

#include "capsid/dynamics.hpp"
#include "oracles.hpp"

using namespace capsid;

namespace {

EnergyModel reference_model() {
  return assemble_energy_model(build_icosahedron(3.0), 0.25, 1.7);
}

ForceArray uniform_vertical(double f_z) {
  ForceArray f = ForceArray::Zero(kDofCount);
  for (int i = 1; i <= kFreeVertexCount; ++i) f(z_index(i)) = f_z;
  return f;
}

PenaltyProblem zero_force_problem(const EnergyModel& model, double kappa, double horizon) {
  PenaltyProblem problem;
  problem.model = model;
  problem.force = [](double) { return ForceArray::Zero(kDofCount); };
  problem.kappa = kappa;
  problem.u0 = Displacement::Zero(kDofCount);
  problem.u1 = Displacement::Zero(kDofCount);
  problem.horizon = horizon;
  return problem;
}

PenaltyProblem drop_problem(const EnergyModel& model, double kappa, double horizon, double f_z) {
  PenaltyProblem problem = zero_force_problem(model, kappa, horizon);
  const ForceArray f = uniform_vertical(f_z);
  problem.force = [f](double) { return f; };
  return problem;
}

}  // namespace

TEST_CASE("penalty operator") {
  const CapsidGeometry geom = build_icosahedron(3.0);

  SUBCASE("vanishes above the plane") {
    CHECK(penalty_operator(geom, Displacement::Zero(kDofCount)).norm() == 0.0);
  }

  SUBCASE("penetration produces an upward restoring acceleration") {
    Displacement u = Displacement::Zero(kDofCount);
    u(z_index(1)) = -contact_height(geom, 1) - 0.1;  // gap = -0.1
    const Eigen::VectorXd n = penalty_operator(geom, u);
    CHECK(n(z_index(1)) == doctest::Approx(-0.1).epsilon(1e-13));
    CHECK(n.lpNorm<1>() == doctest::Approx(0.1).epsilon(1e-13));
    // The equation of motion gains -(1/kappa) N, i.e. +10 e_3 on this block.
    const Eigen::VectorXd term = penalty_force(geom, u, 0.01);
    CHECK(-term(z_index(1)) == doctest::Approx(10.0).epsilon(1e-13));
  }

  SUBCASE("monotone and 1-Lipschitz in the z entries") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
      const Displacement u = oracles::random_displacement(rng, 3.0);
      const Displacement v = oracles::random_displacement(rng, 3.0);
      const Eigen::VectorXd nu = penalty_operator(geom, u);
      const Eigen::VectorXd nv = penalty_operator(geom, v);
      CHECK((nu - nv).dot(u - v) >= -1e-12);
      for (int i = 1; i <= kFreeVertexCount; ++i) {
        CHECK(std::abs(nu(z_index(i)) - nv(z_index(i))) <=
              std::abs(u(z_index(i)) - v(z_index(i))) + 1e-15);
      }
    }
  }

  SUBCASE("kappa must be positive") {
    CHECK_THROWS_AS(penalty_force(geom, Displacement::Zero(kDofCount), 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("zero data stays at rest") {
  const EnergyModel model = reference_model();
  const Trajectory traj = integrate(zero_force_problem(model, 1.0, 1.0), 0.01);
  for (const auto& s : traj.samples) {
    CHECK(s.u.norm() == 0.0);
    CHECK(s.v.norm() == 0.0);
  }
  CHECK(traj.sup_penetration == 0.0);
}

TEST_CASE("sample grid invariants") {
  const EnergyModel model = reference_model();
  PenaltyProblem problem = zero_force_problem(model, 1.0, 1.0);
  std::mt19937_64 rng(29);
  problem.u1 = 1e-3 * oracles::random_displacement(rng, 1.0);
  const Trajectory traj = integrate(problem, 1e-4);

  CHECK(traj.samples.size() <= 10001);
  CHECK(traj.samples.front().t == 0.0);
  CHECK(traj.samples.back().t == 1.0);
  for (size_t k = 1; k < traj.samples.size(); ++k) {
    CHECK(traj.samples[k].t > traj.samples[k - 1].t);
  }
  for (const auto& s : traj.samples) {
    CHECK(std::isfinite(s.kinetic));
    CHECK(s.kinetic >= 0.0);
    CHECK(s.elastic >= 0.0);
    CHECK(s.penalty >= 0.0);
    CHECK(s.max_penetration >= 0.0);
  }
}

TEST_CASE("contact-free motion matches the modal solution") {
  const EnergyModel model = reference_model();
  PenaltyProblem problem = zero_force_problem(model, 1.0, 1.0);
  std::mt19937_64 rng(31);
  problem.u1 = 1e-3 * oracles::random_displacement(rng, 1.0);
  const oracles::ModalSolution exact = oracles::modal_solution(model, problem.u0, problem.u1);

  const double dt0 = stability_dt(model, problem.kappa);

  auto terminal_error = [&](Integrator scheme, double dt) {
    const Trajectory traj = integrate(problem, dt, scheme);
    CHECK(traj.sup_penetration == 0.0);  // stays strictly feasible
    const auto& last = traj.samples.back();
    return (last.u - exact.position(last.t)).norm() + (last.v - exact.velocity(last.t)).norm();
  };

  SUBCASE("semi-implicit Euler converges at first order") {
    const double coarse = terminal_error(Integrator::SemiImplicitEuler, dt0);
    const double fine = terminal_error(Integrator::SemiImplicitEuler, dt0 / 2.0);
    CHECK(coarse / fine >= 1.5);
    CHECK(coarse / fine <= 2.6);
  }

  SUBCASE("leapfrog converges at second order") {
    const double coarse = terminal_error(Integrator::Leapfrog, dt0);
    const double fine = terminal_error(Integrator::Leapfrog, dt0 / 2.0);
    CHECK(coarse / fine >= 3.0);
    CHECK(coarse / fine <= 5.0);
  }

  SUBCASE("classical Runge-Kutta converges at fourth order") {
    const double coarse = terminal_error(Integrator::RungeKutta4, dt0);
    const double fine = terminal_error(Integrator::RungeKutta4, dt0 / 2.0);
    CHECK(coarse / fine >= 10.0);
    CHECK(coarse / fine <= 24.0);
  }
}

TEST_CASE("dt refinement against a dt/8 reference") {
  const EnergyModel model = reference_model();
  PenaltyProblem problem = zero_force_problem(model, 1.0, 1.0);
  std::mt19937_64 rng(37);
  problem.u1 = 1e-3 * oracles::random_displacement(rng, 1.0);

  const double dt0 = stability_dt(model, problem.kappa);
  const Eigen::VectorXd reference =
      integrate(problem, dt0 / 8.0, Integrator::Leapfrog).samples.back().u;
  const Eigen::VectorXd coarse = integrate(problem, dt0, Integrator::Leapfrog).samples.back().u;
  const Eigen::VectorXd fine = integrate(problem, dt0 / 2.0, Integrator::Leapfrog).samples.back().u;

  const double ratio = (coarse - reference).norm() / (fine - reference).norm();
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 5.5);
}

TEST_CASE("energy obeys the Gronwall bound") {
  const EnergyModel model = reference_model();

  SUBCASE("free oscillation") {
    PenaltyProblem problem = zero_force_problem(model, 1.0, 5.0);
    std::mt19937_64 rng(41);
    problem.u1 = 1e-3 * oracles::random_displacement(rng, 1.0);
    const Trajectory traj = integrate(problem, stability_dt(model, problem.kappa));
    CHECK(traj.max_gronwall_excess <= 1e-6);
  }

  SUBCASE("drop onto the plane") {
    PenaltyProblem problem = drop_problem(model, 1e-2, 5.0, -5.3);
    const Trajectory traj = integrate(problem, stability_dt(model, problem.kappa));
    CHECK(traj.sup_penetration > 0.0);
    CHECK(traj.max_gronwall_excess <= 1e-6);
  }
}

TEST_CASE("discrete energy estimate") {
  // d/dt [kinetic + elastic + penalty] <= |F|^2/2 + kinetic + elastic, up to
  // the per-step noise of the explicit scheme. Run well below the stability
  // bound so the slack model c * dt * (lambda_max + 1/kappa) * E covers it.
  const EnergyModel model = reference_model();
  PenaltyProblem problem = drop_problem(model, 1e-2, 2.0, -5.3);
  const double stiffness =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(model.upsilon).eigenvalues().maxCoeff() +
      1.0 / problem.kappa;
  const double dt = 0.04 / std::sqrt(stiffness);
  const Trajectory traj = integrate(problem, dt);
  REQUIRE(traj.samples.size() == static_cast<size_t>(traj.steps) + 1);

  double e_max = 0.0;
  for (const auto& s : traj.samples) e_max = std::max(e_max, s.kinetic + s.elastic + s.penalty);
  const double force_square = uniform_vertical(-5.3).squaredNorm();
  const double slack = 2.0 * traj.dt * stiffness * e_max + 1e-6;

  for (size_t k = 0; k + 1 < traj.samples.size(); ++k) {
    const auto& a = traj.samples[k];
    const auto& b = traj.samples[k + 1];
    const double rate = ((b.kinetic + b.elastic + b.penalty) - (a.kinetic + a.elastic + a.penalty)) /
                        traj.dt;
    CHECK(rate <= 0.5 * force_square + a.kinetic + a.elastic + slack);
  }
}

TEST_CASE("contact-free trajectories are independent of kappa") {
  const EnergyModel model = reference_model();
  PenaltyProblem problem = zero_force_problem(model, 1.0, 0.5);
  std::mt19937_64 rng(43);
  problem.u1 = 1e-3 * oracles::random_displacement(rng, 1.0);

  const Trajectory loose = integrate(problem, 1e-3);
  problem.kappa = 1e-3;
  const Trajectory tight = integrate(problem, 1e-3);

  REQUIRE(loose.samples.size() == tight.samples.size());
  for (size_t k = 0; k < loose.samples.size(); ++k) {
    CHECK(loose.samples[k].u == tight.samples[k].u);  // bitwise
    CHECK(loose.samples[k].v == tight.samples[k].v);
  }
}

TEST_CASE("kappa sweep") {
  const EnergyModel model = reference_model();

  SUBCASE("no contact, no residual") {
    PenaltyProblem problem = zero_force_problem(model, 1.0, 0.5);
    std::mt19937_64 rng(47);
    problem.u1 = 1e-3 * oracles::random_displacement(rng, 1.0);
    const std::vector<double> kappas = {1e-1, 1e-2, 1e-3};
    const auto report = kappa_sweep(problem, kappas, 1e-3);
    REQUIRE(report.size() == kappas.size());
    for (size_t k = 0; k < report.size(); ++k) {
      CHECK(report[k].kappa == kappas[k]);
      CHECK(report[k].error.empty());
      CHECK(report[k].sup_penetration == 0.0);
    }
  }

  SUBCASE("penetration decays like sqrt(kappa)") {
    PenaltyProblem problem = drop_problem(model, 1e-1, 3.0, -5.3);
    const std::vector<double> kappas = {1e-1, 1e-2, 1e-3, 1e-4};
    const double dt = stability_dt(model, kappas.back());
    const auto report = kappa_sweep(problem, kappas, dt);

    double previous = std::numeric_limits<double>::infinity();
    for (const auto& entry : report) {
      REQUIRE(entry.error.empty());
      CHECK(entry.sup_penetration > 0.0);
      CHECK(entry.sup_penetration < previous);
      previous = entry.sup_penetration;
    }

    // Log-log slope over the sweep.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& entry : report) {
      const double x = std::log(entry.kappa);
      const double y = std::log(entry.sup_penetration);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = static_cast<double>(report.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope >= 0.35);
    CHECK(slope <= 0.65);
  }
}

TEST_CASE("instability is detected and reported") {
  const EnergyModel model = reference_model();
  PenaltyProblem problem = drop_problem(model, 1e-3, 5.0, -5.3);
  const double dt = 20.0 * stability_dt(model, problem.kappa);
  try {
    integrate(problem, dt);
    FAIL("expected InstabilityError");
  } catch (const InstabilityError& e) {
    CHECK(e.step() > 0);
    CHECK(e.time() > 0.0);
  }

  // The sweep reports the failure without aborting the other runs.
  const auto report = kappa_sweep(problem, {1.0, 1e-3}, dt);
  CHECK(report[0].error.empty());
  CHECK(!report[1].error.empty());
}

TEST_CASE("problem validation") {
  const EnergyModel model = reference_model();
  PenaltyProblem problem = zero_force_problem(model, 1.0, 1.0);

  SUBCASE("u0 must be strictly feasible") {
    problem.u0(z_index(1)) = -contact_height(model.geom, 1);  // touching, not strict
    CHECK_THROWS_AS(integrate(problem, 0.01), std::invalid_argument);
  }
  SUBCASE("kappa positive") {
    problem.kappa = 0.0;
    CHECK_THROWS_AS(integrate(problem, 0.01), std::invalid_argument);
  }
  SUBCASE("horizon positive") {
    problem.horizon = 0.0;
    CHECK_THROWS_AS(integrate(problem, 0.01), std::invalid_argument);
  }
  SUBCASE("dt positive") {
    CHECK_THROWS_AS(integrate(problem, 0.0), std::invalid_argument);
  }
}
