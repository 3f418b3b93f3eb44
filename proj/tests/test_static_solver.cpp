#include <doctest.h>

#include <cmath>
#include <random>

#include "capsid/static_solver.hpp"
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

double top_height(const EnergyModel& model, const Displacement& u) {
  return model.geom.vertices[11].z() + u(z_index(11));
}

}  // namespace

TEST_CASE("zero force gives the reference configuration") {
  const EnergyModel model = reference_model();
  const ObstacleSolution solution = solve_obstacle(model, ForceArray::Zero(kDofCount));
  CHECK(solution.u.norm() == 0.0);
  CHECK(solution.contact.active.empty());
  CHECK(solution.residual.max() <= 1e-12);
}

TEST_CASE("upward pull is unconstrained") {
  const EnergyModel model = reference_model();
  const ForceArray f = uniform_vertical(+1.0);
  const ObstacleSolution solution = solve_obstacle(model, f);
  CHECK(solution.contact.active.empty());
  const Displacement expected = oracles::linear_solve(model, f);
  CHECK((solution.u - expected).lpNorm<Eigen::Infinity>() <= 1e-10);
  // And the unconstrained minimiser is indeed feasible.
  for (int i = 1; i <= kFreeVertexCount; ++i) {
    CHECK(contact_height(model.geom, i) + expected(z_index(i)) >= 0.0);
  }
}

TEST_CASE("load -5.3 presses vertices onto the plane") {
  const EnergyModel model = reference_model();
  const ObstacleSolution solution = solve_obstacle(model, uniform_vertical(-5.3));
  CHECK(!solution.contact.active.empty());
  CHECK(solution.residual.max() <= 1e-8);
  CHECK(top_height(model, solution.u) < 2.0 * model.geom.circumradius);

  // Contact state invariants.
  for (int i = 1; i <= kFreeVertexCount; ++i) {
    const double gap = contact_height(model.geom, i) + solution.u(z_index(i));
    CHECK(gap >= -1e-10 * model.geom.edge_length);
  }
  for (double lambda : solution.contact.multipliers) {
    CHECK(lambda >= -1e-10);
  }
}

TEST_CASE("force sweep: top height is nonincreasing") {
  const EnergyModel model = reference_model();
  double previous = 2.0 * model.geom.circumradius + 1.0;
  for (double f_z : {-5.3, -5.7, -6.0, -7.0}) {
    const ObstacleSolution solution = solve_obstacle(model, uniform_vertical(f_z));
    const double height = top_height(model, solution.u);
    CHECK(height <= previous + 1e-12);
    previous = height;
  }
}

TEST_CASE("PDAS result is independent of the initial guess") {
  const EnergyModel model = reference_model();
  const ForceArray f = uniform_vertical(-6.0);
  const ObstacleSolution reference = solve_obstacle(model, f);
  const std::vector<std::vector<int>> guesses = {
      {}, {1}, {1, 2, 3, 4, 5}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, {2, 7, 9}};
  for (const auto& guess : guesses) {
    PdasOptions options;
    options.initial_active = guess;
    const ObstacleSolution solution = solve_obstacle(model, f, options);
    CHECK((solution.u - reference.u).lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("variational inequality certificate") {
  const EnergyModel model = reference_model();
  const ForceArray f = uniform_vertical(-5.7);
  const ObstacleSolution solution = solve_obstacle(model, f);
  const Eigen::VectorXd g = model.upsilon * solution.u;
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const Displacement v = oracles::random_feasible(rng, model.geom, 2.0);
    const Eigen::VectorXd d = v - solution.u;
    CHECK(g.dot(d) >= f.dot(d) - 1e-8 * (1.0 + d.norm()));
  }
}

TEST_CASE("agrees with the projected-gradient oracle") {
  const EnergyModel model = reference_model();
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> tangential(-1.0, 1.0);
  std::uniform_real_distribution<double> downward(-8.0, -2.0);

  for (int trial = 0; trial < 10; ++trial) {
    ForceArray f(kDofCount);
    for (int i = 1; i <= kFreeVertexCount; ++i) {
      f(3 * (i - 1)) = tangential(rng);
      f(3 * (i - 1) + 1) = tangential(rng);
      f(z_index(i)) = downward(rng);
    }
    const ObstacleSolution solution = solve_obstacle(model, f);
    const Displacement oracle = oracle_projected_gradient(model, f, 1e-18);
    CHECK((solution.u - oracle).norm() <= 1e-6 * (1.0 + solution.u.norm()));
  }
}

TEST_CASE("projected-gradient oracle endpoints") {
  const EnergyModel model = reference_model();

  SUBCASE("zero force returns zero") {
    CHECK(oracle_projected_gradient(model, ForceArray::Zero(kDofCount), 1e-18).norm() == 0.0);
  }

  SUBCASE("upward force matches the linear solve") {
    const ForceArray f = uniform_vertical(+0.8);
    const Displacement oracle = oracle_projected_gradient(model, f, 1e-18);
    // Stopping when the energy decrease stalls leaves a gradient of order
    // sqrt(2 L tol), hence a distance of order sqrt(2 L tol) / mu.
    CHECK((oracle - oracles::linear_solve(model, f)).norm() <= 1e-6);
  }

  SUBCASE("iteration cap raises an oracle failure") {
    CHECK_THROWS_AS(oracle_projected_gradient(model, uniform_vertical(-5.3), 1e-18, 10),
                    OracleFailure);
  }

  SUBCASE("tolerance must be positive") {
    CHECK_THROWS_AS(oracle_projected_gradient(model, uniform_vertical(-5.3), 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("solver failure carries the last iterate") {
  const EnergyModel model = reference_model();
  PdasOptions options;
  options.max_iterations = 1;  // -5.3 needs more than one active-set update
  try {
    solve_obstacle(model, uniform_vertical(-5.3), options);
    FAIL("expected SolverFailure");
  } catch (const SolverFailure& failure) {
    CHECK(failure.last_iterate().size() == kDofCount);
    CHECK(failure.residual().max() > 1e-8);
  }
}

TEST_CASE("adhesion equilibrium") {
  const EnergyModel model = reference_model();

  SUBCASE("no pins means no displacement") {
    const AdhesionEquilibrium eq = solve_adhesion_equilibrium(model, {});
    CHECK(eq.u.norm() == 0.0);
    CHECK(eq.multipliers.empty());
  }

  SUBCASE("pins are satisfied exactly") {
    const AdhesionEquilibrium eq = solve_adhesion_equilibrium(model, {1, 3, 5});
    for (int i : {1, 3, 5}) {
      CHECK(std::abs(contact_height(model.geom, i) + eq.u(z_index(i))) <=
            1e-12 * model.geom.edge_length);
    }
    CHECK(eq.residual <= 1e-10);
    // All remaining vertices stay above the plane.
    for (int i = 1; i <= kFreeVertexCount; ++i) {
      CHECK(contact_height(model.geom, i) + eq.u(z_index(i)) >= -1e-10);
    }
  }

  SUBCASE("equal stage-1 active sets give identical equilibria") {
    const ObstacleSolution a = solve_obstacle(model, uniform_vertical(-5.3));
    const ObstacleSolution b = solve_obstacle(model, uniform_vertical(-5.7));
    REQUIRE(!a.contact.active.empty());
    const AdhesionEquilibrium eq_a = solve_adhesion_equilibrium(model, a.contact.active);
    const AdhesionEquilibrium eq_b = solve_adhesion_equilibrium(model, b.contact.active);
    if (a.contact.active == b.contact.active) {
      CHECK((eq_a.u - eq_b.u).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
    CHECK(eq_a.residual <= 1e-10);
    CHECK(eq_b.residual <= 1e-10);
  }

  SUBCASE("adhesion equilibrium does not raise the energy") {
    const ObstacleSolution stage1 = solve_obstacle(model, uniform_vertical(-7.0));
    const AdhesionEquilibrium eq = solve_adhesion_equilibrium(model, stage1.contact.active);
    CHECK(total_energy(model, eq.u) <= total_energy(model, stage1.u) + 1e-12);
    // Stage-2 output is feasible.
    for (int i = 1; i <= kFreeVertexCount; ++i) {
      CHECK(contact_height(model.geom, i) + eq.u(z_index(i)) >= -1e-10);
    }
  }

  SUBCASE("invalid pin indices are rejected") {
    CHECK_THROWS_AS(solve_adhesion_equilibrium(model, {0}), std::invalid_argument);
    CHECK_THROWS_AS(solve_adhesion_equilibrium(model, {12}), std::invalid_argument);
  }
}
