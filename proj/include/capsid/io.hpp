#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "capsid/dynamics.hpp"
#include "capsid/static_solver.hpp"

namespace capsid {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { Geometry, Static, Equilibrium, Dynamics, Sweep, Verify };

Experiment experiment_from_string(const std::string& name);
std::string to_string(Experiment experiment);

// One experiment per process invocation. Parsed from a single JSON document;
// unknown keys are rejected so typos surface immediately.
struct RunConfig {
  Experiment experiment = Experiment::Static;
  bool experiment_specified = false;  // true when the config named it explicitly
  double edge_length = 3.0;
  double k_s = 0.25;
  double k_b = 1.7;
  std::vector<Vec3> force;          // one entry per free vertex (11)
  std::vector<double> kappa_list;   // dynamics uses the first entry
  double dt = 0.0;                  // 0 = use the stability bound
  double horizon = 0.0;             // T
  Displacement u0;                  // dynamics initial data, default zero
  Displacement u1;
  Integrator integrator = Integrator::SemiImplicitEuler;
  std::filesystem::path output_dir = "out";
  std::filesystem::path stage1_result;  // equilibrium input
  std::uint64_t seed = 0;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// The 33-component force vector described by config.force.
ForceArray assemble_force(const RunConfig& config);

// Wavefront OBJ snapshot: 12 vertices in index order (17 significant digits),
// 20 triangular faces wound outward with respect to the reference solid.
void write_obj(const std::filesystem::path& path, const CapsidGeometry& geom,
               const std::array<Vec3, kVertexCount>& positions);

// Header t,u_1x,...,u_11z,v_1x,...,v_11z,E_kin,E_el,E_pen,r_max; one row per
// stored sample, 17 significant digits.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);

// Plain-text dense matrix dump: "rows cols" line, then row-major values with
// 17 significant digits.
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);

struct VerifyEntry {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  std::string comparison;  // "<=" or ">"
  bool pass = false;
};

struct VerifyReport {
  std::vector<VerifyEntry> entries;
  bool all_pass = false;
};

// The machine-checkable invariant suite behind the `verify` subcommand:
// Descartes defects, bending prefactor uniformity, spectrum facts, gradient
// finite differences, oracle-vs-PDAS agreement, VI certificate, penalty
// operator monotonicity and Lipschitz bound. The seed feeds the randomized
// test vectors only.
VerifyReport run_invariant_suite(const RunConfig& config);

// Experiment drivers; each writes its artifacts under config.output_dir and
// returns a process exit status (solver failures still write diagnostics).
int run_geometry(const RunConfig& config, bool dump_matrices = false);
int run_static(const RunConfig& config);
int run_equilibrium(const RunConfig& config);
int run_dynamics(const RunConfig& config);
int run_sweep(const RunConfig& config);
int run_verify(const RunConfig& config);

}  // namespace capsid
