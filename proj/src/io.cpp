#include "capsid/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

namespace capsid {

namespace {

using nlohmann::json;

std::string fmt17(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw std::runtime_error("failed to write " + path.string());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return doc;
}

double require_positive(const json& value, const std::string& key) {
  if (!value.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  const double x = value.get<double>();
  if (!(x > 0.0)) throw ConfigError("config key '" + key + "' must be positive");
  return x;
}

std::vector<Vec3> parse_force(const json& value) {
  if (!value.is_array()) throw ConfigError("config key 'force' must be an array");
  std::vector<Vec3> force;
  if (value.size() == 3 && value[0].is_number()) {
    // Uniform per-vertex vector.
    const Vec3 f(value[0].get<double>(), value[1].get<double>(), value[2].get<double>());
    force.assign(kFreeVertexCount, f);
    return force;
  }
  if (value.size() != kFreeVertexCount) {
    throw ConfigError("config key 'force' must be a 3-vector or a table of 11 entries");
  }
  for (const auto& row : value) {
    if (!row.is_array() || row.size() != 3 || !row[0].is_number()) {
      throw ConfigError("config key 'force' table entries must be 3-vectors");
    }
    force.emplace_back(row[0].get<double>(), row[1].get<double>(), row[2].get<double>());
  }
  return force;
}

Displacement parse_vec33(const json& value, const std::string& key) {
  if (!value.is_array() || value.size() != kDofCount) {
    throw ConfigError("config key '" + key + "' must be an array of 33 numbers");
  }
  Displacement u(kDofCount);
  for (int k = 0; k < kDofCount; ++k) {
    if (!value[k].is_number()) throw ConfigError("config key '" + key + "' must be numeric");
    u(k) = value[k].get<double>();
  }
  if (!u.allFinite()) throw ConfigError("config key '" + key + "' must be finite");
  return u;
}

Integrator integrator_from_string(const std::string& name) {
  if (name == "semi_implicit_euler") return Integrator::SemiImplicitEuler;
  if (name == "leapfrog") return Integrator::Leapfrog;
  if (name == "rk4") return Integrator::RungeKutta4;
  throw ConfigError("unknown integrator '" + name + "'");
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int k = 0; k < v.size(); ++k) arr.push_back(v(k));
  return arr;
}

json force_to_json(const std::vector<Vec3>& force) {
  json arr = json::array();
  for (const auto& f : force) arr.push_back({f.x(), f.y(), f.z()});
  return arr;
}

json constants_json(const RunConfig& config, const EnergyModel& model) {
  return json{{"edge_length", config.edge_length},
              {"k_s", config.k_s},
              {"k_b", config.k_b},
              {"bend_prefactor", model.bend_prefactor}};
}

double top_vertex_height(const CapsidGeometry& geom, const Displacement& u) {
  return geom.vertices[kVertexCount - 1].z() + u(z_index(kVertexCount - 1));
}

ForceArray uniform_vertical_force(double f_z) {
  ForceArray f = ForceArray::Zero(kDofCount);
  for (int i = 1; i <= kFreeVertexCount; ++i) f(z_index(i)) = f_z;
  return f;
}

Displacement random_displacement(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Displacement u(kDofCount);
  for (int k = 0; k < kDofCount; ++k) u(k) = dist(rng);
  return u;
}

Displacement random_feasible_point(std::mt19937_64& rng, const CapsidGeometry& geom, double scale) {
  Displacement v = random_displacement(rng, scale);
  for (int i = 1; i <= kFreeVertexCount; ++i) {
    v(z_index(i)) = std::max(v(z_index(i)), -contact_height(geom, i));
  }
  return v;
}

}  // namespace

Experiment experiment_from_string(const std::string& name) {
  if (name == "geometry") return Experiment::Geometry;
  if (name == "static") return Experiment::Static;
  if (name == "equilibrium") return Experiment::Equilibrium;
  if (name == "dynamics") return Experiment::Dynamics;
  if (name == "sweep") return Experiment::Sweep;
  if (name == "verify") return Experiment::Verify;
  throw ConfigError("unknown experiment '" + name + "'");
}

std::string to_string(Experiment experiment) {
  switch (experiment) {
    case Experiment::Geometry: return "geometry";
    case Experiment::Static: return "static";
    case Experiment::Equilibrium: return "equilibrium";
    case Experiment::Dynamics: return "dynamics";
    case Experiment::Sweep: return "sweep";
    case Experiment::Verify: return "verify";
  }
  return "unknown";
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  RunConfig config;
  for (const auto& [key, value] : doc.items()) {
    if (key == "experiment") {
      config.experiment = experiment_from_string(value.get<std::string>());
      config.experiment_specified = true;
    } else if (key == "edge_length") {
      config.edge_length = require_positive(value, key);
    } else if (key == "k_s") {
      config.k_s = require_positive(value, key);
    } else if (key == "k_b") {
      config.k_b = require_positive(value, key);
    } else if (key == "force") {
      config.force = parse_force(value);
    } else if (key == "kappa_list") {
      if (!value.is_array() || value.empty()) {
        throw ConfigError("config key 'kappa_list' must be a non-empty array");
      }
      for (const auto& k : value) config.kappa_list.push_back(require_positive(k, key));
    } else if (key == "dt") {
      config.dt = require_positive(value, key);
    } else if (key == "T") {
      config.horizon = require_positive(value, key);
    } else if (key == "u0") {
      config.u0 = parse_vec33(value, key);
    } else if (key == "u1") {
      config.u1 = parse_vec33(value, key);
    } else if (key == "integrator") {
      config.integrator = integrator_from_string(value.get<std::string>());
    } else if (key == "output_dir") {
      config.output_dir = value.get<std::string>();
    } else if (key == "stage1_result") {
      config.stage1_result = value.get<std::string>();
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw ConfigError("config key 'seed' must be a u64");
      config.seed = value.get<std::uint64_t>();
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  if (config.experiment == Experiment::Dynamics || config.experiment == Experiment::Sweep) {
    if (config.kappa_list.empty()) {
      throw ConfigError("config key 'kappa_list' is required for dynamics and sweep runs");
    }
    if (!(config.horizon > 0.0)) {
      throw ConfigError("config key 'T' is required for dynamics and sweep runs");
    }
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

ForceArray assemble_force(const RunConfig& config) {
  ForceArray f = ForceArray::Zero(kDofCount);
  if (config.force.empty()) return f;
  for (int i = 1; i <= kFreeVertexCount; ++i) {
    f.segment<3>(3 * (i - 1)) = config.force[i - 1];
  }
  return f;
}

void write_obj(const std::filesystem::path& path, const CapsidGeometry& geom,
               const std::array<Vec3, kVertexCount>& positions) {
  std::ostringstream out;
  for (const auto& p : positions) {
    out << "v " << fmt17(p.x()) << ' ' << fmt17(p.y()) << ' ' << fmt17(p.z()) << '\n';
  }
  const Vec3 centre(0.0, 0.0, geom.circumradius);
  for (int m = 0; m < kFaceCount; ++m) {
    auto [i, j, k] = std::tuple(geom.faces[m][0], geom.faces[m][1], geom.faces[m][2]);
    const Vec3 normal =
        (geom.vertices[j] - geom.vertices[i]).cross(geom.vertices[k] - geom.vertices[i]);
    if (normal.dot(geom.barycenters[m] - centre) < 0.0) {
      std::swap(j, k);
    }
    out << "f " << i + 1 << ' ' << j + 1 << ' ' << k + 1 << '\n';
  }
  write_text(path, out.str());
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
  std::ostringstream out;
  out << 't';
  for (int i = 1; i <= kFreeVertexCount; ++i) {
    out << ",u_" << i << "x,u_" << i << "y,u_" << i << 'z';
  }
  for (int i = 1; i <= kFreeVertexCount; ++i) {
    out << ",v_" << i << "x,v_" << i << "y,v_" << i << 'z';
  }
  out << ",E_kin,E_el,E_pen,r_max\n";
  for (const auto& s : trajectory.samples) {
    out << fmt17(s.t);
    for (int k = 0; k < kDofCount; ++k) out << ',' << fmt17(s.u(k));
    for (int k = 0; k < kDofCount; ++k) out << ',' << fmt17(s.v(k));
    out << ',' << fmt17(s.kinetic) << ',' << fmt17(s.elastic) << ',' << fmt17(s.penalty) << ','
        << fmt17(s.max_penetration) << '\n';
  }
  write_text(path, out.str());
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ostringstream out;
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << (c ? " " : "") << fmt17(m(r, c));
    }
    out << '\n';
  }
  write_text(path, out.str());
}

int run_geometry(const RunConfig& config, bool dump_matrices) {
  const CapsidGeometry geom = build_icosahedron(config.edge_length);
  write_obj(config.output_dir / "reference.obj", geom, geom.vertices);

  json doc;
  doc["experiment"] = "geometry";
  doc["edge_length"] = geom.edge_length;
  doc["circumradius"] = geom.circumradius;
  doc["barycenter_gap"] = geom.barycenter_gap;
  json vertices = json::array();
  for (const auto& p : geom.vertices) vertices.push_back({p.x(), p.y(), p.z()});
  doc["vertices"] = vertices;
  doc["edges"] = geom.edges;
  doc["faces"] = geom.faces;
  json defects = json::array();
  double defect_sum = 0.0;
  for (int i = 0; i < kVertexCount; ++i) {
    const double d = angular_defect(geom, i);
    defects.push_back(d);
    defect_sum += d;
  }
  doc["angular_defects"] = defects;
  doc["angular_defect_sum"] = defect_sum;
  write_text(config.output_dir / "geometry.json", doc.dump(2) + "\n");

  if (dump_matrices) {
    const EnergyModel model = assemble_energy_model(geom, config.k_s, config.k_b);
    write_matrix(config.output_dir / "sigma.txt", model.sigma);
    write_matrix(config.output_dir / "theta.txt", model.theta);
    write_matrix(config.output_dir / "upsilon.txt", model.upsilon);
  }
  return 0;
}

int run_static(const RunConfig& config) {
  const CapsidGeometry geom = build_icosahedron(config.edge_length);
  const EnergyModel model = assemble_energy_model(geom, config.k_s, config.k_b);
  const ForceArray f = assemble_force(config);

  write_obj(config.output_dir / "reference.obj", geom, geom.vertices);

  json doc;
  doc["experiment"] = "static";
  doc["constants"] = constants_json(config, model);
  doc["force"] = force_to_json(config.force.empty()
                                   ? std::vector<Vec3>(kFreeVertexCount, Vec3::Zero())
                                   : config.force);
  try {
    const ObstacleSolution solution = solve_obstacle(model, f);
    write_obj(config.output_dir / "deformed.obj", geom, deformed_positions(geom, solution.u).vertices);
    doc["u"] = vector_to_json(solution.u);
    doc["active_set"] = solution.contact.active;
    doc["multipliers"] = solution.contact.multipliers;
    doc["iterations"] = solution.iterations;
    doc["kkt_residual"] = {{"stationarity", solution.residual.stationarity},
                           {"feasibility", solution.residual.feasibility},
                           {"complementarity", solution.residual.complementarity},
                           {"dual_feasibility", solution.residual.dual_feasibility}};
    doc["top_vertex_height"] = top_vertex_height(geom, solution.u);
    doc["total_energy"] = total_energy(model, solution.u);
    write_text(config.output_dir / "result.json", doc.dump(2) + "\n");
    return 0;
  } catch (const SolverFailure& failure) {
    doc["error"] = failure.what();
    doc["last_iterate"] = vector_to_json(failure.last_iterate());
    doc["kkt_residual"] = {{"stationarity", failure.residual().stationarity},
                           {"feasibility", failure.residual().feasibility},
                           {"complementarity", failure.residual().complementarity},
                           {"dual_feasibility", failure.residual().dual_feasibility}};
    write_text(config.output_dir / "result.json", doc.dump(2) + "\n");
    return 1;
  }
}

int run_equilibrium(const RunConfig& config) {
  if (config.stage1_result.empty()) {
    throw ConfigError("config key 'stage1_result' is required for equilibrium runs");
  }
  const json stage1 = read_json_file(config.stage1_result);
  if (!stage1.contains("active_set")) {
    throw ConfigError("stage-1 result " + config.stage1_result.string() +
                      " is missing field 'active_set'");
  }
  std::vector<int> pinned;
  try {
    pinned = stage1["active_set"].get<std::vector<int>>();
  } catch (const json::exception&) {
    throw ConfigError("stage-1 field 'active_set' must be an array of vertex indices");
  }

  const CapsidGeometry geom = build_icosahedron(config.edge_length);
  const EnergyModel model = assemble_energy_model(geom, config.k_s, config.k_b);
  const AdhesionEquilibrium eq = solve_adhesion_equilibrium(model, pinned);

  write_obj(config.output_dir / "equilibrium.obj", geom, deformed_positions(geom, eq.u).vertices);

  json doc;
  doc["experiment"] = "equilibrium";
  doc["constants"] = constants_json(config, model);
  doc["pinned"] = eq.pinned;
  doc["u"] = vector_to_json(eq.u);
  doc["multipliers"] = eq.multipliers;
  doc["residual"] = eq.residual;
  doc["inequality_was_binding"] = eq.inequality_was_binding;
  doc["top_vertex_height"] = top_vertex_height(geom, eq.u);
  doc["total_energy"] = total_energy(model, eq.u);
  write_text(config.output_dir / "result.json", doc.dump(2) + "\n");
  return 0;
}

int run_dynamics(const RunConfig& config) {
  if (config.kappa_list.empty()) {
    throw ConfigError("config key 'kappa_list' is required for dynamics runs");
  }
  if (!(config.horizon > 0.0)) {
    throw ConfigError("config key 'T' is required for dynamics runs");
  }
  const CapsidGeometry geom = build_icosahedron(config.edge_length);
  PenaltyProblem problem;
  problem.model = assemble_energy_model(geom, config.k_s, config.k_b);
  const ForceArray f = assemble_force(config);
  problem.force = [f](double) { return f; };
  problem.kappa = config.kappa_list.front();
  problem.u0 = config.u0.size() ? config.u0 : Displacement::Zero(kDofCount);
  problem.u1 = config.u1.size() ? config.u1 : Displacement::Zero(kDofCount);
  problem.horizon = config.horizon;

  const double dt = config.dt > 0.0 ? config.dt : stability_dt(problem.model, problem.kappa);

  json doc;
  doc["experiment"] = "dynamics";
  doc["constants"] = constants_json(config, problem.model);
  doc["kappa"] = problem.kappa;
  doc["T"] = config.horizon;
  try {
    const Trajectory traj = integrate(problem, dt, config.integrator);
    write_trajectory_csv(config.output_dir / "trajectory.csv", traj);
    doc["dt"] = traj.dt;
    doc["steps"] = traj.steps;
    doc["sup_penetration"] = traj.sup_penetration;
    doc["max_penalty_energy"] = traj.max_penalty_energy;
    doc["max_gronwall_excess"] = traj.max_gronwall_excess;
    const auto& last = traj.samples.back();
    doc["final"] = {{"t", last.t},
                    {"kinetic", last.kinetic},
                    {"elastic", last.elastic},
                    {"penalty", last.penalty}};
    doc["csv"] = "trajectory.csv";
    write_text(config.output_dir / "result.json", doc.dump(2) + "\n");
    return 0;
  } catch (const InstabilityError& e) {
    doc["error"] = e.what();
    doc["failed_step"] = e.step();
    doc["failed_time"] = e.time();
    write_text(config.output_dir / "result.json", doc.dump(2) + "\n");
    return 1;
  }
}

int run_sweep(const RunConfig& config) {
  if (config.kappa_list.empty()) {
    throw ConfigError("config key 'kappa_list' is required for sweep runs");
  }
  if (!(config.horizon > 0.0)) {
    throw ConfigError("config key 'T' is required for sweep runs");
  }
  const CapsidGeometry geom = build_icosahedron(config.edge_length);
  PenaltyProblem base;
  base.model = assemble_energy_model(geom, config.k_s, config.k_b);
  const ForceArray f = assemble_force(config);
  base.force = [f](double) { return f; };
  base.kappa = config.kappa_list.front();
  base.u0 = config.u0.size() ? config.u0 : Displacement::Zero(kDofCount);
  base.u1 = config.u1.size() ? config.u1 : Displacement::Zero(kDofCount);
  base.horizon = config.horizon;

  const double kappa_min = *std::min_element(config.kappa_list.begin(), config.kappa_list.end());
  const double dt = config.dt > 0.0 ? config.dt : stability_dt(base.model, kappa_min);

  const std::vector<SweepEntry> entries = kappa_sweep(base, config.kappa_list, dt, config.integrator);

  json doc;
  doc["experiment"] = "sweep";
  doc["constants"] = constants_json(config, base.model);
  doc["dt"] = dt;
  doc["T"] = config.horizon;
  doc["kappas"] = config.kappa_list;
  json entry_list = json::array();
  bool any_failed = false;
  for (size_t k = 0; k < entries.size(); ++k) {
    json entry;
    entry["kappa"] = entries[k].kappa;
    if (entries[k].error.empty()) {
      const std::string csv = "trajectory_k" + std::to_string(k) + ".csv";
      write_trajectory_csv(config.output_dir / csv, *entries[k].trajectory);
      entry["sup_penetration"] = entries[k].sup_penetration;
      entry["max_penalty_energy"] = entries[k].max_penalty_energy;
      entry["max_gronwall_excess"] = entries[k].trajectory->max_gronwall_excess;
      entry["csv"] = csv;
    } else {
      entry["error"] = entries[k].error;
      any_failed = true;
    }
    entry_list.push_back(entry);
  }
  doc["entries"] = entry_list;

  // Log-log slope of sup penetration against kappa, when it is measurable.
  std::vector<double> log_kappa, log_r;
  for (const auto& e : entries) {
    if (e.error.empty() && e.sup_penetration > 0.0) {
      log_kappa.push_back(std::log(e.kappa));
      log_r.push_back(std::log(e.sup_penetration));
    }
  }
  if (log_kappa.size() >= 2) {
    const double n = static_cast<double>(log_kappa.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t k = 0; k < log_kappa.size(); ++k) {
      sx += log_kappa[k];
      sy += log_r[k];
      sxx += log_kappa[k] * log_kappa[k];
      sxy += log_kappa[k] * log_r[k];
    }
    doc["penetration_exponent"] = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }

  write_text(config.output_dir / "sweep.json", doc.dump(2) + "\n");
  return any_failed ? 1 : 0;
}

VerifyReport run_invariant_suite(const RunConfig& config) {
  VerifyReport report;
  auto check_le = [&](const std::string& name, double measured, double threshold) {
    report.entries.push_back({name, measured, threshold, "<=", measured <= threshold});
  };
  auto check_gt = [&](const std::string& name, double measured, double threshold) {
    report.entries.push_back({name, measured, threshold, ">", measured > threshold});
  };

  const CapsidGeometry geom = build_icosahedron(config.edge_length);
  const EnergyModel model = assemble_energy_model(geom, config.k_s, config.k_b);
  std::mt19937_64 rng(config.seed);

  // Descartes: every defect is pi/3 and the total is 4*pi.
  double defect_sum = 0.0;
  double defect_error = 0.0;
  for (int i = 0; i < kVertexCount; ++i) {
    const double d = angular_defect(geom, i);
    defect_sum += d;
    defect_error = std::max(defect_error, std::abs(d - std::numbers::pi / 3.0));
  }
  check_le("descartes_sum_4pi", std::abs(defect_sum - 4.0 * std::numbers::pi), 1e-10);
  check_le("descartes_each_pi_3", defect_error, 1e-12);

  // Bending prefactor uniformity.
  const BendRows rows = bend_rows(geom);
  double prefactor_spread = 0.0;
  for (double c : rows.pair_prefactors) {
    prefactor_spread = std::max(prefactor_spread, std::abs(c - rows.prefactor));
  }
  check_le("bend_prefactor_uniform", prefactor_spread, 1e-10 * rows.prefactor);

  // Spectrum facts.
  const SpectrumReport spectrum = certify_spectrum(model);
  check_gt("stretch_part_min_eigenvalue", spectrum.min_eig_sigma_part, 0.0);
  check_le("theta_gram_min_eigenvalue", spectrum.min_eig_theta_part,
           1e-10 * spectrum.max_eig_theta_part);
  double min_null_stretch = std::numeric_limits<double>::infinity();
  for (double e : spectrum.null_vector_stretch) min_null_stretch = std::min(min_null_stretch, e);
  check_gt("theta_null_vectors_stretch", min_null_stretch, 0.0);

  const double upsilon_scale = model.upsilon.cwiseAbs().maxCoeff();
  check_le("upsilon_symmetry",
           (model.upsilon - model.upsilon.transpose()).cwiseAbs().maxCoeff(),
           1e-12 * upsilon_scale);

  // Gradient against central finite differences.
  double gradient_error = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Displacement u = random_displacement(rng, 1.0);
    const Eigen::VectorXd g = gradient(model, u);
    const double step = 1e-6 * std::max(u.norm(), 1.0);
    Eigen::VectorXd fd(kDofCount);
    for (int k = 0; k < kDofCount; ++k) {
      Displacement up = u, dn = u;
      up(k) += step;
      dn(k) -= step;
      fd(k) = (total_energy(model, up) - total_energy(model, dn)) / (2.0 * step);
    }
    gradient_error = std::max(gradient_error, (g - fd).norm() / std::max(g.norm(), 1e-12));
  }
  check_le("gradient_finite_difference", gradient_error, 1e-6);

  // Projected-gradient oracle against the active-set solver on the four
  // uniform vertical loads of the static experiments.
  double oracle_gap = 0.0;
  for (double f_z : {-5.3, -5.7, -6.0, -7.0}) {
    const ForceArray f = uniform_vertical_force(f_z);
    const ObstacleSolution solution = solve_obstacle(model, f);
    const Displacement reference = oracle_projected_gradient(model, f, 1e-18);
    oracle_gap = std::max(oracle_gap, (solution.u - reference).norm() / (1.0 + solution.u.norm()));
  }
  check_le("oracle_vs_pdas", oracle_gap, 1e-6);

  // Variational inequality certificate at the -5.3 solution.
  {
    const ForceArray f = uniform_vertical_force(-5.3);
    const ObstacleSolution solution = solve_obstacle(model, f);
    const Eigen::VectorXd g = model.upsilon * solution.u;
    double worst = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 100; ++trial) {
      const Displacement v = random_feasible_point(rng, geom, 2.0);
      const Eigen::VectorXd d = v - solution.u;
      const double violation = f.dot(d) - g.dot(d) - 1e-8 * (1.0 + d.norm());
      worst = std::max(worst, violation);
    }
    check_le("variational_inequality", worst, 0.0);
  }

  // Penalty operator: monotone and 1-Lipschitz blockwise in the z entries.
  double monotonicity = 0.0;
  double lipschitz = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Displacement u = random_displacement(rng, 3.0);
    const Displacement v = random_displacement(rng, 3.0);
    const Eigen::VectorXd nu = penalty_operator(geom, u);
    const Eigen::VectorXd nv = penalty_operator(geom, v);
    monotonicity = std::min(monotonicity, (nu - nv).dot(u - v));
    for (int i = 1; i <= kFreeVertexCount; ++i) {
      const double dz = std::abs(u(z_index(i)) - v(z_index(i)));
      const double dn = std::abs(nu(z_index(i)) - nv(z_index(i)));
      if (dz > 0.0) lipschitz = std::max(lipschitz, dn / dz);
    }
  }
  check_gt("penalty_monotonicity", monotonicity, -1e-12);
  check_le("penalty_lipschitz", lipschitz, 1.0 + 1e-12);

  report.all_pass = true;
  for (const auto& entry : report.entries) report.all_pass = report.all_pass && entry.pass;
  return report;
}

int run_verify(const RunConfig& config) {
  const VerifyReport report = run_invariant_suite(config);

  json doc;
  doc["experiment"] = "verify";
  doc["seed"] = config.seed;
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"name", e.name},
                       {"measured", e.measured},
                       {"threshold", e.threshold},
                       {"comparison", e.comparison},
                       {"pass", e.pass}});
    std::printf("[%s] %s: measured=%.3e threshold=%.3e\n", e.pass ? "PASS" : "FAIL",
                e.name.c_str(), e.measured, e.threshold);
  }
  doc["checks"] = entries;
  doc["all_pass"] = report.all_pass;
  write_text(config.output_dir / "verify_report.json", doc.dump(2) + "\n");
  return report.all_pass ? 0 : 1;
}

}  // namespace capsid
