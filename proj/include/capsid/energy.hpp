#pragma once

#include <vector>

#include "capsid/geometry.hpp"

namespace capsid {

// Rows of the bending operator together with the uniform geometric prefactor.
//
// Row p is the linear functional whose value, multiplied by `prefactor`,
// equals the first-order change of the dihedral angle at adjacent-face pair p
// under a displacement of the free vertices. The prefactor is
//   |(G1Pi x G1Pj) x (G2Pj x G2Pi)| / |G2Pj x G2Pi|^4
// evaluated on the reference configuration; it is the same for every pair
// because all faces are congruent.
struct BendRows {
  Eigen::MatrixXd theta;                // 30 x 33
  double prefactor = 0.0;               // C
  std::vector<double> pair_prefactors;  // per-pair evaluation of the C formula
};

BendRows bend_rows(const CapsidGeometry& geom);

// Assembled quadratic energy J(U) = J_s(U) + J_b(U) = 1/2 U^T Upsilon U.
//
//   J_s(U) = (k_s/2) |Sigma U|^2   (one 3-row block per edge computing u_i - u_j)
//   J_b(U) = k_b C^2 |Theta U|^2   (each unordered face pair counted once)
//
// Upsilon is the exact Hessian k_s Sigma^T Sigma + 2 k_b C^2 Theta^T Theta,
// so the gradient of J is exactly Upsilon U.
struct EnergyModel {
  CapsidGeometry geom;
  double k_s = 0.0;
  double k_b = 0.0;
  double bend_prefactor = 0.0;  // C
  Eigen::MatrixXd sigma;        // 90 x 33
  Eigen::MatrixXd theta;        // 30 x 33
  Eigen::MatrixXd upsilon;      // 33 x 33, symmetric positive definite
};

// Throws std::invalid_argument unless both stiffnesses are positive.
EnergyModel assemble_energy_model(const CapsidGeometry& geom, double k_s, double k_b);

double stretch_energy(const EnergyModel& model, const Displacement& u);
double bend_energy(const EnergyModel& model, const Displacement& u);
double total_energy(const EnergyModel& model, const Displacement& u);
Eigen::VectorXd gradient(const EnergyModel& model, const Displacement& u);

// Spectral facts behind "no bending without stretching": the stretch part of
// Upsilon is positive definite while Theta^T Theta is rank deficient, and
// every null vector of Theta carries strictly positive stretch energy.
struct SpectrumReport {
  double min_eig_sigma_part = 0.0;  // smallest eigenvalue of k_s Sigma^T Sigma
  double min_eig_theta_part = 0.0;  // smallest eigenvalue of Theta^T Theta
  double max_eig_theta_part = 0.0;
  int rank_theta = 0;  // singular values of Theta above 1e-10 * largest
  std::vector<Eigen::VectorXd> theta_null_vectors;
  std::vector<double> null_vector_stretch;  // stretch energy of each null vector
};

SpectrumReport certify_spectrum(const EnergyModel& model);

}  // namespace capsid
