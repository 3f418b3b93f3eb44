#include "capsid/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace capsid {

namespace {

// Adds coefficient c acting on (u_r - mean of u over face m) into theta row p.
void scatter_group(Eigen::MatrixXd& theta, int p, const Vec3& c, int r,
                   const std::array<int, 3>& face) {
  if (r >= 1) {
    theta.row(p).segment<3>(3 * (r - 1)) += c.transpose();
  }
  for (int s : face) {
    if (s >= 1) {
      theta.row(p).segment<3>(3 * (s - 1)) -= c.transpose() / 3.0;
    }
  }
}

}  // namespace

BendRows bend_rows(const CapsidGeometry& geom) {
  BendRows rows;
  rows.theta = Eigen::MatrixXd::Zero(kHingeCount, kDofCount);
  rows.pair_prefactors.resize(kHingeCount);

  for (int p = 0; p < kHingeCount; ++p) {
    const auto& hinge = geom.face_adjacency[p];
    const Vec3& g1 = geom.barycenters[hinge.m1];
    const Vec3& g2 = geom.barycenters[hinge.m2];
    const Vec3 pi1 = geom.vertices[hinge.i] - g1;
    const Vec3 pj1 = geom.vertices[hinge.j] - g1;
    const Vec3 pj2 = geom.vertices[hinge.j] - g2;
    const Vec3 pi2 = geom.vertices[hinge.i] - g2;

    const Vec3 a = pi1.cross(pj1);  // outer normal direction of face m1
    const Vec3 b = pj2.cross(pi2);  // outer normal direction of face m2
    const double norm_product = a.norm() * b.norm();
    if (!(norm_product > 0.0)) {
      throw std::logic_error("bend_rows: degenerate face");
    }
    const double n = a.dot(b);
    const double sin_phi = a.cross(b).norm() / norm_product;
    rows.pair_prefactors[p] = a.cross(b).norm() / std::pow(b.norm(), 4);

    // First-order change of the hinge angle. Differentiating
    // phi = arccos(a.b / (|a||b|)) and collecting the coefficients of the
    // barycentric displacement differences u_r - mean(u over face) yields one
    // vector coefficient per (vertex, face) group of the shared edge.
    const double scale = 1.0 / (norm_product * sin_phi);
    const double ratio = n / norm_product;
    const Vec3 c_i1 = scale * (-pj1.cross(b) + ratio * pj1.cross(a));
    const Vec3 c_j1 = scale * (-b.cross(pi1) + ratio * a.cross(pi1));
    const Vec3 c_j2 = scale * (-pi2.cross(a) + ratio * pi2.cross(b));
    const Vec3 c_i2 = scale * (-a.cross(pj2) + ratio * b.cross(pj2));

    scatter_group(rows.theta, p, c_i1, hinge.i, geom.faces[hinge.m1]);
    scatter_group(rows.theta, p, c_j1, hinge.j, geom.faces[hinge.m1]);
    scatter_group(rows.theta, p, c_j2, hinge.j, geom.faces[hinge.m2]);
    scatter_group(rows.theta, p, c_i2, hinge.i, geom.faces[hinge.m2]);
  }

  rows.prefactor = rows.pair_prefactors.front();
  rows.theta /= rows.prefactor;
  return rows;
}

EnergyModel assemble_energy_model(const CapsidGeometry& geom, double k_s, double k_b) {
  if (!(k_s > 0.0) || !(k_b > 0.0)) {
    throw std::invalid_argument("assemble_energy_model: stiffnesses must be positive");
  }

  EnergyModel model;
  model.geom = geom;
  model.k_s = k_s;
  model.k_b = k_b;

  model.sigma = Eigen::MatrixXd::Zero(3 * kEdgeCount, kDofCount);
  for (int e = 0; e < kEdgeCount; ++e) {
    const auto [i, j] = std::pair(geom.edges[e][0], geom.edges[e][1]);
    if (i >= 1) model.sigma.block<3, 3>(3 * e, 3 * (i - 1)) = Eigen::Matrix3d::Identity();
    if (j >= 1) model.sigma.block<3, 3>(3 * e, 3 * (j - 1)) = -Eigen::Matrix3d::Identity();
  }

  BendRows rows = bend_rows(geom);
  model.theta = std::move(rows.theta);
  model.bend_prefactor = rows.prefactor;

  const double c2 = model.bend_prefactor * model.bend_prefactor;
  model.upsilon = k_s * model.sigma.transpose() * model.sigma +
                  2.0 * k_b * c2 * model.theta.transpose() * model.theta;
  // Symmetrise away the last-bit asymmetry of the matrix products.
  model.upsilon = 0.5 * (model.upsilon + model.upsilon.transpose()).eval();
  return model;
}

double stretch_energy(const EnergyModel& model, const Displacement& u) {
  double sum = 0.0;
  for (const auto& e : model.geom.edges) {
    Vec3 diff = Vec3::Zero();
    if (e[0] >= 1) diff += Vec3(free_block(u, e[0]));
    if (e[1] >= 1) diff -= Vec3(free_block(u, e[1]));
    sum += diff.squaredNorm();
  }
  return 0.5 * model.k_s * sum;
}

double bend_energy(const EnergyModel& model, const Displacement& u) {
  const double c2 = model.bend_prefactor * model.bend_prefactor;
  return model.k_b * c2 * (model.theta * u).squaredNorm();
}

double total_energy(const EnergyModel& model, const Displacement& u) {
  return 0.5 * u.dot(model.upsilon * u);
}

Eigen::VectorXd gradient(const EnergyModel& model, const Displacement& u) {
  return model.upsilon * u;
}

SpectrumReport certify_spectrum(const EnergyModel& model) {
  SpectrumReport report;

  const Eigen::MatrixXd stretch_part = model.k_s * model.sigma.transpose() * model.sigma;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> stretch_eigs(stretch_part);
  report.min_eig_sigma_part = stretch_eigs.eigenvalues().minCoeff();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> theta_eigs(model.theta.transpose() * model.theta);
  report.min_eig_theta_part = theta_eigs.eigenvalues().minCoeff();
  report.max_eig_theta_part = theta_eigs.eigenvalues().maxCoeff();

  // Null space from a rank-revealing factorisation of Theta itself; the
  // squared singular values would drown genuine zeros in roundoff.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(model.theta, Eigen::ComputeFullV);
  const double sigma_max = svd.singularValues()(0);
  int rank = 0;
  for (int k = 0; k < svd.singularValues().size(); ++k) {
    if (svd.singularValues()(k) > 1e-10 * sigma_max) ++rank;
  }
  report.rank_theta = rank;
  for (int k = rank; k < kDofCount; ++k) {
    report.theta_null_vectors.push_back(svd.matrixV().col(k));
    report.null_vector_stretch.push_back(stretch_energy(model, svd.matrixV().col(k)));
  }
  return report;
}

}  // namespace capsid
