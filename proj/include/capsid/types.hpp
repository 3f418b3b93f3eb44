#pragma once

#include <Eigen/Dense>

namespace capsid {

using Vec3 = Eigen::Vector3d;

// Fixed combinatorics of the regular icosahedron.
inline constexpr int kVertexCount = 12;
inline constexpr int kFreeVertexCount = 11;  // vertex 0 is pinned to the plane
inline constexpr int kDofCount = 33;
inline constexpr int kEdgeCount = 30;
inline constexpr int kFaceCount = 20;
inline constexpr int kHingeCount = 30;  // adjacent-face pairs, one per edge

// Displacement of the 11 free vertices, three components per vertex in index
// order (u_1 ... u_11). The contact vertex carries no degrees of freedom.
using Displacement = Eigen::VectorXd;

// Applied body forces, same 33-component layout as Displacement.
using ForceArray = Eigen::VectorXd;

// Block of the 33-vector belonging to free vertex i (1 <= i <= 11).
inline Eigen::VectorBlock<Displacement, 3> free_block(Displacement& u, int vertex) {
  return u.segment<3>(3 * (vertex - 1));
}
inline Eigen::VectorBlock<const Displacement, 3> free_block(const Displacement& u, int vertex) {
  return u.segment<3>(3 * (vertex - 1));
}

// Index of the z component of free vertex i within the 33-vector.
inline constexpr int z_index(int vertex) { return 3 * (vertex - 1) + 2; }

}  // namespace capsid
