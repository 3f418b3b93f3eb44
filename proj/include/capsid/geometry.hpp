#pragma once

#include <array>
#include <vector>

#include "capsid/types.hpp"

namespace capsid {

// Reference configuration: a regular icosahedron resting on the plane z = 0
// at the single vertex P_0, with the opposite vertex on the +z axis and one
// neighbour of P_0 placed at azimuth zero (x > 0, y = 0). Vertices are
// indexed by (z, azimuth) so repeated builds produce bit-identical tables.
//
// Immutable after construction and safe to share across threads.
struct CapsidGeometry {
  double edge_length = 0.0;
  double circumradius = 0.0;    // top vertex sits at height 2 * circumradius
  double barycenter_gap = 0.0;  // distance g between adjacent-face barycenters

  std::array<Vec3, kVertexCount> vertices;  // vertices[0] == (0,0,0)

  std::vector<std::array<int, 2>> edges;  // 30 pairs {i,j}, i < j, lexicographic
  std::vector<std::array<int, 3>> faces;  // 20 ascending triples, lexicographic
  std::array<Vec3, kFaceCount> barycenters;

  // Faces m1 < m2 sharing the edge {i, j}. The shared vertices are ordered so
  // that (P_i - G^{m1}) x (P_j - G^{m1}) and (P_j - G^{m2}) x (P_i - G^{m2})
  // both point out of the solid.
  struct Hinge {
    int m1 = -1;
    int m2 = -1;
    int i = -1;
    int j = -1;
  };
  std::vector<Hinge> face_adjacency;  // 30 entries, sorted by shared edge

  std::array<std::array<int, 5>, kVertexCount> neighbor_sets;  // ascending
};

// Throws std::invalid_argument unless edge_length > 0.
CapsidGeometry build_icosahedron(double edge_length);

// 2*pi minus the sum of the face angles at a vertex. The positions overload
// evaluates an arbitrary (possibly deformed) configuration with the given
// face table.
double angular_defect(const std::array<Vec3, kVertexCount>& positions,
                      const std::vector<std::array<int, 3>>& faces, int vertex_index);
double angular_defect(const CapsidGeometry& geom, int vertex_index);

struct DeformedShape {
  std::array<Vec3, kVertexCount> vertices;
  std::array<Vec3, kFaceCount> barycenters;
};

// P_0' = P_0, P_i' = P_i + u_i; each barycenter moves by the mean of the
// displacements of its three vertices.
DeformedShape deformed_positions(const CapsidGeometry& geom, const Displacement& u);

// Height of vertex i above the plane, i.e. P_i . e_3.
double contact_height(const CapsidGeometry& geom, int vertex);

}  // namespace capsid
