#include "capsid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace capsid {

namespace {

// Vertex-on-bottom icosahedron with unit edge, built from closed forms.
//
// With circumradius R, the neighbours of a vertex sit at polar angle
// arccos(1/sqrt(5)) from it, so the solid standing on one vertex has rings at
// heights R(1 -+ 1/sqrt(5)) of radius 2R/sqrt(5), azimuthally offset by pi/5.
std::array<Vec3, kVertexCount> unit_vertex_template() {
  const double sqrt5 = std::sqrt(5.0);
  const double circumradius = 0.25 * std::sqrt(10.0 + 2.0 * sqrt5);
  const double ring_radius = 2.0 * circumradius / sqrt5;
  const double z_lower = circumradius * (1.0 - 1.0 / sqrt5);
  const double z_upper = circumradius * (1.0 + 1.0 / sqrt5);

  std::array<Vec3, kVertexCount> v;
  v[0] = Vec3::Zero();
  for (int k = 0; k < 5; ++k) {
    const double lower_azimuth = 2.0 * std::numbers::pi * k / 5.0;
    const double upper_azimuth = lower_azimuth + std::numbers::pi / 5.0;
    v[1 + k] = Vec3(ring_radius * std::cos(lower_azimuth),
                    ring_radius * std::sin(lower_azimuth), z_lower);
    v[6 + k] = Vec3(ring_radius * std::cos(upper_azimuth),
                    ring_radius * std::sin(upper_azimuth), z_upper);
  }
  v[11] = Vec3(0.0, 0.0, 2.0 * circumradius);
  return v;
}

}  // namespace

CapsidGeometry build_icosahedron(double edge_length) {
  if (!(edge_length > 0.0)) {
    throw std::invalid_argument("build_icosahedron: edge_length must be positive");
  }

  static const std::array<Vec3, kVertexCount> unit = unit_vertex_template();

  CapsidGeometry geom;
  geom.edge_length = edge_length;
  geom.circumradius = edge_length * 0.25 * std::sqrt(10.0 + 2.0 * std::sqrt(5.0));
  for (int i = 0; i < kVertexCount; ++i) {
    geom.vertices[i] = edge_length * unit[i];
  }

  // Edges: vertex pairs at distance edge_length. The next-shortest pairwise
  // distance is the golden ratio times the edge, so a generous window is safe.
  for (int i = 0; i < kVertexCount; ++i) {
    for (int j = i + 1; j < kVertexCount; ++j) {
      const double d = (geom.vertices[i] - geom.vertices[j]).norm();
      if (d < 1.3 * edge_length) {
        geom.edges.push_back({i, j});
      }
    }
  }

  // Faces: mutually adjacent triples.
  auto adjacent = [&](int i, int j) {
    return std::any_of(geom.edges.begin(), geom.edges.end(),
                       [&](const std::array<int, 2>& e) { return e[0] == std::min(i, j) && e[1] == std::max(i, j); });
  };
  for (int i = 0; i < kVertexCount; ++i) {
    for (int j = i + 1; j < kVertexCount; ++j) {
      if (!adjacent(i, j)) continue;
      for (int k = j + 1; k < kVertexCount; ++k) {
        if (adjacent(i, k) && adjacent(j, k)) {
          geom.faces.push_back({i, j, k});
        }
      }
    }
  }
  std::sort(geom.faces.begin(), geom.faces.end());

  if (geom.edges.size() != kEdgeCount || geom.faces.size() != kFaceCount) {
    throw std::logic_error("build_icosahedron: unexpected combinatorics");
  }

  for (int m = 0; m < kFaceCount; ++m) {
    geom.barycenters[m] =
        (geom.vertices[geom.faces[m][0]] + geom.vertices[geom.faces[m][1]] + geom.vertices[geom.faces[m][2]]) / 3.0;
  }

  // One hinge per edge: the two faces containing it, with the shared vertices
  // ordered so both unnormalised normals point away from the solid's centre.
  const Vec3 centre(0.0, 0.0, geom.circumradius);
  for (const auto& e : geom.edges) {
    int m1 = -1, m2 = -1;
    for (int m = 0; m < kFaceCount; ++m) {
      const auto& f = geom.faces[m];
      const bool has_i = (f[0] == e[0] || f[1] == e[0] || f[2] == e[0]);
      const bool has_j = (f[0] == e[1] || f[1] == e[1] || f[2] == e[1]);
      if (has_i && has_j) {
        (m1 < 0 ? m1 : m2) = m;
      }
    }
    if (m1 < 0 || m2 < 0) {
      throw std::logic_error("build_icosahedron: edge not shared by two faces");
    }

    CapsidGeometry::Hinge hinge;
    hinge.m1 = m1;
    hinge.m2 = m2;
    hinge.i = e[0];
    hinge.j = e[1];
    const Vec3& g1 = geom.barycenters[m1];
    const Vec3 a = (geom.vertices[hinge.i] - g1).cross(geom.vertices[hinge.j] - g1);
    if (a.dot(g1 - centre) < 0.0) {
      std::swap(hinge.i, hinge.j);
    }
    const Vec3& g2 = geom.barycenters[m2];
    const Vec3 b = (geom.vertices[hinge.j] - g2).cross(geom.vertices[hinge.i] - g2);
    if (b.dot(g2 - centre) <= 0.0) {
      throw std::logic_error("build_icosahedron: inconsistent face orientation");
    }
    geom.face_adjacency.push_back(hinge);
  }

  for (int i = 0; i < kVertexCount; ++i) {
    int count = 0;
    for (const auto& e : geom.edges) {
      if (e[0] == i) geom.neighbor_sets[i][count++] = e[1];
      if (e[1] == i) geom.neighbor_sets[i][count++] = e[0];
    }
    if (count != 5) {
      throw std::logic_error("build_icosahedron: vertex degree is not 5");
    }
    std::sort(geom.neighbor_sets[i].begin(), geom.neighbor_sets[i].end());
  }

  const auto& h0 = geom.face_adjacency.front();
  geom.barycenter_gap = (geom.barycenters[h0.m1] - geom.barycenters[h0.m2]).norm();

  return geom;
}

double angular_defect(const std::array<Vec3, kVertexCount>& positions,
                      const std::vector<std::array<int, 3>>& faces, int vertex_index) {
  if (vertex_index < 0 || vertex_index >= kVertexCount) {
    throw std::out_of_range("angular_defect: vertex index out of range");
  }
  double angle_sum = 0.0;
  for (const auto& f : faces) {
    int others[2] = {-1, -1};
    int n = 0;
    bool contains = false;
    for (int corner : f) {
      if (corner == vertex_index) {
        contains = true;
      } else if (n < 2) {
        others[n++] = corner;
      }
    }
    if (!contains) continue;
    const Vec3 r = positions[others[0]] - positions[vertex_index];
    const Vec3 s = positions[others[1]] - positions[vertex_index];
    const double c = std::clamp(r.dot(s) / (r.norm() * s.norm()), -1.0, 1.0);
    angle_sum += std::acos(c);
  }
  return 2.0 * std::numbers::pi - angle_sum;
}

double angular_defect(const CapsidGeometry& geom, int vertex_index) {
  return angular_defect(geom.vertices, geom.faces, vertex_index);
}

DeformedShape deformed_positions(const CapsidGeometry& geom, const Displacement& u) {
  DeformedShape shape;
  shape.vertices[0] = geom.vertices[0];
  for (int i = 1; i < kVertexCount; ++i) {
    shape.vertices[i] = geom.vertices[i] + Vec3(free_block(u, i));
  }
  for (int m = 0; m < kFaceCount; ++m) {
    Vec3 shift = Vec3::Zero();
    for (int r : geom.faces[m]) {
      if (r >= 1) shift += Vec3(free_block(u, r));
    }
    shape.barycenters[m] = geom.barycenters[m] + shift / 3.0;
  }
  return shape;
}

double contact_height(const CapsidGeometry& geom, int vertex) {
  return geom.vertices[vertex].z();
}

}  // namespace capsid
