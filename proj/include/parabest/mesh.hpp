#pragma once

// Conforming triangulations obtained by newest-vertex bisection from a shared
// macro-triangulation. All refinements of one macro live in a single
// append-only bisection forest, so element and edge identity across meshes is
// combinatorial.

#include "parabest/geometry.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace parabest {

/// Key of an undirected edge between two forest vertices.
using EdgeKey = std::uint64_t;

inline EdgeKey edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(a < b ? a : b);
  const auto hi = static_cast<std::uint64_t>(a < b ? b : a);
  return (hi << 32) | lo;
}
inline int edge_key_first(EdgeKey k) { return static_cast<int>(k & 0xffffffffu); }
inline int edge_key_second(EdgeKey k) { return static_cast<int>(k >> 32); }

/// Shared binary forest of bisection trees rooted at the macro elements.
///
/// A node stores its vertices as (a, b, c): (a, b) is the refinement edge and
/// c the newest vertex. Bisection inserts m = mid(a, b) and creates the
/// children (c, a, m) and (b, c, m). Children and midpoints are created once
/// and reused by every mesh that needs them. Growth is guarded by a mutex, so
/// meshes of one forest can be refined from different threads.
class Forest {
public:
  struct Node {
    std::array<int, 3> v{};
    int level = 0;
    int parent = -1;
    std::array<int, 2> child{-1, -1};
    int macro = -1;
  };

  /// Creates a forest from macro vertices and triangles. The first two
  /// vertices of each triangle form its initial refinement edge.
  static std::shared_ptr<Forest> create(std::vector<Point> vertices,
                                        const std::vector<std::array<int, 3>> &macro,
                                        std::uint64_t id = 0);

  /// Looks up a live forest by id (used when loading mesh dumps).
  static std::shared_ptr<Forest> find(std::uint64_t id);

  std::uint64_t id() const { return id_; }
  int macro_count() const { return macro_count_; }

  Node node(int id) const;
  Point vertex(int id) const;
  int node_count() const;
  int vertex_count() const;
  bool is_boundary_edge(int a, int b) const;
  /// Midpoint vertex of the forest edge (a, b), or -1 if never bisected.
  int midpoint_of(int a, int b) const;
  /// Children of a node, created on first request.
  std::array<int, 2> bisect(int id);
  /// True if `ancestor` is `node` or one of its ancestors.
  bool is_ancestor_or_self(int ancestor, int node) const;

private:
  Forest() = default;

  mutable std::shared_mutex mutex_;
  std::uint64_t id_ = 0;
  int macro_count_ = 0;
  std::vector<Point> vertices_;
  std::vector<Node> nodes_;
  std::unordered_map<EdgeKey, int> midpoints_;
  std::unordered_set<EdgeKey> boundary_edges_;
};

struct MeshEdge {
  int v0 = -1; ///< local vertex index, smaller forest vertex id
  int v1 = -1; ///< local vertex index, larger forest vertex id
  std::array<int, 2> elements{-1, -1};
  bool boundary = false;
};

/// Immutable conforming triangulation: a set of leaves of a bisection forest.
///
/// Elements are ordered by forest node id. Copies share the underlying data.
class Triangulation {
public:
  Triangulation() = default;
  Triangulation(std::shared_ptr<Forest> forest, std::vector<int> nodes);

  const std::shared_ptr<Forest> &forest() const;
  std::uint64_t macro_id() const;
  bool compatible_with(const Triangulation &other) const;

  int element_count() const;
  int vertex_count() const;
  int edge_count() const;

  /// Forest node id of element e.
  int node(int e) const;
  std::span<const int> nodes() const;
  /// Local index of a forest node in this mesh, or -1 if it is not a leaf here.
  int element_of_node(int node) const;
  int level(int e) const;

  /// Local vertex indices in forest order (refinement edge first).
  const std::array<int, 3> &element_vertices(int e) const;
  /// Local edge indices; entry i is the edge opposite vertex i.
  const std::array<int, 3> &element_edges(int e) const;
  Point vertex(int v) const;
  int forest_vertex(int v) const;
  const MeshEdge &edge(int i) const;
  bool vertex_on_boundary(int v) const;

  double area(int e) const;
  double diameter(int e) const;
  /// Gradients of the three barycentric coordinates (constant per element).
  const std::array<Vec2, 3> &grad_lambda(int e) const;
  double edge_length(int i) const;
  /// Unit normal of edge i pointing from elements[0] into elements[1].
  Vec2 edge_normal(int i) const;

  /// Element containing x, walking the bisection forest; -1 if outside.
  int locate(Point x) const;

  /// Sorted forest edge keys of the interior edges.
  std::vector<EdgeKey> interior_edge_keys() const;
  /// Edge index of a forest edge, or -1.
  int find_edge(int forestA, int forestB) const;

  /// Empty string if conforming, otherwise a description of the first defect.
  std::string conformity_defect() const;
  bool is_conforming() const { return conformity_defect().empty(); }
  double min_angle() const;

  /// Identity of bisection-forest node sets.
  friend bool operator==(const Triangulation &a, const Triangulation &b);
  bool same_object(const Triangulation &other) const { return data_ == other.data_; }

private:
  struct Data;
  std::shared_ptr<const Data> data_;
};

using MeshsizeFunction = std::vector<double>;

struct EdgeSets {
  std::vector<EdgeKey> common;  ///< interior edges of both meshes
  std::vector<EdgeKey> unite;   ///< interior edges of either mesh
  std::vector<EdgeKey> changed; ///< unite minus common
};

/// Criss-cross macro triangulation of [lo, hi]^2: each of the s x s cells is
/// split by one diagonal, alternating between neighbouring cells.
Triangulation build_macro(Point lo, Point hi, int subdivisions);
Triangulation build_macro_square(int subdivisions);

/// Every element bisected 2 * levels times.
Triangulation uniform_refine(const Triangulation &t, int levels);
/// Bisects the marked elements (local indices) and closes hanging vertices.
Triangulation bisect_marked(const Triangulation &t, std::span<const int> marked);
Triangulation finest_common_coarsening(const Triangulation &a, const Triangulation &b);
Triangulation coarsest_common_refinement(const Triangulation &a, const Triangulation &b);
EdgeSets edge_sets(const Triangulation &prev, const Triangulation &cur);
MeshsizeFunction meshsize(const Triangulation &t);
/// True if every element of `fine` lies inside an element of `coarse`.
bool refines(const Triangulation &fine, const Triangulation &coarse);
/// Number of bisections separating the common coarsening from the common
/// refinement; reported as a diagnostic only.
int bisection_distance(const Triangulation &a, const Triangulation &b);

void write_mesh(std::ostream &os, const Triangulation &t);
Triangulation read_mesh(std::istream &is);

} // namespace parabest
