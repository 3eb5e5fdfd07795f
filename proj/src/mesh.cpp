#include "parabest/mesh.hpp"

#include "parabest/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <mutex>
#include <numbers>
#include <sstream>

namespace parabest {

namespace {

std::mutex registry_mutex;
std::unordered_map<std::uint64_t, std::weak_ptr<Forest>> &registry() {
  static std::unordered_map<std::uint64_t, std::weak_ptr<Forest>> r;
  return r;
}
std::atomic<std::uint64_t> next_forest_id{1};

bool contains(Point p, Point a, Point b, Point c, double tol = 1e-12) {
  const auto l = barycentric(p, a, b, c);
  return l[0] >= -tol && l[1] >= -tol && l[2] >= -tol;
}

} // namespace

// ---------------------------------------------------------------------------
// Forest

std::shared_ptr<Forest> Forest::create(std::vector<Point> vertices,
                                       const std::vector<std::array<int, 3>> &macro,
                                       std::uint64_t id) {
  if (macro.empty())
    throw InvalidArgument("macro-triangulation has no elements");
  auto f = std::shared_ptr<Forest>(new Forest());
  f->vertices_ = std::move(vertices);
  std::unordered_map<EdgeKey, int> edge_count;
  for (std::size_t k = 0; k < macro.size(); ++k) {
    for (int v : macro[k])
      if (v < 0 || v >= static_cast<int>(f->vertices_.size()))
        throw InvalidArgument("macro element references unknown vertex");
    Node n;
    n.v = macro[k];
    n.macro = static_cast<int>(k);
    f->nodes_.push_back(n);
    for (int i = 0; i < 3; ++i)
      ++edge_count[edge_key(n.v[i], n.v[(i + 1) % 3])];
  }
  for (const auto &[key, count] : edge_count) {
    if (count > 2)
      throw InvalidArgument("macro edge shared by more than two elements");
    if (count == 1)
      f->boundary_edges_.insert(key);
  }
  f->macro_count_ = static_cast<int>(macro.size());

  std::lock_guard lock(registry_mutex);
  if (id == 0) {
    id = next_forest_id++;
  } else {
    std::uint64_t cur = next_forest_id.load();
    while (cur <= id && !next_forest_id.compare_exchange_weak(cur, id + 1)) {
    }
  }
  f->id_ = id;
  registry()[id] = f;
  return f;
}

std::shared_ptr<Forest> Forest::find(std::uint64_t id) {
  std::lock_guard lock(registry_mutex);
  auto it = registry().find(id);
  if (it == registry().end())
    return nullptr;
  return it->second.lock();
}

Forest::Node Forest::node(int id) const {
  std::shared_lock lock(mutex_);
  return nodes_.at(static_cast<std::size_t>(id));
}

Point Forest::vertex(int id) const {
  std::shared_lock lock(mutex_);
  return vertices_.at(static_cast<std::size_t>(id));
}

int Forest::node_count() const {
  std::shared_lock lock(mutex_);
  return static_cast<int>(nodes_.size());
}

int Forest::vertex_count() const {
  std::shared_lock lock(mutex_);
  return static_cast<int>(vertices_.size());
}

bool Forest::is_boundary_edge(int a, int b) const {
  std::shared_lock lock(mutex_);
  return boundary_edges_.contains(edge_key(a, b));
}

int Forest::midpoint_of(int a, int b) const {
  std::shared_lock lock(mutex_);
  auto it = midpoints_.find(edge_key(a, b));
  return it == midpoints_.end() ? -1 : it->second;
}

std::array<int, 2> Forest::bisect(int id) {
  {
    std::shared_lock lock(mutex_);
    const Node &n = nodes_.at(static_cast<std::size_t>(id));
    if (n.child[0] >= 0)
      return n.child;
  }
  std::unique_lock lock(mutex_);
  Node n = nodes_.at(static_cast<std::size_t>(id));
  if (n.child[0] >= 0)
    return n.child;
  const int a = n.v[0], b = n.v[1], c = n.v[2];
  const EdgeKey ab = edge_key(a, b);
  int m;
  if (auto it = midpoints_.find(ab); it != midpoints_.end()) {
    m = it->second;
  } else {
    m = static_cast<int>(vertices_.size());
    vertices_.push_back(midpoint(vertices_[a], vertices_[b]));
    midpoints_.emplace(ab, m);
    if (boundary_edges_.contains(ab)) {
      boundary_edges_.insert(edge_key(a, m));
      boundary_edges_.insert(edge_key(m, b));
    }
  }
  Node c0, c1;
  c0.v = {c, a, m};
  c1.v = {b, c, m};
  c0.level = c1.level = n.level + 1;
  c0.parent = c1.parent = id;
  c0.macro = c1.macro = n.macro;
  const int i0 = static_cast<int>(nodes_.size());
  nodes_.push_back(c0);
  nodes_.push_back(c1);
  nodes_[static_cast<std::size_t>(id)].child = {i0, i0 + 1};
  return {i0, i0 + 1};
}

bool Forest::is_ancestor_or_self(int ancestor, int node) const {
  std::shared_lock lock(mutex_);
  while (node >= 0) {
    if (node == ancestor)
      return true;
    node = nodes_[static_cast<std::size_t>(node)].parent;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Triangulation

struct Triangulation::Data {
  std::shared_ptr<Forest> forest;
  std::vector<int> nodes;
  std::vector<int> levels;
  std::vector<int> forest_vertices;
  std::vector<Point> coords;
  std::vector<char> vertex_boundary;
  std::vector<std::array<int, 3>> elem_vertices;
  std::vector<std::array<int, 3>> elem_edges;
  std::vector<MeshEdge> edges;
  std::unordered_map<EdgeKey, int> edge_index;
  std::vector<double> areas;
  std::vector<double> diameters;
  std::vector<std::array<Vec2, 3>> grad_lambda;
  std::string build_defect;
};

Triangulation::Triangulation(std::shared_ptr<Forest> forest, std::vector<int> nodes) {
  if (!forest)
    throw InvalidArgument("triangulation without forest");
  auto d = std::make_shared<Data>();
  std::sort(nodes.begin(), nodes.end());
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
    throw InvalidArgument("duplicate element in triangulation");
  d->forest = std::move(forest);
  d->nodes = std::move(nodes);

  const std::size_t ne = d->nodes.size();
  std::vector<Forest::Node> fn(ne);
  for (std::size_t e = 0; e < ne; ++e)
    fn[e] = d->forest->node(d->nodes[e]);

  for (const auto &n : fn)
    d->forest_vertices.insert(d->forest_vertices.end(), n.v.begin(), n.v.end());
  std::sort(d->forest_vertices.begin(), d->forest_vertices.end());
  d->forest_vertices.erase(std::unique(d->forest_vertices.begin(), d->forest_vertices.end()),
                           d->forest_vertices.end());
  d->coords.reserve(d->forest_vertices.size());
  for (int fv : d->forest_vertices)
    d->coords.push_back(d->forest->vertex(fv));
  d->vertex_boundary.assign(d->forest_vertices.size(), 0);

  auto local = [&](int fv) {
    return static_cast<int>(std::lower_bound(d->forest_vertices.begin(), d->forest_vertices.end(), fv) -
                            d->forest_vertices.begin());
  };

  d->levels.resize(ne);
  d->elem_vertices.resize(ne);
  d->elem_edges.resize(ne);
  d->areas.resize(ne);
  d->diameters.resize(ne);
  d->grad_lambda.resize(ne);
  d->edges.reserve(ne * 3 / 2 + 8);
  d->edge_index.reserve(ne * 2);

  for (std::size_t e = 0; e < ne; ++e) {
    const auto &n = fn[e];
    d->levels[e] = n.level;
    std::array<int, 3> lv{local(n.v[0]), local(n.v[1]), local(n.v[2])};
    d->elem_vertices[e] = lv;
    for (int i = 0; i < 3; ++i) {
      const int fa = n.v[(i + 1) % 3], fb = n.v[(i + 2) % 3];
      const EdgeKey key = edge_key(fa, fb);
      auto [it, inserted] = d->edge_index.try_emplace(key, static_cast<int>(d->edges.size()));
      if (inserted) {
        MeshEdge me;
        me.v0 = local(std::min(fa, fb));
        me.v1 = local(std::max(fa, fb));
        me.elements[0] = static_cast<int>(e);
        me.boundary = d->forest->is_boundary_edge(fa, fb);
        d->edges.push_back(me);
      } else {
        auto &me = d->edges[static_cast<std::size_t>(it->second)];
        if (me.elements[1] >= 0 && d->build_defect.empty())
          d->build_defect = "edge shared by more than two elements";
        me.elements[1] = static_cast<int>(e);
      }
      d->elem_edges[e][static_cast<std::size_t>(i)] = it->second;
    }
    const Point p0 = d->coords[static_cast<std::size_t>(lv[0])];
    const Point p1 = d->coords[static_cast<std::size_t>(lv[1])];
    const Point p2 = d->coords[static_cast<std::size_t>(lv[2])];
    const double det = cross(p1 - p0, p2 - p0);
    d->areas[e] = 0.5 * std::abs(det);
    d->diameters[e] = std::max({distance(p0, p1), distance(p1, p2), distance(p2, p0)});
    // grad lambda_i = rot(p_{i+2} - p_{i+1}) / det, rotated so that it points
    // towards vertex i.
    const std::array<Point, 3> p{p0, p1, p2};
    for (int i = 0; i < 3; ++i) {
      const Point a = p[static_cast<std::size_t>((i + 1) % 3)];
      const Point b = p[static_cast<std::size_t>((i + 2) % 3)];
      d->grad_lambda[e][static_cast<std::size_t>(i)] = {(a.y - b.y) / det, (b.x - a.x) / det};
    }
  }
  for (const auto &me : d->edges) {
    if (me.boundary) {
      d->vertex_boundary[static_cast<std::size_t>(me.v0)] = 1;
      d->vertex_boundary[static_cast<std::size_t>(me.v1)] = 1;
    }
  }
  data_ = std::move(d);
}

const std::shared_ptr<Forest> &Triangulation::forest() const { return data_->forest; }
std::uint64_t Triangulation::macro_id() const { return data_ ? data_->forest->id() : 0; }
bool Triangulation::compatible_with(const Triangulation &other) const {
  return data_ && other.data_ && data_->forest == other.data_->forest;
}
int Triangulation::element_count() const { return data_ ? static_cast<int>(data_->nodes.size()) : 0; }
int Triangulation::vertex_count() const { return data_ ? static_cast<int>(data_->coords.size()) : 0; }
int Triangulation::edge_count() const { return data_ ? static_cast<int>(data_->edges.size()) : 0; }
int Triangulation::node(int e) const { return data_->nodes[static_cast<std::size_t>(e)]; }
std::span<const int> Triangulation::nodes() const { return data_->nodes; }
int Triangulation::element_of_node(int node) const {
  auto it = std::lower_bound(data_->nodes.begin(), data_->nodes.end(), node);
  if (it == data_->nodes.end() || *it != node)
    return -1;
  return static_cast<int>(it - data_->nodes.begin());
}
int Triangulation::level(int e) const { return data_->levels[static_cast<std::size_t>(e)]; }
const std::array<int, 3> &Triangulation::element_vertices(int e) const {
  return data_->elem_vertices[static_cast<std::size_t>(e)];
}
const std::array<int, 3> &Triangulation::element_edges(int e) const {
  return data_->elem_edges[static_cast<std::size_t>(e)];
}
Point Triangulation::vertex(int v) const { return data_->coords[static_cast<std::size_t>(v)]; }
int Triangulation::forest_vertex(int v) const { return data_->forest_vertices[static_cast<std::size_t>(v)]; }
const MeshEdge &Triangulation::edge(int i) const { return data_->edges[static_cast<std::size_t>(i)]; }
bool Triangulation::vertex_on_boundary(int v) const {
  return data_->vertex_boundary[static_cast<std::size_t>(v)] != 0;
}
double Triangulation::area(int e) const { return data_->areas[static_cast<std::size_t>(e)]; }
double Triangulation::diameter(int e) const { return data_->diameters[static_cast<std::size_t>(e)]; }
const std::array<Vec2, 3> &Triangulation::grad_lambda(int e) const {
  return data_->grad_lambda[static_cast<std::size_t>(e)];
}
double Triangulation::edge_length(int i) const {
  const auto &me = edge(i);
  return distance(vertex(me.v0), vertex(me.v1));
}

Vec2 Triangulation::edge_normal(int i) const {
  const auto &me = edge(i);
  const Point a = vertex(me.v0), b = vertex(me.v1);
  const Vec2 t = b - a;
  Vec2 nrm = (1.0 / norm(t)) * Vec2{t.y, -t.x};
  // Orient away from elements[0]: its vertex opposite the edge lies behind.
  const auto &ev = element_vertices(me.elements[0]);
  int opposite = ev[0];
  for (int v : ev)
    if (v != me.v0 && v != me.v1)
      opposite = v;
  if (dot(nrm, vertex(opposite) - a) > 0)
    nrm = -1.0 * nrm;
  return nrm;
}

int Triangulation::locate(Point x) const {
  const Forest &f = *data_->forest;
  for (int m = 0; m < f.macro_count(); ++m) {
    auto n = f.node(m);
    if (!contains(x, f.vertex(n.v[0]), f.vertex(n.v[1]), f.vertex(n.v[2])))
      continue;
    int id = m;
    while (true) {
      const int e = element_of_node(id);
      if (e >= 0)
        return e;
      n = f.node(id);
      if (n.child[0] < 0)
        break;
      const auto c0 = f.node(n.child[0]);
      id = contains(x, f.vertex(c0.v[0]), f.vertex(c0.v[1]), f.vertex(c0.v[2])) ? n.child[0] : n.child[1];
    }
  }
  return -1;
}

std::vector<EdgeKey> Triangulation::interior_edge_keys() const {
  std::vector<EdgeKey> keys;
  keys.reserve(data_->edges.size());
  for (const auto &me : data_->edges)
    if (!me.boundary)
      keys.push_back(edge_key(forest_vertex(me.v0), forest_vertex(me.v1)));
  std::sort(keys.begin(), keys.end());
  return keys;
}

int Triangulation::find_edge(int forestA, int forestB) const {
  auto it = data_->edge_index.find(edge_key(forestA, forestB));
  return it == data_->edge_index.end() ? -1 : it->second;
}

std::string Triangulation::conformity_defect() const {
  if (!data_ || data_->nodes.empty())
    return "empty triangulation";
  if (!data_->build_defect.empty())
    return data_->build_defect;
  for (std::size_t i = 0; i < data_->edges.size(); ++i) {
    const auto &me = data_->edges[i];
    const bool two = me.elements[1] >= 0;
    if (me.boundary && two)
      return "boundary edge " + std::to_string(i) + " has two neighbours";
    if (!me.boundary && !two)
      return "interior edge " + std::to_string(i) + " has one neighbour (hanging vertex)";
  }
  const Forest &f = *data_->forest;
  for (int nd : data_->nodes) {
    for (int p = f.node(nd).parent; p >= 0; p = f.node(p).parent)
      if (element_of_node(p) >= 0)
        return "element " + std::to_string(nd) + " nested in another element";
  }
  double macro_area = 0.0;
  for (int m = 0; m < f.macro_count(); ++m) {
    const auto n = f.node(m);
    macro_area += 0.5 * std::abs(cross(f.vertex(n.v[1]) - f.vertex(n.v[0]), f.vertex(n.v[2]) - f.vertex(n.v[0])));
  }
  double total = 0.0;
  for (double a : data_->areas)
    total += a;
  if (std::abs(total - macro_area) > 1e-12 * macro_area)
    return "elements do not cover the domain";
  return {};
}

double Triangulation::min_angle() const {
  double best = std::numbers::pi;
  for (int e = 0; e < element_count(); ++e) {
    const auto &v = element_vertices(e);
    for (int i = 0; i < 3; ++i) {
      const Point a = vertex(v[static_cast<std::size_t>(i)]);
      const Point b = vertex(v[static_cast<std::size_t>((i + 1) % 3)]);
      const Point c = vertex(v[static_cast<std::size_t>((i + 2) % 3)]);
      const double ang = std::acos(std::clamp(dot(b - a, c - a) / (distance(a, b) * distance(a, c)), -1.0, 1.0));
      best = std::min(best, ang);
    }
  }
  return best;
}

bool operator==(const Triangulation &a, const Triangulation &b) {
  if (a.data_ == b.data_)
    return true;
  if (!a.data_ || !b.data_)
    return false;
  return a.data_->forest == b.data_->forest && a.data_->nodes == b.data_->nodes;
}

// ---------------------------------------------------------------------------
// Mesh operations

Triangulation build_macro(Point lo, Point hi, int subdivisions) {
  if (subdivisions < 1)
    throw InvalidArgument("subdivisions must be positive");
  if (!(hi.x > lo.x && hi.y > lo.y))
    throw InvalidArgument("degenerate domain box");
  const int s = subdivisions;
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>((s + 1) * (s + 1)));
  for (int j = 0; j <= s; ++j)
    for (int i = 0; i <= s; ++i)
      vertices.push_back({lo.x + (hi.x - lo.x) * i / s, lo.y + (hi.y - lo.y) * j / s});
  auto id = [s](int i, int j) { return j * (s + 1) + i; };
  std::vector<std::array<int, 3>> macro;
  macro.reserve(static_cast<std::size_t>(2 * s * s));
  for (int j = 0; j < s; ++j) {
    for (int i = 0; i < s; ++i) {
      const int p00 = id(i, j), p10 = id(i + 1, j), p01 = id(i, j + 1), p11 = id(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        macro.push_back({p00, p11, p10});
        macro.push_back({p11, p00, p01});
      } else {
        macro.push_back({p10, p01, p00});
        macro.push_back({p01, p10, p11});
      }
    }
  }
  auto forest = Forest::create(std::move(vertices), macro);
  std::vector<int> nodes(macro.size());
  for (std::size_t k = 0; k < nodes.size(); ++k)
    nodes[k] = static_cast<int>(k);
  return Triangulation(std::move(forest), std::move(nodes));
}

Triangulation build_macro_square(int subdivisions) { return build_macro({-1.0, -1.0}, {1.0, 1.0}, subdivisions); }

namespace {

/// Mutable leaf set used while bisecting with closure.
class RefinementWorkspace {
public:
  explicit RefinementWorkspace(const Triangulation &t) : forest_(*t.forest()) {
    for (int nd : t.nodes())
      add(nd);
  }

  void bisect_with_closure(std::deque<int> queue) {
    std::size_t guard = 0;
    const std::size_t limit = 64 * (leaves_.size() + queue.size() + 16) * 40;
    while (!queue.empty()) {
      if (++guard > limit)
        throw std::logic_error("bisection closure did not terminate");
      const int k = queue.front();
      queue.pop_front();
      if (!leaves_.contains(k))
        continue;
      const auto n = forest_.node(k);
      const auto children = forest_.bisect(k);
      remove(k, n);
      for (int c : children)
        add(c);
      if (auto it = edges_.find(edge_key(n.v[0], n.v[1])); it != edges_.end())
        for (int nb : it->second)
          if (nb >= 0)
            queue.push_back(nb);
      for (int c : children)
        if (has_hanging_edge(c))
          queue.push_back(c);
    }
  }

  std::vector<int> leaves() const { return {leaves_.begin(), leaves_.end()}; }

private:
  void add(int nd) {
    const auto n = forest_.node(nd);
    leaves_.insert(nd);
    for (int i = 0; i < 3; ++i) {
      ++vertex_use_[n.v[static_cast<std::size_t>(i)]];
      auto &slot = edges_.try_emplace(edge_key(n.v[static_cast<std::size_t>(i)], n.v[static_cast<std::size_t>((i + 1) % 3)]),
                                      std::array<int, 2>{-1, -1})
                       .first->second;
      if (slot[0] < 0)
        slot[0] = nd;
      else
        slot[1] = nd;
    }
  }

  void remove(int nd, const Forest::Node &n) {
    leaves_.erase(nd);
    for (int i = 0; i < 3; ++i) {
      --vertex_use_[n.v[static_cast<std::size_t>(i)]];
      const EdgeKey key = edge_key(n.v[static_cast<std::size_t>(i)], n.v[static_cast<std::size_t>((i + 1) % 3)]);
      auto it = edges_.find(key);
      auto &slot = it->second;
      if (slot[0] == nd) {
        slot[0] = slot[1];
        slot[1] = -1;
      } else if (slot[1] == nd) {
        slot[1] = -1;
      }
      if (slot[0] < 0)
        edges_.erase(it);
    }
  }

  bool has_hanging_edge(int nd) const {
    const auto n = forest_.node(nd);
    for (int i = 0; i < 3; ++i) {
      const int m = forest_.midpoint_of(n.v[static_cast<std::size_t>(i)], n.v[static_cast<std::size_t>((i + 1) % 3)]);
      if (m < 0)
        continue;
      auto it = vertex_use_.find(m);
      if (it != vertex_use_.end() && it->second > 0)
        return true;
    }
    return false;
  }

  Forest &forest_;
  std::unordered_set<int> leaves_;
  std::unordered_map<int, int> vertex_use_;
  std::unordered_map<EdgeKey, std::array<int, 2>> edges_;
};

void require_compatible(const Triangulation &a, const Triangulation &b) {
  if (!a.compatible_with(b))
    throw IncompatibleMeshes("triangulations descend from different macro-triangulations (" +
                             std::to_string(a.macro_id()) + " vs " + std::to_string(b.macro_id()) + ")");
}

} // namespace

Triangulation uniform_refine(const Triangulation &t, int levels) {
  if (levels < 0)
    throw InvalidArgument("levels must be non-negative");
  std::vector<int> cur(t.nodes().begin(), t.nodes().end());
  Forest &f = *t.forest();
  for (int round = 0; round < 2 * levels; ++round) {
    std::vector<int> next;
    next.reserve(cur.size() * 2);
    for (int nd : cur) {
      const auto c = f.bisect(nd);
      next.push_back(c[0]);
      next.push_back(c[1]);
    }
    cur = std::move(next);
  }
  if (levels == 0)
    return t;
  return Triangulation(t.forest(), std::move(cur));
}

Triangulation bisect_marked(const Triangulation &t, std::span<const int> marked) {
  if (marked.empty())
    return t;
  std::deque<int> queue;
  for (int e : marked) {
    if (e < 0 || e >= t.element_count())
      throw InvalidArgument("unknown element id " + std::to_string(e));
    queue.push_back(t.node(e));
  }
  RefinementWorkspace ws(t);
  ws.bisect_with_closure(std::move(queue));
  return Triangulation(t.forest(), ws.leaves());
}

Triangulation coarsest_common_refinement(const Triangulation &a, const Triangulation &b) {
  require_compatible(a, b);
  if (a == b)
    return a;
  const Forest &f = *a.forest();
  std::unordered_set<int> all(a.nodes().begin(), a.nodes().end());
  all.insert(b.nodes().begin(), b.nodes().end());
  std::unordered_set<int> ancestors;
  for (int nd : all) {
    for (int p = f.node(nd).parent; p >= 0 && !ancestors.contains(p); p = f.node(p).parent)
      ancestors.insert(p);
  }
  std::vector<int> out;
  for (int nd : all)
    if (!ancestors.contains(nd))
      out.push_back(nd);
  return Triangulation(a.forest(), std::move(out));
}

Triangulation finest_common_coarsening(const Triangulation &a, const Triangulation &b) {
  require_compatible(a, b);
  if (a == b)
    return a;
  const Forest &f = *a.forest();
  std::unordered_set<int> all(a.nodes().begin(), a.nodes().end());
  all.insert(b.nodes().begin(), b.nodes().end());
  std::vector<int> out;
  for (int nd : all) {
    bool covered = false;
    for (int p = f.node(nd).parent; p >= 0 && !covered; p = f.node(p).parent)
      covered = all.contains(p);
    if (!covered)
      out.push_back(nd);
  }
  return Triangulation(a.forest(), std::move(out));
}

EdgeSets edge_sets(const Triangulation &prev, const Triangulation &cur) {
  require_compatible(prev, cur);
  const auto ep = prev.interior_edge_keys();
  const auto ec = cur.interior_edge_keys();
  EdgeSets s;
  std::set_intersection(ep.begin(), ep.end(), ec.begin(), ec.end(), std::back_inserter(s.common));
  std::set_union(ep.begin(), ep.end(), ec.begin(), ec.end(), std::back_inserter(s.unite));
  std::set_difference(s.unite.begin(), s.unite.end(), s.common.begin(), s.common.end(), std::back_inserter(s.changed));
  return s;
}

MeshsizeFunction meshsize(const Triangulation &t) {
  MeshsizeFunction h(static_cast<std::size_t>(t.element_count()));
  for (int e = 0; e < t.element_count(); ++e)
    h[static_cast<std::size_t>(e)] = t.diameter(e);
  return h;
}

bool refines(const Triangulation &fine, const Triangulation &coarse) {
  if (!fine.compatible_with(coarse))
    return false;
  if (fine == coarse)
    return true;
  const Forest &f = *fine.forest();
  for (int nd : fine.nodes()) {
    int p = nd;
    while (p >= 0 && coarse.element_of_node(p) < 0)
      p = f.node(p).parent;
    if (p < 0)
      return false;
  }
  return true;
}

int bisection_distance(const Triangulation &a, const Triangulation &b) {
  return coarsest_common_refinement(a, b).element_count() - finest_common_coarsening(a, b).element_count();
}

} // namespace parabest
