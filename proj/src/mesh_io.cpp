#include "parabest/errors.hpp"
#include "parabest/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace parabest {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct DumpNode {
  std::array<int, 3> v{};
  int level = 0;
  int parent = -1;
};

} // namespace

// Text layout:
//   parabest-mesh 1
//   macro <id> vertices <nv> elements <ne>
//   v <x> <y>                      (nv lines)
//   e <i> <j> <k> <level> <parent> (ne lines; all forest nodes from the
//                                   macro elements down to the leaves)
// Leaves are the element lines that are nobody's parent.
void write_mesh(std::ostream &os, const Triangulation &t) {
  const Forest &f = *t.forest();
  std::vector<int> closure;
  {
    std::unordered_set<int> seen;
    for (int nd : t.nodes())
      for (int p = nd; p >= 0 && seen.insert(p).second; p = f.node(p).parent)
        closure.push_back(p);
  }
  std::sort(closure.begin(), closure.end());
  std::unordered_map<int, int> node_index;
  for (std::size_t i = 0; i < closure.size(); ++i)
    node_index[closure[i]] = static_cast<int>(i);

  std::vector<int> vertex_order;
  std::unordered_map<int, int> vertex_index;
  std::vector<Forest::Node> nodes;
  nodes.reserve(closure.size());
  for (int nd : closure) {
    nodes.push_back(f.node(nd));
    for (int v : nodes.back().v)
      if (vertex_index.try_emplace(v, static_cast<int>(vertex_order.size())).second)
        vertex_order.push_back(v);
  }

  os << "parabest-mesh 1\n";
  os << "macro " << f.id() << " vertices " << vertex_order.size() << " elements " << closure.size() << "\n";
  for (int v : vertex_order) {
    const Point p = f.vertex(v);
    os << "v " << format_double(p.x) << ' ' << format_double(p.y) << "\n";
  }
  for (const auto &n : nodes) {
    os << "e " << vertex_index[n.v[0]] << ' ' << vertex_index[n.v[1]] << ' ' << vertex_index[n.v[2]] << ' '
       << n.level << ' ' << (n.parent < 0 ? -1 : node_index.at(n.parent)) << "\n";
  }
}

Triangulation read_mesh(std::istream &is) {
  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != "parabest-mesh" || version != 1)
    throw ParseError("not a parabest mesh dump");
  std::uint64_t id = 0;
  std::size_t nv = 0, ne = 0;
  std::string w1, w2, w3;
  if (!(is >> w1 >> id >> w2 >> nv >> w3 >> ne) || w1 != "macro" || w2 != "vertices" || w3 != "elements")
    throw ParseError("malformed mesh header");

  std::vector<Point> coords(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!(is >> word >> coords[i].x >> coords[i].y) || word != "v")
      throw ParseError("malformed vertex line " + std::to_string(i));
  }
  std::vector<DumpNode> dn(ne);
  for (std::size_t i = 0; i < ne; ++i) {
    auto &d = dn[i];
    if (!(is >> word >> d.v[0] >> d.v[1] >> d.v[2] >> d.level >> d.parent) || word != "e")
      throw ParseError("malformed element line " + std::to_string(i));
    for (int v : d.v)
      if (v < 0 || static_cast<std::size_t>(v) >= nv)
        throw ParseError("element references unknown vertex");
    if (d.parent >= static_cast<int>(i))
      throw ParseError("element listed before its parent");
  }

  std::vector<int> macro_lines;
  for (std::size_t i = 0; i < ne; ++i)
    if (dn[i].parent < 0)
      macro_lines.push_back(static_cast<int>(i));
  if (macro_lines.empty())
    throw ParseError("mesh dump without macro elements");

  std::vector<int> vmap(nv, -1);
  std::shared_ptr<Forest> forest = Forest::find(id);
  if (forest) {
    if (forest->macro_count() != static_cast<int>(macro_lines.size()))
      throw ParseError("dump does not match the live macro-triangulation " + std::to_string(id));
    for (std::size_t k = 0; k < macro_lines.size(); ++k) {
      const auto n = forest->node(static_cast<int>(k));
      for (int i = 0; i < 3; ++i) {
        const int dv = dn[static_cast<std::size_t>(macro_lines[k])].v[static_cast<std::size_t>(i)];
        if (!(forest->vertex(n.v[static_cast<std::size_t>(i)]) == coords[static_cast<std::size_t>(dv)]))
          throw ParseError("dump does not match the live macro-triangulation " + std::to_string(id));
        vmap[static_cast<std::size_t>(dv)] = n.v[static_cast<std::size_t>(i)];
      }
    }
  } else {
    std::vector<Point> macro_vertices;
    std::vector<std::array<int, 3>> macro;
    for (int line : macro_lines) {
      std::array<int, 3> tri{};
      for (int i = 0; i < 3; ++i) {
        const int dv = dn[static_cast<std::size_t>(line)].v[static_cast<std::size_t>(i)];
        if (vmap[static_cast<std::size_t>(dv)] < 0) {
          vmap[static_cast<std::size_t>(dv)] = static_cast<int>(macro_vertices.size());
          macro_vertices.push_back(coords[static_cast<std::size_t>(dv)]);
        }
        tri[static_cast<std::size_t>(i)] = vmap[static_cast<std::size_t>(dv)];
      }
      macro.push_back(tri);
    }
    forest = Forest::create(std::move(macro_vertices), macro, id);
  }

  std::vector<int> nmap(ne, -1);
  for (std::size_t k = 0; k < macro_lines.size(); ++k)
    nmap[static_cast<std::size_t>(macro_lines[k])] = static_cast<int>(k);
  std::vector<char> is_parent(ne, 0);
  for (std::size_t i = 0; i < ne; ++i) {
    const auto &d = dn[i];
    if (d.parent < 0)
      continue;
    is_parent[static_cast<std::size_t>(d.parent)] = 1;
    const auto children = forest->bisect(nmap[static_cast<std::size_t>(d.parent)]);
    bool matched = false;
    for (int c : children) {
      const auto cn = forest->node(c);
      bool ok = true;
      for (int j = 0; j < 3 && ok; ++j) {
        const int dv = d.v[static_cast<std::size_t>(j)];
        const int mapped = vmap[static_cast<std::size_t>(dv)];
        ok = mapped < 0 ? forest->vertex(cn.v[static_cast<std::size_t>(j)]) == coords[static_cast<std::size_t>(dv)]
                        : mapped == cn.v[static_cast<std::size_t>(j)];
      }
      if (!ok)
        continue;
      for (int j = 0; j < 3; ++j)
        vmap[static_cast<std::size_t>(d.v[static_cast<std::size_t>(j)])] = cn.v[static_cast<std::size_t>(j)];
      nmap[i] = c;
      matched = true;
      break;
    }
    if (!matched)
      throw ParseError("element line " + std::to_string(i) + " is not a bisection child of its parent");
  }

  std::vector<int> leaves;
  for (std::size_t i = 0; i < ne; ++i)
    if (!is_parent[i])
      leaves.push_back(nmap[i]);
  return Triangulation(forest, std::move(leaves));
}

} // namespace parabest
