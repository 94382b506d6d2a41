#include <cstdio>
#include <sstream>
#include <string>

#include "xfemopt/mesh.hpp"

namespace xfemopt {

namespace {

struct LineReader {
  std::istringstream in;
  int line_no = 0;
  std::string line;

  explicit LineReader(std::string_view text) : in(std::string(text)) {}

  // Returns the next non-empty line, or false at end of input.
  bool next() {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw MeshError("mesh parse error at line " + std::to_string(line_no) + ": " + what);
  }
};

}  // namespace

Mesh import_mesh(std::string_view text) {
  LineReader r(text);
  if (!r.next()) r.fail("empty document");
  {
    std::istringstream ls(r.line);
    std::string magic;
    int version = 0;
    if (!(ls >> magic >> version) || magic != "xfemmesh" || version != 1)
      r.fail("expected header 'xfemmesh 1'");
  }

  auto read_count = [&](const char* section) {
    if (!r.next()) r.fail(std::string("missing '") + section + "' section");
    std::istringstream ls(r.line);
    std::string word;
    long count = -1;
    if (!(ls >> word >> count) || word != section || count < 0)
      r.fail(std::string("expected '") + section + " <count>'");
    return count;
  };

  Mesh m;
  const long nn = read_count("nodes");
  m.nodes.reserve(nn);
  for (long k = 0; k < nn; ++k) {
    if (!r.next()) r.fail("unexpected end of input in nodes");
    std::istringstream ls(r.line);
    double x, y;
    if (!(ls >> x >> y)) r.fail("expected 'x y'");
    m.nodes.emplace_back(x, y);
  }

  const long nt = read_count("triangles");
  m.triangles.reserve(nt);
  for (long k = 0; k < nt; ++k) {
    if (!r.next()) r.fail("unexpected end of input in triangles");
    std::istringstream ls(r.line);
    int i, j, l;
    if (!(ls >> i >> j >> l)) r.fail("expected 'i j k'");
    m.triangles.push_back({i, j, l});
  }

  const long nb = read_count("boundary");
  m.boundary_edges.reserve(nb);
  for (long k = 0; k < nb; ++k) {
    if (!r.next()) r.fail("unexpected end of input in boundary edges");
    std::istringstream ls(r.line);
    int i, j;
    std::string tag;
    if (!(ls >> i >> j >> tag)) r.fail("expected 'i j tag'");
    try {
      m.boundary_edges.push_back({i, j, boundary_tag_from_string(tag)});
    } catch (const MeshError& e) {
      r.fail(e.what());
    }
  }

  m.validate();
  return m;
}

std::string export_mesh(const Mesh& m) {
  std::string out;
  out.reserve(32 * (m.nodes.size() + m.triangles.size()));
  char buf[96];
  out += "xfemmesh 1\n";
  std::snprintf(buf, sizeof buf, "nodes %d\n", m.num_nodes());
  out += buf;
  for (const auto& p : m.nodes) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x(), p.y());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "triangles %d\n", m.num_triangles());
  out += buf;
  for (const auto& t : m.triangles) {
    std::snprintf(buf, sizeof buf, "%d %d %d\n", t[0], t[1], t[2]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "boundary %zu\n", m.boundary_edges.size());
  out += buf;
  for (const auto& e : m.boundary_edges) {
    std::snprintf(buf, sizeof buf, "%d %d %s\n", e.a, e.b, to_string(e.tag).c_str());
    out += buf;
  }
  return out;
}

}  // namespace xfemopt
