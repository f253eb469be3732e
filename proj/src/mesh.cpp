#include "pff/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "pff/errors.hpp"

namespace pff {

std::size_t Mesh::num_elements() const {
  return connectivity.size() / static_cast<std::size_t>(nodes_per_element(kind));
}

std::span<const int> Mesh::element(std::size_t e) const {
  const auto nen = static_cast<std::size_t>(nodes_per_element(kind));
  return std::span<const int>(connectivity).subspan(e * nen, nen);
}

std::vector<Point3> Mesh::element_coords(std::size_t e) const {
  std::vector<Point3> xs;
  for (int n : element(e)) xs.push_back(nodes[static_cast<std::size_t>(n)]);
  return xs;
}

const std::vector<int>& Mesh::boundary_set(const std::string& name) const {
  const auto it = boundary_sets.find(name);
  if (it == boundary_sets.end()) throw ConfigError("unknown boundary set '" + name + "'", name);
  return it->second;
}

void validate(const Mesh& mesh) {
  if (mesh.dim != 2 && mesh.dim != 3) throw ValidationError("mesh dimension must be 2 or 3");
  if (element_dim(mesh.kind) != mesh.dim)
    throw ValidationError("element kind " + std::string(to_string(mesh.kind)) +
                          " does not match mesh dimension " + std::to_string(mesh.dim));
  const auto nen = static_cast<std::size_t>(nodes_per_element(mesh.kind));
  if (mesh.connectivity.size() % nen != 0)
    throw ValidationError("connectivity length is not a multiple of the element size");
  const auto nn = static_cast<long>(mesh.num_nodes());
  for (std::size_t i = 0; i < mesh.connectivity.size(); ++i) {
    const int n = mesh.connectivity[i];
    if (n < 0 || n >= nn)
      throw ValidationError("element " + std::to_string(i / nen) + " references node " +
                            std::to_string(n) + " but the mesh has " + std::to_string(nn) +
                            " nodes");
  }
  for (const auto& [name, set] : mesh.boundary_sets) {
    if (set.empty()) throw ValidationError("boundary set '" + name + "' is empty");
    for (int n : set)
      if (n < 0 || n >= nn)
        throw ValidationError("boundary set '" + name + "' references node " + std::to_string(n));
  }
  const QuadratureRule rule = default_rule(mesh.kind);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    try {
      const auto xs = mesh.element_coords(e);
      compute_element_matrices(mesh.kind, xs, rule);
    } catch (const InvertedElementError& err) {
      throw InvertedElementError("element " + std::to_string(e) + ": " + err.what());
    }
  }
}

double mesh_volume(const Mesh& mesh) {
  const QuadratureRule rule = default_rule(mesh.kind);
  double v = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto xs = mesh.element_coords(e);
    for (const auto& p : compute_element_matrices(mesh.kind, xs, rule).points) v += p.weight;
  }
  return v;
}

double mesh_diameter(const Mesh& mesh) {
  Point3 lo{}, hi{};
  lo.fill(std::numeric_limits<double>::max());
  hi.fill(std::numeric_limits<double>::lowest());
  for (const auto& x : mesh.nodes)
    for (int d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], x[d]);
      hi[d] = std::max(hi[d], x[d]);
    }
  double s = 0.0;
  for (int d = 0; d < mesh.dim; ++d) s += (hi[d] - lo[d]) * (hi[d] - lo[d]);
  return std::sqrt(s);
}

namespace {

struct Grid {
  std::size_t nx, ny, nz;  // node counts per axis (nz = 1 in 2D)
  std::size_t id(std::size_t i, std::size_t j, std::size_t k) const {
    return (k * ny + j) * nx + i;
  }
};

void add_set(Mesh& m, const std::string& name, std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  m.boundary_sets[name] = std::move(ids);
}

}  // namespace

Mesh structured_mesh(std::span<const double> xs, std::span<const double> ys,
                     std::span<const double> zs) {
  if (xs.size() < 2 || ys.size() < 2 || zs.size() == 1)
    throw DegenerateMeshError("structured mesh needs at least two grid lines per axis");
  const bool three_d = !zs.empty();
  Mesh m;
  m.dim = three_d ? 3 : 2;
  m.kind = three_d ? ElementKind::Hex8 : ElementKind::Quad4;
  const Grid g{xs.size(), ys.size(), three_d ? zs.size() : 1};
  for (std::size_t k = 0; k < g.nz; ++k)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i)
        m.nodes.push_back({xs[i], ys[j], three_d ? zs[k] : 0.0});

  const std::size_t ez = three_d ? g.nz - 1 : 1;
  for (std::size_t k = 0; k < ez; ++k)
    for (std::size_t j = 0; j + 1 < g.ny; ++j)
      for (std::size_t i = 0; i + 1 < g.nx; ++i) {
        const std::size_t quad[4] = {g.id(i, j, k), g.id(i + 1, j, k), g.id(i + 1, j + 1, k),
                                     g.id(i, j + 1, k)};
        for (auto n : quad) m.connectivity.push_back(static_cast<int>(n));
        if (three_d)
          for (auto n : quad) m.connectivity.push_back(static_cast<int>(n + g.nx * g.ny));
      }

  std::vector<int> left, right, bottom, top, front, back;
  for (std::size_t k = 0; k < g.nz; ++k)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i) {
        const int n = static_cast<int>(g.id(i, j, k));
        if (i == 0) left.push_back(n);
        if (i + 1 == g.nx) right.push_back(n);
        if (j == 0) bottom.push_back(n);
        if (j + 1 == g.ny) top.push_back(n);
        if (three_d && k == 0) front.push_back(n);
        if (three_d && k + 1 == g.nz) back.push_back(n);
      }
  add_set(m, "left", left);
  add_set(m, "right", right);
  add_set(m, "bottom", bottom);
  add_set(m, "top", top);
  if (three_d) {
    add_set(m, "front", front);
    add_set(m, "back", back);
  }
  return m;
}

std::vector<double> graded_axis(double length, std::vector<double> breakpoints, double coarse,
                                double fine_min, double fine_max, double fine, double growth) {
  const bool refined = fine > 0.0 && fine < coarse && fine_max > fine_min;
  auto size_at = [&](double c) {
    if (!refined) return coarse;
    const double dist = c < fine_min ? fine_min - c : (c > fine_max ? c - fine_max : 0.0);
    return std::min(coarse, fine + growth * dist);
  };

  breakpoints.push_back(0.0);
  breakpoints.push_back(length);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end(),
                                [&](double a, double b) { return std::abs(a - b) < 1e-12 * length; }),
                    breakpoints.end());

  std::vector<double> out{breakpoints.front()};
  constexpr int kSamples = 4000;
  for (std::size_t s = 0; s + 1 < breakpoints.size(); ++s) {
    const double a = breakpoints[s], b = breakpoints[s + 1];
    // phi(c) = integral of 1/size from a; equidistribute phi over n cells
    std::vector<double> phi(kSamples + 1, 0.0);
    const double dc = (b - a) / kSamples;
    for (int k = 1; k <= kSamples; ++k) {
      const double c0 = a + (k - 1) * dc, c1 = a + k * dc;
      phi[k] = phi[k - 1] + 0.5 * dc * (1.0 / size_at(c0) + 1.0 / size_at(c1));
    }
    const int n = std::max(1, static_cast<int>(std::ceil(phi.back() - 1e-6)));
    const bool uniform = std::abs(phi.back() - (b - a) / size_at(a)) <= 1e-12 * phi.back();
    int k = 0;
    for (int cell = 1; cell < n; ++cell) {
      if (uniform) {
        out.push_back(a + (b - a) * cell / n);
        continue;
      }
      const double target = phi.back() * cell / n;
      while (phi[k + 1] < target) ++k;
      const double t = (target - phi[k]) / (phi[k + 1] - phi[k]);
      out.push_back(a + (k + t) * dc);
    }
    out.push_back(b);
  }
  return out;
}

Mesh generate_notched_square(const NotchedSquareSpec& spec) {
  const double L = spec.side_length;
  const double h = spec.element_size;
  if (!(L > 0.0) || !(h > 0.0)) throw ValidationError("side length and element size must be positive");
  if (h >= L) throw DegenerateMeshError("element size must be smaller than the side length");
  if (spec.dim != 2 && spec.dim != 3) throw ValidationError("dim must be 2 or 3");
  const auto [x0, y0] = spec.notch_start;
  const auto [x1, y1] = spec.notch_end;
  for (double c : {x0, y0, x1, y1})
    if (c < 0.0 || c > L) throw ValidationError("notch endpoints must lie inside the square");
  if (y0 != y1) throw UnsupportedGeometryError("only horizontal notches are supported");
  if (x0 != 0.0) throw UnsupportedGeometryError("the notch must start on the left edge");
  if (!(x1 > 0.0 && x1 < L) || !(y0 > 0.0 && y0 < L))
    throw UnsupportedGeometryError("the notch tip must lie strictly inside the square");

  std::vector<double> xs, ys;
  if (spec.refinement) {
    const RefinementBox& r = *spec.refinement;
    xs = graded_axis(L, {x1}, h, r.x_min, r.x_max, r.size, r.growth);
    ys = graded_axis(L, {y0}, h, r.y_min, r.y_max, r.size, r.growth);
  } else {
    xs = graded_axis(L, {x1}, h);
    ys = graded_axis(L, {y0}, h);
  }
  std::vector<double> zs;
  if (spec.dim == 3) {
    if (!(spec.thickness > 0.0)) throw ValidationError("thickness must be positive in 3D");
    const int layers =
        spec.layers > 0 ? spec.layers : std::max(1, static_cast<int>(std::ceil(spec.thickness / h - 1e-9)));
    for (int k = 0; k <= layers; ++k) zs.push_back(spec.thickness * k / layers);
  }

  Mesh m = structured_mesh(xs, ys, zs);
  const Grid g{xs.size(), ys.size(), zs.empty() ? 1 : zs.size()};
  const auto slit_row = static_cast<std::size_t>(
      std::find_if(ys.begin(), ys.end(), [&](double y) { return std::abs(y - y0) < 1e-12 * L; }) -
      ys.begin());
  const auto tip_col = static_cast<std::size_t>(
      std::find_if(xs.begin(), xs.end(), [&](double x) { return std::abs(x - x1) < 1e-12 * L; }) -
      xs.begin());

  // upper copies of slit nodes strictly left of the tip
  std::map<int, int> upper;
  for (std::size_t k = 0; k < g.nz; ++k)
    for (std::size_t i = 0; i < tip_col; ++i) {
      const int original = static_cast<int>(g.id(i, slit_row, k));
      upper[original] = static_cast<int>(m.nodes.size());
      m.nodes.push_back(m.nodes[static_cast<std::size_t>(original)]);
    }

  const auto nen = static_cast<std::size_t>(nodes_per_element(m.kind));
  const std::size_t ex = g.nx - 1;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const std::size_t row = (e / ex) % (g.ny - 1);
    if (row != slit_row) continue;
    for (std::size_t a = 0; a < nen; ++a) {
      int& n = m.connectivity[e * nen + a];
      if (auto it = upper.find(n); it != upper.end()) n = it->second;
    }
  }
  for (auto& [name, set] : m.boundary_sets) {
    std::vector<int> extra;
    for (int n : set)
      if (auto it = upper.find(n); it != upper.end()) extra.push_back(it->second);
    set.insert(set.end(), extra.begin(), extra.end());
    std::sort(set.begin(), set.end());
  }
  validate(m);
  return m;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << mesh.dim << ' ' << mesh.num_nodes() << ' ' << mesh.num_elements() << ' '
     << to_string(mesh.kind) << '\n';
  os << std::setprecision(17);
  for (const auto& x : mesh.nodes) {
    for (int d = 0; d < mesh.dim; ++d) os << (d ? " " : "") << x[d];
    os << '\n';
  }
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    for (std::size_t a = 0; a < el.size(); ++a) os << (a ? " " : "") << el[a];
    os << '\n';
  }
  for (const auto& [name, set] : mesh.boundary_sets) {
    os << "set " << name << ' ' << set.size() << '\n';
    for (std::size_t i = 0; i < set.size(); ++i)
      os << set[i] << ((i + 1) % 16 == 0 || i + 1 == set.size() ? '\n' : ' ');
  }
}

namespace {

// Line-aware token reader; '#' starts a comment.
class TokenReader {
public:
  explicit TokenReader(std::istream& is) : is_(is) {}

  bool next_line(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_;
      if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
      std::istringstream ls(line);
      tokens.clear();
      for (std::string t; ls >> t;) tokens.push_back(t);
      if (!tokens.empty()) return true;
    }
    return false;
  }
  int line() const { return line_; }

private:
  std::istream& is_;
  int line_ = 0;
};

template <typename T>
T parse_number(const std::string& s, int line) {
  std::istringstream ss(s);
  T v{};
  ss >> v;
  if (ss.fail() || !ss.eof()) throw ParseError("invalid number '" + s + "'", line);
  return v;
}

}  // namespace

Mesh read_mesh(std::istream& is) {
  TokenReader r(is);
  std::vector<std::string> tok;
  if (!r.next_line(tok)) throw ParseError("empty mesh file", r.line());
  if (tok.size() != 4) throw ParseError("header must be 'dim nnodes nelems kind'", r.line());
  Mesh m;
  m.dim = parse_number<int>(tok[0], r.line());
  const auto nnodes = parse_number<long>(tok[1], r.line());
  const auto nelems = parse_number<long>(tok[2], r.line());
  try {
    m.kind = element_kind_from_string(tok[3]);
  } catch (const UnsupportedElementError& e) {
    throw ParseError(e.what(), r.line());
  }
  if (m.dim != 2 && m.dim != 3) throw ParseError("dim must be 2 or 3", r.line());
  if (nnodes < 0 || nelems < 0) throw ParseError("negative counts in header", r.line());
  if (element_dim(m.kind) != m.dim)
    throw ValidationError("element kind does not match the mesh dimension");

  for (long n = 0; n < nnodes; ++n) {
    if (!r.next_line(tok)) throw ParseError("unexpected end of file in node block", r.line());
    if (static_cast<int>(tok.size()) != m.dim)
      throw ParseError("expected " + std::to_string(m.dim) + " coordinates", r.line());
    Point3 x{0.0, 0.0, 0.0};
    for (int d = 0; d < m.dim; ++d) x[d] = parse_number<double>(tok[d], r.line());
    m.nodes.push_back(x);
  }
  const int nen = nodes_per_element(m.kind);
  for (long e = 0; e < nelems; ++e) {
    if (!r.next_line(tok)) throw ParseError("unexpected end of file in element block", r.line());
    if (static_cast<int>(tok.size()) != nen)
      throw ParseError("expected " + std::to_string(nen) + " node indices", r.line());
    for (const auto& t : tok) {
      const long n = parse_number<long>(t, r.line());
      if (n < 0 || n >= nnodes)
        throw ValidationError("line " + std::to_string(r.line()) + ": node index " +
                              std::to_string(n) + " out of range");
      m.connectivity.push_back(static_cast<int>(n));
    }
  }

  bool have = r.next_line(tok);
  while (have) {
    if (tok.size() != 3 || tok[0] != "set")
      throw ParseError("expected 'set <name> <count>'", r.line());
    const std::string name = tok[1];
    const auto count = parse_number<long>(tok[2], r.line());
    if (count <= 0) throw ValidationError("boundary set '" + name + "' is empty");
    if (m.boundary_sets.count(name)) throw ValidationError("duplicate boundary set '" + name + "'");
    auto& set = m.boundary_sets[name];
    while ((have = r.next_line(tok)) && tok[0] != "set")
      for (const auto& t : tok) set.push_back(static_cast<int>(parse_number<long>(t, r.line())));
    if (static_cast<long>(set.size()) != count)
      throw ValidationError("boundary set '" + name + "' declares " + std::to_string(count) +
                            " nodes but lists " + std::to_string(set.size()));
  }
  validate(m);
  return m;
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  write_mesh(os, mesh);
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  return read_mesh(is);
}

}  // namespace pff
