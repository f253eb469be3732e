#include <cstdio>
#include <fstream>
#include <sstream>

#include "pff/errors.hpp"
#include "pff/io.hpp"

namespace pff {

namespace fs = std::filesystem;

namespace {

int vtk_cell_type(ElementKind k) {
  switch (k) {
    case ElementKind::Tri3: return 5;
    case ElementKind::Quad4: return 9;
    case ElementKind::Tet4: return 10;
    case ElementKind::Hex8: return 12;
  }
  return 0;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  return os;
}

void finish(std::ofstream& os, const fs::path& path) {
  os.flush();
  if (!os) throw IoError("error while writing " + path.string());
}

}  // namespace

void write_vtk(std::ostream& os, const Mesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd& alpha) {
  const std::size_t n = mesh.num_nodes();
  const auto dim = static_cast<std::size_t>(mesh.dim);
  if (static_cast<std::size_t>(u.size()) != n * dim) throw SizeError("displacement size does not match the mesh");
  if (static_cast<std::size_t>(alpha.size()) != n) throw SizeError("damage size does not match the mesh");
  const std::size_t ne = mesh.num_elements();
  const auto nen = static_cast<std::size_t>(nodes_per_element(mesh.kind));

  os << "# vtk DataFile Version 3.0\n"
     << "phase-field fracture snapshot (mm)\n"
     << "ASCII\n"
     << "DATASET UNSTRUCTURED_GRID\n"
     << "POINTS " << n << " double\n";
  for (const auto& p : mesh.nodes) os << fmt(p[0]) << ' ' << fmt(p[1]) << ' ' << fmt(p[2]) << '\n';
  os << "CELLS " << ne << ' ' << ne * (nen + 1) << '\n';
  for (std::size_t e = 0; e < ne; ++e) {
    os << nen;
    for (int v : mesh.element(e)) os << ' ' << v;
    os << '\n';
  }
  os << "CELL_TYPES " << ne << '\n';
  const int type = vtk_cell_type(mesh.kind);
  for (std::size_t e = 0; e < ne; ++e) os << type << '\n';
  os << "POINT_DATA " << n << '\n' << "VECTORS displacement double\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      if (c) os << ' ';
      os << (c < dim ? fmt(u(static_cast<Eigen::Index>(i * dim + c))) : "0");
    }
    os << '\n';
  }
  os << "SCALARS damage double 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < n; ++i) os << fmt(alpha(static_cast<Eigen::Index>(i))) << '\n';
}

void write_vtk(const fs::path& path, const Mesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd& alpha) {
  std::ofstream os = open_output(path);
  write_vtk(os, mesh, u, alpha);
  finish(os, path);
}

void write_curves(std::ostream& os, const std::vector<StepRecord>& steps, int dim) {
  if (dim == 3)
    os << "# units: displacement mm, force N, energies N*mm\n";
  else
    os << "# units: displacement mm, force N per mm thickness, energies N*mm per mm thickness\n";
  os << kCurveHeader << '\n';
  for (const auto& s : steps)
    os << s.step << ',' << fmt(s.applied_displacement) << ',' << fmt(s.reaction) << ',' << fmt(s.energy.elastic)
       << ',' << fmt(s.energy.dissipated) << ',' << fmt(s.energy.total) << ',' << s.iterations << ','
       << (s.converged ? 1 : 0) << '\n';
}

void write_curves(const fs::path& path, const std::vector<StepRecord>& steps, int dim) {
  std::ofstream os = open_output(path);
  write_curves(os, steps, dim);
  finish(os, path);
}

void write_energy_log(const fs::path& path, const std::vector<StepRecord>& steps) {
  std::ofstream os = open_output(path);
  os << "# total energy W after each half-step (elastic, damage, ...), N*mm\n"
     << "step,half_step,W\n";
  for (const auto& s : steps)
    for (std::size_t k = 0; k < s.half_step_energies.size(); ++k)
      os << s.step << ',' << k + 1 << ',' << fmt(s.half_step_energies[k]) << '\n';
  finish(os, path);
}

std::vector<CurveRow> read_curves(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<CurveRow> rows;
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kCurveHeader) throw ParseError("unexpected CSV header", line_no);
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw ParseError("expected 8 columns", line_no);
    try {
      std::size_t pos = 0;
      auto num = [&](const std::string& s) {
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
      };
      CurveRow r;
      r.step = static_cast<int>(num(f[0]));
      r.applied_displacement = num(f[1]);
      r.reaction = num(f[2]);
      r.elastic = num(f[3]);
      r.dissipated = num(f[4]);
      r.total = num(f[5]);
      r.iterations = static_cast<int>(num(f[6]));
      const double flag = num(f[7]);
      if (flag != 0.0 && flag != 1.0) throw std::invalid_argument(f[7]);
      r.converged = flag == 1.0;
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError("malformed value", line_no);
    }
  }
  if (!header) throw ParseError("missing CSV header", line_no);
  return rows;
}

void validate_curves(const std::vector<CurveRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].dissipated < rows[i - 1].dissipated)
      throw ValidationError("D decreases between steps " + std::to_string(rows[i - 1].step) + " and " +
                            std::to_string(rows[i].step));
}

}  // namespace pff
