#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "auxgrip/common.hpp"
#include "auxgrip/csv.hpp"

namespace auxgrip {

// ---------------------------------------------------------------------------
// Specs
// ---------------------------------------------------------------------------

/// Re-entrant honeycomb unit cell. The sign of reentrant_angle_deg selects
/// auxetic (negative) versus conventional (positive) cells.
struct UnitCellSpec {
  double strut_h_mm = 8.0;          // horizontal wall
  double strut_d_mm = 6.0;          // diagonal wall
  double reentrant_angle_deg = -30.0;
  double wall_thickness_mm = 1.2;
  double depth_mm = 10.0;           // out-of-plane, for section properties

  void validate() const {
    if (strut_h_mm <= 0 || strut_d_mm <= 0 || wall_thickness_mm <= 0 || depth_mm <= 0)
      throw ConfigError("unit cell: all lengths must be positive");
    if (wall_thickness_mm >= std::min(strut_h_mm, strut_d_mm))
      throw ConfigError("unit cell: wall thickness must be smaller than the shortest strut");
    if (!(reentrant_angle_deg > -80.0 && reentrant_angle_deg < 80.0))
      throw ConfigError("unit cell: reentrant angle must lie in (-80, 80) degrees");
  }
};

struct LatticeSpec {
  UnitCellSpec cell;
  int rows = 3;
  int cols = 12;
  double inclination_deg = 0.0;          // rotation of the cell pattern
  double backbone_arch_radius_mm = 60.0;
  std::array<double, 3> port_positions = {0.1, 0.5, 0.9};  // arc-length fractions

  void validate() const {
    cell.validate();
    if (rows < 1 || cols < 1) throw ConfigError("lattice: rows and cols must be >= 1");
    if (!(inclination_deg >= 0.0 && inclination_deg < 90.0))
      throw ConfigError("lattice: inclination must lie in [0, 90) degrees");
    if (backbone_arch_radius_mm <= 0)
      throw ConfigError("lattice: backbone arch radius must be positive");
    for (double p : port_positions)
      if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError("lattice: port positions must lie in [0, 1]");
    if (!(port_positions[0] < port_positions[1] && port_positions[1] < port_positions[2]))
      throw ConfigError("lattice: port positions must be strictly increasing");
  }
};

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct BeamSection {
  double area_mm2 = 0.0;
  double second_moment_mm4 = 0.0;
  double width_mm = 0.0;   // in-plane wall thickness
  double height_mm = 0.0;  // out-of-plane depth
};

struct Material {
  double youngs_modulus_mpa = 26.0;  // TPU-95A default
  double poisson_ratio = 0.48;
};

struct BeamElement {
  int node_a = -1;
  int node_b = -1;
  int section = 0;
};

/// Planar frame graph: interior cell lattice (nodes [0, interior_node_count)),
/// then backbone arch nodes. Elements reference sections by id.
struct LatticeModel {
  std::vector<Vec2> nodes;
  std::vector<BeamElement> elements;
  std::vector<BeamSection> sections;
  Material material;
  std::array<int, 3> port_nodes = {-1, -1, -1};
  std::vector<int> front_face_nodes;  // ordered by increasing undeformed x
  int interior_node_count = 0;

  bool has_ports() const { return port_nodes[0] >= 0; }
  int dof_count() const { return 3 * static_cast<int>(nodes.size()); }

  double element_length(int e) const {
    return (nodes[elements[e].node_b] - nodes[elements[e].node_a]).norm();
  }
};

namespace detail {

inline void check_connected(const LatticeModel& m, const std::string& what) {
  if (m.nodes.empty()) throw GeometryError(what + ": empty model");
  std::vector<char> seen(m.nodes.size(), 0);
  std::vector<std::vector<int>> adj(m.nodes.size());
  for (const auto& e : m.elements) {
    adj[e.node_a].push_back(e.node_b);
    adj[e.node_b].push_back(e.node_a);
  }
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  while (!q.empty()) {
    int n = q.front();
    q.pop();
    for (int nb : adj[n])
      if (!seen[nb]) {
        seen[nb] = 1;
        q.push(nb);
      }
  }
  for (size_t i = 0; i < seen.size(); ++i)
    if (!seen[i])
      throw GeometryError(what + ": disconnected construction, node " + std::to_string(i) +
                          " at (" + std::to_string(m.nodes[i].x) + ", " +
                          std::to_string(m.nodes[i].y) + ") is not reachable");
  for (size_t e = 0; e < m.elements.size(); ++e)
    if (m.element_length(static_cast<int>(e)) < 1e-12)
      throw GeometryError(what + ": zero-length element " + std::to_string(e));
}

inline BeamSection rect_section(double thickness, double depth) {
  BeamSection s;
  s.width_mm = thickness;
  s.height_mm = depth;
  s.area_mm2 = thickness * depth;
  s.second_moment_mm4 = depth * thickness * thickness * thickness / 12.0;
  return s;
}

// Node index in the (2*rows+1) x (cols+1) honeycomb grid.
inline int grid_id(int i, int j, int cols) { return i * (cols + 1) + j; }

// Node position of the 0-degree tiling. Zigzag chains run along y (index i),
// horizontal h-struts join chains (index j).
inline Vec2 grid_pos(int i, int j, double h, double d, double theta_rad) {
  const double ds = d * std::sin(theta_rad);
  const double dc = d * std::cos(theta_rad);
  const double px = h + ds;  // x-period
  return {j * px + (((i + j) % 2 != 0) ? ds : 0.0), i * dc};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// Bare rows x cols re-entrant tiling, no backbone, no ports, no face skin.
/// Used by the material-level virtual Poisson test.
inline LatticeModel build_cell_patch(const UnitCellSpec& cell, int rows, int cols,
                                     Material material = Material{}) {
  cell.validate();
  if (rows < 1 || cols < 1) throw ConfigError("cell patch: rows and cols must be >= 1");
  const double h = cell.strut_h_mm, d = cell.strut_d_mm;
  const double theta = deg2rad(cell.reentrant_angle_deg);
  if (h + d * std::sin(theta) <= cell.wall_thickness_mm)
    throw GeometryError("cell patch: struts intersect (x-period " +
                        std::to_string(h + d * std::sin(theta)) + " mm <= wall thickness); "
                        "increase strut_h or reduce |reentrant_angle|");

  LatticeModel m;
  m.material = material;
  m.sections = {detail::rect_section(cell.wall_thickness_mm, cell.depth_mm)};
  for (int i = 0; i <= 2 * rows; ++i)
    for (int j = 0; j <= cols; ++j) m.nodes.push_back(detail::grid_pos(i, j, h, d, theta));
  // diagonal chains
  for (int j = 0; j <= cols; ++j)
    for (int i = 0; i < 2 * rows; ++i)
      m.elements.push_back({detail::grid_id(i, j, cols), detail::grid_id(i + 1, j, cols), 0});
  // horizontal walls
  for (int i = 0; i <= 2 * rows; ++i)
    for (int j = 0; j < cols; ++j)
      if ((i + j) % 2 != 0)
        m.elements.push_back({detail::grid_id(i, j, cols), detail::grid_id(i, j + 1, cols), 0});
  m.interior_node_count = static_cast<int>(m.nodes.size());
  detail::check_connected(m, "cell patch");
  return m;
}

/// Full finger model: cell tiling (rotated by the requested inclination about its
/// own centroid), a refined contact-face skin along the top boundary, an
/// arch-shaped backbone below, tie struts from the tiling to the arch, and
/// three port nodes on the arch.
inline LatticeModel build_lattice(const LatticeSpec& spec, Material material = Material{}) {
  spec.validate();
  const UnitCellSpec& cell = spec.cell;
  const double h = cell.strut_h_mm, d = cell.strut_d_mm;
  const double theta = deg2rad(cell.reentrant_angle_deg);
  const double ds = d * std::sin(theta);
  const double px = h + ds;
  const int rows = spec.rows, cols = spec.cols;

  if (px <= cell.wall_thickness_mm)
    throw GeometryError("lattice cell (" + std::to_string(h) + ", " + std::to_string(d) +
                        ", " + std::to_string(cell.reentrant_angle_deg) +
                        " deg): struts intersect");
  if (h + 2.0 * ds <= 0.0)
    throw GeometryError("lattice cell: front face folds back on itself "
                        "(strut_h + 2*strut_d*sin(angle) <= 0)");

  LatticeModel m;
  m.material = material;
  m.sections = {
      detail::rect_section(cell.wall_thickness_mm, cell.depth_mm),          // 0: cell wall
      detail::rect_section(2.0 * cell.wall_thickness_mm, cell.depth_mm),    // 1: backbone leaf
      detail::rect_section(cell.wall_thickness_mm, cell.depth_mm),          // 2: port/arch tie
  };

  // --- interior tiling at 0 degrees ---
  for (int i = 0; i <= 2 * rows; ++i)
    for (int j = 0; j <= cols; ++j) m.nodes.push_back(detail::grid_pos(i, j, h, d, theta));
  for (int j = 0; j <= cols; ++j)
    for (int i = 0; i < 2 * rows; ++i)
      m.elements.push_back({detail::grid_id(i, j, cols), detail::grid_id(i + 1, j, cols), 0});
  for (int i = 0; i < 2 * rows; ++i)  // top row walls become the face skin below
    for (int j = 0; j < cols; ++j)
      if ((i + j) % 2 != 0)
        m.elements.push_back({detail::grid_id(i, j, cols), detail::grid_id(i, j + 1, cols), 0});

  // --- contact-face skin: top boundary subdivided 4x for smooth contact ---
  const int itop = 2 * rows;
  m.front_face_nodes.clear();
  for (int j = 0; j < cols; ++j) {
    const int a = detail::grid_id(itop, j, cols);
    const int b = detail::grid_id(itop, j + 1, cols);
    const Vec2 pa = m.nodes[a], pb = m.nodes[b];
    m.front_face_nodes.push_back(a);
    int prev = a;
    for (int k = 1; k < 4; ++k) {
      const double t = k / 4.0;
      m.nodes.push_back({pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y)});
      const int mid = static_cast<int>(m.nodes.size()) - 1;
      m.elements.push_back({prev, mid, 0});
      m.front_face_nodes.push_back(mid);
      prev = mid;
    }
    m.elements.push_back({prev, b, 0});
  }
  m.front_face_nodes.push_back(detail::grid_id(itop, cols, cols));
  m.interior_node_count = static_cast<int>(m.nodes.size());

  // --- rotate the interior pattern about its centroid; backbone stays put ---
  if (spec.inclination_deg != 0.0) {
    Vec2 centroid{0, 0};
    for (int n = 0; n < m.interior_node_count; ++n) centroid += m.nodes[n];
    centroid = centroid / static_cast<double>(m.interior_node_count);
    const double a = deg2rad(spec.inclination_deg);
    for (int n = 0; n < m.interior_node_count; ++n)
      m.nodes[n] = centroid + (m.nodes[n] - centroid).rotated(a);
  }

  // --- backbone arch (fixed in the finger frame, independent of inclination) ---
  const double width = cols * px + ((cols % 2 != 0) ? ds : 0.0);  // 0-deg bottom-row span
  const double standoff = 2.0;                                    // mm between tiling and arch
  const double R = spec.backbone_arch_radius_mm;
  if (R < width / 2.0)
    throw GeometryError("backbone arch radius " + std::to_string(R) +
                        " mm cannot span the " + std::to_string(width) + " mm tiling");
  const double rise = std::sqrt(R * R - width * width / 4.0);
  const Vec2 center{width / 2.0, -standoff + rise};
  const double ang_l = std::atan2(-rise, -width / 2.0);
  const double ang_r = std::atan2(-rise, width / 2.0);
  const double span = ang_r - ang_l;  // sweeps through the bottom of the circle
  const int n_seg = std::max(4, static_cast<int>(std::ceil(rad2deg(span) / 2.0)));
  const int arch_first = static_cast<int>(m.nodes.size());
  for (int k = 0; k <= n_seg; ++k) {
    const double a = ang_l + span * k / n_seg;
    m.nodes.push_back({center.x + R * std::cos(a), center.y + R * std::sin(a)});
  }
  for (int k = 0; k < n_seg; ++k)
    m.elements.push_back({arch_first + k, arch_first + k + 1, 1});

  // --- tie struts: 0-deg bottom boundary node -> nearest arch node ---
  // The pairing is fixed from the 0-degree layout so the element list is
  // identical for every inclination.
  for (int j = 0; j <= cols; ++j) {
    const Vec2 p0 = detail::grid_pos(0, j, h, d, theta);
    int best = arch_first;
    double best_d2 = std::numeric_limits<double>::max();
    for (int k = 0; k <= n_seg; ++k) {
      const Vec2 q = m.nodes[arch_first + k];
      const double d2 = (q - p0).dot(q - p0);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = arch_first + k;
      }
    }
    m.elements.push_back({detail::grid_id(0, j, cols), best, 2});
  }

  // --- ports: single nodes on the arch at the requested arc fractions ---
  for (int p = 0; p < 3; ++p) {
    const int k = static_cast<int>(std::lround(spec.port_positions[p] * n_seg));
    m.port_nodes[p] = arch_first + k;
  }
  if (m.port_nodes[0] == m.port_nodes[1] || m.port_nodes[1] == m.port_nodes[2])
    throw ConfigError("lattice: port positions collapse onto the same arch node");

  for (size_t i = 1; i < m.front_face_nodes.size(); ++i)
    if (!(m.nodes[m.front_face_nodes[i]].x > m.nodes[m.front_face_nodes[i - 1]].x))
      throw GeometryError("lattice: front face is not monotone in x");

  detail::check_connected(m, "lattice");
  return m;
}

// ---------------------------------------------------------------------------
// Plain-text export / import ("id x y" nodes, "id a b section" elements)
// ---------------------------------------------------------------------------

inline void save_model_txt(const LatticeModel& m, std::ostream& out) {
  out << "# nodes: id x y\n";
  for (size_t i = 0; i < m.nodes.size(); ++i)
    out << i << ' ' << csv::format_double(m.nodes[i].x) << ' '
        << csv::format_double(m.nodes[i].y) << '\n';
  out << "# elements: id a b section\n";
  for (size_t e = 0; e < m.elements.size(); ++e)
    out << e << ' ' << m.elements[e].node_a << ' ' << m.elements[e].node_b << ' '
        << m.elements[e].section << '\n';
  out << "#! sections";
  for (const auto& s : m.sections)
    out << ' ' << csv::format_double(s.area_mm2) << ' '
        << csv::format_double(s.second_moment_mm4) << ' ' << csv::format_double(s.width_mm)
        << ' ' << csv::format_double(s.height_mm);
  out << '\n';
  out << "#! material " << csv::format_double(m.material.youngs_modulus_mpa) << ' '
      << csv::format_double(m.material.poisson_ratio) << '\n';
  out << "#! ports " << m.port_nodes[0] << ' ' << m.port_nodes[1] << ' ' << m.port_nodes[2]
      << '\n';
  out << "#! interior " << m.interior_node_count << '\n';
  out << "#! face";
  for (int n : m.front_face_nodes) out << ' ' << n;
  out << '\n';
}

inline void save_model_txt(const LatticeModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  save_model_txt(m, out);
}

inline LatticeModel load_model_txt(std::istream& in, const std::string& origin = "<stream>") {
  LatticeModel m;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = csv::trim(line);
    if (s.empty()) continue;
    std::istringstream ss(s);
    if (s.rfind("#!", 0) == 0) {
      std::string bang, key;
      ss >> bang >> key;
      if (key == "sections") {
        BeamSection sec;
        while (ss >> sec.area_mm2 >> sec.second_moment_mm4 >> sec.width_mm >> sec.height_mm)
          m.sections.push_back(sec);
      } else if (key == "material") {
        ss >> m.material.youngs_modulus_mpa >> m.material.poisson_ratio;
      } else if (key == "ports") {
        ss >> m.port_nodes[0] >> m.port_nodes[1] >> m.port_nodes[2];
      } else if (key == "interior") {
        ss >> m.interior_node_count;
      } else if (key == "face") {
        int n;
        while (ss >> n) m.front_face_nodes.push_back(n);
      }
      continue;
    }
    if (s[0] == '#') continue;
    long id;
    double a, b;
    long c, sec;
    std::istringstream probe(s);
    int fields = 0;
    {
      std::string tok;
      while (probe >> tok) ++fields;
    }
    if (fields == 3) {
      if (!(ss >> id >> a >> b))
        throw IngestError(origin + ": bad node line " + std::to_string(line_no), line_no);
      if (static_cast<size_t>(id) != m.nodes.size())
        throw IngestError(origin + ": node ids must be consecutive at line " +
                              std::to_string(line_no),
                          line_no);
      m.nodes.push_back({a, b});
    } else if (fields == 4) {
      if (!(ss >> id >> a >> c >> sec))
        throw IngestError(origin + ": bad element line " + std::to_string(line_no), line_no);
      m.elements.push_back({static_cast<int>(a), static_cast<int>(c), static_cast<int>(sec)});
    } else {
      throw IngestError(origin + ": unrecognized line " + std::to_string(line_no), line_no);
    }
  }
  if (m.sections.empty()) m.sections = {detail::rect_section(1.0, 1.0)};
  if (m.interior_node_count == 0) m.interior_node_count = static_cast<int>(m.nodes.size());
  return m;
}

inline LatticeModel load_model_txt_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return load_model_txt(in, path);
}

}  // namespace auxgrip
