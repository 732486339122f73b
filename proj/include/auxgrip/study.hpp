#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "auxgrip/config.hpp"
#include "auxgrip/contact.hpp"
#include "auxgrip/detail/sha256.hpp"
#include "auxgrip/homogenize.hpp"
#include "auxgrip/lattice.hpp"
#include "auxgrip/mechanism.hpp"
#include "auxgrip/metrics.hpp"
#include "auxgrip/svg.hpp"

namespace auxgrip {

struct RunConfig {
  LatticeSpec lattice;  // inclination_deg is overridden per study row
  Material material;
  IndenterConfig indenter;
  SolveSettings solve;
  MechanismGeometry mechanism;
  CrankSchedule schedule;
  std::vector<double> inclinations_deg = {0.0, 30.0, 45.0, 60.0};
  int contact_steps = 20;
  int curvature_window = 7;
  double contact_penalty_n_per_mm = 0.0;  // 0 = auto
  std::string output_dir = "out";

  static RunConfig from_json(const json& j) {
    RunConfig c;
    if (j.contains("lattice")) c.lattice = lattice_spec_from_json(j.at("lattice"));
    if (j.contains("material")) c.material = material_from_json(j.at("material"));
    if (j.contains("indenter")) c.indenter = indenter_from_json(j.at("indenter"));
    if (j.contains("solve")) c.solve = solve_settings_from_json(j.at("solve"));
    if (j.contains("mechanism")) c.mechanism = mechanism_from_json(j.at("mechanism"));
    if (j.contains("schedule")) c.schedule = schedule_from_json(j.at("schedule"));
    if (j.contains("inclinations_deg"))
      c.inclinations_deg = j.at("inclinations_deg").get<std::vector<double>>();
    c.contact_steps = j.value("contact_steps", c.contact_steps);
    c.curvature_window = j.value("curvature_window", c.curvature_window);
    c.contact_penalty_n_per_mm = j.value("contact_penalty_n_per_mm", c.contact_penalty_n_per_mm);
    c.output_dir = j.value("output_dir", c.output_dir);
    return c;
  }

  void validate() const {
    lattice.validate();
    solve.validate();
    mechanism.validate();
    if (inclinations_deg.empty()) throw ConfigError("study: no inclinations requested");
    if (contact_steps < 1) throw ConfigError("study: contact_steps must be >= 1");
    if (indenter.indenter.total_travel_mm <= 0)
      throw ConfigError("study: indenter total_travel_mm must be > 0");
    if (output_dir.empty()) throw ConfigError("study: output_dir must be set");
  }
};

/// Places the circle tangent to the deepest touching face node when the
/// config did not give an explicit start position.
inline Indenter place_indenter(const IndenterConfig& cfg, const LatticeModel& model) {
  Indenter ind = cfg.indenter;
  if (!cfg.auto_center) return ind;
  if (std::abs(ind.travel_direction.x) > 1e-9 || std::abs(ind.travel_direction.y + 1.0) > 1e-9)
    throw ConfigError("indenter: auto placement supports direction (0,-1) only; "
                      "give center_start for other travel directions");
  double xlo = model.nodes[model.front_face_nodes.front()].x;
  double xhi = model.nodes[model.front_face_nodes.back()].x;
  const double cx = 0.5 * (xlo + xhi);
  double cy = -std::numeric_limits<double>::max();
  for (int n : model.front_face_nodes) {
    const Vec2 p = model.nodes[n];
    const double dx = std::abs(p.x - cx);
    if (dx >= ind.radius_mm) continue;
    cy = std::max(cy, p.y + std::sqrt(ind.radius_mm * ind.radius_mm - dx * dx));
  }
  if (cy == -std::numeric_limits<double>::max())
    throw ConfigError("indenter: circle of radius " + std::to_string(ind.radius_mm) +
                      " mm does not reach the face; give center_start explicitly");
  ind.center_start = {cx, cy};
  return ind;
}

struct StudyRow {
  double inclination_deg = 0.0;
  bool failed = false;
  std::string error;
  double average_curvature_per_mm = 0.0;
  double fitted_radius_mm = 0.0;  // R2
  double curvature_ratio = 0.0;   // R1/R2
  ForceStats contact_stats;       // over the travel history (abscissa = travel, mm)
  double peak_contact_n = 0.0;
  std::array<double, 3> peak_port_reactions_n{};
  std::vector<TorquePoint> torque;
  std::vector<std::string> warnings;

  // artifacts kept for the combined plots
  std::vector<Vec2> force_vs_travel;
  std::vector<Vec2> curvature_profile_xy;
};

struct ComparisonReport {
  std::string schema = "auxgrip-report/1";
  long seed = -1;  // recorded when the caller passed one; unused by the pipeline
  std::vector<StudyRow> rows;
  // metric name -> inclinations sorted ascending by that metric
  std::map<std::string, std::vector<double>> rankings;

  ordered_json to_json() const {
    ordered_json j;
    j["schema"] = schema;
    if (seed >= 0) j["seed"] = seed;
    j["rows"] = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json row;
      row["inclination_deg"] = r.inclination_deg;
      row["failed"] = r.failed;
      if (r.failed) {
        row["error"] = r.error;
      } else {
        row["average_curvature_per_mm"] = r.average_curvature_per_mm;
        row["fitted_radius_mm"] = r.fitted_radius_mm;
        row["curvature_ratio"] = r.curvature_ratio;
        row["contact_force"] = {{"mean_n", r.contact_stats.mean_n},
                                {"sd_n", r.contact_stats.sd_n},
                                {"peak_n", r.contact_stats.peak_n},
                                {"peak_travel_mm", r.contact_stats.t_peak_s}};
        row["peak_port_reactions_n"] = r.peak_port_reactions_n;
        ordered_json tq = ordered_json::array();
        for (const auto& t : r.torque)
          tq.push_back({{"grasp_n", t.grasp_n},
                        {"tau_nmm", t.tau_nmm},
                        {"tau_total_nmm", t.tau_total_nmm}});
        row["torque_curve"] = std::move(tq);
        row["warnings"] = r.warnings;
      }
      j["rows"].push_back(std::move(row));
    }
    j["rankings"] = ordered_json::object();
    for (const auto& [metric, order] : rankings) j["rankings"][metric] = order;
    return j;
  }
};

namespace detail {

inline std::string aux_tag(double inclination) {
  std::ostringstream os;
  os << "aux" << std::setw(2) << std::setfill('0') << static_cast<int>(std::lround(inclination));
  return os.str();
}

struct Artifact {
  std::string rel_path;
  std::string content;
};

inline StudyRow run_one_inclination(const RunConfig& cfg, double inclination,
                                    std::vector<Artifact>& artifacts) {
  StudyRow row;
  row.inclination_deg = inclination;
  const std::string tag = aux_tag(inclination);

  LatticeSpec spec = cfg.lattice;
  spec.inclination_deg = inclination;
  const LatticeModel model = build_lattice(spec, cfg.material);
  {
    std::ostringstream os;
    save_model_txt(model, os);
    artifacts.push_back({"model_" + tag + ".txt", os.str()});
  }

  const Indenter indenter = place_indenter(cfg.indenter, model);
  const IndentationHistory hist = simulate_indentation(model, indenter, cfg.solve,
                                                       cfg.contact_steps,
                                                       cfg.contact_penalty_n_per_mm);
  row.warnings = hist.warnings;
  {
    std::ostringstream os;
    hist.to_csv(os);
    artifacts.push_back({"indent_" + tag + ".csv", os.str()});
  }

  for (const auto& s : hist.steps) {
    row.force_vs_travel.push_back({s.travel_mm, s.contact_force_n});
    row.peak_contact_n = std::max(row.peak_contact_n, s.contact_force_n);
    for (int p = 0; p < 3; ++p)
      row.peak_port_reactions_n[p] =
          std::max(row.peak_port_reactions_n[p], s.port_reactions[p]);
  }
  row.contact_stats = force_stats(row.force_vs_travel);

  const ContactProfile& face = hist.steps.back().deformed_face;
  {
    std::ostringstream os;
    profile_to_csv(face, os);
    artifacts.push_back({"face_" + tag + ".csv", os.str()});
  }
  const CurvatureProfile curv = curvature_profile(face, cfg.curvature_window);
  row.average_curvature_per_mm = curv.average_curvature;
  row.curvature_profile_xy = curv.samples;
  {
    std::ostringstream os;
    curvature_to_csv(curv, os);
    artifacts.push_back({"curvature_" + tag + ".csv", os.str()});
  }
  row.fitted_radius_mm = fit_circle_radius(face);
  row.curvature_ratio = curvature_ratio(indenter.radius_mm, row.fitted_radius_mm);

  // torque along the indentation, crank angle swept linearly over the schedule
  std::vector<ReactionSample> samples;
  const Vec2 tip_point{0.5 * (face.samples.front().x + face.samples.back().x),
                       0.5 * (face.samples.front().y + face.samples.back().y)};
  const Vec2 tip_normal = (Vec2{0, 0} - indenter.travel_direction).normalized();
  const size_t n_steps = hist.steps.size();
  for (size_t i = 0; i < n_steps; ++i) {
    const auto& s = hist.steps[i];
    ReactionSample smp;
    const double t = n_steps > 1 ? static_cast<double>(i) / (n_steps - 1) : 0.0;
    smp.crank_deg = cfg.schedule.crank_lo_deg +
                    t * (cfg.schedule.crank_hi_deg - cfg.schedule.crank_lo_deg);
    smp.grasp_n = s.contact_force_n;
    smp.tip_point = tip_point;
    smp.tip_normal = tip_normal;
    for (int p = 0; p < 3; ++p) {
      const Vec2 r = s.port_reaction_vec[p];
      const double mag = r.norm();
      smp.reactions.p_n[p] = mag;
      smp.reactions.normals[p] = mag > 1e-14 ? r / mag : Vec2{0.0, 1.0};
      smp.reactions.port_xy[p] = model.nodes[model.port_nodes[p]];
    }
    samples.push_back(smp);
  }
  row.torque = torque_curve(samples, cfg.mechanism, cfg.schedule);
  {
    std::ostringstream os;
    torque_curve_to_csv(row.torque, os);
    artifacts.push_back({"torque_" + tag + ".csv", os.str()});
  }
  return row;
}

}  // namespace detail

/// Generates, indents, measures and maps every requested inclination, writing
/// all artifacts plus report.json and manifest.json under cfg.output_dir.
/// Per-inclination failures are captured in the report and the manifest; the
/// returned report's `rows[i].failed` reflects them.
inline ComparisonReport run_study(const RunConfig& cfg, long seed = -1) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);

  ComparisonReport report;
  report.seed = seed;
  std::vector<detail::Artifact> all_artifacts;
  std::vector<std::string> failures;

  struct Slot {
    StudyRow row;
    std::vector<detail::Artifact> artifacts;
  };
  std::vector<std::future<Slot>> futures;
  for (double inc : cfg.inclinations_deg)
    futures.push_back(std::async(std::launch::async, [&cfg, inc]() {
      Slot slot;
      try {
        slot.row = detail::run_one_inclination(cfg, inc, slot.artifacts);
      } catch (const std::exception& e) {
        slot.row = StudyRow{};
        slot.row.inclination_deg = inc;
        slot.row.failed = true;
        slot.row.error = e.what();
      }
      return slot;
    }));
  for (auto& f : futures) {
    Slot slot = f.get();
    if (slot.row.failed)
      failures.push_back(detail::aux_tag(slot.row.inclination_deg) + ": " + slot.row.error);
    report.rows.push_back(std::move(slot.row));
    for (auto& a : slot.artifacts) all_artifacts.push_back(std::move(a));
  }

  // rankings over successful rows (ascending metric order)
  auto ranking = [&](const std::string& name, auto metric) {
    std::vector<std::pair<double, double>> vals;  // (metric, inclination)
    for (const auto& r : report.rows)
      if (!r.failed) vals.push_back({metric(r), r.inclination_deg});
    std::stable_sort(vals.begin(), vals.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> order;
    for (const auto& v : vals) order.push_back(v.second);
    report.rankings[name] = order;
  };
  ranking("average_curvature", [](const StudyRow& r) { return r.average_curvature_per_mm; });
  ranking("curvature_ratio", [](const StudyRow& r) { return r.curvature_ratio; });
  ranking("mean_contact_force", [](const StudyRow& r) { return r.contact_stats.mean_n; });
  ranking("peak_contact_force", [](const StudyRow& r) { return r.peak_contact_n; });

  // combined plots
  {
    svg::LinePlot force_plot("Contact force vs travel", "travel (mm)", "force (N)");
    svg::LinePlot curv_plot("Face curvature", "x (mm)", "k (1/mm)");
    svg::LinePlot torque_plot("Motor torque vs grasping force", "grasp (N)",
                              "torque, six fingers (N mm)");
    for (const auto& r : report.rows) {
      if (r.failed) continue;
      const std::string tag = detail::aux_tag(r.inclination_deg);
      force_plot.add({tag, r.force_vs_travel});
      curv_plot.add({tag, r.curvature_profile_xy});
      std::vector<Vec2> tq;
      for (const auto& t : r.torque) tq.push_back({t.grasp_n, t.tau_total_nmm});
      torque_plot.add({tag, tq});
    }
    std::ostringstream f1, f2, f3;
    force_plot.write(f1);
    curv_plot.write(f2);
    torque_plot.write(f3);
    all_artifacts.push_back({"plot_force_vs_travel.svg", f1.str()});
    all_artifacts.push_back({"plot_curvature.svg", f2.str()});
    all_artifacts.push_back({"plot_torque.svg", f3.str()});
  }

  {
    std::ostringstream os;
    os << "auxgrip comparison study\n";
    os << "========================\n\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%-6s %12s %10s %8s %9s %8s %8s %8s %8s %8s\n", "aux",
                  "avg_k[1/mm]", "R2[mm]", "ratio", "mean[N]", "sd[N]", "peak[N]", "P1[N]",
                  "P2[N]", "P3[N]");
    os << line;
    for (const auto& r : report.rows) {
      if (r.failed) {
        std::snprintf(line, sizeof(line), "%-6.0f FAILED: %s\n", r.inclination_deg,
                      r.error.c_str());
        os << line;
        continue;
      }
      std::snprintf(line, sizeof(line),
                    "%-6.0f %12.5g %10.5g %8.4g %9.4g %8.4g %8.4g %8.4g %8.4g %8.4g\n",
                    r.inclination_deg, r.average_curvature_per_mm, r.fitted_radius_mm,
                    r.curvature_ratio, r.contact_stats.mean_n, r.contact_stats.sd_n,
                    r.peak_contact_n, r.peak_port_reactions_n[0], r.peak_port_reactions_n[1],
                    r.peak_port_reactions_n[2]);
      os << line;
    }
    os << "\nrankings (ascending):\n";
    for (const auto& [metric, order] : report.rankings) {
      os << "  " << metric << ":";
      for (size_t i = 0; i < order.size(); ++i)
        os << (i ? " < " : " ") << "aux(" << order[i] << ")";
      os << "\n";
    }
    bool any_warning = false;
    for (const auto& r : report.rows)
      for (const auto& w : r.warnings) {
        if (!any_warning) os << "\nwarnings:\n";
        any_warning = true;
        os << "  aux(" << r.inclination_deg << "): " << w << "\n";
      }
    all_artifacts.push_back({"report.txt", os.str()});
  }
  all_artifacts.push_back({"report.json", report.to_json().dump(2) + "\n"});

  // write artifacts, then the manifest with content hashes
  ordered_json manifest;
  manifest["schema"] = "auxgrip-manifest/1";
  manifest["status"] = failures.empty() ? "ok" : "partial-failure";
  manifest["failures"] = failures;
  manifest["files"] = ordered_json::array();
  for (const auto& a : all_artifacts) {
    const fs::path path = fs::path(cfg.output_dir) / a.rel_path;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << a.content;
    out.close();
    manifest["files"].push_back(
        {{"path", a.rel_path}, {"sha256", detail::Sha256::hash(a.content)}});
  }
  {
    std::ofstream out(fs::path(cfg.output_dir) / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
  }
  return report;
}

}  // namespace auxgrip
