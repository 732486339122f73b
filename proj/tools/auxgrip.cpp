// Command-line front end: generate lattice models, run indentation studies,
// reduce profiles and sensor logs, and sweep mechanism torque.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "auxgrip/config.hpp"
#include "auxgrip/contact.hpp"
#include "auxgrip/homogenize.hpp"
#include "auxgrip/mechanism.hpp"
#include "auxgrip/metrics.hpp"
#include "auxgrip/sensors.hpp"
#include "auxgrip/study.hpp"

namespace fs = std::filesystem;
using namespace auxgrip;

namespace {

LatticeSpec spec_from_config(const std::string& config_path, double inclination,
                             bool have_inclination, Material* material) {
  LatticeSpec spec;
  if (!config_path.empty()) {
    const json j = load_json_file(config_path);
    spec = lattice_spec_from_json(j.contains("lattice") ? j.at("lattice") : j);
    if (material && j.contains("material")) *material = material_from_json(j.at("material"));
  }
  if (have_inclination) spec.inclination_deg = inclination;
  return spec;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
}

int run(int argc, char** argv) {
  CLI::App app{"auxetic gripper finger simulation and analysis toolkit"};
  app.require_subcommand(1);
  long seed = -1;
  app.add_option("--seed", seed, "seed recorded in reports (no randomized stage uses it)");

  // ---- generate ----
  auto* gen = app.add_subcommand("generate", "build a lattice model and export it");
  std::string gen_config, gen_out = "model.txt";
  double gen_inclination = 0.0;
  gen->add_option("--config", gen_config, "lattice (or full study) JSON config");
  auto* gen_inc_opt = gen->add_option("--inclination", gen_inclination, "unit-cell inclination, deg");
  gen->add_option("--out", gen_out, "output node/element text file");

  // ---- indent ----
  auto* ind = app.add_subcommand("indent", "indent one finger model with the rigid circle");
  std::string ind_config, ind_out = "indent.csv", ind_face, ind_nodal, ind_faces_dir;
  double ind_inclination = 0.0;
  ind->add_option("--config", ind_config, "study JSON config");
  auto* ind_inc_opt = ind->add_option("--inclination", ind_inclination, "unit-cell inclination, deg");
  ind->add_option("--out", ind_out, "history CSV (travel_mm,F_contact_N,P1_N,P2_N,P3_N)");
  ind->add_option("--face-out", ind_face, "final deformed face profile CSV (x_mm,y_mm)");
  ind->add_option("--faces-dir", ind_faces_dir, "directory for per-step face profile CSVs");
  ind->add_option("--nodal-out", ind_nodal, "per-step nodal displacement CSV");

  // ---- metrics ----
  auto* met = app.add_subcommand("metrics", "reduce profiles, fields and force series");
  std::string met_profile, met_curv_out, met_field, met_centerline_out, met_force;
  int met_window = 7;
  double met_r1 = 0.0, met_line_y = 0.0, met_band = 1.0;
  bool met_apex = false;
  met->add_option("--profile", met_profile, "contact profile CSV (x_mm,y_mm)");
  met->add_option("--window", met_window, "curvature smoothing window (odd)");
  met->add_option("--curvature-out", met_curv_out, "curvature CSV out (x_mm,k_per_mm)");
  met->add_option("--r1", met_r1, "indenter radius for the curvature ratio, mm");
  met->add_flag("--apex", met_apex, "use the apex osculating radius as R2 instead of the circle fit");
  met->add_option("--field", met_field, "nodal displacement CSV (x_mm,y_mm,uy_mm)");
  met->add_option("--line-y", met_line_y, "centerline y position, mm");
  met->add_option("--band", met_band, "centerline half-band, mm");
  met->add_option("--centerline-out", met_centerline_out, "centerline CSV out (x_mm,eyy,v_mm)");
  met->add_option("--force", met_force, "force series CSV (t_s,f_N)");

  // ---- torque ----
  auto* trq = app.add_subcommand("torque", "sweep motor torque against grasping force");
  std::string trq_geometry, trq_out = "torque.csv";
  double trq_lo = 0.2, trq_hi = 0.8;
  int trq_n = 13;
  trq->add_option("--geometry", trq_geometry, "mechanism geometry JSON (defaults to the published table)");
  trq->add_option("--grasp-min", trq_lo, "grasping force grid start, N");
  trq->add_option("--grasp-max", trq_hi, "grasping force grid end, N");
  trq->add_option("--points", trq_n, "grid size");
  trq->add_option("--out", trq_out, "torque curve CSV (grasp_N,tau_Nmm,tau_total_Nmm)");

  // ---- ingest ----
  auto* ing = app.add_subcommand("ingest", "convert and fit measurement CSVs");
  std::vector<std::string> ing_files;
  std::string ing_out_dir = ".", ing_calibration;
  int ing_degree = 9;
  double ing_level = 0.95;
  bool ing_volts = false, ing_bridge = false;
  ing->add_option("--files", ing_files, "measurement CSVs (t_s,eps1_ue,eps2_ue,eps3_ue,fsr_N)")
      ->required();
  ing->add_option("--degree", ing_degree, "polynomial degree");
  ing->add_option("--level", ing_level, "band level in (0,1)");
  ing->add_flag("--volts", ing_volts, "contact channel is raw volts (needs --calibration)");
  ing->add_option("--calibration", ing_calibration, "piecewise-linear volts->N CSV (v,N)");
  ing->add_flag("--bridge", ing_bridge, "quarter-bridge strain reduction instead of the direct conversion");
  double ing_gauge_factor = 2.1;
  ing->add_option("--gauge-factor", ing_gauge_factor, "strain gauge factor (certificate: 2.10 +- 1%)");
  ing->add_option("--out-dir", ing_out_dir, "output directory");

  // ---- study ----
  auto* stu = app.add_subcommand("study", "full multi-inclination comparison study");
  std::string stu_config, stu_out;
  stu->add_option("--config", stu_config, "study JSON config")->required();
  stu->add_option("--out", stu_out, "output directory (overrides config output_dir)");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    Material material;
    const LatticeSpec spec =
        spec_from_config(gen_config, gen_inclination, gen_inc_opt->count() > 0, &material);
    const LatticeModel model = build_lattice(spec, material);
    save_model_txt(model, gen_out);
    std::cout << "model: " << model.nodes.size() << " nodes, " << model.elements.size()
              << " elements -> " << gen_out << "\n";
    return 0;
  }

  if (ind->parsed()) {
    json j = ind_config.empty() ? json::object() : load_json_file(ind_config);
    RunConfig cfg = RunConfig::from_json(j);
    if (ind_inc_opt->count() > 0) cfg.lattice.inclination_deg = ind_inclination;
    if (cfg.indenter.indenter.total_travel_mm <= 0) cfg.indenter.indenter.total_travel_mm = 2.0;
    const LatticeModel model = build_lattice(cfg.lattice, cfg.material);
    const Indenter indenter = place_indenter(cfg.indenter, model);
    const IndentationHistory hist = simulate_indentation(model, indenter, cfg.solve,
                                                         cfg.contact_steps,
                                                         cfg.contact_penalty_n_per_mm);
    {
      std::ostringstream os;
      hist.to_csv(os);
      write_text_file(ind_out, os.str());
    }
    if (!ind_face.empty()) {
      std::ostringstream os;
      profile_to_csv(hist.steps.back().deformed_face, os);
      write_text_file(ind_face, os.str());
    }
    if (!ind_faces_dir.empty()) {
      fs::create_directories(ind_faces_dir);
      for (size_t k = 0; k < hist.steps.size(); ++k) {
        std::ostringstream os;
        profile_to_csv(hist.steps[k].deformed_face, os);
        char name[32];
        std::snprintf(name, sizeof(name), "face_%03zu.csv", k);
        write_text_file((fs::path(ind_faces_dir) / name).string(), os.str());
      }
    }
    if (!ind_nodal.empty()) {
      DeformedHistory nodal;
      for (const auto& s : hist.steps) {
        Substep st;
        st.load_factor = indenter.total_travel_mm > 0
                             ? s.travel_mm / indenter.total_travel_mm
                             : 0.0;
        st.u = s.displacements;
        st.newton_iters = s.newton_iters;
        nodal.substeps.push_back(std::move(st));
      }
      std::ostringstream os;
      nodal.to_csv(os);
      write_text_file(ind_nodal, os.str());
    }
    for (const auto& w : hist.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "final contact force " << hist.steps.back().contact_force_n << " N -> "
              << ind_out << "\n";
    return 0;
  }

  if (met->parsed()) {
    ordered_json summary;
    if (!met_profile.empty()) {
      const auto profile = profile_from_csv(csv::read_table_file(met_profile));
      const auto curv = curvature_profile(profile, met_window);
      summary["average_curvature_per_mm"] = curv.average_curvature;
      const double r2 = met_apex ? apex_radius(profile, met_window) : fit_circle_radius(profile);
      summary["r2_mm"] = r2;
      summary["r2_source"] = met_apex ? "apex_osculating" : "circle_fit";
      if (met_r1 > 0) summary["curvature_ratio"] = curvature_ratio(met_r1, r2);
      if (!met_curv_out.empty()) {
        std::ostringstream os;
        curvature_to_csv(curv, os);
        write_text_file(met_curv_out, os.str());
      }
    }
    if (!met_field.empty()) {
      const auto t = csv::read_table_file(met_field);
      const int cx = t.column("x_mm"), cy = t.column("y_mm"), cu = t.column("uy_mm");
      if (cx < 0 || cy < 0 || cu < 0)
        throw IngestError(met_field + ": expected columns x_mm,y_mm,uy_mm");
      NodalDisplacementField field;
      for (const auto& r : t.rows) {
        field.node_xy.push_back({r[cx], r[cy]});
        field.uy.push_back(r[cu]);
      }
      const auto line = extract_centerline(field, met_line_y, met_band);
      double peak_e = 0.0, peak_v = 0.0;
      for (const auto& s : line.samples) {
        peak_e = std::max(peak_e, std::abs(s.eyy));
        peak_v = std::max(peak_v, std::abs(s.v));
      }
      summary["peak_eyy"] = peak_e;
      summary["peak_v_mm"] = peak_v;
      if (!met_centerline_out.empty()) {
        std::ostringstream os;
        centerline_to_csv(line, os);
        write_text_file(met_centerline_out, os.str());
      }
    }
    if (!met_force.empty()) {
      const auto series = force_series_from_csv(csv::read_table_file(met_force));
      const auto st = force_stats(series);
      summary["force"] = {{"mean_n", st.mean_n},
                          {"sd_n", st.sd_n},
                          {"peak_n", st.peak_n},
                          {"t_peak_s", st.t_peak_s}};
    }
    if (summary.empty()) throw InputError("metrics: give --profile, --field or --force");
    std::cout << summary.dump(2) << "\n";
    return 0;
  }

  if (trq->parsed()) {
    MechanismGeometry geom;
    if (!trq_geometry.empty()) geom = mechanism_from_json(load_json_file(trq_geometry));
    geom.validate();
    if (trq_n < 2 || trq_hi <= trq_lo) throw InputError("torque: bad grasp grid");
    CrankSchedule sched;
    std::vector<TorquePoint> curve;
    for (int i = 0; i < trq_n; ++i) {
      const double t = static_cast<double>(i) / (trq_n - 1);
      const double grasp = trq_lo + t * (trq_hi - trq_lo);
      MechanismState state = sched.state_at(sched.crank_lo_deg +
                                                t * (sched.crank_hi_deg - sched.crank_lo_deg),
                                            geom);
      const double tau = required_torque(state, geom, grasp);
      curve.push_back({grasp, tau, 6.0 * tau});
    }
    std::ostringstream os;
    torque_curve_to_csv(curve, os);
    write_text_file(trq_out, os.str());
    std::cout << "torque sweep (" << trq_n << " points, tip-normal loading) -> " << trq_out
              << "\n";
    return 0;
  }

  if (ing->parsed()) {
    fs::create_directories(ing_out_dir);
    CsvSchema schema;
    if (ing_volts) {
      schema.fsr_unit = CsvSchema::FsrUnit::volts;
      if (ing_calibration.empty())
        throw InputError("ingest: --volts requires --calibration");
      const auto t = csv::read_table_file(ing_calibration);
      if (t.header.size() < 2) throw IngestError("calibration: need two columns (v,N)");
      for (const auto& r : t.rows) schema.fsr_calibration.push_back({r[0], r[1]});
    }
    const auto mode = ing_bridge ? StrainConversionMode::bridge : StrainConversionMode::direct;
    BeamGaugeParams gauge;
    gauge.gauge_factor = ing_gauge_factor;
    if (!gauge.gauge_factor_within_certificate())
      std::cerr << "warning: gauge factor " << gauge.gauge_factor
                << " is outside the certificate tolerance (2.10 +- 1%)\n";
    csv::Writer summary((fs::path(ing_out_dir) / "summary.csv").string());
    summary.row({"label", "channel", "N", "DF", "RSS", "R2", "AdjR2"});
    ordered_json jsum = ordered_json::array();
    for (const auto& file : ing_files) {
      const auto series = load_series_file(file, schema, fs::path(file).stem().string());
      for (int ch = 0; ch < 3; ++ch) {
        const auto samples = series.force_channel(ch, gauge, mode);
        FitResult fit;
        try {
          fit = fit_with_bands(samples, ing_degree, ing_level);
        } catch (const Error& e) {
          throw FitError(series.label + " P" + std::to_string(ch + 1) + ": " + e.what());
        }
        const std::string base = series.label + "_P" + std::to_string(ch + 1);
        std::ostringstream os;
        fit_to_csv(fit, os);
        write_text_file((fs::path(ing_out_dir) / (base + "_fit.csv")).string(), os.str());
        summary.row({series.label, "P" + std::to_string(ch + 1), std::to_string(fit.n_points),
                     std::to_string(fit.dof), csv::format_double(fit.rss),
                     csv::format_double(fit.r2), csv::format_double(fit.adj_r2)});
        jsum.push_back({{"label", series.label},
                        {"channel", "P" + std::to_string(ch + 1)},
                        {"n", fit.n_points},
                        {"dof", fit.dof},
                        {"rss", fit.rss},
                        {"r2", fit.r2},
                        {"adj_r2", fit.adj_r2}});
      }
    }
    write_text_file((fs::path(ing_out_dir) / "summary.json").string(), jsum.dump(2) + "\n");
    std::cout << "fits written under " << ing_out_dir << "\n";
    return 0;
  }

  if (stu->parsed()) {
    RunConfig cfg = RunConfig::from_json(load_json_file(stu_config));
    if (!stu_out.empty()) cfg.output_dir = stu_out;
    const ComparisonReport report = run_study(cfg, seed);
    int failures = 0;
    for (const auto& r : report.rows)
      if (r.failed) {
        ++failures;
        std::cerr << "inclination " << r.inclination_deg << " failed: " << r.error << "\n";
      }
    std::cout << "study: " << report.rows.size() - failures << "/" << report.rows.size()
              << " inclinations completed -> " << cfg.output_dir << "\n";
    return failures == 0 ? 0 : 1;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
