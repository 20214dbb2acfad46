// Command-line surface for the PVSE library: forward evolution, segmentation,
// benchmark synthesis and evaluation, and the shape-preservability checks.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "pvse/pvse.hpp"

namespace fs = std::filesystem;
using namespace pvse;

namespace {

int g_verbose = 0;

void log_line(const std::string& msg) {
  if (g_verbose > 0) std::cerr << msg << "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
}

MaskGrid load_mask(const std::string& path, GridSpec* spec_out) {
  const Image img = read_image(path);
  GridSpec spec(img.width, img.height);
  if (spec_out) *spec_out = spec;
  return image_to_mask(img, spec);
}

MaskGrid template_or_file(const std::string& name, const GridSpec& spec) {
  if (name == "animal" || name == "glyph-a" || name == "glyph-a-bold" ||
      name == "glyph-a-slanted" || name == "peanut" || name == "disk")
    return builtin_template(name, spec);
  GridSpec file_spec;
  MaskGrid m = load_mask(name, &file_spec);
  if (!(file_spec == spec))
    throw Error(ErrorCode::ConfigError, "template mask size does not match --size");
  return m;
}

/// --config FILE merge: command-line flags win; unknown keys are rejected.
void merge_config_file(const CLI::App* sub, const std::string& path,
                       const std::vector<std::pair<std::string, std::function<void(const Json&)>>>& keys) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config parse: ") + e.what());
  }
  std::vector<std::string> allowed{"schema_version"};
  for (const auto& [k, unused] : keys) allowed.push_back(k);
  check_keys(j, allowed, "config file");
  if (j.value("schema_version", 1) != 1)
    throw Error(ErrorCode::ConfigError, "unsupported schema_version");
  for (const auto& [key, apply] : keys) {
    if (!j.contains(key)) continue;
    const CLI::Option* opt = sub->get_option("--" + key);
    if (opt && opt->count() > 0) continue;  // explicit flag wins
    apply(j.at(key));
  }
}

Image grid_to_image_u8(const ScalarGrid& g) {
  Image img;
  img.width = g.spec().width;
  img.height = g.spec().height;
  img.channels = 1;
  img.data.resize(static_cast<size_t>(img.width) * img.height);
  for (int j = 0; j < img.height; ++j)
    for (int i = 0; i < img.width; ++i) {
      const double v = std::clamp(g.at(i, j), 0.0, 255.0);
      img.data[static_cast<size_t>(j) * img.width + i] = static_cast<std::uint8_t>(v);
    }
  return img;
}

void write_snapshot_svg(const std::string& path, const ScalarGrid& background,
                        const LevelSetField& field) {
  const Image img = grid_to_image_u8(background);
  write_text(path, render_overlay(img, field.spec(), extract_contour(field)));
}

std::string five_digits(int n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05d", n);
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_evolve(const std::string& init_mask, const std::string& basis_text,
               std::uint64_t velocity_seed, const std::string& velocity_file, int steps,
               double dt, int snapshot_every, const std::string& out_dir) {
  GridSpec spec;
  const MaskGrid mask = load_mask(init_mask, &spec);
  const LevelSetField start = init_from_mask(mask, spec);
  const BasisSpecDesc desc = BasisSpecDesc::parse_shorthand(basis_text);
  const PriorVariationBasis basis = desc.build(spec);
  const WarpModel model = desc.build_warp(spec);

  WarpVelocity vel;
  if (!velocity_file.empty()) {
    std::ifstream in(velocity_file);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + velocity_file);
    Json j;
    in >> j;
    vel.dtheta_dt = params_from_json(j, model);
  } else {
    ParamVector total = random_params(model, velocity_seed);
    for (double& v : total) v /= steps * dt;
    vel.dtheta_dt = total;
  }
  // Keep the orbit inside the canvas; forward runs are synthesis, not fits.
  vel.dtheta_dt = pvse::detail::canvas_safe_velocity(basis, spec, vel.dtheta_dt, steps, dt, mask);

  fs::create_directories(out_dir);
  ScalarGrid background(spec, 0.0);
  for (int j = 0; j < spec.height; ++j)
    for (int i = 0; i < spec.width; ++i) background.at(i, j) = mask.at(i, j) ? 255.0 : 0.0;

  SolverConfig cfg;
  cfg.dt = dt;
  auto [final_field, trace] =
      evolve_forward(start, basis, vel, steps, cfg, [&](int it, const LevelSetField& f) {
        if (snapshot_every > 0 && (it + 1) % snapshot_every == 0)
          write_snapshot_svg(out_dir + "/evolve_" + five_digits(it + 1) + ".svg", background, f);
      });

  write_png(out_dir + "/final_mask.png", mask_to_image(final_field.to_mask()));
  write_text(out_dir + "/trace.csv", trace_to_csv(trace));
  Json params = params_to_json(model, vel.dtheta_dt);
  params["steps"] = steps;
  params["dt"] = dt;
  write_text(out_dir + "/velocity.json", params.dump(2) + "\n");
  log_line("evolve: wrote " + out_dir);
  return 0;
}

int cmd_segment(const std::string& image_path, const std::string& init_mask,
                const std::string& energy_kind, const std::string& basis_text,
                const std::string& stages_file, double mu, double nu, double l1, double l2,
                double sigma, int channel, SolverConfig solver_cfg, int snapshot_every,
                const std::string& out_dir) {
  const Image img = read_image(image_path);
  GridSpec spec(img.width, img.height);
  const ScalarGrid u0 = image_to_grid(img, spec, channel);
  GridSpec mask_spec;
  const MaskGrid mask = load_mask(init_mask, &mask_spec);
  if (!(mask_spec == spec))
    throw Error(ErrorCode::ConfigError, "image and init mask sizes differ");
  const LevelSetField start = init_from_mask(mask, spec);

  auto make_energy = [&]() {
    if (energy_kind == "chan-vese") return EnergyModel::chan_vese(u0, mu, nu, l1, l2);
    if (energy_kind == "gac") return EnergyModel::gac(edge_indicator(u0, sigma));
    throw Error(ErrorCode::UsageError, "unknown --energy \"" + energy_kind + "\"");
  };

  std::vector<Stage> stages;
  if (!stages_file.empty()) {
    std::ifstream in(stages_file);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + stages_file);
    Json j;
    in >> j;
    if (!j.is_array() || j.empty())
      throw Error(ErrorCode::ConfigError, "--stages file must be a non-empty array");
    for (const Json& sj : j) {
      check_keys(sj, {"basis", "solver"}, "stage");
      Stage st{BasisSpecDesc::parse(sj.at("basis")).build(spec), make_energy(),
               sj.contains("solver") ? solver_config_from_json(sj.at("solver")) : solver_cfg};
      stages.push_back(std::move(st));
    }
  } else {
    stages.push_back({BasisSpecDesc::parse_shorthand(basis_text).build(spec), make_energy(),
                      solver_cfg});
  }

  fs::create_directories(out_dir);
  int snap_count = 0;
  auto [final_field, trace] = staged_minimize(start, stages, [&](int it, const LevelSetField& f) {
    if (snapshot_every > 0 && (it + 1) % snapshot_every == 0)
      write_snapshot_svg(out_dir + "/segment_" + five_digits(++snap_count) + ".svg", u0, f);
  });

  write_png(out_dir + "/final_mask.png", mask_to_image(final_field.to_mask()));
  write_text(out_dir + "/trace.csv", trace_to_csv(trace));
  write_snapshot_svg(out_dir + "/final_overlay.svg", u0, final_field);
  log_line("segment: " + std::to_string(trace.rows.size()) + " iterations");
  return trace.status == SolverStatus::Converged ? 0 : 1;
}

int cmd_synthesize(const std::string& template_name, int size, int n_rigid, int n_nonrigid,
                   const std::string& corruption, std::uint64_t seed,
                   const std::string& out_dir) {
  GridSpec spec(size, size);
  const MaskGrid tmpl = template_or_file(template_name, spec);
  SuiteDesign design;
  design.n_rigid = n_rigid;
  design.n_nonrigid = n_nonrigid;
  if (corruption == "missing") design.corruption = Corruption::Missing;
  else if (corruption == "merged") design.corruption = Corruption::Merged;
  else if (corruption == "none") design.corruption = Corruption::None;
  else throw Error(ErrorCode::UsageError, "unknown --corruption \"" + corruption + "\"");

  const auto suite = synthesize_suite(tmpl, design, seed);
  fs::create_directories(out_dir);
  write_png(out_dir + "/template.png", mask_to_image(tmpl));

  Json manifest;
  manifest["schema_version"] = 1;
  manifest["template"] = template_name;
  manifest["size"] = size;
  manifest["seed"] = seed;
  manifest["corruption"] = corruption;
  Json cases = Json::array();
  for (const TestCase& tc : suite) {
    const std::string truth = "truth_" + five_digits(tc.index) + ".png";
    const std::string corrupted = "corrupted_" + five_digits(tc.index) + ".png";
    write_png(out_dir + "/" + truth, mask_to_image(tc.truth_mask));
    write_png(out_dir + "/" + corrupted, mask_to_image(tc.corrupted_mask));
    Json cj;
    cj["index"] = tc.index;
    cj["seed"] = tc.seed;
    cj["deformation_kind"] = tc.deformation_kind;
    cj["deformation"] = tc.deformation;
    cj["truth"] = truth;
    cj["corrupted"] = corrupted;
    cases.push_back(cj);
  }
  manifest["cases"] = cases;
  write_text(out_dir + "/manifest.json", manifest.dump(2) + "\n");
  log_line("synthesize: " + std::to_string(suite.size()) + " cases");
  return 0;
}

int cmd_evaluate(const std::string& result_path, const std::string& truth_path,
                 const std::string& cls, const std::string& report_path,
                 const std::string& ledger_path) {
  GridSpec spec_a, spec_b;
  const MaskGrid result = load_mask(result_path, &spec_a);
  const MaskGrid truth = load_mask(truth_path, &spec_b);
  if (!(spec_a == spec_b)) throw Error(ErrorCode::ConfigError, "mask sizes differ");

  const double jac = jaccard(result, truth);
  const LevelSetField rf = init_from_mask(result, spec_a);
  const LevelSetField tf = init_from_mask(truth, spec_a);
  const PointSet rp = contour_point_set(rf, spec_a.spacing);
  const PointSet tp = contour_point_set(tf, spec_a.spacing);
  const double raw = hausdorff(rp, tp);
  const TransformClass tc =
      cls == "affine" ? TransformClass::Affine : TransformClass::Similarity;
  const AlignmentResult aligned = aligned_distance(rp, tp, tc);

  Json report;
  report["result_mask"] = result_path;
  report["truth_mask"] = truth_path;
  report["class"] = cls;
  report["jaccard"] = jac;
  report["hausdorff"] = raw;
  report["aligned_distance"] = aligned.residual_distance;
  const std::string text = report.dump(2) + "\n";
  if (report_path.empty())
    std::cout << text;
  else
    write_text(report_path, text);

  if (!ledger_path.empty()) {
    const bool fresh = !fs::exists(ledger_path);
    std::ofstream ledger(ledger_path, std::ios::app);
    if (!ledger) throw Error(ErrorCode::IoError, "cannot append to " + ledger_path);
    if (fresh) ledger << "result_mask,truth_mask,class,jaccard,hausdorff,aligned_distance\n";
    ledger << result_path << "," << truth_path << "," << cls << "," << csv_number(jac) << ","
           << csv_number(raw) << "," << csv_number(aligned.residual_distance) << "\n";
  }
  return 0;
}

int cmd_bench(const std::string& template_name, int size, std::uint64_t seed,
              int n_velocities, int steps, int n_rigid, int n_nonrigid,
              const std::string& out_dir) {
  GridSpec glyph_spec(64, 64);
  fs::create_directories(out_dir);

  // Forward-evolution evaluation on the glyph, both rigid bases.
  for (const std::string kind : {"similarity", "affine"}) {
    BasisSpecDesc desc;
    desc.kind = kind;
    const ForwardEvalReport rep = run_forward_eval(builtin_template("glyph-a", glyph_spec),
                                                   desc, n_velocities, steps, seed);
    std::string csv = "iteration,q25,median,q75,outliers\n";
    for (size_t it = 0; it < rep.per_iteration.size(); ++it) {
      const SummaryStats& st = rep.per_iteration[it];
      csv += std::to_string(it) + "," + csv_number(st.q25) + "," + csv_number(st.median) +
             "," + csv_number(st.q75) + "," + std::to_string(st.outliers.size()) + "\n";
    }
    write_text(out_dir + "/forward_" + kind + ".csv", csv);
  }

  // Recovery benchmark: rigid suite with missing parts, similarity pipeline.
  GridSpec spec(size, size);
  const MaskGrid tmpl = template_or_file(template_name, spec);
  SuiteDesign design;
  design.n_rigid = n_rigid;
  design.n_nonrigid = n_nonrigid;
  design.corruption = Corruption::Missing;
  const auto suite = synthesize_suite(tmpl, design, seed);

  PipelineSpec pipeline;
  StageSpec rigid_stage;
  rigid_stage.basis.kind = "similarity";
  rigid_stage.config.max_iterations = 600;
  pipeline.stages.push_back(rigid_stage);
  const RecoveryReport rep = run_recovery_eval(suite, pipeline, true);

  std::string csv = "case,kind,jaccard,hausdorff,converged,iterations,preamble_distance\n";
  for (size_t k = 0; k < rep.cases.size(); ++k) {
    const RecoveryCase& rc = rep.cases[k];
    csv += std::to_string(rc.index) + "," + suite[k].deformation_kind + "," +
           csv_number(rc.jaccard) + "," + csv_number(rc.aligned_residual) + "," +
           (rc.converged ? "1" : "0") + "," + std::to_string(rc.iterations) + "," +
           csv_number(rep.preamble_distance.empty() ? 0.0 : rep.preamble_distance[k]) + "\n";
  }
  write_text(out_dir + "/recovery.csv", csv);

  Json summary;
  summary["seed"] = seed;
  summary["template"] = template_name;
  summary["mean_jaccard"] = rep.mean_jaccard;
  summary["median_jaccard"] = rep.jaccard_stats.median;
  summary["q25"] = rep.jaccard_stats.q25;
  summary["q75"] = rep.jaccard_stats.q75;
  write_text(out_dir + "/summary.json", summary.dump(2) + "\n");
  log_line("bench: mean jaccard " + csv_number(rep.mean_jaccard));
  return 0;
}

int cmd_validate_theory(const std::string& shape, const std::string& basis_text,
                        std::uint64_t velocity_seed, int steps, int snapshot_every,
                        const std::string& out_dir) {
  GridSpec spec(128, 128);
  MaskGrid mask = template_or_file(shape, spec);
  const LevelSetField start = init_from_mask(mask, spec);
  const BasisSpecDesc desc = BasisSpecDesc::parse_shorthand(basis_text);
  const PriorVariationBasis basis = desc.build(spec);
  const WarpModel model = desc.build_warp(spec);

  ParamVector vel = random_params(model, velocity_seed);
  const double scale = desc.kind == "vibration" ? 1.0 : 0.02;  // gentle rigid motion
  for (double& v : vel) v *= scale / steps;
  vel = pvse::detail::canvas_safe_velocity(basis, spec, vel, steps, 1.0, mask);

  std::vector<LevelSetField> snapshots{start};
  std::vector<ParamVector> velocities;
  LevelSetField cur = start;
  SolverConfig cfg;
  for (int s = 0; s < steps; s += snapshot_every) {
    const int chunk = std::min(snapshot_every, steps - s);
    auto [next, trace] = evolve_forward(cur, basis, WarpVelocity{vel}, chunk, cfg);
    cur = std::move(next);
    snapshots.push_back(cur);
    velocities.push_back(vel);
  }

  const BoundCheckReport thm = check_theorem1(snapshots, basis, velocities,
                                              static_cast<double>(snapshot_every));
  BoundCheckReport cor;
  bool cor_ok = true;
  try {
    cor = check_corollary1(snapshots, basis, velocities, static_cast<double>(snapshot_every));
  } catch (const Error&) {
    cor_ok = false;  // shapes without two persistent crossings
  }

  fs::create_directories(out_dir);
  std::string csv = "check,step,measured,bound,ratio,exceeded,births,deaths\n";
  for (const BoundStep& st : thm.steps)
    csv += "theorem1," + std::to_string(st.index) + "," + csv_number(st.measured_max) + "," +
           csv_number(st.bound) + "," + csv_number(st.ratio) + "," +
           (st.exceeded ? "1" : "0") + "," + std::to_string(st.births) + "," +
           std::to_string(st.deaths) + "\n";
  if (cor_ok)
    for (const BoundStep& st : cor.steps)
      csv += "corollary1," + std::to_string(st.index) + "," + csv_number(st.measured_max) +
             "," + csv_number(st.bound) + "," + csv_number(st.ratio) + "," +
             (st.exceeded ? "1" : "0") + "," + std::to_string(st.births) + "," +
             std::to_string(st.deaths) + "\n";
  write_text(out_dir + "/bound_checks.csv", csv);

  Json summary;
  summary["asserted_pass"] = thm.asserted_pass;
  summary["max_ratio"] = thm.max_ratio;
  summary["second_derivative_total"] = thm.second_derivative_total;
  summary["corollary_available"] = cor_ok;
  if (cor_ok) summary["corollary_max_ratio"] = cor.max_ratio;
  write_text(out_dir + "/summary.json", summary.dump(2) + "\n");
  return thm.asserted_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape alignment and recovery by prior variation shape evolution"};
  app.require_subcommand(1);
  app.add_flag("-v,--verbose", g_verbose, "log progress to stderr");

  try {
    // evolve ----------------------------------------------------------------
    auto* evolve = app.add_subcommand("evolve", "forward PVSE with a prescribed velocity");
    std::string ev_mask, ev_basis = "similarity", ev_velfile, ev_out = "evolve_out", ev_cfg;
    std::uint64_t ev_seed = 1;
    int ev_steps = 50, ev_snap = 10;
    double ev_dt = 1.0;
    evolve->add_option("--init-mask", ev_mask, "initial region mask (png/pgm)");
    evolve->add_option("--basis", ev_basis, "similarity|affine|vibration:MxN|order:K|a+b");
    evolve->add_option("--velocity-seed", ev_seed, "seeded random velocity");
    evolve->add_option("--velocity-file", ev_velfile, "velocity parameters json");
    evolve->add_option("--steps", ev_steps, "iterations");
    evolve->add_option("--dt", ev_dt, "artificial time step");
    evolve->add_option("--snapshot-every", ev_snap, "svg snapshot period (0 = none)");
    evolve->add_option("--out-dir", ev_out, "output directory");
    evolve->add_option("--config", ev_cfg, "json config file (flags win)");

    // segment ---------------------------------------------------------------
    auto* segment = app.add_subcommand("segment", "energy-minimizing PVSE segmentation");
    std::string sg_image, sg_mask, sg_energy = "chan-vese", sg_basis = "similarity";
    std::string sg_stages, sg_out = "segment_out", sg_cfg;
    double sg_mu = 0.1 * 255 * 255, sg_nu = 0.0, sg_l1 = 1.0, sg_l2 = 1.0, sg_sigma = 1.5;
    int sg_channel = -1, sg_snap = 25, sg_maxit = 500;
    segment->add_option("--image", sg_image, "input image (png/pgm)");
    segment->add_option("--init-mask", sg_mask, "initial region mask");
    segment->add_option("--energy", sg_energy, "chan-vese|gac");
    segment->add_option("--basis", sg_basis, "prior variation basis");
    segment->add_option("--stages", sg_stages, "staged pipeline json");
    segment->add_option("--mu", sg_mu, "length penalty");
    segment->add_option("--nu", sg_nu, "area penalty");
    segment->add_option("--lambda1", sg_l1, "inside data weight");
    segment->add_option("--lambda2", sg_l2, "outside data weight");
    segment->add_option("--sigma", sg_sigma, "edge indicator smoothing (cells)");
    segment->add_option("--channel", sg_channel, "color channel (-1 = luminance)");
    segment->add_option("--max-iterations", sg_maxit, "iteration cap");
    segment->add_option("--snapshot-every", sg_snap, "svg snapshot period (0 = none)");
    segment->add_option("--out-dir", sg_out, "output directory");
    segment->add_option("--config", sg_cfg, "json config file (flags win)");

    // synthesize ------------------------------------------------------------
    auto* synth = app.add_subcommand("synthesize", "generate a deformed/corrupted test suite");
    std::string sy_template = "animal", sy_corruption = "missing", sy_out = "suite_out";
    int sy_size = 128, sy_rigid = 50, sy_nonrigid = 50;
    std::uint64_t sy_seed = 1;
    synth->add_option("--template", sy_template, "built-in name or mask path");
    synth->add_option("--size", sy_size, "grid size");
    synth->add_option("--n-rigid", sy_rigid, "rigid cases");
    synth->add_option("--n-nonrigid", sy_nonrigid, "non-rigid cases");
    synth->add_option("--corruption", sy_corruption, "missing|merged|none");
    synth->add_option("--seed", sy_seed, "suite seed");
    synth->add_option("--out-dir", sy_out, "output directory");

    // evaluate ---------------------------------------------------------------
    auto* eval = app.add_subcommand("evaluate", "score a result mask against ground truth");
    std::string evr_result, evr_truth, evr_class = "similarity", evr_report, evr_ledger;
    eval->add_option("--result-mask", evr_result, "result mask");
    eval->add_option("--truth-mask", evr_truth, "ground-truth mask");
    eval->add_option("--class", evr_class, "similarity|affine");
    eval->add_option("--report", evr_report, "json report path (default: stdout)");
    eval->add_option("--ledger", evr_ledger, "csv ledger to append to");

    // bench -----------------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "run the benchmark protocols");
    std::string bn_template = "animal", bn_out = "bench_out";
    int bn_size = 128, bn_velocities = 10, bn_steps = 50, bn_rigid = 50, bn_nonrigid = 0;
    std::uint64_t bn_seed = 1;
    bench->add_option("--template", bn_template, "built-in name or mask path");
    bench->add_option("--size", bn_size, "grid size for recovery");
    bench->add_option("--seed", bn_seed, "benchmark seed");
    bench->add_option("--n-velocities", bn_velocities, "forward-eval velocities");
    bench->add_option("--steps", bn_steps, "forward-eval iterations");
    bench->add_option("--n-rigid", bn_rigid, "recovery rigid cases");
    bench->add_option("--n-nonrigid", bn_nonrigid, "recovery non-rigid cases");
    bench->add_option("--out-dir", bn_out, "output directory");

    // validate-theory ---------------------------------------------------------
    auto* theory = app.add_subcommand("validate-theory", "empirical curvature bound checks");
    std::string th_shape = "peanut", th_basis = "vibration:1x1", th_out = "theory_out";
    std::uint64_t th_seed = 1;
    int th_steps = 40, th_snap = 5;
    theory->add_option("--shape", th_shape, "built-in name or mask path");
    theory->add_option("--basis", th_basis, "prior variation basis");
    theory->add_option("--velocity-seed", th_seed, "seeded velocity");
    theory->add_option("--steps", th_steps, "evolution steps");
    theory->add_option("--snapshot-every", th_snap, "snapshot period");
    theory->add_option("--out-dir", th_out, "output directory");

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e);
      const bool help = e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp";
      return help ? 0 : (rc == 0 ? 0 : 2);
    }

    if (*evolve) {
      merge_config_file(evolve, ev_cfg,
                        {{"basis", [&](const Json& v) { ev_basis = v.get<std::string>(); }},
                         {"steps", [&](const Json& v) { ev_steps = v.get<int>(); }},
                         {"dt", [&](const Json& v) { ev_dt = v.get<double>(); }},
                         {"snapshot-every", [&](const Json& v) { ev_snap = v.get<int>(); }},
                         {"velocity-seed", [&](const Json& v) { ev_seed = v.get<std::uint64_t>(); }},
                         {"out-dir", [&](const Json& v) { ev_out = v.get<std::string>(); }},
                         {"init-mask", [&](const Json& v) { ev_mask = v.get<std::string>(); }}});
      if (ev_mask.empty())
        throw Error(ErrorCode::UsageError, "evolve requires --init-mask");
      return cmd_evolve(ev_mask, ev_basis, ev_seed, ev_velfile, ev_steps, ev_dt, ev_snap, ev_out);
    }
    if (*segment) {
      merge_config_file(segment, sg_cfg,
                        {{"image", [&](const Json& v) { sg_image = v.get<std::string>(); }},
                         {"init-mask", [&](const Json& v) { sg_mask = v.get<std::string>(); }},
                         {"energy", [&](const Json& v) { sg_energy = v.get<std::string>(); }},
                         {"basis", [&](const Json& v) { sg_basis = v.get<std::string>(); }},
                         {"mu", [&](const Json& v) { sg_mu = v.get<double>(); }},
                         {"nu", [&](const Json& v) { sg_nu = v.get<double>(); }},
                         {"lambda1", [&](const Json& v) { sg_l1 = v.get<double>(); }},
                         {"lambda2", [&](const Json& v) { sg_l2 = v.get<double>(); }},
                         {"sigma", [&](const Json& v) { sg_sigma = v.get<double>(); }},
                         {"channel", [&](const Json& v) { sg_channel = v.get<int>(); }},
                         {"max-iterations", [&](const Json& v) { sg_maxit = v.get<int>(); }},
                         {"out-dir", [&](const Json& v) { sg_out = v.get<std::string>(); }}});
      if (sg_image.empty()) throw Error(ErrorCode::UsageError, "segment requires --image");
      if (sg_mask.empty()) throw Error(ErrorCode::UsageError, "segment requires --init-mask");
      SolverConfig cfg;
      cfg.max_iterations = sg_maxit;
      return cmd_segment(sg_image, sg_mask, sg_energy, sg_basis, sg_stages, sg_mu, sg_nu,
                         sg_l1, sg_l2, sg_sigma, sg_channel, cfg, sg_snap, sg_out);
    }
    if (*synth)
      return cmd_synthesize(sy_template, sy_size, sy_rigid, sy_nonrigid, sy_corruption,
                            sy_seed, sy_out);
    if (*eval) {
      if (evr_result.empty()) throw Error(ErrorCode::UsageError, "evaluate requires --result-mask");
      if (evr_truth.empty()) throw Error(ErrorCode::UsageError, "evaluate requires --truth-mask");
      return cmd_evaluate(evr_result, evr_truth, evr_class, evr_report, evr_ledger);
    }
    if (*bench)
      return cmd_bench(bn_template, bn_size, bn_seed, bn_velocities, bn_steps, bn_rigid,
                       bn_nonrigid, bn_out);
    if (*theory)
      return cmd_validate_theory(th_shape, th_basis, th_seed, th_steps, th_snap, th_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::UsageError: return 2;
      case ErrorCode::ConfigError: return 3;
      case ErrorCode::IoError: return 4;
      case ErrorCode::Diverged: return 1;
      default: return 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
