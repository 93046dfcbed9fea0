#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "elastoref/epr.hpp"
#include "elastoref/error.hpp"
#include "elastoref/grid.hpp"
#include "elastoref/io.hpp"
#include "elastoref/known_ops.hpp"
#include "elastoref/metrics.hpp"
#include "elastoref/phantom.hpp"
#include "elastoref/stencil.hpp"

namespace elastoref::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "1.0.0";

// What a subcommand did, for the run manifest and for replay.
struct RunRecord {
  std::string subcommand;
  std::vector<std::string> argv;
  json parameters = json::object();
  std::vector<std::string> inputs;
  std::vector<fs::path> outputs;
  std::optional<std::uint64_t> seed;
  json trace_summary = nullptr;
  fs::path manifest_path;
};

std::vector<double> parse_numbers(const std::string& text, std::size_t min_count, std::size_t max_count,
                                  const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) {
      throw ParameterError(flag + ": '" + item + "' is not a finite number");
    }
    values.push_back(v);
  }
  if (values.size() < min_count || values.size() > max_count) {
    throw ParameterError(flag + ": expected " + std::to_string(min_count) +
                         (min_count == max_count ? "" : "-" + std::to_string(max_count)) +
                         " comma-separated values, got '" + text + "'");
  }
  return values;
}

RoiSpec parse_roi(const std::string& text, const std::string& flag) {
  const auto v = parse_numbers(text, 4, 4, flag);
  for (double x : v) {
    if (x < 0.0 || x != std::floor(x)) throw ParameterError(flag + ": ROI entries must be non-negative integers");
  }
  return {static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]), static_cast<std::size_t>(v[2]),
          static_cast<std::size_t>(v[3])};
}

json roi_json(const RoiSpec& r) { return json::array({r.row_start, r.col_start, r.rows, r.cols}); }

json stats_json(const RoiStats& s) { return {{"mean", s.mean}, {"std", s.std}, {"count", s.count}}; }

std::string trace_csv(const RefinementTrace& trace) {
  std::string out = "op,iteration,out_of_range_fraction,residual_l2,max_update\n";
  for (const TraceRecord& r : trace.records) {
    out += r.op + "," + std::to_string(r.iteration) + "," + io::format_double(r.out_of_range_fraction) + "," +
           io::format_double(r.residual_l2) + "," + io::format_double(r.max_update) + "\n";
  }
  return out;
}

json trace_summary(const RefinementTrace& trace) {
  json s = {{"records", trace.size()}};
  if (trace.size() > 0) {
    const TraceRecord& last = trace.records.back();
    s["final_out_of_range_fraction"] = last.out_of_range_fraction;
    s["final_residual_l2"] = last.residual_l2;
    s["final_max_update_mm"] = last.max_update;
  }
  return s;
}

json picture_json(const PictureLossReport& r) {
  return {{"l_vd", r.l_vd},
          {"l_vs", r.l_vs},
          {"l_v", r.l_v},
          {"mean_inrange_epr", r.mean_inrange_epr},
          {"out_of_range_fraction", r.out_of_range_fraction},
          {"beta", r.beta},
          {"lambda_vs", r.lambda_vs}};
}

void write_output(RunRecord& rec, const fs::path& path, const std::string& bytes) {
  io::write_file(path, bytes);
  rec.outputs.push_back(path);
}

void write_grid_output(RunRecord& rec, const fs::path& path, const Grid2D& g) {
  write_output(rec, path, io::encode_grid(g));
}

void write_json_output(RunRecord& rec, const fs::path& path, const json& j) {
  write_output(rec, path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Option bundles shared between subcommands.

struct ClipperOptions {
  FeasibilityBounds bounds;
  int iterations = 10;
  double floor = kDefaultEprFloor;
  double tol = 0.0;
  bool literal_sign = false;

  ClipperConfig config() const {
    ClipperConfig c;
    c.bounds = bounds;
    c.iterations = iterations;
    c.epr_floor = floor;
    if (tol > 0.0) c.convergence_tol = tol;
    c.literal_integration = literal_sign;
    return c;
  }

  json to_json() const {
    return {{"vmin", bounds.v_min},         {"vmax", bounds.v_max}, {"clip_iterations", iterations},
            {"floor", floor},               {"tol", tol},           {"literal_sign", literal_sign}};
  }
};

struct GuoOptions {
  int iterations = 100;
  double lambda1 = 0.1;
  double lambda2 = 0.1;
  double sigma = 1.0;
  StencilMode stencil = StencilMode::corrected;
  EdgeMode edge = EdgeMode::antisymmetric;

  GuoConfig config(const FeasibilityBounds& bounds, double floor) const {
    GuoConfig c;
    c.iterations = iterations;
    c.lambda1 = lambda1;
    c.lambda2 = lambda2;
    c.gaussian_sigma = sigma;
    c.stencil = stencil;
    c.edge = edge;
    c.trace_bounds = bounds;
    c.trace_epr_floor = floor;
    return c;
  }

  json to_json() const {
    return {{"guo_iterations", iterations},
            {"lambda1", lambda1},
            {"lambda2", lambda2},
            {"sigma", sigma},
            {"stencil", to_string(stencil)},
            {"edge", edge == EdgeMode::antisymmetric ? "antisymmetric" : "replicate"}};
  }
};

void add_bounds_options(CLI::App* sc, FeasibilityBounds& b) {
  sc->add_option("--vmin", b.v_min, "Lower EPR bound (exclusive)");
  sc->add_option("--vmax", b.v_max, "Upper EPR bound (exclusive)");
}

void add_floor_option(CLI::App* sc, double& floor) {
  sc->add_option("--floor", floor, "Axial strain magnitude below which EPR is treated as degenerate");
}

void add_clipper_options(CLI::App* sc, ClipperOptions& o, const std::string& iterations_flag) {
  add_bounds_options(sc, o.bounds);
  add_floor_option(sc, o.floor);
  sc->add_option(iterations_flag, o.iterations, "Clipper iterations")->check(CLI::PositiveNumber);
  sc->add_option("--tol", o.tol, "Stop when the largest lateral update (mm) falls below this; 0 disables");
  sc->add_flag("--literal-sign", o.literal_sign,
               "Integrate epr*e11 per column step without sign or spacing (bare recurrence)");
}

void add_guo_options(CLI::App* sc, GuoOptions& o, const std::string& iterations_flag) {
  sc->add_option(iterations_flag, o.iterations, "Relaxation iterations")->check(CLI::PositiveNumber);
  sc->add_option("--lambda1", o.lambda1, "Momentum weight");
  sc->add_option("--lambda2", o.lambda2, "Step size; stencils act in index units so this absorbs spacing");
  sc->add_option("--sigma", o.sigma, "Gaussian sigma in samples applied after every step; 0 disables");
  const std::map<std::string, StencilMode> stencils{{"corrected", StencilMode::corrected},
                                                    {"paper-literal", StencilMode::paper_literal}};
  sc->add_option("--stencil", o.stencil, "Axial-displacement stencil: corrected | paper-literal")
      ->transform(CLI::CheckedTransformer(stencils, CLI::ignore_case))
      ->default_str("corrected");
  const std::map<std::string, EdgeMode> edges{{"antisymmetric", EdgeMode::antisymmetric},
                                              {"replicate", EdgeMode::replicate}};
  sc->add_option("--edge", o.edge, "Edge handling of stencils and Gaussian: antisymmetric | replicate")
      ->transform(CLI::CheckedTransformer(edges, CLI::ignore_case))
      ->default_str("antisymmetric");
}

std::vector<KnownOperator> parse_order(const std::string& text) {
  std::vector<KnownOperator> order;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "clip" || item == "clipper") {
      order.push_back(KnownOperator::clipper);
    } else if (item == "guo") {
      order.push_back(KnownOperator::guo);
    } else {
      throw ParameterError("--order: unknown operator '" + item + "' (use clip, guo)");
    }
  }
  if (order.empty()) throw ParameterError("--order: no operators given");
  return order;
}

fs::path manifest_path_for_dir(const fs::path& dir) { return dir / "manifest.json"; }

fs::path manifest_path_for_file(const fs::path& file) {
  fs::path p = file;
  p += ".manifest.json";
  return p;
}

void write_manifest(const RunRecord& rec, double wall_time) {
  json outputs = json::array();
  for (const fs::path& p : rec.outputs) {
    outputs.push_back({{"path", p.generic_string()}, {"fnv1a64", fnv1a64_hex(io::read_file(p))}});
  }
  json m = {{"tool", "elastoref"},
            {"version", kToolVersion},
            {"subcommand", rec.subcommand},
            {"argv", rec.argv},
            {"parameters", rec.parameters},
            {"inputs", rec.inputs},
            {"outputs", outputs},
            {"seed", rec.seed ? json(*rec.seed) : json(nullptr)},
            {"wall_time_s", wall_time},
            {"trace_summary", rec.trace_summary}};
  io::write_file(rec.manifest_path, m.dump(2) + "\n");
}

void echo_parameters(const RunRecord& rec, std::ostream& err) {
  err << "elastoref " << rec.subcommand << ":";
  for (const auto& [key, value] : rec.parameters.items()) err << " " << key << "=" << value.dump();
  err << "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, RunRecord* record_out);

}  // namespace

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

namespace {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, RunRecord* record_out) {
  CLI::App app{"Lateral displacement refinement and evaluation for quasi-static ultrasound elastography",
               "elastoref"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", kToolVersion);
  app.footer(
      "Exit status: 0 success, 2 usage error, 3 data/format error, 4 degenerate statistics.\n"
      "Every run writes a JSON manifest next to its outputs.");

  RunRecord rec;
  rec.argv = args;

  // phantom ------------------------------------------------------------------
  PhantomSpec pspec;
  std::vector<std::string> inclusion_texts;
  double perturb_fraction = 0.0;
  double perturb_magnitude = 0.0;
  std::uint64_t perturb_seed = 0;
  std::string out_path;
  auto* phantom = app.add_subcommand("phantom", "Generate a synthetic ground-truth displacement phantom");
  phantom->add_option("--out", out_path, "Output directory")->required();
  phantom->add_option("--rows", pspec.geometry.rows, "Axial samples");
  phantom->add_option("--cols", pspec.geometry.cols, "Lateral lines");
  phantom->add_option("--axial-spacing", pspec.geometry.axial_spacing, "mm per axial sample");
  phantom->add_option("--lateral-spacing", pspec.geometry.lateral_spacing, "mm per lateral line");
  phantom->add_option("--eps0", pspec.applied_axial_strain, "Applied axial compression (strain magnitude)");
  phantom->add_option("--nu", pspec.poisson_ratio, "Poisson's ratio of the prescribed lateral strain");
  phantom->add_option("--inclusion", inclusion_texts,
                      "Inclusion 'center_axial_mm,center_lateral_mm,radius_mm,contrast[,softness_mm]'; repeatable");
  phantom->add_option("--noise-axial", pspec.noise_std_axial, "Axial displacement noise std (mm)");
  phantom->add_option("--noise-lateral", pspec.noise_std_lateral, "Lateral displacement noise std (mm)");
  phantom->add_option("--seed", pspec.seed, "Noise seed");
  phantom->add_option("--perturb-fraction", perturb_fraction, "Fraction of pixels whose EPR is shifted");
  phantom->add_option("--perturb-magnitude", perturb_magnitude, "Signed EPR shift of perturbed pixels");
  phantom->add_option("--perturb-seed", perturb_seed, "Seed selecting the perturbed pixels");

  // strain -------------------------------------------------------------------
  std::string in_path;
  auto* strain = app.add_subcommand("strain", "Differentiate displacements into axial/lateral strain grids");
  strain->add_option("--in", in_path, "Displacement directory (axial.efg, lateral.efg)")->required();
  strain->add_option("--out", out_path, "Output directory")->required();

  // epr ----------------------------------------------------------------------
  FeasibilityBounds bounds;
  double floor = kDefaultEprFloor;
  double beta = 1.0;
  double lambda_vs = 1.0;
  auto* epr_cmd = app.add_subcommand("epr", "EPR grid, feasibility mask and loss diagnostics from strains");
  epr_cmd->add_option("--in", in_path, "Strain directory (e11.efg, e22.efg)")->required();
  epr_cmd->add_option("--out", out_path, "Output directory")->required();
  add_bounds_options(epr_cmd, bounds);
  add_floor_option(epr_cmd, floor);
  epr_cmd->add_option("--beta", beta, "Weight of the lateral EPR-gradient term in the smoothness loss");
  epr_cmd->add_option("--lambda-vs", lambda_vs, "Weight of the smoothness loss in the combined loss");

  // clip / guo / refine ------------------------------------------------------
  ClipperOptions clip_opts;
  GuoOptions guo_opts;
  std::string order_text = "clip,guo";
  auto* clip = app.add_subcommand("clip", "EPR-range clipper on a displacement field");
  clip->add_option("--in", in_path, "Displacement directory")->required();
  clip->add_option("--out", out_path, "Output directory")->required();
  add_clipper_options(clip, clip_opts, "--iterations");

  auto* guo = app.add_subcommand("guo", "Incompressibility relaxation with per-step Gaussian smoothing");
  guo->add_option("--in", in_path, "Displacement directory")->required();
  guo->add_option("--out", out_path, "Output directory")->required();
  add_guo_options(guo, guo_opts, "--iterations");
  add_bounds_options(guo, bounds);
  add_floor_option(guo, floor);

  auto* refine = app.add_subcommand("refine", "Clipper and relaxation composed in sequence");
  refine->add_option("--in", in_path, "Displacement directory")->required();
  refine->add_option("--out", out_path, "Output directory")->required();
  refine->add_option("--order", order_text, "Comma-separated operator sequence from {clip, guo}");
  add_clipper_options(refine, clip_opts, "--clip-iterations");
  add_guo_options(refine, guo_opts, "--guo-iterations");

  // metrics ------------------------------------------------------------------
  std::string grid_path;
  std::string roi_t_text;
  std::string roi_b_text;
  std::string component = "lateral";
  auto* metrics = app.add_subcommand("metrics", "CNR, SR and incompressibility residual");
  auto* metrics_in = metrics->add_option("--in", in_path, "Strain directory; also yields the residual");
  auto* metrics_grid = metrics->add_option("--grid", grid_path, "Single EFG1 grid to evaluate");
  metrics_in->excludes(metrics_grid);
  metrics->add_option("--component", component, "Strain used with --in: lateral | axial")
      ->check(CLI::IsMember({"lateral", "axial"}));
  metrics->add_option("--roi-t", roi_t_text, "Target ROI 'row,col,height,width'")->required();
  metrics->add_option("--roi-b", roi_b_text, "Background ROI 'row,col,height,width'")->required();
  metrics->add_option("--out", out_path, "Optional JSON report path");

  // hist ---------------------------------------------------------------------
  std::size_t bins = kDefaultHistogramBins;
  std::string range_text = io::format_double(kDefaultHistogramLo) + "," + io::format_double(kDefaultHistogramHi);
  auto* hist = app.add_subcommand("hist", "EPR histogram as CSV");
  hist->add_option("--in", in_path, "Strain directory")->required();
  hist->add_option("--out", out_path, "CSV path")->required();
  hist->add_option("--bins", bins, "Number of bins")->check(CLI::PositiveNumber);
  hist->add_option("--range", range_text, "Binning range 'lo,hi'");
  add_bounds_options(hist, bounds);
  add_floor_option(hist, floor);

  // render -------------------------------------------------------------------
  std::string window_text;
  auto* render = app.add_subcommand("render", "Render a grid as an 8-bit binary PGM");
  render->add_option("--grid", grid_path, "EFG1 grid")->required();
  render->add_option("--out", out_path, "PGM path")->required();
  render->add_option("--range", window_text, "Fixed window 'lo,hi'; default is the grid's min/max");

  // replay -------------------------------------------------------------------
  std::string manifest_text;
  std::string workdir;
  std::string record_path;
  bool no_verify = false;
  auto* replay = app.add_subcommand("replay", "Re-run a run manifest or a pipeline of them and verify outputs");
  replay->add_option("manifest", manifest_text, "Run manifest or pipeline JSON")->required();
  replay->add_option("--workdir", workdir, "Directory the recorded relative paths resolve against");
  replay->add_option("--record", record_path, "Write the pipeline with freshly computed output digests here");
  replay->add_flag("--no-verify", no_verify, "Skip digest verification");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    if (*phantom) {
      rec.subcommand = "phantom";
      for (const std::string& t : inclusion_texts) {
        const auto v = parse_numbers(t, 4, 5, "--inclusion");
        pspec.inclusions.push_back({v[0], v[1], v[2], v[3], v.size() > 4 ? v[4] : 0.0});
      }
      json incl = json::array();
      for (const Inclusion& inc : pspec.inclusions) {
        incl.push_back({inc.center_axial, inc.center_lateral, inc.radius, inc.strain_contrast, inc.edge_softness});
      }
      rec.parameters = {{"rows", pspec.geometry.rows},
                        {"cols", pspec.geometry.cols},
                        {"axial_spacing", pspec.geometry.axial_spacing},
                        {"lateral_spacing", pspec.geometry.lateral_spacing},
                        {"eps0", pspec.applied_axial_strain},
                        {"nu", pspec.poisson_ratio},
                        {"inclusions", incl},
                        {"noise_axial", pspec.noise_std_axial},
                        {"noise_lateral", pspec.noise_std_lateral},
                        {"seed", pspec.seed},
                        {"perturb_fraction", perturb_fraction},
                        {"perturb_magnitude", perturb_magnitude},
                        {"perturb_seed", perturb_seed}};
      rec.seed = pspec.seed;
      echo_parameters(rec, err);

      const fs::path dir = out_path;
      Phantom p = generate(pspec);
      DisplacementField noisy = p.noisy;
      std::vector<std::size_t> perturbed;
      if (perturb_fraction > 0.0) {
        PerturbedField pf = perturb_epr(noisy, perturb_fraction, perturb_magnitude, perturb_seed);
        noisy = std::move(pf.field);
        perturbed = std::move(pf.indices);
      }
      fs::create_directories(dir / "clean");
      write_grid_output(rec, dir / "axial.efg", noisy.axial);
      write_grid_output(rec, dir / "lateral.efg", noisy.lateral);
      write_grid_output(rec, dir / "clean" / "axial.efg", p.clean.axial);
      write_grid_output(rec, dir / "clean" / "lateral.efg", p.clean.lateral);
      write_grid_output(rec, dir / "clean" / "e11.efg", p.clean_strains.axial);
      write_grid_output(rec, dir / "clean" / "e22.efg", p.clean_strains.lateral);
      if (perturb_fraction > 0.0) {
        std::string lines;
        for (std::size_t k : perturbed) lines += std::to_string(k) + "\n";
        write_output(rec, dir / "perturbed.txt", lines);
      }
      rec.manifest_path = manifest_path_for_dir(dir);
      out << "wrote phantom " << pspec.geometry.rows << "x" << pspec.geometry.cols << " to " << dir.string()
          << (perturb_fraction > 0.0 ? " (" + std::to_string(perturbed.size()) + " perturbed pixels)" : "")
          << "\n";
    } else if (*strain) {
      rec.subcommand = "strain";
      rec.parameters = {{"in", in_path}, {"out", out_path}};
      echo_parameters(rec, err);
      const fs::path dir = out_path;
      rec.inputs = {(fs::path(in_path) / "axial.efg").generic_string(),
                    (fs::path(in_path) / "lateral.efg").generic_string()};
      const StrainPair s = compute_strains(io::read_displacement(in_path));
      fs::create_directories(dir);
      write_grid_output(rec, dir / "e11.efg", s.axial);
      write_grid_output(rec, dir / "e22.efg", s.lateral);
      rec.manifest_path = manifest_path_for_dir(dir);
      out << "wrote strains to " << dir.string() << "\n";
    } else if (*epr_cmd) {
      rec.subcommand = "epr";
      rec.parameters = {{"vmin", bounds.v_min}, {"vmax", bounds.v_max}, {"floor", floor},
                        {"beta", beta},         {"lambda_vs", lambda_vs}};
      echo_parameters(rec, err);
      const fs::path dir = out_path;
      rec.inputs = {(fs::path(in_path) / "e11.efg").generic_string(),
                    (fs::path(in_path) / "e22.efg").generic_string()};
      const StrainPair s = io::read_strains(in_path);
      const EprField e = compute_epr(s, floor, bounds);
      const FeasibilityMask m = feasibility_mask(e, bounds);
      const PictureLossReport report = picture_loss(s, bounds, beta, lambda_vs, floor);
      Grid2D degenerate(s.geometry());
      for (std::size_t k = 0; k < degenerate.size(); ++k) degenerate.values()[k] = e.degenerate[k];
      fs::create_directories(dir);
      write_grid_output(rec, dir / "epr.efg", e.values);
      write_grid_output(rec, dir / "mask.efg", m.values);
      write_grid_output(rec, dir / "degenerate.efg", degenerate);
      json loss = picture_json(report);
      loss["degenerate_pixels"] = e.degenerate_count();
      write_json_output(rec, dir / "loss.json", loss);
      rec.manifest_path = manifest_path_for_dir(dir);
      out << "l_vd " << io::format_double(report.l_vd) << "\n"
          << "l_vs " << io::format_double(report.l_vs) << "\n"
          << "l_v " << io::format_double(report.l_v) << "\n"
          << "mean_inrange_epr " << io::format_double(report.mean_inrange_epr) << "\n"
          << "out_of_range_fraction " << io::format_double(report.out_of_range_fraction) << "\n";
    } else if (*clip || *guo || *refine) {
      RefinementResult result;
      const fs::path dir = out_path;
      rec.inputs = {(fs::path(in_path) / "axial.efg").generic_string(),
                    (fs::path(in_path) / "lateral.efg").generic_string()};
      if (*clip) {
        rec.subcommand = "clip";
        rec.parameters = clip_opts.to_json();
        echo_parameters(rec, err);
        result = poisson_clipper(io::read_displacement(in_path), clip_opts.config());
      } else if (*guo) {
        rec.subcommand = "guo";
        rec.parameters = guo_opts.to_json();
        rec.parameters["vmin"] = bounds.v_min;
        rec.parameters["vmax"] = bounds.v_max;
        rec.parameters["floor"] = floor;
        echo_parameters(rec, err);
        result = guo_refine(io::read_displacement(in_path), guo_opts.config(bounds, floor));
      } else {
        rec.subcommand = "refine";
        const auto order = parse_order(order_text);
        json order_json = json::array();
        for (KnownOperator op : order) order_json.push_back(to_string(op));
        rec.parameters = {{"order", order_json}};
        rec.parameters.update(clip_opts.to_json());
        rec.parameters.update(guo_opts.to_json());
        echo_parameters(rec, err);
        result = kpicture_refine(io::read_displacement(in_path), clip_opts.config(),
                                 guo_opts.config(clip_opts.bounds, clip_opts.floor), order);
      }
      fs::create_directories(dir);
      write_grid_output(rec, dir / "axial.efg", result.field.axial);
      write_grid_output(rec, dir / "lateral.efg", result.field.lateral);
      write_output(rec, dir / "trace.csv", trace_csv(result.trace));
      rec.trace_summary = trace_summary(result.trace);
      rec.manifest_path = manifest_path_for_dir(dir);
      out << rec.subcommand << ": " << result.trace.size() << " iterations";
      if (result.trace.size() > 0) {
        const TraceRecord& last = result.trace.records.back();
        out << ", out_of_range_fraction " << io::format_double(last.out_of_range_fraction) << ", residual_l2 "
            << io::format_double(last.residual_l2);
      }
      out << "\n";
    } else if (*metrics) {
      rec.subcommand = "metrics";
      const RoiSpec roi_t = parse_roi(roi_t_text, "--roi-t");
      const RoiSpec roi_b = parse_roi(roi_b_text, "--roi-b");
      rec.parameters = {{"roi_t", roi_json(roi_t)}, {"roi_b", roi_json(roi_b)}, {"component", component}};
      echo_parameters(rec, err);
      if (in_path.empty() && grid_path.empty()) throw ParameterError("metrics: give --in or --grid");

      Grid2D g;
      std::optional<IncompressibilityResidual> residual;
      if (!in_path.empty()) {
        rec.inputs = {(fs::path(in_path) / "e11.efg").generic_string(),
                      (fs::path(in_path) / "e22.efg").generic_string()};
        const StrainPair s = io::read_strains(in_path);
        g = component == "axial" ? s.axial : s.lateral;
        residual = incompressibility_residual(s);
      } else {
        rec.inputs = {grid_path};
        g = io::read_grid(grid_path);
      }
      const RoiStats t = roi_stats(g, roi_t);
      const RoiStats b = roi_stats(g, roi_b);
      json report = {{"target", stats_json(t)}, {"background", stats_json(b)}};
      std::ostringstream text;
      text << std::fixed << std::setprecision(6);
      text << "target mean " << t.mean << " std " << t.std << "\n";
      text << "background mean " << b.mean << " std " << b.std << "\n";
      int status = kExitOk;
      try {
        const double c = cnr(t, b);
        report["cnr"] = c;
        text << "CNR " << c << "\n";
      } catch (const DegenerateStatisticsError& e) {
        report["cnr"] = nullptr;
        text << "CNR undefined (" << e.what() << ")\n";
        status = kExitDegenerate;
      }
      try {
        const double r = sr(t, b);
        report["sr"] = r;
        text << "SR " << r << "\n";
      } catch (const DegenerateStatisticsError& e) {
        report["sr"] = nullptr;
        text << "SR undefined (" << e.what() << ")\n";
        status = kExitDegenerate;
      }
      if (residual) {
        report["incompressibility_residual_l2"] = residual->l2;
        text << std::scientific << "incompressibility_residual_l2 " << residual->l2 << "\n";
      }
      out << text.str();
      if (!out_path.empty()) {
        write_json_output(rec, out_path, report);
        rec.manifest_path = manifest_path_for_file(out_path);
      }
      if (status != kExitOk) {
        err << "elastoref metrics: degenerate ROI statistics\n";
        if (!rec.manifest_path.empty()) write_manifest(rec, 0.0);
        return status;
      }
    } else if (*hist) {
      rec.subcommand = "hist";
      const auto range = parse_numbers(range_text, 2, 2, "--range");
      rec.parameters = {{"bins", bins}, {"range", range}, {"vmin", bounds.v_min}, {"vmax", bounds.v_max},
                        {"floor", floor}};
      echo_parameters(rec, err);
      rec.inputs = {(fs::path(in_path) / "e11.efg").generic_string(),
                    (fs::path(in_path) / "e22.efg").generic_string()};
      const EprField e = compute_epr(io::read_strains(in_path), floor, bounds);
      const EprHistogram h = epr_histogram(e, bounds, bins, range[0], range[1]);
      write_output(rec, out_path, io::encode_histogram_csv(h));
      rec.manifest_path = manifest_path_for_file(out_path);
      out << "in_range_fraction " << io::format_double(h.in_range_fraction) << "\n"
          << "counted " << h.total() << "\n";
    } else if (*render) {
      rec.subcommand = "render";
      io::PgmRange window;
      if (!window_text.empty()) {
        const auto v = parse_numbers(window_text, 2, 2, "--range");
        window = std::make_pair(v[0], v[1]);
      }
      rec.parameters = {{"normalization", window ? "fixed" : "minmax"},
                        {"range", window ? json::array({window->first, window->second}) : json(nullptr)}};
      echo_parameters(rec, err);
      rec.inputs = {grid_path};
      write_output(rec, out_path, io::encode_pgm(io::read_grid(grid_path), window));
      rec.manifest_path = manifest_path_for_file(out_path);
      out << "wrote " << out_path << "\n";
    } else if (*replay) {
      rec.subcommand = "replay";
      const fs::path manifest_file = fs::absolute(manifest_text);
      const std::optional<fs::path> record_file =
          record_path.empty() ? std::nullopt : std::optional<fs::path>(fs::absolute(record_path));
      json m;
      try {
        m = json::parse(io::read_file(manifest_file));
      } catch (const json::exception& e) {
        throw FormatError(manifest_file.string() + ": " + e.what(), 0);
      }
      const json steps = m.contains("steps") ? m["steps"] : json::array({m});

      const fs::path original_dir = fs::current_path();
      if (!workdir.empty()) {
        fs::create_directories(workdir);
        fs::current_path(workdir);
      }
      struct RestoreDir {
        fs::path dir;
        ~RestoreDir() {
          std::error_code ec;
          fs::current_path(dir, ec);
        }
      } restore{original_dir};

      json recorded = json::array();
      int mismatches = 0;
      for (std::size_t s = 0; s < steps.size(); ++s) {
        const json& step = steps[s];
        if (!step.contains("argv") || !step["argv"].is_array()) {
          throw FormatError(manifest_file.string() + ": step " + std::to_string(s) + " has no argv array", 0);
        }
        const auto step_args = step["argv"].get<std::vector<std::string>>();
        RunRecord step_rec;
        const int code = run(step_args, out, err, &step_rec);
        if (code != kExitOk) {
          err << "elastoref replay: step " << s << " (" << step_rec.subcommand << ") failed with status " << code
              << "\n";
          return code;
        }
        json outputs = json::array();
        for (const fs::path& p : step_rec.outputs) {
          outputs.push_back({{"path", p.generic_string()}, {"fnv1a64", fnv1a64_hex(io::read_file(p))}});
        }
        if (!no_verify && step.contains("outputs")) {
          for (const json& o : step["outputs"]) {
            const std::string path = o.at("path").get<std::string>();
            const std::string want = o.at("fnv1a64").get<std::string>();
            const std::string got = fs::exists(path) ? fnv1a64_hex(io::read_file(path)) : "missing";
            if (got != want) {
              err << "elastoref replay: " << path << " digest " << got << " != recorded " << want << "\n";
              ++mismatches;
            }
          }
        }
        recorded.push_back({{"subcommand", step_rec.subcommand}, {"argv", step_args}, {"outputs", outputs}});
      }
      if (record_file) io::write_file(*record_file, json{{"steps", recorded}}.dump(2) + "\n");
      out << "replayed " << steps.size() << " step(s), " << mismatches << " digest mismatch(es)\n";
      return mismatches == 0 ? kExitOk : kExitData;
    }

    if (!rec.manifest_path.empty()) {
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      write_manifest(rec, wall);
    }
    if (record_out) *record_out = rec;
    return kExitOk;
  } catch (const ParameterError& e) {
    err << "elastoref " << rec.subcommand << ": invalid parameter: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DegenerateStatisticsError& e) {
    err << "elastoref " << rec.subcommand << ": degenerate statistics: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const Error& e) {
    err << "elastoref " << rec.subcommand << ": " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "elastoref " << rec.subcommand << ": " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return run(args, out, err, nullptr);
}

}  // namespace elastoref::cli
