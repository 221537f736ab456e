// flowsub: synthetic scenes, subspace projection, flow-only fitting, metric
// evaluation, and flow visualization over .flo / .pfm / .png files.
#include <glob.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowsub/basis.hpp"
#include "flowsub/fitter.hpp"
#include "flowsub/io/flo.hpp"
#include "flowsub/io/flow_color.hpp"
#include "flowsub/io/label_png.hpp"
#include "flowsub/io/manifest.hpp"
#include "flowsub/io/pfm.hpp"
#include "flowsub/metrics.hpp"
#include "flowsub/projector.hpp"
#include "flowsub/scene.hpp"
#include "flowsub/serialization.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace flowsub;

namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

int worker_count() {
  if (const char* env = std::getenv("FLOWSUB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t results;
  std::vector<std::string> paths;
  if (glob(pattern.c_str(), GLOB_TILDE, nullptr, &results) == 0) {
    for (std::size_t i = 0; i < results.gl_pathc; ++i) paths.emplace_back(results.gl_pathv[i]);
  }
  globfree(&results);
  if (paths.empty()) throw Error(ErrorCode::kBadInput, "glob matched no files: " + pattern);
  return paths;
}

CameraModel camera_for(int height, int width, std::optional<double> fx, std::optional<double> fy) {
  std::optional<Focal> focal;
  if (fx || fy) {
    if (!(fx && fy)) throw Error(ErrorCode::kBadInput, "--fx and --fy must be given together");
    focal = Focal{*fx, *fy};
  }
  return CameraModel::centered(width, height, focal);
}

SoftMaskStack one_hot_from_labels(const LabelGrid& labels, int regions) {
  SoftMaskStack masks(labels.height, labels.width, regions, 0.0);
  for (int r = 0; r < labels.height; ++r)
    for (int c = 0; c < labels.width; ++c) {
      const int label = labels.at(r, c);
      if (label < 0 || label >= regions)
        throw Error(ErrorCode::kBadInput, "mask label " + std::to_string(label) +
                                              " outside [0, K=" + std::to_string(regions) + ")");
      masks.at(r, c, label) = 1.0;
    }
  return masks;
}

json depth_report_json(const DepthReport& report) {
  return json{{"abs_rel", report.abs_rel},
              {"sq_rel", report.sq_rel},
              {"rmse", report.rmse},
              {"rmse_log", report.rmse_log},
              {"log10", report.log10},
              {"delta1", report.delta1},
              {"delta2", report.delta2},
              {"delta3", report.delta3},
              {"n_pixels_evaluated", report.n_pixels_evaluated},
              {"scale_applied", report.scale_applied}};
}

std::string csv_line_17g(const std::vector<std::pair<std::string, double>>& fields, bool header) {
  std::ostringstream out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ",";
    if (header) {
      out << fields[i].first;
    } else {
      char buffer[64];
      std::snprintf(buffer, sizeof(buffer), "%.17g", fields[i].second);
      out << buffer;
    }
  }
  out << "\n";
  return out.str();
}

void append_csv(const fs::path& path, const std::vector<std::pair<std::string, double>>& fields) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  if (fresh) out << csv_line_17g(fields, true);
  out << csv_line_17g(fields, false);
}

io::RunManifest begin_manifest(const std::string& command, int argc, char** argv,
                               std::uint64_t seed = 0) {
  io::RunManifest manifest;
  manifest.command = command;
  manifest.argv.assign(argv, argv + argc);
  manifest.seed = seed;
  return manifest;
}

void hash_input(io::RunManifest& manifest, const fs::path& path) {
  manifest.input_hashes.emplace_back(path.string(), io::fnv1a64_hex(io::fnv1a64_file(path)));
}

// ---------------------------------------------------------------- synth ----

int run_synth(const fs::path& spec_path, bool random_mode, std::uint64_t seed, int regions,
              int width, int height, const std::string& motion_style, const fs::path& out_dir,
              int argc, char** argv) {
  Stopwatch watch;
  fs::create_directories(out_dir);

  SceneSpec spec;
  io::RunManifest manifest = begin_manifest("synth", argc, argv, seed);
  if (random_mode) {
    RandomSceneParams params;
    params.regions = regions;
    params.width = width;
    params.height = height;
    if (motion_style == "general") params.motion_style = MotionStyle::kGeneral;
    else if (motion_style == "rotation") params.motion_style = MotionStyle::kPureRotation;
    else if (motion_style == "translation") params.motion_style = MotionStyle::kPureTranslation;
    else throw Error(ErrorCode::kBadInput, "unknown motion style '" + motion_style + "'");
    spec = random_scene(seed, params);
  } else {
    spec = scene_spec_from_json(read_text_file(spec_path));
    hash_input(manifest, spec_path);
    manifest.seed = spec.seed;
  }

  SceneInstance instance = compose_scene(spec);

  ScalarGrid gt_depth(instance.gt_disparity.height(), instance.gt_disparity.width());
  for (std::size_t i = 0; i < gt_depth.size(); ++i)
    gt_depth.data()[i] = 1.0 / instance.gt_disparity.data()[i];

  io::write_flo(instance.flow, out_dir / "flow.flo");
  io::write_pfm(instance.gt_disparity, out_dir / "gt_disparity.pfm");
  io::write_pfm(gt_depth, out_dir / "gt_depth.pfm");
  io::write_label_png(instance.gt_labels, out_dir / "gt_labels.png");
  write_text_file(out_dir / "spec.json", scene_spec_to_json(spec));

  manifest.config_json = json{{"random", random_mode},
                              {"background_label", instance.gt_labels.background_label}}
                             .dump();
  manifest.outputs = {(out_dir / "flow.flo").string(), (out_dir / "gt_disparity.pfm").string(),
                      (out_dir / "gt_depth.pfm").string(), (out_dir / "gt_labels.png").string(),
                      (out_dir / "spec.json").string()};
  manifest.wall_seconds = watch.seconds();
  io::write_manifest(manifest, out_dir / "manifest.json");

  std::cout << json{{"out", out_dir.string()},
                    {"regions", spec.region_count()},
                    {"background_label", instance.gt_labels.background_label}}
                   .dump()
            << "\n";
  return 0;
}

// -------------------------------------------------------------- project ----

int run_project(const fs::path& flow_path, const fs::path& disparity_path,
                const fs::path& masks_path, int regions, const std::string& basis_name,
                double sv_threshold, std::optional<double> fx, std::optional<double> fy,
                const fs::path& out_dir, int argc, char** argv) {
  Stopwatch watch;
  fs::create_directories(out_dir);

  FlowGrid flow = io::read_flo(flow_path);
  DisparityField disparity = io::read_pfm(disparity_path);
  require_valid_disparity(disparity);
  LabelGrid labels = io::read_label_png(masks_path);
  if (!(disparity.height() == flow.height() && disparity.width() == flow.width()) ||
      !(labels.height == flow.height() && labels.width == flow.width()))
    throw Error(ErrorCode::kDimensionMismatch, "flow, disparity and masks disagree in shape");

  const BasisKind kind = basis_kind_from_string(basis_name);
  CameraModel camera = camera_for(flow.height(), flow.width(), fx, fy);
  SoftMaskStack masks = one_hot_from_labels(labels, regions);

  BasisStack basis = normalized_basis_for(camera, disparity, kind);
  SystemMatrix system = assemble_system(restrict_basis(basis, masks));
  ProjectionResult result = project_flow(system, flow, sv_threshold);

  io::write_flo(result.projected, out_dir / "recon.flo");

  json coefficients = json::array();
  for (Eigen::Index i = 0; i < result.coefficients.size(); ++i)
    coefficients.push_back(json{{"region", system.column_map[i].region},
                                {"field", system.column_map[i].field},
                                {"value", result.coefficients(i)}});
  const double flow_norm = flow.vec().norm();
  json report{{"residual", result.residual},
              {"relative_residual", flow_norm > 0.0 ? result.residual / flow_norm : 0.0},
              {"rank", result.rank},
              {"per_entry_rms", per_entry_rms(result.residual, flow.height(), flow.width())},
              {"basis", basis_name},
              {"K", regions},
              {"sv_threshold", sv_threshold},
              {"coefficients", coefficients}};
  write_text_file(out_dir / "result.json", report.dump(2) + "\n");

  io::RunManifest manifest = begin_manifest("project", argc, argv);
  hash_input(manifest, flow_path);
  hash_input(manifest, disparity_path);
  hash_input(manifest, masks_path);
  manifest.config_json =
      json{{"K", regions}, {"basis", basis_name}, {"sv_threshold", sv_threshold}}.dump();
  manifest.outputs = {(out_dir / "recon.flo").string(), (out_dir / "result.json").string()};
  manifest.wall_seconds = watch.seconds();
  io::write_manifest(manifest, out_dir / "manifest.json");

  report.erase("coefficients");
  std::cout << report.dump() << "\n";
  return 0;
}

// ------------------------------------------------------------------ fit ----

int run_fit(const fs::path& flow_path, const FitConfig& config, const std::string& basis_flag,
            std::optional<double> fx, std::optional<double> fy, const fs::path& out_dir, int argc,
            char** argv) {
  Stopwatch watch;
  fs::create_directories(out_dir);

  FlowGrid flow = io::read_flo(flow_path);
  CameraModel camera = camera_for(flow.height(), flow.width(), fx, fy);

  FitResult result = fit(flow, camera, config);

  io::write_pfm(result.disparity, out_dir / "disparity.pfm");
  io::write_label_png(result.hard_labels, out_dir / "labels.png");

  std::ofstream curve(out_dir / "loss_curve.csv", std::ios::trunc);
  curve << "step,loss\n";
  for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", result.loss_history[i]);
    curve << i << "," << buffer << "\n";
  }
  curve.close();

  const double flow_norm = flow.vec().norm();
  json report{{"final_loss", result.final_loss},
              {"relative_loss", flow_norm > 0.0 ? result.final_loss / flow_norm : 0.0},
              {"converged", result.converged},
              {"steps", result.steps},
              {"basis", basis_flag},
              {"config", json::parse(fit_config_to_json(config))}};
  write_text_file(out_dir / "result.json", report.dump(2) + "\n");

  io::RunManifest manifest = begin_manifest("fit", argc, argv, config.seed);
  hash_input(manifest, flow_path);
  manifest.config_json = fit_config_to_json(config);
  manifest.outputs = {(out_dir / "disparity.pfm").string(), (out_dir / "labels.png").string(),
                      (out_dir / "loss_curve.csv").string(), (out_dir / "result.json").string()};
  manifest.wall_seconds = watch.seconds();
  io::write_manifest(manifest, out_dir / "manifest.json");

  report.erase("config");
  std::cout << report.dump() << "\n";
  return 0;
}

// ----------------------------------------------------------------- eval ----

int run_eval_seg(const fs::path& pred_path, const fs::path& gt_path, bool postprocess, int regions,
                 double min_frac, int connectivity, int gt_background, int pred_background,
                 const fs::path& out_dir, int argc, char** argv) {
  Stopwatch watch;
  LabelGrid pred = io::read_label_png(pred_path);
  LabelGrid gt = io::read_label_png(gt_path);
  pred.background_label = pred_background;
  gt.background_label = gt_background;

  if (postprocess)
    pred = postprocess_masks(pred, regions, min_frac,
                             connectivity == 8 ? Connectivity::kEight : Connectivity::kFour);

  SegReport report = segmentation_report(pred, gt);
  json doc{{"fg_ari", report.fg_ari},
           {"miou", report.miou},
           {"j_mean", report.j_mean},
           {"f_measure", "not computed"},
           {"postprocessed", postprocess}};
  std::cout << doc.dump() << "\n";

  io::RunManifest manifest = begin_manifest("eval seg", argc, argv);
  hash_input(manifest, pred_path);
  hash_input(manifest, gt_path);
  manifest.config_json = json{{"postprocess", postprocess},
                              {"K", regions},
                              {"min_frac", min_frac},
                              {"connectivity", connectivity},
                              {"background", gt_background}}
                             .dump();
  manifest.wall_seconds = watch.seconds();
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_text_file(out_dir / "report.json", doc.dump(2) + "\n");
    append_csv(out_dir / "report.csv",
               {{"fg_ari", report.fg_ari}, {"miou", report.miou}, {"j_mean", report.j_mean}});
    manifest.outputs = {(out_dir / "report.json").string(), (out_dir / "report.csv").string()};
    io::write_manifest(manifest, out_dir / "manifest.json");
  } else {
    io::write_manifest(manifest, "flowsub_eval_manifest.json");
  }
  return 0;
}

int run_eval_depth(const fs::path& pred_path, const fs::path& gt_path, double cap,
                   bool median_scale, const std::string& pred_kind, const std::string& gt_kind,
                   const fs::path& out_dir, int argc, char** argv) {
  Stopwatch watch;
  ScalarGrid pred = io::read_pfm(pred_path);
  ScalarGrid gt = io::read_pfm(gt_path);

  if (gt_kind == "disparity") {
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const double d = gt.data()[i];
      gt.data()[i] = d > 0.0 ? 1.0 / d : 0.0;  // 0 marks invalid
    }
  } else if (gt_kind != "depth") {
    throw Error(ErrorCode::kBadInput, "--gt-kind must be depth or disparity");
  }

  DepthEvalOptions options;
  options.cap_m = cap;
  options.median_scale = median_scale;
  if (pred_kind == "depth") options.pred_encoding = DepthEncoding::kDepth;
  else if (pred_kind == "disparity") options.pred_encoding = DepthEncoding::kDisparity;
  else throw Error(ErrorCode::kBadInput, "--pred-kind must be depth or disparity");

  DepthReport report = depth_metrics(pred, gt, options);
  json doc = depth_report_json(report);
  std::cout << doc.dump() << "\n";

  io::RunManifest manifest = begin_manifest("eval depth", argc, argv);
  hash_input(manifest, pred_path);
  hash_input(manifest, gt_path);
  manifest.config_json = json{{"cap", cap},
                              {"median_scale", median_scale},
                              {"pred_kind", pred_kind},
                              {"gt_kind", gt_kind}}
                             .dump();
  manifest.wall_seconds = watch.seconds();
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_text_file(out_dir / "report.json", doc.dump(2) + "\n");
    append_csv(out_dir / "report.csv",
               {{"abs_rel", report.abs_rel},
                {"sq_rel", report.sq_rel},
                {"rmse", report.rmse},
                {"rmse_log", report.rmse_log},
                {"log10", report.log10},
                {"delta1", report.delta1},
                {"delta2", report.delta2},
                {"delta3", report.delta3},
                {"n_pixels_evaluated", static_cast<double>(report.n_pixels_evaluated)},
                {"scale_applied", report.scale_applied}});
    manifest.outputs = {(out_dir / "report.json").string(), (out_dir / "report.csv").string()};
    io::write_manifest(manifest, out_dir / "manifest.json");
  } else {
    io::write_manifest(manifest, "flowsub_eval_manifest.json");
  }
  return 0;
}

// ------------------------------------------------------------------ viz ----

int run_viz(const fs::path& flow_path, const std::string& glob_pattern, const fs::path& out_path,
            const fs::path& out_dir, std::optional<double> max_magnitude, int argc, char** argv) {
  Stopwatch watch;
  io::RunManifest manifest = begin_manifest("viz", argc, argv);
  manifest.config_json =
      json{{"max_magnitude", max_magnitude ? json(*max_magnitude) : json(nullptr)}}.dump();

  if (!glob_pattern.empty()) {
    if (out_dir.empty()) throw Error(ErrorCode::kBadInput, "--glob requires --out-dir");
    fs::create_directories(out_dir);
    const std::vector<std::string> inputs = expand_glob(glob_pattern);
    for (const std::string& input : inputs) hash_input(manifest, input);

    std::atomic<std::size_t> next{0};
    std::vector<std::string> outputs(inputs.size());
    std::vector<std::exception_ptr> failures(inputs.size());
    auto work = [&] {
      for (std::size_t i = next.fetch_add(1); i < inputs.size(); i = next.fetch_add(1)) {
        try {
          const fs::path source = inputs[i];
          const fs::path target = out_dir / (source.stem().string() + ".png");
          io::write_rgb_png(io::flow_to_color(io::read_flo(source), max_magnitude), target);
          outputs[i] = target.string();
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    };
    const int threads = std::min<int>(worker_count(), static_cast<int>(inputs.size()));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (std::thread& thread : pool) thread.join();
    for (const std::exception_ptr& failure : failures)
      if (failure) std::rethrow_exception(failure);

    manifest.outputs = outputs;
    manifest.wall_seconds = watch.seconds();
    io::write_manifest(manifest, out_dir / "manifest.json");
    std::cout << json{{"converted", inputs.size()}, {"out_dir", out_dir.string()}}.dump() << "\n";
    return 0;
  }

  hash_input(manifest, flow_path);
  io::write_rgb_png(io::flow_to_color(io::read_flo(flow_path), max_magnitude), out_path);
  manifest.outputs = {out_path.string()};
  manifest.wall_seconds = watch.seconds();
  io::write_manifest(manifest, fs::path(out_path.string() + ".manifest.json"));
  std::cout << json{{"out", out_path.string()}}.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"low-dimensional flow-subspace toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "render a scene spec to flow/disparity/labels");
  std::string synth_spec, synth_motion = "general";
  std::string synth_out;
  bool synth_random = false;
  std::uint64_t synth_seed = 0;
  int synth_k = 3, synth_w = 64, synth_h = 64;
  synth->add_option("--spec", synth_spec, "scene spec JSON path");
  synth->add_flag("--random", synth_random, "draw a random scene instead of reading --spec");
  synth->add_option("--seed", synth_seed, "random scene seed");
  synth->add_option("--K", synth_k, "random scene region count");
  synth->add_option("--width", synth_w, "random scene width");
  synth->add_option("--height", synth_h, "random scene height");
  synth->add_option("--motion-style", synth_motion, "general|rotation|translation");
  synth->add_option("--out", synth_out, "output directory")->required();

  // project
  auto* project = app.add_subcommand("project", "project a flow onto a region-basis span");
  std::string project_flow, project_disparity, project_masks, project_basis = "focalFree8";
  std::string project_out;
  int project_k = 6;
  double project_sv = 1e-5;
  std::optional<double> project_fx, project_fy;
  project->add_option("--flow", project_flow)->required();
  project->add_option("--disparity", project_disparity)->required();
  project->add_option("--masks", project_masks)->required();
  project->add_option("--K", project_k, "region count");
  project->add_option("--basis", project_basis,
                      "intrinsic6|focalFree8|translationOnly|rotationOnly");
  project->add_option("--sv-threshold", project_sv);
  project->add_option("--fx", project_fx);
  project->add_option("--fy", project_fy);
  project->add_option("--out", project_out, "output directory")->required();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "recover disparity and masks from a flow field");
  std::string fit_flow, fit_basis = "full", fit_config_path, fit_out;
  FitConfig fit_defaults;
  int fit_k = fit_defaults.regions, fit_iters = fit_defaults.iterations;
  std::uint64_t fit_seed = 0;
  double fit_lr_d = fit_defaults.lr_disparity, fit_lr_l = fit_defaults.lr_logits;
  double fit_sv = fit_defaults.sv_threshold, fit_tv = fit_defaults.tv_weight;
  std::optional<double> fit_fx, fit_fy;
  fit_cmd->add_option("--flow", fit_flow)->required();
  auto* opt_k = fit_cmd->add_option("--K", fit_k, "region count");
  auto* opt_iters = fit_cmd->add_option("--iters", fit_iters, "iteration cap");
  auto* opt_seed = fit_cmd->add_option("--seed", fit_seed);
  fit_cmd->add_option("--basis", fit_basis, "full|only-t|only-r");
  fit_cmd->add_option("--config", fit_config_path, "FitConfig JSON (flags override it)");
  auto* opt_lr_d = fit_cmd->add_option("--lr-disparity", fit_lr_d);
  auto* opt_lr_l = fit_cmd->add_option("--lr-logits", fit_lr_l);
  auto* opt_sv = fit_cmd->add_option("--sv-threshold", fit_sv);
  auto* opt_tv = fit_cmd->add_option("--tv", fit_tv, "logit smoothing weight");
  fit_cmd->add_option("--fx", fit_fx);
  fit_cmd->add_option("--fy", fit_fy);
  fit_cmd->add_option("--out", fit_out, "output directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "compute segmentation or depth reports");
  eval->require_subcommand(1);
  auto* eval_seg = eval->add_subcommand("seg", "segmentation metrics");
  std::string seg_pred, seg_gt, seg_out;
  bool seg_post = false;
  int seg_k = 6, seg_conn = 4, seg_bg = 0, seg_pred_bg = 0;
  double seg_min_frac = 0.001;
  eval_seg->add_option("--pred", seg_pred)->required();
  eval_seg->add_option("--gt", seg_gt)->required();
  eval_seg->add_flag("--postprocess", seg_post, "connected-component cleanup of pred");
  eval_seg->add_option("--K", seg_k, "postprocess budget");
  eval_seg->add_option("--min-frac", seg_min_frac);
  eval_seg->add_option("--connectivity", seg_conn, "4 or 8");
  eval_seg->add_option("--background", seg_bg, "ground-truth background label");
  eval_seg->add_option("--pred-background", seg_pred_bg, "prediction background label");
  eval_seg->add_option("--out", seg_out, "optional report directory");

  auto* eval_depth = eval->add_subcommand("depth", "monocular depth error suite");
  std::string depth_pred, depth_gt, depth_out, depth_pred_kind = "disparity",
                                     depth_gt_kind = "depth";
  double depth_cap = 10.0;
  bool depth_median = false;
  eval_depth->add_option("--pred", depth_pred)->required();
  eval_depth->add_option("--gt", depth_gt)->required();
  eval_depth->add_option("--cap", depth_cap, "depth cap in meters");
  eval_depth->add_flag("--median-scale", depth_median);
  eval_depth->add_option("--pred-kind", depth_pred_kind, "disparity|depth");
  eval_depth->add_option("--gt-kind", depth_gt_kind, "depth|disparity");
  eval_depth->add_option("--out", depth_out, "optional report directory");

  // viz
  auto* viz = app.add_subcommand("viz", "render flow to a color-wheel PNG");
  std::string viz_flow, viz_glob, viz_out, viz_out_dir;
  std::optional<double> viz_max;
  viz->add_option("--flow", viz_flow, "single .flo input");
  viz->add_option("--glob", viz_glob, "batch mode: pattern of .flo inputs");
  viz->add_option("--out", viz_out, "single-mode output PNG");
  viz->add_option("--out-dir", viz_out_dir, "batch-mode output directory");
  viz->add_option("--max-magnitude", viz_max, "shared saturation normalizer");

  try {
    app.parse(argc, argv);

    if (synth->parsed()) {
      if (!synth_random && synth_spec.empty())
        throw Error(ErrorCode::kBadInput, "synth needs --spec or --random");
      return run_synth(synth_spec, synth_random, synth_seed, synth_k, synth_w, synth_h,
                       synth_motion, synth_out, argc, argv);
    }
    if (project->parsed()) {
      return run_project(project_flow, project_disparity, project_masks, project_k, project_basis,
                         project_sv, project_fx, project_fy, project_out, argc, argv);
    }
    if (fit_cmd->parsed()) {
      FitConfig config;
      if (!fit_config_path.empty()) config = fit_config_from_json(read_text_file(fit_config_path));
      if (opt_k->count()) config.regions = fit_k;
      if (opt_iters->count()) config.iterations = fit_iters;
      if (opt_seed->count()) config.seed = fit_seed;
      if (opt_lr_d->count()) config.lr_disparity = fit_lr_d;
      if (opt_lr_l->count()) config.lr_logits = fit_lr_l;
      if (opt_sv->count()) config.sv_threshold = fit_sv;
      if (opt_tv->count()) config.tv_weight = fit_tv;
      if (fit_basis == "full") config.basis_kind = fit_fx ? BasisKind::kIntrinsic6 : BasisKind::kFocalFree8;
      else if (fit_basis == "only-t") config.basis_kind = BasisKind::kTranslationOnly;
      else if (fit_basis == "only-r") config.basis_kind = BasisKind::kRotationOnly;
      else config.basis_kind = basis_kind_from_string(fit_basis);
      return run_fit(fit_flow, config, fit_basis, fit_fx, fit_fy, fit_out, argc, argv);
    }
    if (eval_seg->parsed()) {
      return run_eval_seg(seg_pred, seg_gt, seg_post, seg_k, seg_min_frac, seg_conn, seg_bg,
                          seg_pred_bg, seg_out, argc, argv);
    }
    if (eval_depth->parsed()) {
      return run_eval_depth(depth_pred, depth_gt, depth_cap, depth_median, depth_pred_kind,
                            depth_gt_kind, depth_out, argc, argv);
    }
    if (viz->parsed()) {
      if (viz_glob.empty() && (viz_flow.empty() || viz_out.empty()))
        throw Error(ErrorCode::kBadInput, "viz needs --flow/--out or --glob/--out-dir");
      return run_viz(viz_flow, viz_glob, viz_out, viz_out_dir, viz_max, argc, argv);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}}.dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "Unhandled"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
  return 0;
}
