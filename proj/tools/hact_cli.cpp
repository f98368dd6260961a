#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hact/entity/nuclei.hpp"
#include "hact/entity/superpixel.hpp"
#include "hact/graph/assemble.hpp"
#include "hact/io/png.hpp"
#include "hact/pipeline/experiment.hpp"
#include "hact/pipeline/labels.hpp"
#include "hact/pipeline/manifest.hpp"
#include "hact/pipeline/model_check.hpp"
#include "hact/pipeline/synthetic.hpp"
#include "hact/stain/basis_json.hpp"

namespace fs = std::filesystem;
using namespace hact;
using namespace hact::pipeline;

namespace {

constexpr const char* kSeedEnv = "HACT_SEED";

std::uint64_t seed_or_env(std::uint64_t seed) {
  if (const char* s = std::getenv(kSeedEnv)) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      fail(Errc::invalid_argument, std::string(kSeedEnv) + " must be a non-negative integer, got '" + s + "'");
    }
  }
  return seed;
}

void write_text(const std::string& path, const std::string& text) {
  if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot write " + path);
  out << text;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, path + ": " + e.what());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

SplitData load_split(const DatasetManifest& m) { return {load_graphs(m), labels_of(m)}; }

/// Loads the manifests of a data directory (train/val/test.jsonl) or explicit
/// paths, applies the label map and checks that the splits are disjoint.
Dataset load_dataset(const std::string& train, const std::string& val, const std::string& test,
                     const std::string& label_map) {
  auto tr = load_manifest(train, Split::train);
  auto va = load_manifest(val, Split::val, tr.class_names);
  std::optional<DatasetManifest> te;
  if (!test.empty()) te = load_manifest(test, Split::test, tr.class_names);
  if (!label_map.empty()) {
    const auto map = label_map_by_name(label_map, tr.class_names);
    tr = apply_label_map(map, tr);
    va = apply_label_map(map, va);
    if (te) te = apply_label_map(map, *te);
  }
  if (te) check_disjoint({&tr, &va, &*te});
  else check_disjoint({&tr, &va});
  Dataset d;
  d.class_names = tr.class_names;
  d.train = load_split(tr);
  d.val = load_split(va);
  if (te) d.test = load_split(*te);
  return d;
}

TrainConfig load_config(const std::string& path) { return path.empty() ? TrainConfig{} : load_train_config(path); }

// ---- stain-normalize ------------------------------------------------------

struct StainArgs {
  std::string input, output, target, reference, save_basis;
  double background = stain::kDefaultBackgroundThreshold;
};

int run_stain(const StainArgs& a) {
  require(a.target.empty() != a.reference.empty(), Errc::invalid_argument,
          "give exactly one of --target (basis JSON) or --reference (image)");
  stain::NormalizeOptions opt;
  opt.background_threshold = a.background;
  stain::StainBasis target;
  if (!a.target.empty()) {
    target = stain::load_basis(a.target);
  } else {
    const auto od = stain::od_transform(png::read_rgb(a.reference), a.background);
    target = stain::estimate_stain_basis(od.od_matrix);
  }
  if (!a.save_basis.empty()) write_text(a.save_basis, stain::to_json(target).dump(2) + "\n");
  const auto t0 = std::chrono::steady_clock::now();
  const auto out = stain::normalize_image(png::read_rgb(a.input), target, opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  png::write_rgb(a.output, out);
  std::cout << "normalized " << a.input << " -> " << a.output << " (" << out.width << "x" << out.height << ", "
            << std::fixed << std::setprecision(3) << secs << " s)\n";
  return 0;
}

// ---- build-graph ----------------------------------------------------------

struct BuildArgs {
  std::string image, nuclei, instances, features_cell, features_tissue, superpixels, save_regions, out;
  std::string feature_mode = "handcrafted";
  std::size_t k = 5;
  double d_min = 50.0;
  std::size_t segments = 100;
  double compactness = 10.0;
  double merge_threshold = 0.08;
};

int run_build(const BuildArgs& a) {
  const auto image = png::read_rgb(a.image);
  entity::NucleiSet nuclei = a.nuclei.empty() ? entity::detect_nuclei_blob(image)
                                              : entity::load_nuclei_centroids(a.nuclei, image.width, image.height);
  if (!a.instances.empty()) nuclei.instance_labels = png::read_labels16(a.instances);

  graph::FeatureSpec spec;
  const bool external = !a.features_cell.empty() || !a.features_tissue.empty();
  spec.mode = external ? graph::FeatureMode::external : graph::parse_feature_mode(a.feature_mode);
  if (!a.features_cell.empty()) spec.external_cell_path = a.features_cell;
  if (!a.features_tissue.empty()) spec.external_tissue_path = a.features_tissue;

  graph::TissueSegmentation seg;
  if (!a.superpixels.empty()) {
    seg.superpixels = entity::load_superpixel_map(a.superpixels);
  } else {
    entity::SlicOptions so;
    so.n_segments = a.segments;
    so.compactness = a.compactness;
    seg.superpixels = entity::slic_superpixels(image, so);
  }
  seg.regions = entity::merge_superpixels(image, seg.superpixels, a.merge_threshold);
  if (!a.save_regions.empty()) entity::save_superpixel_map(seg.regions, a.save_regions);

  const auto g = graph::assemble_hact(image, nuclei, seg, spec, a.k, a.d_min);
  if (auto dir = fs::path(a.out).parent_path(); !dir.empty()) fs::create_directories(dir);
  graph::save_hact(g, a.out);
  std::cout << "graph " << a.out << ": " << g.cell_graph.node_count << " cells, " << g.cell_graph.edges.size()
            << " cell edges, " << g.tissue_graph.node_count << " regions, " << g.tissue_graph.edges.size()
            << " tissue edges, feature dims " << g.cell_graph.feature_dim() << "/" << g.tissue_graph.feature_dim()
            << "\n";
  return 0;
}

// ---- synth-data -----------------------------------------------------------

struct SynthArgs {
  std::string out, preset = "two-class", recipes;
  std::uint64_t seed = 0;
  std::size_t per_class = 150;
  double val_fraction = 1.0 / 6.0, test_fraction = 1.0 / 6.0;
  SyntheticOptions opt;
};

int run_synth(const SynthArgs& a) {
  std::vector<ClassRecipe> recipes;
  if (!a.recipes.empty()) {
    for (const auto& r : read_json(a.recipes)) recipes.push_back(recipe_from_json(r));
  } else if (a.preset == "two-class") {
    recipes = two_class_recipes();
  } else if (a.preset == "factorial") {
    recipes = factorial_recipes();
  } else {
    fail(Errc::invalid_argument, "unknown preset '" + a.preset + "' (two-class, factorial)");
  }
  const auto seed = seed_or_env(a.seed);
  const auto ds = generate_synthetic_dataset(seed, a.per_class, recipes, a.opt);
  const auto split = stratified_split(ds.labels, a.val_fraction, a.test_fraction, seed);
  write_synthetic(ds, split, a.out);
  nlohmann::json meta = {{"seed", seed}, {"per_class", a.per_class}, {"recipes", nlohmann::json::array()}};
  for (const auto& r : recipes) meta["recipes"].push_back(to_json(r));
  write_text((fs::path(a.out) / "recipes.json").string(), meta.dump(2) + "\n");
  std::cout << "wrote " << ds.graphs.size() << " graphs to " << a.out << " (train " << split.train.size() << ", val "
            << split.val.size() << ", test " << split.test.size() << ")\n";
  return 0;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string data, train, val, test, config, out = "model.ckpt", resume, label_map, metrics;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  std::size_t seeds = 1;
  bool quiet = false;
};

void resolve_data_dir(const std::string& dir, std::string& train, std::string& val, std::string& test) {
  if (dir.empty()) return;
  if (train.empty()) train = (fs::path(dir) / "train.jsonl").string();
  if (val.empty()) val = (fs::path(dir) / "val.jsonl").string();
  if (test.empty() && fs::exists(fs::path(dir) / "test.jsonl")) test = (fs::path(dir) / "test.jsonl").string();
}

std::string seeded_path(const std::string& path, std::uint64_t seed, std::size_t runs) {
  if (runs == 1) return path;
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + ".seed" + std::to_string(seed) + p.extension().string())).string();
}

int run_train(TrainArgs a) {
  resolve_data_dir(a.data, a.train, a.val, a.test);
  require(!a.train.empty() && !a.val.empty(), Errc::invalid_argument, "need --train and --val (or --data)");
  TrainConfig cfg = load_config(a.config);
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.seed) cfg.seed = *a.seed;
  cfg.seed = seed_or_env(cfg.seed);
  const Dataset data = load_dataset(a.train, a.val, a.test, a.label_map);
  require(a.resume.empty() || a.seeds == 1, Errc::invalid_argument, "--resume works with a single seed");

  nlohmann::json runs = nlohmann::json::array();
  std::vector<double> f1;
  for (std::size_t r = 0; r < a.seeds; ++r) {
    TrainConfig run_cfg = cfg;
    run_cfg.seed = cfg.seed + r;
    TrainHooks hooks;
    hooks.checkpoint_path = seeded_path(a.out, run_cfg.seed, a.seeds);
    if (auto dir = fs::path(hooks.checkpoint_path).parent_path(); !dir.empty()) fs::create_directories(dir);
    if (!a.quiet)
      hooks.on_epoch = [&](const EpochRecord& e) {
        std::cout << "seed " << run_cfg.seed << " epoch " << std::setw(3) << e.epoch << "  loss " << std::fixed
                  << std::setprecision(4) << e.train_loss << "  val wF1 " << e.val_weighted_f1 << "  val acc "
                  << e.val_accuracy << "\n"
                  << std::flush;
      };
    std::optional<Checkpoint> prior;
    if (!a.resume.empty()) prior = load_checkpoint(a.resume);
    const Checkpoint ck = train_model(data.train.view(), data.val.view(), run_cfg, data.class_names, hooks,
                                      prior ? &*prior : nullptr);
    save_checkpoint(ck, hooks.checkpoint_path);
    nlohmann::json run = {{"seed", run_cfg.seed},
                          {"checkpoint", hooks.checkpoint_path},
                          {"best_epoch", ck.best_epoch},
                          {"best_val_weighted_f1", ck.best_val_f1}};
    std::cout << "seed " << run_cfg.seed << ": best val wF1 " << ck.best_val_f1 << " at epoch " << ck.best_epoch
              << ", checkpoint " << hooks.checkpoint_path << "\n";
    if (!data.test.graphs.empty()) {
      const auto m = evaluate(ck, data.test.view());
      run["test"] = to_json(m, data.class_names);
      f1.push_back(m.weighted_f1);
      std::cout << format_confusion(m, data.class_names);
    }
    runs.push_back(run);
  }
  nlohmann::json summary = {{"runs", runs}, {"classes", data.class_names}};
  if (!f1.empty()) {
    const auto s = mean_std(f1);
    summary["test_weighted_f1_mean"] = s.mean;
    summary["test_weighted_f1_std"] = s.std;
    std::cout << "test weighted F1 over " << f1.size() << " run(s): " << std::fixed << std::setprecision(4) << s.mean
              << " +/- " << s.std << "\n";
  }
  if (!a.metrics.empty()) write_text(a.metrics, summary.dump(2) + "\n");
  return 0;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint, manifest, label_map, metrics;
};

int run_eval(const EvalArgs& a) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  auto m = load_manifest(a.manifest, Split::test, a.label_map.empty() ? ck.class_names : std::vector<std::string>{});
  if (!a.label_map.empty()) m = apply_label_map(label_map_by_name(a.label_map, m.class_names), m);
  require(m.class_names.size() == ck.class_names.size(), Errc::shape_mismatch,
          "manifest has " + std::to_string(m.class_names.size()) + " classes, checkpoint " +
              std::to_string(ck.class_names.size()));
  const auto data = load_split(m);
  const auto metrics = evaluate(ck, data.view());
  std::cout << format_confusion(metrics, ck.class_names);
  if (!a.metrics.empty()) write_text(a.metrics, to_json(metrics, ck.class_names).dump(2) + "\n");
  return 0;
}

// ---- gradcheck ------------------------------------------------------------

struct GradArgs {
  std::string config, mode = "both";
  std::size_t graphs = 10, max_cells = 15, max_regions = 4, entries = 16, classes = 2;
  std::uint64_t seed = 0;
  double tol = 1e-4;
};

int run_gradcheck(const GradArgs& a) {
  const auto seed = seed_or_env(a.seed);
  Rng rng(seed);
  std::vector<graph::HactGraph> graphs;
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < a.graphs; ++i) {
    graphs.push_back(random_graph(rng, a.max_cells, a.max_regions));
    labels.push_back(rng.index(a.classes));
  }
  TrainConfig cfg = load_config(a.config);
  cfg.model = resolve_model_config(cfg.model, graphs, a.classes);
  gnn::HactNet net(cfg.model, seed);
  std::vector<const graph::HactGraph*> ptr;
  for (const auto& g : graphs) ptr.push_back(&g);
  net.fit_delta(ptr);

  nn::GradcheckOptions opt;
  opt.max_entries = a.entries;
  opt.seed = seed;
  opt.skip_nonsmooth = true;
  bool ok = true;
  for (const auto mode : {nn::Mode::eval, nn::Mode::train}) {
    const char* name = mode == nn::Mode::eval ? "eval" : "train";
    if (a.mode != "both" && a.mode != name) continue;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = model_gradcheck(net, graphs, labels, mode, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = r.max_rel_error < a.tol && r.checked > 0;
    ok = ok && pass;
    std::cout << name << ": max rel error " << std::scientific << std::setprecision(3) << r.max_rel_error << " at "
              << r.worst_param << "[" << r.worst_index << "] (analytic " << r.analytic << ", numeric " << r.numeric
              << "), " << r.checked << " checked, " << r.skipped << " skipped at kinks, " << std::fixed
              << std::setprecision(2) << secs << " s -> " << (pass ? "ok" : "FAIL") << "\n";
  }
  return ok ? 0 : 1;
}

// ---- ablate ---------------------------------------------------------------

struct AblateArgs {
  std::vector<std::string> data;  // name=dir or dir
  std::string config, out, kinds = "hact,cg,tg", layers = "pna", jk = "lstm", label_map;
  std::size_t seeds = 3;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
};

int run_ablate(const AblateArgs& a) {
  TrainConfig cfg = load_config(a.config);
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.seed) cfg.seed = *a.seed;
  cfg.seed = seed_or_env(cfg.seed);

  std::vector<std::pair<std::string, Dataset>> sets;
  for (const auto& spec : a.data) {
    const auto eq = spec.find('=');
    const std::string name = eq == std::string::npos ? fs::path(spec).filename().string() : spec.substr(0, eq);
    const std::string dir = eq == std::string::npos ? spec : spec.substr(eq + 1);
    std::string tr, va, te;
    resolve_data_dir(dir, tr, va, te);
    require(!te.empty(), Errc::invalid_argument, dir + ": ablation needs a test split");
    sets.emplace_back(name, load_dataset(tr, va, te, a.label_map));
  }
  AblationGrid grid;
  for (const auto& [name, d] : sets) grid.features.emplace_back(name, &d);
  grid.kinds.clear();
  for (const auto& k : split_list(a.kinds)) grid.kinds.push_back(gnn::parse_model_kind(k));
  grid.layers.clear();
  for (const auto& l : split_list(a.layers)) grid.layers.push_back(gnn::parse_layer_type(l));
  grid.jk.clear();
  for (const auto& j : split_list(a.jk)) grid.jk.push_back(gnn::parse_jk_mode(j));

  std::cout << std::left << std::setw(14) << "features" << std::setw(8) << "layer" << std::setw(8) << "jk"
            << std::setw(8) << "model" << "test weighted F1\n";
  nlohmann::json rows = nlohmann::json::array();
  run_ablation(grid, cfg, a.seeds, [&](const AblationRow& r) {
    std::cout << std::left << std::setw(14) << r.features << std::setw(8) << gnn::to_string(r.layer) << std::setw(8)
              << gnn::to_string(r.jk) << std::setw(8) << gnn::to_string(r.kind) << std::fixed << std::setprecision(4)
              << r.summary.mean << " +/- " << r.summary.std << "\n"
              << std::flush;
    rows.push_back(to_json(r));
  });
  if (!a.out.empty()) write_text(a.out, nlohmann::json{{"seeds", a.seeds}, {"rows", rows}}.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HACT graph construction and HACT-Net training"};
  app.require_subcommand(1);

  StainArgs stain_args;
  auto* stain_cmd = app.add_subcommand("stain-normalize", "Map an H&E image onto a target stain basis");
  stain_cmd->add_option("--input", stain_args.input, "Input PNG")->required()->check(CLI::ExistingFile);
  stain_cmd->add_option("--output", stain_args.output, "Output PNG")->required();
  stain_cmd->add_option("--target", stain_args.target, "Target basis JSON")->check(CLI::ExistingFile);
  stain_cmd->add_option("--reference", stain_args.reference, "Reference image to estimate the target basis from")
      ->check(CLI::ExistingFile);
  stain_cmd->add_option("--save-basis", stain_args.save_basis, "Write the target basis as JSON");
  stain_cmd->add_option("--background", stain_args.background, "Per-channel OD threshold for tissue");

  BuildArgs build_args;
  auto* build_cmd = app.add_subcommand("build-graph", "Build a HACT graph from an image and nuclei");
  build_cmd->add_option("--image", build_args.image, "Input PNG")->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--nuclei", build_args.nuclei, "Nuclei centroid CSV (x,y); blob detection if omitted")
      ->check(CLI::ExistingFile);
  build_cmd->add_option("--instances", build_args.instances, "Nucleus instance label PNG-16")->check(CLI::ExistingFile);
  build_cmd->add_option("--features-cell", build_args.features_cell, "External cell feature CSV")
      ->check(CLI::ExistingFile);
  build_cmd->add_option("--features-tissue", build_args.features_tissue, "External tissue feature CSV")
      ->check(CLI::ExistingFile);
  build_cmd->add_option("--feature-mode", build_args.feature_mode, "handcrafted or none (ignored with external CSVs)");
  build_cmd->add_option("--superpixels", build_args.superpixels, "Precomputed superpixel PNG-16 (with .json sidecar)")
      ->check(CLI::ExistingFile);
  build_cmd->add_option("--segments", build_args.segments, "SLIC superpixel count");
  build_cmd->add_option("--compactness", build_args.compactness, "SLIC compactness");
  build_cmd->add_option("--merge-threshold", build_args.merge_threshold, "Colour distance for region merging");
  build_cmd->add_option("--k", build_args.k, "Nearest neighbours per nucleus");
  build_cmd->add_option("--d-min", build_args.d_min, "Edge distance threshold in pixels");
  build_cmd->add_option("--save-regions", build_args.save_regions, "Write the merged tissue map as PNG-16");
  build_cmd->add_option("--out", build_args.out, "Output graph JSON")->required();

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth-data", "Generate a synthetic HACT graph dataset");
  synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();
  synth_cmd->add_option("--preset", synth_args.preset, "two-class or factorial");
  synth_cmd->add_option("--recipes", synth_args.recipes, "JSON array of class recipes")->check(CLI::ExistingFile);
  synth_cmd->add_option("--seed", synth_args.seed, "Random seed");
  synth_cmd->add_option("--per-class", synth_args.per_class, "Graphs per class");
  synth_cmd->add_option("--val-fraction", synth_args.val_fraction, "Validation share per class");
  synth_cmd->add_option("--test-fraction", synth_args.test_fraction, "Test share per class");
  synth_cmd->add_option("--cell-dim", synth_args.opt.cell_dim, "Cell feature width");
  synth_cmd->add_option("--tissue-dim", synth_args.opt.tissue_dim, "Tissue feature width");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train HACT-Net, keeping the best-validation weights");
  train_cmd->add_option("--data", train_args.data, "Directory with train/val/test.jsonl");
  train_cmd->add_option("--train", train_args.train, "Train manifest");
  train_cmd->add_option("--val", train_args.val, "Validation manifest");
  train_cmd->add_option("--test", train_args.test, "Test manifest (evaluated after training)");
  train_cmd->add_option("--config", train_args.config, "Config JSON")->check(CLI::ExistingFile);
  train_cmd->add_option("--epochs", train_args.epochs, "Override the epoch budget");
  train_cmd->add_option("--seed", train_args.seed, "Override the seed");
  train_cmd->add_option("--seeds", train_args.seeds, "Repeat with this many consecutive seeds");
  train_cmd->add_option("--out", train_args.out, "Checkpoint path (rewritten every epoch)");
  train_cmd->add_option("--resume", train_args.resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
  train_cmd->add_option("--label-map", train_args.label_map, "identity, 7to4 or a binary task such as A-vs-F");
  train_cmd->add_option("--metrics", train_args.metrics, "Write run summary JSON");
  train_cmd->add_flag("--quiet", train_args.quiet, "No per-epoch log");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--manifest", eval_args.manifest, "Manifest")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--label-map", eval_args.label_map, "Label map applied to the manifest");
  eval_cmd->add_option("--metrics", eval_args.metrics, "Write metrics JSON");

  GradArgs grad_args;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the full model gradient");
  grad_cmd->add_option("--graphs", grad_args.graphs, "Random graphs in the batch");
  grad_cmd->add_option("--max-cells", grad_args.max_cells, "Maximum cells per graph");
  grad_cmd->add_option("--max-regions", grad_args.max_regions, "Maximum regions per graph");
  grad_cmd->add_option("--entries", grad_args.entries, "Entries checked per tensor (0 = all)");
  grad_cmd->add_option("--classes", grad_args.classes, "Class count");
  grad_cmd->add_option("--config", grad_args.config, "Config JSON")->check(CLI::ExistingFile);
  grad_cmd->add_option("--mode", grad_args.mode, "eval, train or both");
  grad_cmd->add_option("--seed", grad_args.seed, "Random seed");
  grad_cmd->add_option("--tol", grad_args.tol, "Maximum relative error");

  AblateArgs ablate_args;
  auto* ablate_cmd = app.add_subcommand("ablate", "Train and test every features x layer x JK x model combination");
  ablate_cmd->add_option("--data", ablate_args.data, "Feature set as name=dir (repeatable)")->required();
  ablate_cmd->add_option("--kinds", ablate_args.kinds, "Comma list of hact, cg, tg, concat");
  ablate_cmd->add_option("--layers", ablate_args.layers, "Comma list of gin, pna");
  ablate_cmd->add_option("--jk", ablate_args.jk, "Comma list of none, concat, lstm");
  ablate_cmd->add_option("--seeds", ablate_args.seeds, "Runs per cell");
  ablate_cmd->add_option("--epochs", ablate_args.epochs, "Override the epoch budget");
  ablate_cmd->add_option("--seed", ablate_args.seed, "First seed");
  ablate_cmd->add_option("--config", ablate_args.config, "Config JSON")->check(CLI::ExistingFile);
  ablate_cmd->add_option("--label-map", ablate_args.label_map, "Label map applied to every split");
  ablate_cmd->add_option("--out", ablate_args.out, "Write results JSON");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*stain_cmd) return run_stain(stain_args);
    if (*build_cmd) return run_build(build_args);
    if (*synth_cmd) return run_synth(synth_args);
    if (*train_cmd) return run_train(train_args);
    if (*eval_cmd) return run_eval(eval_args);
    if (*grad_cmd) return run_gradcheck(grad_args);
    if (*ablate_cmd) return run_ablate(ablate_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
