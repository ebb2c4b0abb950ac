// synthvox CLI: synthetic MRI training volumes from 3D label maps, label-map
// surgery, surface-derived ground truth, patch extraction and evaluation.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "synthvox/evaluate.hpp"
#include "synthvox/label_ops.hpp"
#include "synthvox/mesh.hpp"
#include "synthvox/nifti.hpp"
#include "synthvox/patches.hpp"
#include "synthvox/pipeline.hpp"
#include "synthvox/rng.hpp"
#include "synthvox/voxelize.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartialFailure = 1;
constexpr int kExitConfigError = 2;

int cmd_generate(const std::string& config_path, std::optional<std::uint64_t> seed, int jobs,
                 const std::string& out_dir) {
  synthvox::GenerationConfig cfg = synthvox::load_config(config_path);
  if (seed) cfg.seed = *seed;
  const auto result = synthvox::generate_dataset(cfg, out_dir, jobs);

  int failures = 0;
  for (const auto& rec : result.manifest.records) {
    if (rec.error) {
      std::cerr << "sample " << rec.sample_id << " failed: " << *rec.error << "\n";
      ++failures;
    }
  }
  std::cout << result.manifest.records.size() - failures << "/"
            << result.manifest.records.size() << " samples written to " << out_dir
            << " (manifest: " << result.manifest_path.string() << ")\n";
  return failures == 0 ? kExitOk : kExitPartialFailure;
}

int cmd_subdivide(const std::string& labels_path, const std::string& intensities_path,
                  const std::string& label_name, std::vector<int> n_values, std::uint64_t seed,
                  const std::string& out_dir) {
  synthvox::LabelVolume labels = synthvox::read_label_nifti(labels_path);
  const auto sc = synthvox::sidecar_path_for(labels_path);
  if (std::filesystem::exists(sc)) {
    labels.dictionary = synthvox::load_label_dictionary(sc);
    labels.ensure_dictionary();
  }
  const synthvox::ScalarVolume intensities = synthvox::read_scalar_nifti(intensities_path);

  const auto id = labels.dictionary.find_by_name(label_name);
  if (!id) throw synthvox::Error("no label named \"" + label_name + "\" in dictionary");

  std::filesystem::create_directories(out_dir);
  std::filesystem::path stem = std::filesystem::path(labels_path).filename();
  if (stem.extension() == ".gz") stem.replace_extension();
  if (stem.extension() == ".nii") stem.replace_extension();

  for (const int n : n_values) {
    const std::uint64_t fit_seed =
        synthvox::derive_seed(seed, "subdivide", static_cast<std::uint64_t>(n));
    synthvox::GmmFit fit;
    const synthvox::LabelVolume sub =
        synthvox::subdivide_label(labels, intensities, *id, n, fit_seed, &fit);
    const auto out_path =
        std::filesystem::path(out_dir) / (stem.string() + "_sub" + std::to_string(n) + ".nii.gz");
    synthvox::write_nifti(sub, out_path);
    synthvox::save_label_dictionary(sub.dictionary, synthvox::sidecar_path_for(out_path));
    std::cout << "N=" << n << " -> " << out_path.string() << " (EM iterations: "
              << fit.log_likelihood.size() << ", restarts: " << fit.restarts << ")\n";
  }
  return kExitOk;
}

int cmd_fuse_head(const std::string& brain_path, const std::string& head_path,
                  const std::string& out_path) {
  auto load = [](const std::string& p) {
    synthvox::LabelVolume v = synthvox::read_label_nifti(p);
    const auto sc = synthvox::sidecar_path_for(p);
    if (std::filesystem::exists(sc)) {
      v.dictionary = synthvox::load_label_dictionary(sc);
      v.ensure_dictionary();
    }
    return v;
  };
  const synthvox::LabelVolume fused = synthvox::fuse_head_labels(load(brain_path), load(head_path));
  synthvox::write_nifti(fused, out_path);
  synthvox::save_label_dictionary(fused.dictionary, synthvox::sidecar_path_for(out_path));
  std::cout << "fused labels -> " << out_path << "\n";
  return kExitOk;
}

int cmd_surf2labels(const std::string& base_path, const std::string& white_path,
                    const std::string& pial_path, int supersample, const std::string& out_dir) {
  synthvox::LabelVolume base = synthvox::read_label_nifti(base_path);
  const auto sc = synthvox::sidecar_path_for(base_path);
  if (std::filesystem::exists(sc)) {
    base.dictionary = synthvox::load_label_dictionary(sc);
    base.ensure_dictionary();
  }
  const synthvox::TriangleMesh white = synthvox::read_mesh(white_path);
  const synthvox::TriangleMesh pial = synthvox::read_mesh(pial_path);

  const synthvox::PartialVolumeMap pv_white = synthvox::voxelize_pv(white, base.geom, supersample);
  const synthvox::GmPvResult gm = synthvox::gm_from_surfaces(white, pial, base.geom, supersample);
  const synthvox::LabelVolume spliced = synthvox::splice_gm(base, gm.pv, pv_white);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  synthvox::write_nifti(gm.pv.values, dir / "pv_gm.nii.gz");
  synthvox::write_nifti(spliced, dir / "labels_surf.nii.gz");
  synthvox::save_label_dictionary(spliced.dictionary,
                                  synthvox::sidecar_path_for(dir / "labels_surf.nii.gz"));

  const auto gm_id = base.dictionary.find_by_name("GM");
  nlohmann::json stats{{"clamped_voxels", gm.clamped_voxels}, {"supersample", supersample}};
  if (gm_id) {
    const double before = synthvox::structure_volume_mm3(base, *gm_id);
    const double after = synthvox::structure_volume_mm3(spliced, *gm_id);
    stats["gm_volume_mm3_base"] = before;
    stats["gm_volume_mm3_surf"] = after;
    if (after > 0) stats["gm_volume_ratio"] = before / after;
  }
  std::ofstream js(dir / "surf2labels.json", std::ios::trunc);
  js << stats.dump(2) << "\n";
  std::cout << stats.dump(2) << "\n";
  return kExitOk;
}

int cmd_sample_patches(const std::string& image_path, const std::string& labels_path,
                       std::vector<int> size, int count, std::uint64_t seed,
                       const std::string& format, const std::string& out) {
  const synthvox::ScalarVolume image = synthvox::read_scalar_nifti(image_path);
  synthvox::LabelVolume labels = synthvox::read_label_nifti(labels_path);
  const auto sc = synthvox::sidecar_path_for(labels_path);
  if (std::filesystem::exists(sc)) {
    labels.dictionary = synthvox::load_label_dictionary(sc);
    labels.ensure_dictionary();
  }

  synthvox::PatchSpec spec;
  if (size.size() == 1) {
    spec.size = {size[0], size[0], size[0]};
  } else if (size.size() == 3) {
    spec.size = {size[0], size[1], size[2]};
  } else {
    throw synthvox::ConfigError("--size wants 1 or 3 integers");
  }
  spec.count_per_volume = count;

  const auto patches = synthvox::sample_patches(image, labels, spec, seed);
  if (format == "shard") {
    synthvox::write_patch_shard(patches, out);
    std::cout << patches.size() << " patches -> " << out << "\n";
  } else if (format == "nifti") {
    std::filesystem::create_directories(out);
    for (std::size_t p = 0; p < patches.size(); ++p) {
      std::ostringstream idx;
      idx << std::setw(3) << std::setfill('0') << p;
      synthvox::write_nifti(patches[p].image,
                            std::filesystem::path(out) / ("patch_" + idx.str() + "_img.nii.gz"));
      synthvox::write_nifti(patches[p].labels,
                            std::filesystem::path(out) / ("patch_" + idx.str() + "_lab.nii.gz"));
    }
    std::cout << patches.size() << " patch pairs -> " << out << "\n";
  } else {
    throw synthvox::ConfigError("--format wants shard or nifti");
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& pred, const std::string& gt, const std::string& subjects,
                 const std::string& out, bool no_merge, double outlier_k) {
  synthvox::EvaluateOptions opts;
  opts.pred_dir = pred;
  opts.gt_dir = gt;
  opts.subjects_csv = subjects;
  opts.out_dir = out;
  opts.merge_csf_ventricles = !no_merge;
  opts.outlier_k = outlier_k;

  const auto result = synthvox::evaluate_directories(opts);
  for (const std::string& id : result.missing_subjects) {
    std::cerr << "warning: subject " << id << " missing from pred/gt, excluded\n";
  }
  std::cout << "evaluated "
            << result.report.per_subject_mean_dice().size() << " subjects, "
            << result.report.rows.size() << " rows -> " << result.csv_path.string() << ", "
            << result.summary_path.string() << "\n";
  return result.missing_subjects.empty() ? kExitOk : kExitPartialFailure;
}

int cmd_replay(const std::string& manifest_path, const std::string& sample_id,
               const std::string& out_dir) {
  const synthvox::Manifest manifest = synthvox::read_manifest(manifest_path);
  std::filesystem::create_directories(out_dir);

  int done = 0, failed = 0;
  for (const synthvox::SampleRecord& rec : manifest.records) {
    if (!sample_id.empty() && rec.sample_id != sample_id) continue;
    if (rec.error) {
      std::cerr << "skipping errored record " << rec.sample_id << "\n";
      continue;
    }
    try {
      const synthvox::GeneratedSample sample = synthvox::replay_sample(manifest, rec);
      synthvox::write_nifti(sample.image, std::filesystem::path(out_dir) / rec.image_path);
      synthvox::write_nifti(sample.labels, std::filesystem::path(out_dir) / rec.labels_path);
      synthvox::save_label_dictionary(
          sample.labels.dictionary,
          synthvox::sidecar_path_for(std::filesystem::path(out_dir) / rec.labels_path));
      ++done;
    } catch (const std::exception& e) {
      std::cerr << "replay of " << rec.sample_id << " failed: " << e.what() << "\n";
      ++failed;
    }
  }
  if (!sample_id.empty() && done + failed == 0) {
    throw synthvox::Error("no record with sample_id \"" + sample_id + "\" in manifest");
  }
  std::cout << "replayed " << done << " sample(s) -> " << out_dir << "\n";
  return failed == 0 ? kExitOk : kExitPartialFailure;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic MRI volume generation and segmentation evaluation"};
  app.require_subcommand(1);

  // generate
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed_override;
  int jobs = 1;
  auto* gen = app.add_subcommand("generate", "Generate a synthetic training set");
  gen->add_option("--config", config_path, "JSON generation config")->required();
  gen->add_option("--seed", seed_override, "Override the config seed");
  gen->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  gen->add_option("--out", out_dir, "Output directory")->required();

  // subdivide-labels
  std::string sd_labels, sd_intens, sd_label_name = "WM", sd_out;
  std::vector<int> sd_n{2, 3, 4, 5, 6};
  std::uint64_t sd_seed = 0;
  auto* sd = app.add_subcommand("subdivide-labels",
                                "Split a label into intensity sub-regions (EM clustering)");
  sd->add_option("--labels", sd_labels)->required();
  sd->add_option("--intensities", sd_intens, "Matching intensity volume (e.g. T2w)")->required();
  sd->add_option("--label", sd_label_name, "Label name to subdivide");
  sd->add_option("--n", sd_n, "Sub-region counts (each in [2,6])");
  sd->add_option("--seed", sd_seed);
  sd->add_option("--out", sd_out, "Output directory")->required();

  // fuse-head
  std::string fh_brain, fh_head, fh_out;
  auto* fh = app.add_subcommand("fuse-head", "Fuse brain labels with extra-cranial head labels");
  fh->add_option("--brain", fh_brain)->required();
  fh->add_option("--head", fh_head)->required();
  fh->add_option("--out", fh_out, "Output NIfTI path")->required();

  // surf2labels
  std::string sl_base, sl_white, sl_pial, sl_out;
  int sl_supersample = 4;
  auto* sl = app.add_subcommand(
      "surf2labels", "Surface-derived GM ground truth: partial volumes, threshold, splice");
  sl->add_option("--base", sl_base, "Base label map")->required();
  sl->add_option("--white", sl_white, "White surface (.off/.gii)")->required();
  sl->add_option("--pial", sl_pial, "Pial surface (.off/.gii)")->required();
  sl->add_option("--supersample", sl_supersample)->check(CLI::PositiveNumber);
  sl->add_option("--out", sl_out, "Output directory")->required();

  // sample-patches
  std::string sp_image, sp_labels, sp_format = "shard", sp_out;
  std::vector<int> sp_size{128};
  int sp_count = 8;
  std::uint64_t sp_seed = 0;
  auto* sp = app.add_subcommand("sample-patches", "Structure-balanced patch extraction");
  sp->add_option("--image", sp_image)->required();
  sp->add_option("--labels", sp_labels)->required();
  sp->add_option("--size", sp_size, "Patch size (1 or 3 ints)");
  sp->add_option("--count", sp_count);
  sp->add_option("--seed", sp_seed);
  sp->add_option("--format", sp_format, "shard | nifti");
  sp->add_option("--out", sp_out, "Shard path or directory")->required();

  // evaluate
  std::string ev_pred, ev_gt, ev_subjects, ev_out;
  bool ev_no_merge = false;
  double ev_outlier_k = 2.5;
  auto* ev = app.add_subcommand("evaluate", "Dice/ASD/volume report for a prediction set");
  ev->add_option("--pred", ev_pred, "Directory of predicted label maps")->required();
  ev->add_option("--gt", ev_gt, "Directory of ground-truth label maps")->required();
  ev->add_option("--subjects", ev_subjects, "subjects CSV")->required();
  ev->add_option("--out", ev_out, "Output directory")->required();
  ev->add_flag("--no-merge", ev_no_merge, "Skip the CSF+Ventricles evaluation merge");
  ev->add_option("--outlier-k", ev_outlier_k);

  // replay
  std::string rp_manifest, rp_sample, rp_out;
  auto* rp = app.add_subcommand("replay", "Reproduce samples from a manifest");
  rp->add_option("manifest", rp_manifest, "manifest.jsonl")->required();
  rp->add_option("--sample", rp_sample, "Single sample_id (default: all)");
  rp->add_option("--out", rp_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*gen) return cmd_generate(config_path, seed_override, jobs, out_dir);
    if (*sd) return cmd_subdivide(sd_labels, sd_intens, sd_label_name, sd_n, sd_seed, sd_out);
    if (*fh) return cmd_fuse_head(fh_brain, fh_head, fh_out);
    if (*sl) return cmd_surf2labels(sl_base, sl_white, sl_pial, sl_supersample, sl_out);
    if (*sp) {
      return cmd_sample_patches(sp_image, sp_labels, sp_size, sp_count, sp_seed, sp_format, sp_out);
    }
    if (*ev) return cmd_evaluate(ev_pred, ev_gt, ev_subjects, ev_out, ev_no_merge, ev_outlier_k);
    if (*rp) return cmd_replay(rp_manifest, rp_sample, rp_out);
  } catch (const synthvox::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartialFailure;
  }
  return kExitOk;
}
