#include "synthvox/pipeline.hpp"

#include <atomic>
#include <iomanip>
#include <sstream>
#include <thread>

#include "synthvox/label_ops.hpp"
#include "synthvox/nifti.hpp"
#include "synthvox/rng.hpp"

namespace synthvox {

std::uint64_t sample_seed_for(std::uint64_t base_seed, std::string_view subject_id, int index) {
  return splitmix64(derive_seed(base_seed, subject_id) ^
                    splitmix64(static_cast<std::uint64_t>(index)));
}

SubjectData load_subject(const SubjectInput& input, const GenerationConfig& cfg) {
  SubjectData data;
  data.id = input.id;
  data.labels = read_label_nifti(input.labels);

  std::filesystem::path dict_path =
      input.dictionary ? *input.dictionary : sidecar_path_for(input.labels);
  if (std::filesystem::exists(dict_path)) {
    data.labels.dictionary = load_label_dictionary(dict_path);
    data.labels.ensure_dictionary();
    data.labels.validate();
  }

  if (input.intensities) {
    data.image = read_scalar_nifti(*input.intensities);
    if (!data.image->geom.same_grid(data.labels.geom)) {
      throw GeometryError("subject " + input.id + ": intensities do not share the label grid");
    }
  }

  if (cfg.inhomogeneity_allowed() && cfg.inhomogeneity.probability > 0.0) {
    for (const int n : cfg.inhomogeneity.n_set) {
      const auto it = input.subdivided.find(n);
      if (it != input.subdivided.end()) {
        LabelVolume sub = read_label_nifti(it->second);
        const auto sc = sidecar_path_for(it->second);
        if (std::filesystem::exists(sc)) {
          sub.dictionary = load_label_dictionary(sc);
          sub.ensure_dictionary();
        }
        if (!sub.geom.same_grid(data.labels.geom)) {
          throw GeometryError("subject " + input.id + ": subdivided map N=" + std::to_string(n) +
                              " does not share the label grid");
        }
        data.subdivided[n] = std::move(sub);
      } else if (data.image) {
        // Subdivision is a fixed per-subject modification; one deterministic
        // fit per (subject, N).
        const auto wm = data.labels.dictionary.find_by_name("WM");
        if (!wm) {
          throw Error("subject " + input.id + ": no WM label to subdivide; provide "
                      "precomputed subdivided maps or a dictionary naming WM");
        }
        const std::uint64_t seed =
            derive_seed(cfg.seed, "subdivide:" + input.id, static_cast<std::uint64_t>(n));
        data.subdivided[n] = subdivide_label(data.labels, *data.image, *wm, n, seed);
      } else {
        throw ConfigError("subject " + input.id + ": recipe needs WM subdivision but neither a "
                          "subdivided map for N=" + std::to_string(n) +
                          " nor intensities were given");
      }
    }
  }
  return data;
}

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

/// Zero every voxel whose label is named background/bg/air.
void zero_background(ScalarVolume& img, const LabelVolume& labels) {
  const auto bg = labels.dictionary.background_ids();
  if (bg.empty()) return;
  std::vector<std::uint8_t> is_bg(labels.dictionary.max_id() + 1, 0);
  for (const int id : bg) is_bg[id] = 1;
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    if (is_bg[labels.data[i]]) img.data[i] = 0.0f;
  }
}

AffineDraw affine_draw_of(const AffineScaleTransform& t) {
  AffineDraw d;
  for (int a = 0; a < 3; ++a) {
    d.scale[a] = t.scale[a];
    d.rotation_deg[a] = t.rotation_deg[a];
    d.translation_mm[a] = t.translation_mm[a];
  }
  return d;
}

} // namespace

DataT2Result dataT2_augment(const ScalarVolume& image, const LabelVolume& labels,
                            const GenerationConfig& cfg, std::uint64_t seed,
                            SampleRecord* record) {
  if (!image.geom.same_grid(labels.geom)) {
    throw GeometryError("dataT2_augment: image and labels do not share a grid");
  }

  const AffineScaleTransform aff = sample_affine(cfg.affine, derive_seed(seed, "affine"));
  const DeformationField field =
      sample_elastic(labels.geom, cfg.elastic, derive_seed(seed, "elastic"));

  // One sampled transform drives both volumes.
  ScalarVolume img = warp(apply_affine(image, aff, Interp::trilinear), field, Interp::trilinear);
  LabelVolume lab = warp(apply_affine(labels, aff, Interp::nearest), field, Interp::nearest);

  const BiasField bias = sample_bias_field(img.geom, cfg.bias, derive_seed(seed, "bias"));
  img = apply_bias(img, bias);
  const NoiseResult noised = add_noise(img, cfg.noise, derive_seed(seed, "noise"));

  RngEngine gamma_eng(derive_seed(seed, "gamma"));
  const double gamma = std::exp(uniform(gamma_eng, cfg.gamma.log_range[0], cfg.gamma.log_range[1]));

  // Gamma acts on physical (non-negative) intensities; noise may dip below 0.
  ScalarVolume powed = noised.image;
  for (float& v : powed.data) v = std::pow(std::max(v, 0.0f), static_cast<float>(gamma));

  DataT2Result out;
  out.image = minmax_normalize(powed);
  out.labels = std::move(lab);

  if (record) {
    record->affine = affine_draw_of(aff);
    record->elastic_control_hash = hex64(field.content_hash());
    record->bias_coefficients = bias.coefficients;
    record->noise_sigma = noised.sigma;
    record->gamma = gamma;
  }
  return out;
}

GeneratedSample generate_sample(const SubjectData& subject, const GenerationConfig& cfg,
                                std::uint64_t sample_seed, int sample_index) {
  GeneratedSample out;
  SampleRecord& rec = out.record;
  rec.source_subject = subject.id;
  rec.recipe = cfg.recipe;
  rec.sample_seed = sample_seed;
  rec.sample_index = sample_index;

  // Augmentation firing decisions come first so downstream draws see stable
  // per-stage seeds regardless of what fired.
  RngEngine fire(derive_seed(sample_seed, "fire"));
  const double u_motion = uniform01(fire);
  const double u_inh = uniform01(fire);
  rec.motion_fired = cfg.motion_allowed() && u_motion < cfg.motion.probability;
  rec.inh_fired = cfg.inhomogeneity_allowed() && u_inh < cfg.inhomogeneity.probability;

  const LabelVolume* source = &subject.labels;
  if (rec.inh_fired && cfg.recipe != Recipe::DataT2Aug) {
    RngEngine pick(derive_seed(sample_seed, "n-choice"));
    const int n = cfg.inhomogeneity.n_set[uniform_int(
        pick, 0, static_cast<std::int64_t>(cfg.inhomogeneity.n_set.size()) - 1)];
    rec.n_chosen = n;
    const auto it = subject.subdivided.find(n);
    if (it == subject.subdivided.end()) {
      throw Error("subject " + subject.id + ": no subdivided map for N=" + std::to_string(n));
    }
    source = &it->second;
  }

  if (cfg.recipe == Recipe::DataT2Aug) {
    if (!subject.image) throw Error("subject " + subject.id + ": DataT2-aug needs a real image");
    rec.motion_fired = false;
    rec.inh_fired = false;
    DataT2Result res = dataT2_augment(*subject.image, *source, cfg, sample_seed, &rec);
    out.image = std::move(res.image);
    out.labels = res.labels.project(GroupKind::target);
    return out;
  }

  // 1-2) deform the label map (nearest keeps ids closed under warping)
  const AffineScaleTransform aff = sample_affine(cfg.affine, derive_seed(sample_seed, "affine"));
  const DeformationField field =
      sample_elastic(source->geom, cfg.elastic, derive_seed(sample_seed, "elastic"));
  const LabelVolume deformed =
      warp(apply_affine(*source, aff, Interp::nearest), field, Interp::nearest);
  rec.affine = affine_draw_of(aff);
  rec.elastic_control_hash = hex64(field.content_hash());

  // 3) per-label Gaussian intensities
  SynthesisResult synth = labels_to_image(deformed, cfg.contrast, derive_seed(sample_seed, "contrast"));
  rec.contrast = synth.drawn;

  // 4) multiplicative bias field
  const BiasField bias = sample_bias_field(synth.image.geom, cfg.bias, derive_seed(sample_seed, "bias"));
  ScalarVolume img = apply_bias(synth.image, bias);
  rec.bias_coefficients = bias.coefficients;

  // 5) k-space motion; background signal forced to zero first
  if (rec.motion_fired) {
    zero_background(img, deformed);
    const int n_lines = img.geom.dims[cfg.motion.spec.phase_axis];
    const MotionTrajectory traj =
        sample_trajectory(cfg.motion.spec, n_lines, derive_seed(sample_seed, "motion"));
    img = corrupt(img, traj);
    rec.trajectory = traj;
  }

  // 6-7) additive noise, then rescale to [0, 1]
  NoiseResult noised = add_noise(img, cfg.noise, derive_seed(sample_seed, "noise"));
  rec.noise_sigma = noised.sigma;
  out.image = minmax_normalize(noised.image);

  // The emitted label map always uses target-group ids.
  out.labels = deformed.project(GroupKind::target);
  return out;
}

namespace {

std::string sample_file_stem(const std::string& subject, int index) {
  std::ostringstream os;
  os << subject << "_" << std::setw(4) << std::setfill('0') << index;
  return os.str();
}

} // namespace

DatasetResult generate_dataset(const GenerationConfig& cfg, const std::filesystem::path& out_dir,
                               int jobs) {
  cfg.validate();
  if (cfg.subjects.empty()) throw ConfigError("generate_dataset: no subjects in config");
  std::filesystem::create_directories(out_dir);

  std::vector<SubjectData> subjects;
  subjects.reserve(cfg.subjects.size());
  for (const SubjectInput& s : cfg.subjects) subjects.push_back(load_subject(s, cfg));

  struct Task {
    const SubjectData* subject;
    int index;
  };
  std::vector<Task> tasks;
  for (const SubjectData& s : subjects) {
    for (int i = 0; i < cfg.samples_per_subject; ++i) tasks.push_back({&s, i});
  }

  std::vector<SampleRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  const std::string ext = cfg.compress_output ? ".nii.gz" : ".nii";

  const auto worker = [&]() {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const Task& task = tasks[t];
      const std::uint64_t seed = sample_seed_for(cfg.seed, task.subject->id, task.index);
      const std::string stem = sample_file_stem(task.subject->id, task.index);
      SampleRecord rec;
      rec.sample_id = stem;
      rec.source_subject = task.subject->id;
      rec.recipe = cfg.recipe;
      rec.sample_seed = seed;
      rec.sample_index = task.index;
      try {
        GeneratedSample sample = generate_sample(*task.subject, cfg, seed, task.index);
        rec = std::move(sample.record);
        rec.sample_id = stem;
        rec.image_path = stem + "_img" + ext;
        rec.labels_path = stem + "_lab" + ext;
        write_nifti(sample.image, out_dir / rec.image_path);
        write_nifti(sample.labels, out_dir / rec.labels_path);
        save_label_dictionary(sample.labels.dictionary,
                              sidecar_path_for(out_dir / rec.labels_path));
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      records[t] = std::move(rec);
    }
  };

  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();

  DatasetResult result;
  result.manifest.schema_version = 1;
  result.manifest.config = cfg;
  result.manifest.records = std::move(records); // task order: deterministic
  for (const SampleRecord& r : result.manifest.records) {
    if (r.error) ++result.failure_count;
  }
  result.manifest_path = out_dir / "manifest.jsonl";
  write_manifest(result.manifest, result.manifest_path);
  return result;
}

GeneratedSample replay_sample(const Manifest& manifest, const SampleRecord& record) {
  const auto it = std::find_if(
      manifest.config.subjects.begin(), manifest.config.subjects.end(),
      [&](const SubjectInput& s) { return s.id == record.source_subject; });
  if (it == manifest.config.subjects.end()) {
    throw Error("replay: subject " + record.source_subject + " not in manifest config");
  }
  const SubjectData subject = load_subject(*it, manifest.config);
  GeneratedSample sample =
      generate_sample(subject, manifest.config, record.sample_seed, record.sample_index);
  sample.record.sample_id = record.sample_id;
  sample.record.image_path = record.image_path;
  sample.record.labels_path = record.labels_path;
  return sample;
}

} // namespace synthvox
