// Command line front end: dataset generation, calibration, analysis and material assignment.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "roomir/analysis.hpp"
#include "roomir/materials.hpp"
#include "roomir/pipeline.hpp"
#include "roomir/scene.hpp"
#include "roomir/wav.hpp"

namespace fs = std::filesystem;
using namespace roomir;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPairFailed = 2;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
}

pipeline::PipelineConfig load_config(const fs::path& path, std::optional<int> jobs, std::optional<std::uint64_t> seed) {
  auto cfg = pipeline::PipelineConfig::load(path);
  pipeline::apply_env_overrides(cfg);
  if (jobs) cfg.max_parallel = *jobs;
  if (seed) cfg.rng_seed = *seed;
  return cfg;
}

int cmd_generate(const fs::path& config, std::optional<int> jobs, std::optional<std::uint64_t> seed, bool dry_run) {
  const auto cfg = load_config(config, jobs, seed);
  if (dry_run) {
    const auto planned = pipeline::plan(cfg);
    std::size_t bad = 0;
    for (const auto& e : planned) {
      if (e.ok()) {
        std::cout << e.scene_id << " pair " << e.pair_index << " distance " << e.distance << " m\n";
      } else {
        std::cout << e.scene_id << " error: " << *e.error << "\n";
        ++bad;
      }
    }
    std::cout << planned.size() - bad << " jobs planned, output to " << cfg.output_dir << "\n";
    return bad ? kExitPairFailed : kExitOk;
  }
  const auto result = pipeline::run_pipeline(cfg);
  std::cout << "calibration: eta_w=" << result.calibration.eta_w << " eta_g=" << result.calibration.eta_g
            << " eta=" << result.calibration.eta_combined << (result.calibration_from_cache ? " (cached)" : "") << "\n";
  for (const auto& e : result.manifest) {
    if (!e.ok()) std::cerr << e.scene_id << " pair " << e.pair_index << " failed: " << *e.error << "\n";
  }
  std::cout << result.manifest.size() - result.failed << " of " << result.manifest.size() << " pairs written; manifest "
            << result.manifest_path.string() << "\n";
  return result.failed ? kExitPairFailed : kExitOk;
}

int cmd_calibrate(const fs::path& config) {
  auto cfg = load_config(config, std::nullopt, std::nullopt);
  fs::create_directories(cfg.output_dir);
  const auto r = pipeline::cached_calibration(cfg, cfg.output_dir);
  std::cout << r.to_json() << "\n";
  return kExitOk;
}

int cmd_analyze(const fs::path& manifest_path, const fs::path& report) {
  const auto manifest = pipeline::load_manifest(manifest_path);
  if (manifest.empty()) throw Error("manifest " + manifest_path.string() + " has no entries");
  std::vector<analysis::StatsRecord> records;
  std::map<std::string, std::size_t> occurrence;
  std::set<std::string> scenes_seen;
  for (const auto& e : manifest) {
    if (!e.ok()) continue;
    records.push_back({e.scene_id, e.source, e.receiver, e.scene_volume, e.rt60});
    if (scenes_seen.insert(e.scene_id).second) {
      for (const auto& m : e.materials) ++occurrence[m.material];
    }
  }
  if (records.empty()) throw Error("manifest " + manifest_path.string() + " has no successful entries");
  const auto stats = analysis::dataset_stats(records);
  fs::create_directories(report);
  write_file(report / "distance_histogram.csv", stats.distance_csv());
  write_file(report / "distance_histogram.svg", stats.distance_svg());
  write_file(report / "volume_rt60.csv", stats.volume_rt60_csv());
  std::string occ = "material,count\n";
  for (const auto& [name, n] : occurrence) occ += name + "," + std::to_string(n) + "\n";
  write_file(report / "material_occurrence.csv", occ);
  std::cout << records.size() << " entries analysed; report in " << report.string() << "\n";
  return kExitOk;
}

int cmd_assign(const fs::path& scene_path, const fs::path& db_path, const std::optional<fs::path>& emb, std::uint64_t seed) {
  const auto mesh = scene::load_mesh(scene_path).mesh;
  const std::set<std::string> unique(mesh.object_labels.begin(), mesh.object_labels.end());
  const std::vector<std::string> labels(unique.begin(), unique.end());
  const auto db = materials::load_material_db(db_path);
  std::optional<materials::EmbeddingTable> table;
  if (emb) table = materials::load_embedding_table(*emb);
  const auto assigned =
      materials::assign_labels(labels, db, table ? &*table : nullptr, materials::default_scattering_prior(), seed);
  nlohmann::json out = nlohmann::json::array();
  for (const auto& a : assigned) {
    out.push_back({{"label", a.label},
                   {"material", a.material},
                   {"probability", a.probability},
                   {"seed", a.seed},
                   {"absorption", a.absorption},
                   {"scattering", a.scattering}});
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& inputs, const fs::path& report, double lo, double hi) {
  std::vector<analysis::LabeledIr> irs;
  for (const auto& in : inputs) {
    const auto eq = in.find('=');
    const std::string label = eq == std::string::npos ? fs::path(in).stem().string() : in.substr(0, eq);
    const fs::path path = eq == std::string::npos ? fs::path(in) : fs::path(in.substr(eq + 1));
    irs.push_back({label, wav::read(path)});
  }
  const auto r = analysis::compare_report(irs, lo, hi);
  fs::create_directories(report);
  write_file(report / "band_levels.csv", r.levels_csv());
  write_file(report / "pair_differences.csv", r.pairs_csv());
  std::cout << r.pairs_csv();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roomir: hybrid wave/geometric room impulse response generator"};
  app.require_subcommand(1);

  fs::path config;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  bool dry_run = false;
  auto* gen = app.add_subcommand("generate", "Generate IRs for every scene in a config");
  gen->add_option("--config", config, "Pipeline JSON config")->required()->check(CLI::ExistingFile);
  gen->add_option("--jobs", jobs, "Parallel (scene, pair) jobs")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "Override rng_seed");
  gen->add_flag("--dry-run", dry_run, "Validate inputs and list planned jobs");

  auto* cal = app.add_subcommand("calibrate", "Compute or load the cached calibration for a config");
  cal->add_option("--config", config, "Pipeline JSON config")->required()->check(CLI::ExistingFile);

  fs::path manifest, report;
  auto* ana = app.add_subcommand("analyze", "Dataset statistics from a manifest");
  ana->add_option("--manifest", manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  ana->add_option("--report", report, "Report directory")->required();

  fs::path scene_path, db_path;
  std::optional<fs::path> emb;
  std::uint64_t assign_seed = 0;
  auto* asg = app.add_subcommand("assign-materials", "Assign database materials to the object labels of a scene");
  asg->add_option("--scene", scene_path, "OBJ scene")->required()->check(CLI::ExistingFile);
  asg->add_option("--db", db_path, "Material CSV")->required()->check(CLI::ExistingFile);
  asg->add_option("--embeddings", emb, "Embedding JSON")->check(CLI::ExistingFile);
  asg->add_option("--seed", assign_seed, "Assignment seed")->required();

  std::vector<std::string> inputs;
  double band_lo = 50.0, band_hi = 8000.0;
  auto* cmp = app.add_subcommand("compare", "Third-octave comparison of WAV impulse responses");
  cmp->add_option("--ir", inputs, "label=path.wav (repeatable)")->required();
  cmp->add_option("--report", report, "Report directory")->required();
  cmp->add_option("--band-lo", band_lo, "Lowest band centre in Hz");
  cmp->add_option("--band-hi", band_hi, "Highest band centre in Hz");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFatal;
  }

  try {
    if (gen->parsed()) return cmd_generate(config, jobs, seed, dry_run);
    if (cal->parsed()) return cmd_calibrate(config);
    if (ana->parsed()) return cmd_analyze(manifest, report);
    if (asg->parsed()) return cmd_assign(scene_path, db_path, emb, assign_seed);
    if (cmp->parsed()) return cmd_compare(inputs, report, band_lo, band_hi);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}
