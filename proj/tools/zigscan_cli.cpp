// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// zigscan: point-cloud serialization, masking, curve comparison and the
// reconstruction demo from the command line.
//
// Exit codes: 0 success, 1 I/O error, 2 validation error, 3 numerical or
// training error.

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>

#include <CLI11.hpp>

#include "run_config.hpp"
#include "zigscan/error.hpp"
#include "zigscan/rng.hpp"
#include "zigscan/synthetic.hpp"

namespace fs = std::filesystem;
using namespace zigscan;
using zigscan::cli::RunConfig;

namespace {

enum class Command { serialize, mask, compare, reconstruct };

// Options bound to a scratch value; applied to the config only if given.
class Overlay {
 public:
  template <typename T, typename Set>
  CLI::Option* add(CLI::App& app, const std::string& name, const std::string& desc, Set set) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app.add_option(name, *value, desc);
    apply_.push_back([opt, value, set](RunConfig& c) {
      if (opt->count() > 0) set(c, *value);
    });
    return opt;
  }

  void apply(RunConfig& c) const {
    for (const auto& f : apply_) f(c);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> apply_;
};

void add_tokenize_flags(CLI::App& sub, Overlay& o) {
  o.add<std::size_t>(sub, "--n-centers", "patch centers chosen by FPS",
                     [](RunConfig& c, std::size_t v) { c.tokenize.n_centers = v; });
  o.add<std::size_t>(sub, "--k", "points per patch",
                     [](RunConfig& c, std::size_t v) { c.tokenize.k = v; });
  o.add<std::size_t>(sub, "--hidden", "encoder hidden width",
                     [](RunConfig& c, std::size_t v) { c.tokenize.hidden = v; });
  o.add<std::size_t>(sub, "--feature-dim", "token feature width",
                     [](RunConfig& c, std::size_t v) { c.tokenize.feature_dim = v; });
}

void add_scan_flags(CLI::App& sub, Overlay& o) {
  o.add<std::size_t>(sub, "--layer-budget", "zigzag layer budget shared by the three planes",
                     [](RunConfig& c, std::size_t v) { c.scan.layer_budget = v; });
  o.add<std::size_t>(sub, "--segment-size", "target points per zigzag segment",
                     [](RunConfig& c, std::size_t v) { c.scan.segment_size = v; });
  o.add<std::size_t>(sub, "--max-segments", "segment cap per layer",
                     [](RunConfig& c, std::size_t v) { c.scan.max_segments = v; });
  o.add<std::string>(sub, "--plane", "xy | xz | yz | random",
                     [](RunConfig& c, const std::string& v) { c.plane = v; });
  o.add<std::string>(sub, "--target", "serialize patch centers or raw points",
                     [](RunConfig& c, const std::string& v) { c.target = v; });
  o.add<int>(sub, "--bits", "quantization bits for Hilbert / Morton curves",
             [](RunConfig& c, int v) { c.bits = v; });
}

void add_mask_flags(CLI::App& sub, Overlay& o) {
  o.add<double>(sub, "--t-semantic", "fraction of tokens SMS retains",
                [](RunConfig& c, double v) { c.t_semantic = v; });
  o.add<double>(sub, "--r-random", "fraction of remaining tokens masked at random",
                [](RunConfig& c, double v) { c.r_random = v; });
  o.add<std::string>(sub, "--mask-strategy", "sms | random-only (| both for reconstruct)",
                     [](RunConfig& c, const std::string& v) { c.mask_strategy = v; });
}

// ---------------------------------------------------------------------------

std::vector<PointCloud> load_clouds(const RunConfig& c) {
  std::vector<PointCloud> clouds;
  if (!c.inputs.empty()) {
    const CloudFormat format = parse_cloud_format(c.format);
    for (const std::string& path : c.inputs) clouds.push_back(load_pointcloud(path, format));
    return clouds;
  }
  for (std::size_t i = 0; i < c.n_clouds; ++i) {
    const SyntheticShape shape = c.synthetic == "mixed" ? static_cast<SyntheticShape>(i % 3)
                                                        : parse_synthetic_shape(c.synthetic);
    clouds.push_back(make_synthetic(shape, c.n_points, c.cloud_seed(i)));
  }
  return clouds;
}

// Tokenization sizes cannot exceed the smallest cloud.
TokenizeConfig clamped_tokenize(const RunConfig& c, std::span<const PointCloud> clouds) {
  std::size_t n = clouds.front().size();
  for (const PointCloud& p : clouds) n = std::min(n, p.size());
  TokenizeConfig t = c.tokenize;
  t.n_centers = std::min(t.n_centers, n);
  t.k = std::min(t.k, n);
  return t;
}

std::optional<Plane> fixed_plane(const RunConfig& c) {
  if (c.plane == "random") return std::nullopt;
  return parse_plane(c.plane);
}

PipelineConfig pipeline_config(const RunConfig& c, std::span<const PointCloud> clouds,
                               MaskStrategy strategy) {
  PipelineConfig p;
  p.tokenize = clamped_tokenize(c, clouds);
  p.scan = c.scan;
  p.plane = fixed_plane(c);
  p.mask = {c.t_semantic, c.r_random, c.mask_seed(), strategy};
  p.seed = c.seed;
  return p;
}

// Curve names resolved for one cloud: "all" expands to every tag and
// "zigzag" to the configured (or seeded) plane.
std::vector<std::string> curve_names(const RunConfig& c) {
  std::vector<std::string> out;
  for (const std::string& name : c.curves) {
    if (name == "all") {
      for (CurveTag t : kAllCurveTags) out.emplace_back(to_string(t));
    } else {
      out.push_back(name);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ScanOrder run_curve(const std::string& name, const PointCloud& cloud, const RunConfig& c,
                    std::size_t cloud_index) {
  if (name == "zigzag") {
    const auto plane = fixed_plane(c);
    const PlaneChoice choice = plane ? PlaneChoice::fixed(*plane)
                                     : PlaneChoice::seeded_random(plane_seed(c.seed, cloud_index));
    return zigzag_scan_3d(cloud, c.scan, choice);
  }
  const CurveTag tag = parse_curve_tag(name);
  switch (tag) {
    case CurveTag::zigzag_xy: return zigzag_plane_scan(cloud, Plane::XY, c.scan);
    case CurveTag::zigzag_xz: return zigzag_plane_scan(cloud, Plane::XZ, c.scan);
    case CurveTag::zigzag_yz: return zigzag_plane_scan(cloud, Plane::YZ, c.scan);
    default: break;
  }
  return baseline_scan(cloud, baseline_for(tag), c.bits, mix_seed(c.seed, 3000 + cloud_index));
}

// The cloud a curve runs on: normalized points, or its FPS patch centers.
PointCloud scan_target(const PointCloud& raw, const RunConfig& c, std::size_t cloud_index) {
  PointCloud cloud = normalize_unit_sphere(raw);
  if (c.target == "points") return cloud;
  const std::size_t count = std::min(c.tokenize.n_centers, cloud.size());
  return subset(cloud, farthest_point_sampling(cloud, count, fps_seed(c.seed, cloud_index)));
}

Json with_config(Json j, const Json& config) {
  j["config"] = config;
  return j;
}

std::string csv_header(const Json& config) { return "# config " + config.dump() + "\n"; }

// ---------------------------------------------------------------------------

int cmd_serialize(const RunConfig& c) {
  const auto clouds = load_clouds(c);
  if (clouds.size() != 1) throw ValidationError("serialize takes exactly one cloud");
  const Json config = to_json(c);
  const PointCloud target = scan_target(clouds.front(), c, 0);
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  for (const std::string& name : curve_names(c)) {
    const ScanOrder order = run_curve(name, target, c, 0);
    const std::string tag(to_string(order.curve_tag()));
    write_text(dir / ("order_" + tag + ".json"), with_config(scan_order_to_json(order), config).dump(1) + "\n");
    write_bytes(dir / ("order_" + tag + ".bin"), scan_order_to_binary(order));
    Json metrics = locality_to_json(locality_metrics(target, order));
    metrics["curve_tag"] = tag;
    metrics["n"] = order.size();
    write_text(dir / ("metrics_" + tag + ".json"), with_config(metrics, config).dump(1) + "\n");
    std::cout << tag << ": n=" << order.size() << "\n";
  }
  return 0;
}

int cmd_mask(const RunConfig& c) {
  if (c.mask_strategy == "both") throw ValidationError("mask takes a single strategy");
  const auto clouds = load_clouds(c);
  const PipelineConfig p = pipeline_config(
      c, clouds, c.mask_strategy == "sms" ? MaskStrategy::sms : MaskStrategy::random_only);
  const auto encoder = EncoderWeights::random(p.tokenize.hidden, p.tokenize.feature_dim, encoder_seed(c.seed));
  std::vector<PreparedCloud> prepared;
  for (std::size_t i = 0; i < clouds.size(); ++i) prepared.push_back(prepare_cloud(clouds[i], p, encoder, i));
  const MaskPlan plan = build_mask_plan(batch_of(prepared), p.mask);

  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  write_text(dir / "mask.json", with_config(mask_plan_to_json(plan), to_json(c)).dump(1) + "\n");
  const std::size_t total = plan.final.batch * plan.final.groups;
  std::cout << "tokens=" << total << " semantic_masked=" << plan.semantic.count()
            << " random_masked=" << plan.random.count() << " masked=" << plan.final.count()
            << " retained=" << total - plan.final.count() << "\n";
  return 0;
}

int cmd_compare(const RunConfig& c) {
  const auto names = curve_names(c);
  if (names.size() < 2) throw ValidationError("compare needs at least two curves");
  const auto clouds = load_clouds(c);

  struct Acc {
    double mean = 0, max = 0, total = 0;
    std::size_t wins = 0;
  };
  std::map<std::string, Acc> acc;
  const bool has_random = std::find(names.begin(), names.end(), "random") != names.end();
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    const PointCloud target = scan_target(clouds[i], c, i);
    std::map<std::string, LocalityMetrics> per;
    for (const std::string& name : names) per[name] = locality_metrics(target, run_curve(name, target, c, i));
    for (const auto& [name, m] : per) {
      Acc& a = acc[name];
      a.mean += m.mean_step;
      a.max += m.max_step;
      a.total += m.total_path_length;
      if (has_random && m.mean_step < per["random"].mean_step) ++a.wins;
    }
  }

  const Json config = to_json(c);
  const double n = static_cast<double>(clouds.size());
  std::string csv = csv_header(config) + "curve_tag,clouds,mean_step,max_step,total_path_length,win_rate_vs_random\n";
  Json rows = Json::array();
  for (const auto& [name, a] : acc) {
    const bool rated = has_random && name != "random";
    const double win = static_cast<double>(a.wins) / n;
    csv += name + "," + std::to_string(clouds.size()) + "," + format_real(a.mean / n) + "," +
           format_real(a.max / n) + "," + format_real(a.total / n) + "," + (rated ? format_real(win) : "") + "\n";
    Json row{{"curve_tag", name}, {"mean_step", a.mean / n}, {"max_step", a.max / n},
             {"total_path_length", a.total / n}};
    if (rated) row["win_rate_vs_random"] = win;
    rows.push_back(row);
    std::cout << name << " mean_step=" << format_real(a.mean / n);
    if (rated) std::cout << " win_rate_vs_random=" << format_real(win);
    std::cout << "\n";
  }
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  write_text(dir / "compare.csv", csv);
  write_text(dir / "compare_summary.json",
             with_config(Json{{"clouds", clouds.size()}, {"curves", rows}}, config).dump(1) + "\n");
  return 0;
}

int cmd_reconstruct(const RunConfig& c) {
  std::vector<std::pair<std::string, MaskStrategy>> runs;
  if (c.mask_strategy != "random-only") runs.emplace_back("sms", MaskStrategy::sms);
  if (c.mask_strategy != "sms") runs.emplace_back("random-only", MaskStrategy::random_only);
  const auto clouds = load_clouds(c);
  const Json config = to_json(c);
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);

  for (const auto& [label, strategy] : runs) {
    const auto prepared = prepare_recon_tasks(clouds, pipeline_config(c, clouds, strategy));
    TrainConfig train;
    train.steps = c.steps;
    train.lr = c.lr;
    train.seed = c.train_seed();
    train.state_dim = c.state_dim;
    train.mode = c.ssm_mode == "dynamic" ? SsmMode::dynamic : SsmMode::static_params;
    const TrainTrace trace = reconstruct_train(prepared.tasks, train);

    write_text(dir / ("trace_" + label + ".csv"), csv_header(config) + trace_to_csv(trace));
    Json summary = trace_summary_json(trace);
    summary["strategy"] = label;
    summary["masked_tokens"] = prepared.plan.final.count();
    summary["clouds"] = clouds.size();
    write_text(dir / ("summary_" + label + ".json"), with_config(summary, config).dump(1) + "\n");
    std::cout << label << ": init_loss=" << format_real(trace.init_loss)
              << " final_loss=" << format_real(trace.final_loss)
              << " ratio=" << format_real(trace.final_loss / trace.init_loss) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zigzag serialization, semantic masking and SSM reconstruction for point clouds"};
  app.require_subcommand(1);
  app.fallthrough();

  Overlay flags;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags take precedence)");
  flags.add<std::vector<std::string>>(app, "--input", "input cloud file (repeatable)",
                                      [](RunConfig& c, const std::vector<std::string>& v) { c.inputs = v; });
  flags.add<std::string>(app, "--format", "xyz | ply | bin",
                         [](RunConfig& c, const std::string& v) { c.format = v; });
  flags.add<std::string>(app, "--out-dir", "output directory",
                         [](RunConfig& c, const std::string& v) { c.out_dir = v; });
  flags.add<std::uint64_t>(app, "--seed", "base seed for every random step",
                           [](RunConfig& c, std::uint64_t v) { c.seed = v; });
  flags.add<std::string>(app, "--synthetic", "cube | sphere | blobs | mixed, used without --input",
                         [](RunConfig& c, const std::string& v) { c.synthetic = v; });
  flags.add<std::size_t>(app, "--n-points", "points per synthetic cloud",
                         [](RunConfig& c, std::size_t v) { c.n_points = v; });
  flags.add<std::size_t>(app, "--n-clouds", "number of synthetic clouds",
                         [](RunConfig& c, std::size_t v) { c.n_clouds = v; });

  Command command = Command::serialize;
  RunConfig defaults;

  auto* serialize = app.add_subcommand("serialize", "write scan orders and locality metrics");
  flags.add<std::vector<std::string>>(*serialize, "--curve", "curve tag, zigzag, or all (repeatable)",
                                      [](RunConfig& c, const std::vector<std::string>& v) { c.curves = v; });
  add_tokenize_flags(*serialize, flags);
  add_scan_flags(*serialize, flags);
  serialize->callback([&] { command = Command::serialize; });

  auto* mask = app.add_subcommand("mask", "tokenize, encode and write the mask plan");
  add_tokenize_flags(*mask, flags);
  add_mask_flags(*mask, flags);
  mask->callback([&] { command = Command::mask; });

  auto* compare = app.add_subcommand("compare", "locality metrics per curve over a set of clouds");
  flags.add<std::vector<std::string>>(*compare, "--curves", "curves to compare (>= 2), or all",
                                      [](RunConfig& c, const std::vector<std::string>& v) { c.curves = v; })
      ->delimiter(',');
  add_tokenize_flags(*compare, flags);
  add_scan_flags(*compare, flags);
  compare->callback([&] {
    command = Command::compare;
    defaults.synthetic = "cube";
    defaults.n_clouds = 200;
  });

  auto* reconstruct = app.add_subcommand("reconstruct", "masked reconstruction demo with loss traces");
  add_tokenize_flags(*reconstruct, flags);
  add_scan_flags(*reconstruct, flags);
  add_mask_flags(*reconstruct, flags);
  flags.add<std::size_t>(*reconstruct, "--steps", "gradient steps",
                         [](RunConfig& c, std::size_t v) { c.steps = v; });
  flags.add<double>(*reconstruct, "--lr", "learning rate", [](RunConfig& c, double v) { c.lr = v; });
  flags.add<std::size_t>(*reconstruct, "--state-dim", "SSM state size",
                         [](RunConfig& c, std::size_t v) { c.state_dim = v; });
  flags.add<std::string>(*reconstruct, "--ssm-mode", "static | dynamic",
                         [](RunConfig& c, const std::string& v) { c.ssm_mode = v; });
  reconstruct->callback([&] {
    command = Command::reconstruct;
    defaults.n_clouds = 32;
    defaults.mask_strategy = "both";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig config = defaults;
    if (!config_path.empty()) cli::apply_json(config, read_json(config_path));
    flags.apply(config);
    config.validate();
    switch (command) {
      case Command::serialize: return cmd_serialize(config);
      case Command::mask: return cmd_mask(config);
      case Command::compare: return cmd_compare(config);
      case Command::reconstruct: return cmd_reconstruct(config);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
