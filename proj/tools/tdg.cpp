// tdg: train, evaluate and play theremin policies.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tdg/harness.hpp"

namespace fs = std::filesystem;
using namespace tdg;

namespace {

fs::path output_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("TDG_OUT_DIR"); env && *env) return env;
  return "out";
}

std::optional<harness::RunConfig> base_named(const std::string& name) {
  if (name.empty() || name == "arm") return std::nullopt;
  if (name == "cart1d") return harness::cart1d_config();
  throw std::invalid_argument("unknown base '" + name + "' (expected arm or cart1d)");
}

std::vector<harness::RunConfig> load_configs(const std::string& preset, const std::string& config_file,
                                             const std::string& base, const std::string& variant) {
  auto configs = config_file.empty() ? harness::preset(preset, base_named(base)) : harness::load_config_file(config_file);
  if (!variant.empty()) {
    std::vector<harness::RunConfig> picked;
    for (auto& c : configs)
      if (c.label == variant) picked.push_back(c);
    if (picked.empty()) {
      std::string labels;
      for (const auto& c : configs) labels += (labels.empty() ? "" : ", ") + c.label;
      throw std::invalid_argument("no variant '" + variant + "'; available: " + labels);
    }
    configs = picked;
  }
  return configs;
}

std::vector<harness::RunResult> run_seeds(const harness::RunConfig& cfg, unsigned jobs, bool quiet) {
  std::vector<harness::RunResult> results(cfg.seeds.size());
  std::mutex log_mu;
  auto work = [&](std::size_t i) {
    const auto seed = cfg.seeds[i];
    results[i] = harness::train_run(cfg, seed, [&](const harness::EpochProgress& p) {
      if (quiet) return;
      std::lock_guard lock(log_mu);
      std::cerr << cfg.label << " seed " << seed << " epoch " << p.epoch << "/" << cfg.epochs
                << ": mean successful steps " << p.mean_successful_steps << "\n";
    });
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cfg.seeds.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) work(i);
    });
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Theremin-playing agents with time-dependent goals"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train every config of a preset over its seeds");
  std::string preset = "baseline", config_file, base, variant, out;
  int seed_count = 0, epochs = 0;
  std::vector<std::uint64_t> seed_list;
  unsigned jobs = 1;
  bool quiet = false;
  std::vector<std::string> overrides;
  auto* preset_opt = train->add_option("--preset", preset, "preset name (see list-presets)");
  train->add_option("--config", config_file, "config file instead of a preset")->excludes(preset_opt)->check(CLI::ExistingFile);
  train->add_option("--base", base, "base robot for ablation presets: arm or cart1d");
  train->add_option("--variant", variant, "only run the config with this label");
  auto* seeds_opt = train->add_option("--seeds", seed_count, "use seeds 1..k")->check(CLI::PositiveNumber);
  train->add_option("--seed-list", seed_list, "explicit seeds")->excludes(seeds_opt)->delimiter(',');
  train->add_option("--epochs", epochs, "override the epoch count")->check(CLI::PositiveNumber);
  train->add_option("--out", out, "output root (default $TDG_OUT_DIR or ./out)");
  train->add_option("--jobs", jobs, "seeds trained in parallel")->check(CLI::PositiveNumber);
  train->add_flag("--quiet", quiet, "no per-epoch progress");
  train->add_option("--set", overrides, "override a setting, e.g. --set agent.her_ratio=0");

  // play
  auto* play = app.add_subcommand("play", "play a melody with a trained policy");
  std::string policy_file, notes, wav_out = "melody.wav", csv_out, play_preset = "baseline", play_config, play_variant;
  std::uint64_t play_seed = 1;
  play->add_option("--policy", policy_file, "policy file written by train")->required()->check(CLI::ExistingFile);
  play->add_option("--notes", notes, "comma-separated note names or Hz, e.g. A4,C5,E5")->required();
  play->add_option("--out", wav_out, "WAV output");
  play->add_option("--csv", csv_out, "per-step trace CSV (default: WAV path with .csv)");
  auto* play_preset_opt = play->add_option("--preset", play_preset, "preset the policy was trained with");
  play->add_option("--config", play_config, "config file the policy was trained with")->excludes(play_preset_opt);
  play->add_option("--variant", play_variant, "variant label within the preset");
  play->add_option("--seed", play_seed, "environment seed");

  // calibrate-epsilon
  auto* calib = app.add_subcommand("calibrate-epsilon", "print the reward tolerance for a transform");
  std::string transform = "cqt";
  calib->add_option("--transform", transform, "cqt, stft or mel")->check(CLI::IsMember({"cqt", "stft", "mel"}));

  app.add_subcommand("list-presets", "list experiment presets");

  auto* dump = app.add_subcommand("dump-preset", "print a preset as a config file");
  std::string dump_name, dump_base;
  dump->add_option("name", dump_name, "preset name")->required();
  dump->add_option("--base", dump_base, "base robot: arm or cart1d");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      auto configs = load_configs(preset, config_file, base, variant);
      const fs::path root = output_root(out);
      for (auto& cfg : configs) {
        if (seed_count > 0) {
          cfg.seeds.clear();
          for (int s = 1; s <= seed_count; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
        }
        if (!seed_list.empty()) cfg.seeds = seed_list;
        if (epochs > 0) cfg.epochs = epochs;
        for (const auto& o : overrides) {
          const auto eq = o.find('=');
          if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + o + "'");
          harness::apply_setting(cfg, config::trim(o.substr(0, eq)), config::trim(o.substr(eq + 1)));
        }
        cfg.validate();
        const fs::path dir = root / cfg.preset / cfg.label;
        fs::create_directories(dir);
        harness::write_text(dir / "config.cfg", harness::to_config_text({cfg}));
        const auto results = run_seeds(cfg, jobs, quiet);
        harness::export_metrics(results, dir);
        for (const auto& r : results) r.policy.save((dir / ("policy_seed" + std::to_string(r.seed) + ".bin")).string());
        const auto agg = harness::aggregate(results);
        std::cout << cfg.preset << "/" << cfg.label << ": final median " << agg.back().median << " (q25 "
                  << agg.back().q25 << ", q75 " << agg.back().q75 << ") -> " << dir.string() << "\n";
      }
    } else if (*play) {
      const auto configs = load_configs(play_preset, play_config, "", play_variant);
      if (configs.size() != 1 && play_variant.empty())
        throw std::invalid_argument("preset has several variants; pick one with --variant");
      const auto policy = agent::PolicySnapshot::load(policy_file);
      const auto melody = harness::parse_notes(notes);
      if (melody.size() > env::kSegments)
        std::cerr << "note: melody truncated to " << env::kSegments << " notes\n";
      const auto result = harness::play_melody(policy, melody, configs.front().env, play_seed);
      wav::write(wav_out, result.audio);
      const std::string trace_path = csv_out.empty() ? fs::path(wav_out).replace_extension(".csv").string() : csv_out;
      harness::write_text(trace_path, harness::trace_csv(result.trace));
      std::cout << result.successful_steps << "/" << env::kEpisodeSteps << " steps on pitch; wrote " << wav_out
                << " and " << trace_path << "\n";
    } else if (*calib) {
      const auto cfg = dsp::TransformConfig::of(dsp::parse_transform_kind(transform));
      std::cout << config::format_double(env::calibrate_epsilon(cfg)) << "\n";
    } else if (app.got_subcommand("list-presets")) {
      for (const auto& name : harness::preset_names()) {
        std::cout << name << "\t" << harness::preset_summary(name) << "\n";
        for (const auto& c : harness::preset(name)) std::cout << "  " << c.label << "\n";
      }
    } else if (*dump) {
      std::cout << harness::to_config_text(harness::preset(dump_name, base_named(dump_base)));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
