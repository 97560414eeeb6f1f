#include <chemoflock/presets.hpp>
#include <chemoflock/runner.hpp>

#include <CLI11.hpp>

#include <fnmatch.h>

#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace chemoflock;

namespace {

constexpr int kExitError = 1;

int run_one(ExperimentConfig config, const std::string& out) {
  if (!out.empty()) {
    config.output_dir = out;
    config.resolved.set("output_dir", out);
  }
  const auto status = run_experiment(config);
  std::cout << config.name << ": " << (status == RunStatus::ok ? "ok" : "blow-up detected") << " -> "
            << config.output_dir << '\n';
  return static_cast<int>(status);
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  const fs::path p(pattern);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  const std::string leaf = p.filename().string();
  std::vector<std::string> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && fnmatch(leaf.c_str(), e.path().filename().c_str(), 0) == 0)
      out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chemoflock: multiscale chemotactic flocking experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out;
  app.add_option("--out", out, "Output directory (sweep: parent of per-config directories)");

  auto* run = app.add_subcommand("run", "Run an experiment config file");
  std::string config_path;
  run->add_option("config", config_path, "Config file")->required();

  auto* preset = app.add_subcommand("preset", "Run a named preset");
  std::string preset_name;
  std::vector<std::string> overrides;
  bool print_only = false;
  preset->add_option("name", preset_name, "Preset name")->required();
  preset->add_option("--override", overrides, "key=value applied on top of the preset");
  preset->add_flag("--print", print_only, "Print the resolved config instead of running");

  auto* sweep = app.add_subcommand("sweep", "Run every config file matching a glob");
  std::string pattern;
  unsigned jobs = 1;
  sweep->add_option("glob", pattern, "Config file pattern, e.g. configs/*.cfg")->required();
  sweep->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  app.add_subcommand("list", "List the preset registry");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list")) {
      for (const auto& p : presets()) std::cout << p.name << "  " << p.summary << '\n';
      return 0;
    }
    if (run->parsed()) return run_one(load_config(config_path), out);
    if (preset->parsed()) {
      auto config = preset_config(preset_name, overrides);
      if (print_only) {
        for (const auto& [k, v] : config.resolved.items()) std::cout << k << " = " << v << '\n';
        return 0;
      }
      return run_one(std::move(config), out);
    }

    const auto files = expand_glob(pattern);
    if (files.empty()) throw Error("no config files match '" + pattern + "'");
    const fs::path base = out.empty() ? fs::path("out") : fs::path(out);
    auto task = [&](const std::string& file) {
      try {
        return run_one(load_config(file), (base / fs::path(file).stem()).string());
      } catch (const std::exception& e) {
        std::cerr << file << ": " << e.what() << '\n';
        return kExitError;
      }
    };
    int worst = 0;
    auto merge = [&](int code) {
      if (code == kExitError || worst == kExitError)
        worst = kExitError;
      else
        worst = std::max(worst, code);
    };
    std::vector<std::future<int>> pending;
    for (const auto& f : files) {
      if (pending.size() >= jobs) {
        merge(pending.front().get());
        pending.erase(pending.begin());
      }
      pending.push_back(std::async(std::launch::async, task, f));
    }
    for (auto& p : pending) merge(p.get());
    return worst;
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
