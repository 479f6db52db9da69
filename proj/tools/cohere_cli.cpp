#include "cohere/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void print_paths(const std::vector<std::filesystem::path>& paths) {
  for (const auto& p : paths) std::cout << p.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online pixel-wise representation learning on synthetic video streams"};
  app.require_subcommand(1);

  cohere::GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Render a synthetic stream bundle from a scene preset");
  generate->add_option("--preset", gen.preset, "Scene preset")->check(CLI::IsMember(cohere::preset_names()));
  generate->add_option("--out", gen.out, "Output bundle directory")->required();
  generate->add_option("--seed", gen.scene.seed, "Scene seed");
  generate->add_option("--size", gen.scene.size, "Frame side in pixels");
  generate->add_option("--laps", gen.scene.laps, "Laps per object");
  generate->add_option("--lap-frames", gen.scene.lap_frames, "Frames per lap");

  std::filesystem::path foa_bundle, foa_config, foa_out;
  auto* foa = app.add_subcommand("foa", "Attention-only pass; writes a .foa trajectory");
  foa->add_option("--bundle", foa_bundle, "Stream bundle directory")->required();
  foa->add_option("--config", foa_config, "Run config supplying attention parameters");
  foa->add_option("--out", foa_out, "Output .foa file")->required();

  std::filesystem::path run_config;
  auto* run = app.add_subcommand("run", "Run the lap protocol from a config file");
  run->add_option("config", run_config, "Run config file")->required();

  std::filesystem::path eval_dir;
  double eval_xi = 0.0;
  auto* eval = app.add_subcommand("eval", "Recompute F1 metrics of a run directory");
  eval->add_option("run_dir", eval_dir, "Run output directory")->required();
  auto* eval_xi_opt = eval->add_option("--xi", eval_xi, "Open-set threshold (default: the run's)");

  cohere::BenchOptions bench_opts;
  std::filesystem::path bench_out;
  auto* bench = app.add_subcommand("bench", "Time stochastic vs exhaustive coherence losses");
  bench->add_option("--d", bench_opts.dims, "Feature dimensions")->delimiter(',');
  bench->add_option("--e", bench_opts.e, "Edge budget");
  bench->add_option("--sizes", bench_opts.region_sizes, "Moving-region sizes")->delimiter(',');
  bench->add_option("--repeats", bench_opts.repeats, "Timed repeats per cell");
  bench->add_option("--cap", bench_opts.pair_cap, "Skip exhaustive cells above this pair count");
  bench->add_option("--seed", bench_opts.seed, "Seed");
  bench->add_option("--out", bench_out, "Output CSV")->required();

  std::filesystem::path tune_dir;
  cohere::XiGrid grid;
  auto* tune = app.add_subcommand("tune-xi", "Grid-search the open-set threshold on a run's trajectory scores");
  tune->add_option("run_dir", tune_dir, "Run output directory")->required();
  tune->add_option("--lo", grid.lo, "Grid start");
  tune->add_option("--hi", grid.hi, "Grid end");
  tune->add_option("--step", grid.step, "Grid step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*generate) {
      print_paths(cohere::cmd_generate(gen));
    } else if (*foa) {
      cohere::RunSettings settings;
      if (!foa_config.empty()) settings = cohere::load_run_config(foa_config, false).settings;
      print_paths(cohere::cmd_foa(foa_bundle, settings, foa_out));
    } else if (*run) {
      print_paths(cohere::cmd_run(cohere::load_run_config(run_config)).artifacts);
    } else if (*eval) {
      std::optional<double> xi;
      if (*eval_xi_opt) xi = eval_xi;
      std::cout << cohere::cmd_eval(eval_dir, xi).metrics.string() << '\n';
    } else if (*bench) {
      print_paths(cohere::cmd_bench(bench_opts, bench_out));
    } else if (*tune) {
      std::cout << cohere::cmd_tune_xi(tune_dir, grid).table.string() << '\n';
    }
  } catch (const cohere::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
