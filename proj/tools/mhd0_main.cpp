#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "mhd/errors.hpp"
#include "mhd/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mhd0: pseudo-spectral viscous MHD on a periodic box"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "execute a run described by a config file");
  std::string config_path;
  std::string output;
  std::int64_t seed = -1;
  double t_end = 0.0;
  int grid_n = 0;
  run_cmd->add_option("config", config_path, "path to a key = value config file")->required();
  run_cmd->add_option("--output", output, "output directory (overrides the config)");
  run_cmd->add_option("--seed", seed, "RNG seed (overrides the config)");
  run_cmd->add_option("--t-end", t_end, "final time (overrides the config)");
  run_cmd->add_option("--grid", grid_n, "grid points per axis (overrides the config)");

  CLI11_PARSE(app, argc, argv);

  try {
    mhd::RunConfig cfg = mhd::parse_run_config(config_path);
    if (!output.empty()) cfg.output = output;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (t_end > 0.0) cfg.t_end = t_end;
    if (grid_n > 0) cfg.n = grid_n;
    return mhd::run(cfg);
  } catch (const mhd::BlowupError& e) {
    std::cerr << "blow-up (" << e.field_name << "): " << e.what() << "\n";
    return 3;
  } catch (const mhd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const mhd::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
