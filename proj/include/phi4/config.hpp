#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phi4/dynamics.hpp"

namespace phi4 {

struct ExperimentConfig {
  SimConfig sim;

  double delta = 0.5;
  double gamma = 0.5;
  double zeta = 0.5;
  double a0 = 1.0;
  std::vector<std::size_t> block_sets{1, 2, 3};
  std::vector<std::size_t> chess_blocks{0, 1};
  std::vector<int> n_ladder{8, 12, 16};
  /// chi_m scale as a multiple of sqrt(beta).
  double chi_scale = 0.5;
  std::size_t samples = 1000;
  int scale_m = 24;
  int per_octave = 1;
  std::vector<int> mode_ladder{1, 2, 4};
  int plane_axis = 0;
  int plane_offset = 0;
  std::size_t windows = 16;
  double kappa = 1.0;
  std::uint64_t exchanges = 2000;
  std::uint64_t steps_per_exchange = 20;
  std::uint64_t burn_in_exchanges = 200;

  std::string outdir = ".";
  std::vector<std::string> formats{"csv", "json"};
  std::string checkpoint;

  /// Raw text the configuration was parsed from (hashed into manifests).
  std::string source;
};

/// INI text with sections [model], [dynamics], [analysis], [io]. Unknown keys and
/// malformed values raise UsageError naming the line and key.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);

/// One line per key in [section] key = value form, sorted.
std::string documented_keys();

}  // namespace phi4
