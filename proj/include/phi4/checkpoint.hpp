#pragma once

#include <cstdint>
#include <string>

#include "phi4/dynamics.hpp"

namespace phi4 {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  int dim = 0;
  int side = 0;
  int eps_inv = 0;
  double beta = 0.0;
  double eta = 0.0;
  double K = 0.0;
  Scheme scheme = Scheme::Lattice;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::vector<double> values;

  TorusGrid grid() const { return TorusGrid(dim, side, eps_inv); }
  Field field() const { return Field(grid(), values); }
};

Checkpoint make_checkpoint(const SimConfig& config, const Field& state, std::uint64_t step);
/// Written to a temporary file and renamed into place.
void write_checkpoint(const std::string& path, const Checkpoint& cp);
/// Throws FormatError on bad magic, version, truncation or trailing bytes.
Checkpoint read_checkpoint(const std::string& path);
/// As above, and throws FormatError unless the stored grid equals `expected`.
Checkpoint read_checkpoint(const std::string& path, const TorusGrid& expected);

}  // namespace phi4
