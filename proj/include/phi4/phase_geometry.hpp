#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "phi4/observables.hpp"

namespace phi4 {

enum class Valued : std::int8_t { Minus = -1, Neutral = 0, Plus = 1 };
enum class BadKind : std::uint8_t { Good = 0, Frustrated = 1, Interface = 2 };

struct PhaseLabel {
  std::shared_ptr<const BlockPartition> partition;
  double beta = 1.0;
  /// May be empty when the label was built directly from sigma.
  std::vector<Valued> valued;
  /// sign of sigma: +1, -1, or 0 on bad blocks.
  std::vector<std::int8_t> sigma;

  double sigma_value(std::size_t b) const { return sigma.at(b) * std::sqrt(beta); }
  bool is_bad(std::size_t b) const { return sigma.at(b) == 0; }
  std::size_t num_bad() const;
};

/// Strict |phi(B) -+ sqrt(beta)| < sqrt(beta) delta; ties go to Neutral.
Valued classify_value(double phi_block, double beta, double delta) noexcept;
std::vector<Valued> classify_blocks(const BlockField& bf, double beta, double delta);

PhaseLabel phase_label(std::vector<Valued> valued, std::shared_ptr<const BlockPartition> partition, double beta);
/// Label given directly by sigma signs (no valued labels).
PhaseLabel label_from_sigma(std::vector<std::int8_t> sigma, std::shared_ptr<const BlockPartition> partition,
                            double beta);

/// Good for good blocks; throws InvariantViolation if a bad block fits neither class. Needs valued labels.
std::vector<BadKind> partition_bad(const PhaseLabel& label);

/// C_delta = min(delta / 2, 2 - 2 delta).
double badset_constant(double delta) noexcept;

struct BadsetReport {
  std::size_t blocks_checked = 0;
  std::size_t frustrated = 0;
  std::size_t interface = 0;
  std::size_t violations = 0;
  /// min over frustrated (resp. interface) blocks of rhs - 1; +inf if none.
  double min_slack_frustrated = 0.0;
  double min_slack_interface = 0.0;
};

BadsetReport verify_badset_inequalities(const PhaseLabel& label, const BlockField& bf, double beta, double delta);

enum class DefectClass : std::uint8_t { Small, Large };

struct Defect {
  std::vector<std::size_t> blocks;
  DefectClass size_class = DefectClass::Large;
  /// Filled for small defects only.
  std::vector<std::size_t> interior;
  std::vector<std::size_t> exterior;
  bool maximal = false;
};

struct DefectSet {
  std::shared_ptr<const BlockPartition> partition;
  double gamma = 0.5;
  std::vector<Defect> defects;
  /// Bad blocks not covered by any defect (possible under the literal boundary definition).
  std::size_t uncovered_bad = 0;
};

struct DefectOptions {
  /// Take components of the whole bad set instead of the literal d*(T \ M_G).
  bool all_bad = false;
};

DefectSet extract_defects(const PhaseLabel& label, double gamma, const DefectOptions& options = {});

struct ErasureResult {
  /// +1 / -1 per block.
  std::vector<std::int8_t> sigma2;
  /// Maximal small defects whose exterior *-neighbours disagree under sigma1.
  std::size_t inconsistent = 0;
};

ErasureResult erase_small_defects(const PhaseLabel& label, const DefectSet& defects);

/// Faces separating +1 from -1 blocks.
std::size_t boundary_area(const BlockPartition& partition, const std::vector<std::int8_t>& spins);

struct IsoperimetricResult {
  std::size_t min_volume = 0;
  std::size_t area = 0;
  double ratio = 0.0;
};

IsoperimetricResult isoperimetric_check(const BlockPartition& partition, const std::vector<std::int8_t>& spins);

std::string defect_report_json(const DefectSet& defects);
std::string defect_summary_csv_header();
std::string defect_summary_csv_row(const PhaseLabel& label, const std::vector<BadKind>& kinds, const DefectSet& defects);

}  // namespace phi4
