#include "phi4/phase_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "phi4/error.hpp"

namespace phi4 {

std::size_t PhaseLabel::num_bad() const {
  return static_cast<std::size_t>(std::count(sigma.begin(), sigma.end(), 0));
}

Valued classify_value(double phi_block, double beta, double delta) noexcept {
  const double r = std::sqrt(beta);
  if (std::abs(phi_block - r) < r * delta) return Valued::Plus;
  if (std::abs(phi_block + r) < r * delta) return Valued::Minus;
  return Valued::Neutral;
}

std::vector<Valued> classify_blocks(const BlockField& bf, double beta, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta must lie in (0,1)");
  std::vector<Valued> out(bf.phi_avg.size());
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = classify_value(bf.phi_avg[b], beta, delta);
  return out;
}

PhaseLabel phase_label(std::vector<Valued> valued, std::shared_ptr<const BlockPartition> partition, double beta) {
  if (!partition || valued.size() != partition->num_blocks()) throw UsageError("phase_label: size mismatch");
  PhaseLabel label{partition, beta, std::move(valued), std::vector<std::int8_t>(partition->num_blocks(), 0)};
  for (std::size_t b = 0; b < partition->num_blocks(); ++b) {
    bool plus = true;
    bool minus = true;
    for (std::size_t c : partition->star_ball(b)) {
      plus = plus && label.valued[c] == Valued::Plus;
      minus = minus && label.valued[c] == Valued::Minus;
    }
    label.sigma[b] = plus ? 1 : (minus ? -1 : 0);
  }
  return label;
}

PhaseLabel label_from_sigma(std::vector<std::int8_t> sigma, std::shared_ptr<const BlockPartition> partition,
                            double beta) {
  if (!partition || sigma.size() != partition->num_blocks()) throw UsageError("label_from_sigma: size mismatch");
  for (auto s : sigma)
    if (s < -1 || s > 1) throw UsageError("sigma signs must be -1, 0 or +1");
  return PhaseLabel{std::move(partition), beta, {}, std::move(sigma)};
}

std::vector<BadKind> partition_bad(const PhaseLabel& label) {
  const auto& part = *label.partition;
  if (label.valued.size() != part.num_blocks()) throw UsageError("partition_bad needs valued labels");
  std::vector<BadKind> kinds(part.num_blocks(), BadKind::Good);
  for (std::size_t b = 0; b < part.num_blocks(); ++b) {
    if (!label.is_bad(b)) continue;
    bool neutral = false;
    for (std::size_t c : part.star_ball(b)) neutral = neutral || label.valued[c] == Valued::Neutral;
    bool opposite = false;
    if (!neutral)
      for (const auto& [x, y] : part.star_ball_pairs(b))
        opposite = opposite || (label.valued[x] != label.valued[y]);
    if (neutral)
      kinds[b] = BadKind::Frustrated;
    else if (opposite)
      kinds[b] = BadKind::Interface;
    else
      throw InvariantViolation("bad block is neither frustrated nor interface");
  }
  return kinds;
}

double badset_constant(double delta) noexcept { return std::min(delta / 2.0, 2.0 - 2.0 * delta); }

BadsetReport verify_badset_inequalities(const PhaseLabel& label, const BlockField& bf, double beta, double delta) {
  const auto kinds = partition_bad(label);
  const auto& part = *label.partition;
  const double pref = 2.0 * std::exp(-badset_constant(delta) * std::sqrt(beta));
  constexpr double kRelTol = 1e-12;
  BadsetReport rep;
  rep.min_slack_frustrated = std::numeric_limits<double>::infinity();
  rep.min_slack_interface = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < part.num_blocks(); ++b) {
    ++rep.blocks_checked;
    // Both inequalities are checked on every block; the left side is 0 off the class.
    double rf = 0.0;
    for (std::size_t c : part.star_ball(b)) rf += std::cosh(q1(bf, c, beta)) + std::cosh(q2(bf, c, beta));
    rf *= pref;
    double ri = 0.0;
    for (const auto& [x, y] : part.star_ball_pairs(b)) ri += std::cosh(q3(bf, x, y));
    ri *= pref;
    const double lf = kinds[b] == BadKind::Frustrated ? 1.0 : 0.0;
    const double li = kinds[b] == BadKind::Interface ? 1.0 : 0.0;
    if (lf > 0) {
      ++rep.frustrated;
      rep.min_slack_frustrated = std::min(rep.min_slack_frustrated, rf - lf);
    }
    if (li > 0) {
      ++rep.interface;
      rep.min_slack_interface = std::min(rep.min_slack_interface, ri - li);
    }
    if (lf > rf * (1.0 + kRelTol) || li > ri * (1.0 + kRelTol)) ++rep.violations;
  }
  return rep;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent[b] = a;
  }
};

// Smallest circular arc covering the occupied coordinates on one axis:
// returns (start, length); length == n when every coordinate is used.
std::pair<int, int> covering_arc(const std::vector<bool>& used) {
  const int n = static_cast<int>(used.size());
  int best_gap = 0;
  int best_end = -1;
  for (int i = 0; i < n; ++i) {
    if (!used[i]) continue;
    int gap = 0;
    for (int j = 1; j <= n; ++j) {
      if (used[(i + j) % n]) break;
      ++gap;
    }
    if (gap > best_gap) {
      best_gap = gap;
      best_end = i;
    }
  }
  if (best_end < 0) return {0, n};
  return {(best_end + best_gap + 1) % n, n - best_gap};
}

}  // namespace

DefectSet extract_defects(const PhaseLabel& label, double gamma, const DefectOptions& options) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("gamma must lie in (0,1)");
  const auto& part = *label.partition;
  const std::size_t nb = part.num_blocks();
  const int d = part.dim();
  const int N = part.side();

  std::vector<bool> in_d(nb, false);
  for (std::size_t b = 0; b < nb; ++b) {
    if (options.all_bad) {
      in_d[b] = label.is_bad(b);
      continue;
    }
    if (label.sigma[b] == -1) continue;
    for (std::size_t c : part.star_ball(b))
      if (label.sigma[c] == -1) in_d[b] = true;
    if (in_d[b] && !label.is_bad(b)) throw InvariantViolation("plus-good block *-adjacent to a minus-good block");
  }

  UnionFind uf(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    if (!in_d[b]) continue;
    for (std::size_t c : part.star_ball(b))
      if (c != b && in_d[c]) uf.unite(b, c);
  }

  DefectSet out{label.partition, gamma, {}, 0};
  std::vector<long> comp_of(nb, -1);
  for (std::size_t b = 0; b < nb; ++b) {
    if (!in_d[b]) continue;
    const std::size_t r = uf.find(b);
    if (comp_of[r] < 0) {
      comp_of[r] = static_cast<long>(out.defects.size());
      out.defects.emplace_back();
    }
    out.defects[comp_of[r]].blocks.push_back(b);
  }
  std::vector<bool> covered(nb, false);
  for (const auto& df : out.defects)
    for (auto b : df.blocks) covered[b] = true;
  for (std::size_t b = 0; b < nb; ++b)
    if (label.is_bad(b) && !covered[b]) ++out.uncovered_bad;

  const double small_limit = 6.0 * std::pow(static_cast<double>(N), gamma);
  for (auto& df : out.defects) {
    if (static_cast<double>(df.blocks.size()) > small_limit) continue;
    Index3 antipode{0, 0, 0};
    double diag2 = 0.0;
    bool fits = true;
    for (int a = 0; a < d; ++a) {
      std::vector<bool> used(N, false);
      for (auto b : df.blocks) used[part.block_coords(b)[a]] = true;
      const auto [start, len] = covering_arc(used);
      if (len >= N) fits = false;
      diag2 += static_cast<double>(len) * len;
      const double centre = start + 0.5 * len;
      antipode[a] = static_cast<int>(std::floor(centre + 0.5 * N)) % N;
    }
    if (!fits || 0.5 * std::sqrt(diag2) > 0.25 * N) continue;

    df.size_class = DefectClass::Small;
    std::vector<bool> in_gamma(nb, false);
    for (auto b : df.blocks) in_gamma[b] = true;
    const std::size_t seed = part.block_index(antipode);
    if (in_gamma[seed]) throw InvariantViolation("exterior seed falls inside the defect");
    std::vector<bool> ext(nb, false);
    std::vector<std::size_t> stack{seed};
    ext[seed] = true;
    while (!stack.empty()) {
      const auto b = stack.back();
      stack.pop_back();
      for (auto c : part.neighbours(b))
        if (!ext[c] && !in_gamma[c]) {
          ext[c] = true;
          stack.push_back(c);
        }
    }
    for (std::size_t b = 0; b < nb; ++b) (ext[b] ? df.exterior : df.interior).push_back(b);
  }

  for (std::size_t i = 0; i < out.defects.size(); ++i) {
    auto& df = out.defects[i];
    if (df.size_class != DefectClass::Small) continue;
    df.maximal = true;
    for (std::size_t j = 0; j < out.defects.size() && df.maximal; ++j) {
      const auto& other = out.defects[j];
      if (j == i || other.size_class != DefectClass::Small) continue;
      for (auto b : df.blocks)
        if (std::binary_search(other.interior.begin(), other.interior.end(), b)) {
          df.maximal = false;
          break;
        }
    }
  }
  return out;
}

ErasureResult erase_small_defects(const PhaseLabel& label, const DefectSet& defects) {
  const auto& part = *label.partition;
  const std::size_t nb = part.num_blocks();
  ErasureResult res;
  std::vector<std::int8_t> sigma1(nb);
  for (std::size_t b = 0; b < nb; ++b) sigma1[b] = label.is_bad(b) ? 1 : label.sigma[b];
  res.sigma2 = sigma1;
  for (const auto& df : defects.defects) {
    if (df.size_class != DefectClass::Small || !df.maximal) continue;
    std::vector<bool> in_gamma(nb, false);
    for (auto b : df.blocks) in_gamma[b] = true;
    std::int8_t value = 0;
    bool agree = true;
    for (auto b : df.blocks)
      for (auto c : part.star_ball(b)) {
        if (in_gamma[c] || !std::binary_search(df.exterior.begin(), df.exterior.end(), c)) continue;
        if (value == 0)
          value = sigma1[c];
        else if (sigma1[c] != value)
          agree = false;
      }
    if (!agree) ++res.inconsistent;
    if (value == 0) continue;
    for (auto b : df.interior) res.sigma2[b] = value;
  }
  return res;
}

std::size_t boundary_area(const BlockPartition& partition, const std::vector<std::int8_t>& spins) {
  if (spins.size() != partition.num_blocks()) throw UsageError("boundary_area: size mismatch");
  std::size_t faces = 0;
  for (std::size_t b = 0; b < partition.num_blocks(); ++b) {
    const auto nb = partition.neighbours(b);
    for (int a = 0; a < partition.dim(); ++a)
      if (spins[b] != spins[nb[2 * a + 1]]) ++faces;
  }
  return faces;
}

IsoperimetricResult isoperimetric_check(const BlockPartition& partition, const std::vector<std::int8_t>& spins) {
  if (partition.dim() != 3) throw UsageError("isoperimetric check is defined in 3D");
  IsoperimetricResult r;
  const auto plus = static_cast<std::size_t>(std::count(spins.begin(), spins.end(), 1));
  r.min_volume = std::min(plus, spins.size() - plus);
  r.area = boundary_area(partition, spins);
  r.ratio = r.area == 0 ? 0.0 : static_cast<double>(r.min_volume) / std::pow(static_cast<double>(r.area), 1.5);
  return r;
}

std::string defect_report_json(const DefectSet& defects) {
  nlohmann::json j;
  j["gamma"] = defects.gamma;
  j["uncovered_bad"] = defects.uncovered_bad;
  j["defects"] = nlohmann::json::array();
  for (const auto& df : defects.defects) {
    nlohmann::json e;
    e["size"] = df.blocks.size();
    e["class"] = df.size_class == DefectClass::Small ? "small" : "large";
    if (df.size_class == DefectClass::Small) {
      e["interior_volume"] = df.interior.size();
      e["maximal"] = df.maximal;
    } else {
      e["interior_volume"] = nullptr;
    }
    j["defects"].push_back(e);
  }
  return j.dump(2);
}

std::string defect_summary_csv_header() {
  return "n_bad,n_frustrated,n_interface,n_defects,total_large_area,total_small_interior";
}

std::string defect_summary_csv_row(const PhaseLabel& label, const std::vector<BadKind>& kinds,
                                   const DefectSet& defects) {
  const auto nf = std::count(kinds.begin(), kinds.end(), BadKind::Frustrated);
  const auto ni = std::count(kinds.begin(), kinds.end(), BadKind::Interface);
  std::size_t large = 0;
  std::size_t interior = 0;
  for (const auto& df : defects.defects) {
    if (df.size_class == DefectClass::Large)
      large += df.blocks.size();
    else if (df.maximal)
      interior += df.interior.size();
  }
  std::ostringstream os;
  os << label.num_bad() << ',' << nf << ',' << ni << ',' << defects.defects.size() << ',' << large << ',' << interior;
  return os.str();
}

}  // namespace phi4
