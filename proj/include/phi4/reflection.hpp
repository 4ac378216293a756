#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "phi4/observables.hpp"
#include "phi4/stats.hpp"

namespace phi4 {

/// Plane x_axis = offset (together with x_axis = offset + N/2 on the torus).
struct Hyperplane {
  int axis = 0;
  int offset = 0;
};

void require_reflectable(const TorusGrid& grid);
std::size_t reflect_site(const TorusGrid& grid, const Hyperplane& h, std::size_t site);
std::size_t reflect_block(const BlockPartition& part, const Hyperplane& h, std::size_t block);
Field reflect(const Field& field, const Hyperplane& h);
/// True when the block lies in the open half {(x_axis - offset) mod N in (0, N/2)}.
bool in_positive_half(const BlockPartition& part, const Hyperplane& h, std::size_t block);
bool site_in_positive_half(const TorusGrid& grid, const Hyperplane& h, std::size_t site);

/// Torus isometry x -> (parity_i x_i + shift_i) per axis, in site units.
struct SiteMap {
  std::array<int, 3> parity{1, 1, 1};
  std::array<int, 3> shift{0, 0, 0};

  std::size_t apply(const TorusGrid& grid, std::size_t site) const;
  bool operator==(const SiteMap&) const = default;
};

/// Composition with one more reflection applied after the current map.
SiteMap then_reflect(const TorusGrid& grid, const SiteMap& map, const Hyperplane& h);
/// Composite reflection carrying block `from` to block `to` through a face path:
/// axis order `axis_order`, moving in direction +1 or -1 on each axis.
SiteMap reflection_path(const BlockPartition& part, std::size_t from, std::size_t to,
                        const std::array<int, 3>& axis_order = {0, 1, 2}, const std::array<int, 3>& direction = {1, 1, 1});
/// phi o T.
Field pull_back(const Field& field, const SiteMap& map);

using Observable = std::function<double(const Field&)>;

struct GramReport {
  Hyperplane plane;
  std::vector<std::vector<double>> gram;
  std::vector<std::vector<double>> gram_err;
  double min_eig = 0.0;
  double min_eig_err = 0.0;
  bool ill_conditioned = false;
  bool psd = false;
  std::size_t samples = 0;
};

/// Accumulates G_jk = <F_j(phi) F_k(R phi)> over a stream of samples.
class RpGramAccumulator {
 public:
  RpGramAccumulator(std::vector<Observable> family, Hyperplane plane);
  void add(const Field& phi);
  GramReport report(std::size_t groups = 20) const;

 private:
  std::vector<Observable> family_;
  Hyperplane plane_;
  std::vector<std::vector<double>> products_;
};

double min_symmetric_eigenvalue(const std::vector<std::vector<double>>& m);

std::string gram_report_json(const GramReport& r, const std::string& family);

/// log F_B(phi) for a block B of the set S on which F is non-trivial.
using BlockLogObservable = std::function<double(const Field&, std::size_t block)>;

struct ChessboardReport {
  double log_lhs = 0.0;
  double log_rhs = 0.0;
  double margin = 0.0;
  double margin_err = 0.0;
  double min_ess = 0.0;
  bool inconclusive = false;
  std::size_t samples = 0;
};

/// F_{B} = exp(log_f(phi, B)) for B in `blocks` and 1 elsewhere (single-block translates).
class ChessboardAccumulator {
 public:
  ChessboardAccumulator(std::shared_ptr<const BlockPartition> partition, std::vector<std::size_t> blocks,
                        BlockLogObservable log_f);
  void add(const Field& phi);
  ChessboardReport report(std::size_t groups = 20, double min_ess = 100.0) const;

  /// Sum over B' of log F_{B,B'}(phi) for the given B.
  double transported_log(const Field& phi, std::size_t block) const;

 private:
  std::shared_ptr<const BlockPartition> part_;
  std::vector<std::size_t> blocks_;
  BlockLogObservable log_f_;
  std::vector<std::vector<SiteMap>> maps_;
  std::vector<double> lhs_;
  std::vector<std::vector<double>> rhs_;
};

}  // namespace phi4
