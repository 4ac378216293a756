#include "phi4/reflection.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "phi4/error.hpp"

namespace phi4 {

namespace {

int wrap(int k, int m) noexcept {
  const int r = k % m;
  return r < 0 ? r + m : r;
}

void check_plane(const TorusGrid& grid, const Hyperplane& h) {
  require_reflectable(grid);
  if (h.axis < 0 || h.axis >= grid.dim()) throw UsageError("hyperplane axis out of range");
}

}  // namespace

void require_reflectable(const TorusGrid& grid) {
  if (grid.side() % 2 != 0) throw ConfigError("reflections need an even torus side");
}

std::size_t reflect_site(const TorusGrid& grid, const Hyperplane& h, std::size_t site) {
  check_plane(grid, h);
  auto c = grid.site_coords(site);
  c[h.axis] = wrap(2 * h.offset * grid.eps_inv() - 1 - c[h.axis], grid.sites_per_axis());
  return grid.site_index(c);
}

std::size_t reflect_block(const BlockPartition& part, const Hyperplane& h, std::size_t block) {
  check_plane(part.grid(), h);
  auto c = part.block_coords(block);
  c[h.axis] = wrap(2 * h.offset - 1 - c[h.axis], part.side());
  return part.block_index(c);
}

Field reflect(const Field& field, const Hyperplane& h) {
  const auto& g = field.grid;
  check_plane(g, h);
  Field out(g);
  for (std::size_t s = 0; s < g.num_sites(); ++s) out[s] = field[reflect_site(g, h, s)];
  return out;
}

bool in_positive_half(const BlockPartition& part, const Hyperplane& h, std::size_t block) {
  const int n = part.side();
  return wrap(part.block_coords(block)[h.axis] - h.offset, n) < n / 2;
}

bool site_in_positive_half(const TorusGrid& grid, const Hyperplane& h, std::size_t site) {
  const int m = grid.sites_per_axis();
  return wrap(grid.site_coords(site)[h.axis] - h.offset * grid.eps_inv(), m) < m / 2;
}

std::size_t SiteMap::apply(const TorusGrid& grid, std::size_t site) const {
  auto c = grid.site_coords(site);
  for (int a = 0; a < grid.dim(); ++a) c[a] = wrap(parity[a] * c[a] + shift[a], grid.sites_per_axis());
  return grid.site_index(c);
}

SiteMap then_reflect(const TorusGrid& grid, const SiteMap& map, const Hyperplane& h) {
  check_plane(grid, h);
  const int m = grid.sites_per_axis();
  SiteMap out = map;
  const int r = 2 * h.offset * grid.eps_inv() - 1;
  out.parity[h.axis] = -map.parity[h.axis];
  out.shift[h.axis] = wrap(r - map.shift[h.axis], m);
  return out;
}

SiteMap reflection_path(const BlockPartition& part, std::size_t from, std::size_t to,
                        const std::array<int, 3>& axis_order, const std::array<int, 3>& direction) {
  const int n = part.side();
  const auto& g = part.grid();
  auto cur = part.block_coords(from);
  const auto target = part.block_coords(to);
  SiteMap map;
  for (int k = 0; k < g.dim(); ++k) {
    const int a = axis_order[k];
    const int dir = direction[a] >= 0 ? 1 : -1;
    const int steps = wrap((target[a] - cur[a]) * dir, n);
    for (int s = 0; s < steps; ++s) {
      const int offset = dir > 0 ? cur[a] + 1 : cur[a];
      map = then_reflect(g, map, Hyperplane{a, wrap(offset, n)});
      cur[a] = wrap(cur[a] + dir, n);
    }
  }
  return map;
}

Field pull_back(const Field& field, const SiteMap& map) {
  const auto& g = field.grid;
  Field out(g);
  for (std::size_t s = 0; s < g.num_sites(); ++s) out[s] = field[map.apply(g, s)];
  return out;
}

double min_symmetric_eigenvalue(const std::vector<std::vector<double>>& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = 0.5 * (m[i][j] + m[j][i]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

RpGramAccumulator::RpGramAccumulator(std::vector<Observable> family, Hyperplane plane)
    : family_(std::move(family)), plane_(plane) {
  if (family_.empty()) throw UsageError("empty observable family");
}

void RpGramAccumulator::add(const Field& phi) {
  const Field r = reflect(phi, plane_);
  const std::size_t m = family_.size();
  std::vector<double> a(m);
  std::vector<double> b(m);
  for (std::size_t j = 0; j < m; ++j) {
    a[j] = family_[j](phi);
    b[j] = family_[j](r);
  }
  std::vector<double> row(m * m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < m; ++k) row[j * m + k] = 0.5 * (a[j] * b[k] + a[k] * b[j]);
  products_.push_back(std::move(row));
}

GramReport RpGramAccumulator::report(std::size_t groups) const {
  const std::size_t n = products_.size();
  const std::size_t m = family_.size();
  if (n < groups) throw UsageError("not enough samples for the Gram jackknife");
  const std::size_t len = n / groups;
  std::vector<std::vector<double>> gsum(groups, std::vector<double>(m * m, 0.0));
  for (std::size_t gi = 0; gi < groups; ++gi)
    for (std::size_t s = gi * len; s < (gi + 1) * len; ++s)
      for (std::size_t q = 0; q < m * m; ++q) gsum[gi][q] += products_[s][q];
  std::vector<double> total(m * m, 0.0);
  for (const auto& g : gsum)
    for (std::size_t q = 0; q < m * m; ++q) total[q] += g[q];

  auto gram_without = [&](std::size_t leave) {
    std::vector<std::vector<double>> g(m, std::vector<double>(m));
    const double cnt = static_cast<double>(leave < groups ? (groups - 1) * len : groups * len);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < m; ++k) {
        double v = total[j * m + k];
        if (leave < groups) v -= gsum[leave][j * m + k];
        g[j][k] = v / cnt;
      }
    return g;
  };

  GramReport rep;
  rep.plane = plane_;
  rep.samples = groups * len;
  rep.gram = gram_without(groups);
  rep.gram_err.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < m; ++k)
      rep.gram_err[j][k] = jackknife(groups, [&](std::size_t g) { return gram_without(g)[j][k]; }).err;
  const auto eig = jackknife(groups, [&](std::size_t g) { return min_symmetric_eigenvalue(gram_without(g)); });
  rep.min_eig = eig.value;
  rep.min_eig_err = eig.err;
  rep.psd = rep.min_eig >= -3.0 * rep.min_eig_err;

  Eigen::MatrixXd a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < m; ++k) a(j, k) = rep.gram[j][k];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const double big = es.eigenvalues().cwiseAbs().maxCoeff();
  const double small = es.eigenvalues().cwiseAbs().minCoeff();
  rep.ill_conditioned = !(small > 1e-12 * big);
  return rep;
}

std::string gram_report_json(const GramReport& r, const std::string& family) {
  nlohmann::json j;
  j["hyperplane"] = {{"axis", r.plane.axis}, {"offset", r.plane.offset}};
  j["family"] = family;
  j["gram"] = r.gram;
  j["gram_stderr"] = r.gram_err;
  j["min_eig"] = r.min_eig;
  j["stderr"] = r.min_eig_err;
  j["samples"] = r.samples;
  j["verdict"] = r.psd ? "psd" : "not_psd";
  if (r.ill_conditioned) j["warning"] = "ill-conditioned family";
  return j.dump(2);
}

ChessboardAccumulator::ChessboardAccumulator(std::shared_ptr<const BlockPartition> partition,
                                             std::vector<std::size_t> blocks, BlockLogObservable log_f)
    : part_(std::move(partition)), blocks_(std::move(blocks)), log_f_(std::move(log_f)) {
  require_reflectable(part_->grid());
  for (auto b : blocks_) {
    if (b >= part_->num_blocks()) throw UsageError("chessboard block out of range");
    std::vector<SiteMap> maps(part_->num_blocks());
    for (std::size_t t = 0; t < part_->num_blocks(); ++t) maps[t] = reflection_path(*part_, b, t);
    maps_.push_back(std::move(maps));
  }
  rhs_.resize(blocks_.size());
}

double ChessboardAccumulator::transported_log(const Field& phi, std::size_t block) const {
  const auto it = std::find(blocks_.begin(), blocks_.end(), block);
  if (it == blocks_.end()) throw UsageError("block is not in the chessboard set");
  const auto& maps = maps_[static_cast<std::size_t>(it - blocks_.begin())];
  KahanSum s;
  for (const auto& map : maps) s.add(log_f_(pull_back(phi, map), block));
  return s.value();
}

void ChessboardAccumulator::add(const Field& phi) {
  KahanSum l;
  for (auto b : blocks_) l.add(log_f_(phi, b));
  lhs_.push_back(l.value());
  for (std::size_t i = 0; i < blocks_.size(); ++i) rhs_[i].push_back(transported_log(phi, blocks_[i]));
}

namespace {

double ess_of(const std::vector<double>& x) {
  const double mx = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  double s2 = 0.0;
  for (double v : x) {
    const double w = std::exp(v - mx);
    s += w;
    s2 += w * w;
  }
  return s * s / s2;
}

}  // namespace

ChessboardReport ChessboardAccumulator::report(std::size_t groups, double min_ess) const {
  const std::size_t n = lhs_.size();
  ChessboardReport rep;
  if (n < groups || blocks_.empty()) {
    rep.inconclusive = true;
    return rep;
  }
  const std::size_t len = n / groups;
  const std::size_t used = len * groups;
  const double weight = 1.0 / static_cast<double>(part_->num_blocks());

  auto lme_without = [&](const std::vector<double>& x, std::size_t leave) {
    std::vector<double> y;
    y.reserve(used);
    for (std::size_t s = 0; s < used; ++s)
      if (leave >= groups || s / len != leave) y.push_back(x[s]);
    return log_mean_exp(y);
  };
  auto margin_without = [&](std::size_t leave) {
    double rhs = 0.0;
    for (const auto& r : rhs_) rhs += weight * lme_without(r, leave);
    return lme_without(lhs_, leave) - rhs;
  };

  rep.samples = used;
  rep.log_lhs = lme_without(lhs_, groups);
  rep.log_rhs = 0.0;
  for (const auto& r : rhs_) rep.log_rhs += weight * lme_without(r, groups);
  const auto est = jackknife(groups, margin_without);
  rep.margin = est.value;
  rep.margin_err = est.err;
  rep.min_ess = ess_of(lhs_);
  for (const auto& r : rhs_) rep.min_ess = std::min(rep.min_ess, ess_of(r));
  rep.inconclusive = rep.min_ess < min_ess;
  return rep;
}

}  // namespace phi4
