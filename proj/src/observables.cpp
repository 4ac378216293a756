#include "phi4/observables.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "phi4/error.hpp"
#include "phi4/stats.hpp"

namespace phi4 {

double magnetisation(const Field& phi) {
  KahanSum s;
  for (double v : phi.values) s.add(v);
  return s.value() / static_cast<double>(phi.values.size());
}

BlockField block_average(std::shared_ptr<const BlockPartition> partition, const Field& field, const Field& wick2) {
  if (!partition) throw UsageError("null block partition");
  if (!(field.grid == partition->grid()) || !(wick2.grid == partition->grid()))
    throw UsageError("block_average: grid mismatch");
  const double w = partition->grid().cell_volume();
  BlockField bf{partition, std::vector<double>(partition->num_blocks()), std::vector<double>(partition->num_blocks())};
  for (std::size_t b = 0; b < partition->num_blocks(); ++b) {
    KahanSum s1;
    KahanSum s2;
    for (std::size_t site : partition->sites_of(b)) {
      s1.add(field[site]);
      s2.add(wick2[site]);
    }
    bf.phi_avg[b] = s1.value() * w;
    bf.wick2_avg[b] = s2.value() * w;
  }
  return bf;
}

BlockField block_average(std::shared_ptr<const BlockPartition> partition, const Field& field, double tadpole) {
  Field w2(field.grid);
  for (std::size_t i = 0; i < w2.values.size(); ++i) w2[i] = field[i] * field[i] - tadpole;
  return block_average(std::move(partition), field, w2);
}

double q1(const BlockField& bf, std::size_t block, double beta) {
  return (beta - bf.wick2_avg.at(block)) / std::sqrt(beta);
}

double q2(const BlockField& bf, std::size_t block, double beta) {
  const double p = bf.phi_avg.at(block);
  return (bf.wick2_avg.at(block) - p * p) / std::sqrt(beta);
}

double q3(const BlockField& bf, std::size_t a, std::size_t b) {
  if (!bf.partition->are_neighbours(a, b)) throw UsageError("Q3 needs a nearest-neighbour pair");
  return bf.phi_avg.at(a) - bf.phi_avg.at(b);
}

double log_cosh(double x) noexcept {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double log_cosh_products(const BlockField& bf, double beta, std::span<const std::size_t> b1,
                         std::span<const std::size_t> b2, std::span<const BlockPair> b3, double a1, double a2,
                         double a3) {
  KahanSum s;
  for (auto b : b1) s.add(log_cosh(a1 * q1(bf, b, beta)));
  for (auto b : b2) s.add(log_cosh(a2 * q2(bf, b, beta)));
  for (const auto& [a, b] : b3) s.add(log_cosh(a3 * q3(bf, a, b)));
  return s.value();
}

double cosh_products(const BlockField& bf, double beta, std::span<const std::size_t> b1,
                     std::span<const std::size_t> b2, std::span<const BlockPair> b3, double a1, double a2, double a3) {
  const double v = std::exp(log_cosh_products(bf, beta, b1, b2, b3, a1, a2, a3));
  if (!std::isfinite(v)) throw NumericError("cosh product overflows; use the log form");
  return v;
}

std::string observables_csv_header() { return "config_id,m_N,block_file"; }

std::string observables_csv_row(std::size_t config_id, double m, const std::string& block_file) {
  std::ostringstream os;
  os.precision(17);
  os << config_id << ',' << m << ',' << block_file;
  return os.str();
}

}  // namespace phi4
