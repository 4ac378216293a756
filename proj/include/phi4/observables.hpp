#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phi4/torus.hpp"

namespace phi4 {

/// m_N = N^{-d} int phi dx.
double magnetisation(const Field& phi);

struct BlockField {
  std::shared_ptr<const BlockPartition> partition;
  /// phi(B) = int_B phi dx.
  std::vector<double> phi_avg;
  /// int_B :phi^2: dx.
  std::vector<double> wick2_avg;
};

BlockField block_average(std::shared_ptr<const BlockPartition> partition, const Field& field, const Field& wick2);
/// Wick square taken pointwise with the given tadpole.
BlockField block_average(std::shared_ptr<const BlockPartition> partition, const Field& field, double tadpole);

double q1(const BlockField& bf, std::size_t block, double beta);
double q2(const BlockField& bf, std::size_t block, double beta);
/// phi(a) - phi(b); throws UsageError unless a and b are nearest neighbours.
double q3(const BlockField& bf, std::size_t a, std::size_t b);

/// log cosh x without overflow.
double log_cosh(double x) noexcept;

using BlockPair = std::pair<std::size_t, std::size_t>;

/// log prod cosh(a1 Q1(B1)) cosh(a2 Q2(B2)) cosh(a3 Q3(B3)).
double log_cosh_products(const BlockField& bf, double beta, std::span<const std::size_t> b1,
                         std::span<const std::size_t> b2, std::span<const BlockPair> b3, double a1, double a2,
                         double a3);
/// Same product in linear space; NumericError if it overflows.
double cosh_products(const BlockField& bf, double beta, std::span<const std::size_t> b1,
                     std::span<const std::size_t> b2, std::span<const BlockPair> b3, double a1, double a2, double a3);

std::string observables_csv_header();
std::string observables_csv_row(std::size_t config_id, double m, const std::string& block_file);

}  // namespace phi4
