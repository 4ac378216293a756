// Command-line driver: one subcommand per experiment, INI config in, CSV/JSON out.

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "phi4/checkpoint.hpp"
#include "phi4/config.hpp"
#include "phi4/diagrams.hpp"
#include "phi4/error.hpp"
#include "phi4/ldp_stats.hpp"
#include "phi4/phase_geometry.hpp"
#include "phi4/reflection.hpp"

#ifndef PHI4_VERSION
#define PHI4_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace phi4;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInconclusive = 2;

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

class Outputs {
 public:
  Outputs(const ExperimentConfig& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {
    fs::create_directories(cfg.outdir);
  }

  bool wants(const std::string& fmt) const {
    return std::find(cfg_.formats.begin(), cfg_.formats.end(), fmt) != cfg_.formats.end();
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path p = fs::path(cfg_.outdir) / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + p.string());
    out << content;
    files_.push_back(name);
  }
  void note(const std::string& name) { files_.push_back(name); }

  void manifest(double wall, int status) {
    json j;
    j["command"] = command_;
    j["config_hash"] = sha256_hex(cfg_.source);
    j["seed"] = cfg_.sim.seed;
    j["version"] = PHI4_VERSION;
    j["wall_time_s"] = wall;
    j["status"] = status == kExitOk ? "ok" : (status == kExitInconclusive ? "inconclusive" : "error");
    j["outputs"] = files_;
    std::ofstream out(fs::path(cfg_.outdir) / ("manifest_" + command_ + ".json"));
    out << j.dump(2) << '\n';
  }

 private:
  const ExperimentConfig& cfg_;
  std::string command_;
  std::vector<std::string> files_;
};

ModelParams params_of(const ExperimentConfig& c) { return c.sim.params; }

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  return e;
}

std::string histogram_of(const std::vector<double>& x, double half_width, std::size_t bins) {
  const auto edges = uniform_edges(-half_width, half_width, bins);
  std::vector<double> counts(bins, 0.0);
  for (double v : x) {
    if (v < -half_width || v >= half_width) continue;
    counts[std::min(bins - 1, static_cast<std::size_t>((v + half_width) / (2.0 * half_width) * bins))] += 1.0;
  }
  return hist_csv(edges, counts);
}

int cmd_renorm(const ExperimentConfig& cfg, Outputs& out) {
  const auto g = cfg.sim.grid();
  const auto p = params_of(cfg);
  const auto rc = renorm_constants(g, p);
  out.write("renorm.csv", renorm_csv_header() + "\n" + renorm_csv_row(g, p, rc) + "\n");
  return kExitOk;
}

int cmd_sample(const ExperimentConfig& cfg, Outputs& out) {
  const auto g = cfg.sim.grid();
  const auto p = params_of(cfg);
  const bool lattice = cfg.sim.scheme == Scheme::Lattice;
  const auto var = lattice ? lattice_mode_variances(g, p.eta) : continuum_mode_variances(g, p);
  Rng rng = make_rng(cfg.sim.seed, 0);
  std::vector<double> sum(g.num_modes(), 0.0);
  std::vector<double> sum2(g.num_modes(), 0.0);
  std::ostringstream obs;
  obs.precision(17);
  obs << observables_csv_header() << '\n';
  std::vector<double> ms;
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    const auto c = sample_spectral(g, var, rng);
    for (std::size_t k = 0; k < g.num_modes(); ++k) {
      const double a = std::norm(c.coeffs[k]);
      sum[k] += a;
      sum2[k] += a * a;
    }
    const Field f = fft_inverse(c);
    ms.push_back(magnetisation(f));
    obs << observables_csv_row(s, ms.back(), "") << '\n';
  }
  std::ostringstream modes;
  modes.precision(17);
  modes << "mode,n_norm,theory,empirical,stderr\n";
  const double n = static_cast<double>(cfg.samples);
  for (std::size_t k = 0; k < g.num_modes(); ++k) {
    const double m = sum[k] / n;
    const double sd = std::sqrt(std::max(0.0, sum2[k] / n - m * m) / n);
    modes << k << ',' << g.frequency_norm(k) << ',' << var[k] << ',' << m << ',' << sd << '\n';
  }
  out.write("gff_modes.csv", modes.str());
  out.write("observables.csv", obs.str());
  double sd = 0.0;
  for (double v : ms) sd += v * v;
  sd = std::sqrt(sd / std::max<std::size_t>(1, ms.size()));
  out.write("hist.csv", histogram_of(ms, 5.0 * sd + 1e-12, 40));
  return kExitOk;
}

int cmd_evolve(const ExperimentConfig& cfg, Outputs& out) {
  SimConfig sim = cfg.sim;
  const std::string ck = (fs::path(cfg.outdir) / "state.chk").string();
  if (sim.checkpoint_every > 0) sim.checkpoint_path = ck;
  const RunResult res = cfg.checkpoint.empty()
                            ? run(sim)
                            : [&] {
                                const auto cp = read_checkpoint(cfg.checkpoint, sim.grid());
                                return run(sim, cp.field(), cp.step);
                              }();
  std::ostringstream os;
  os << trajectory_csv_header() << '\n';
  std::vector<double> ms;
  for (const auto& r : res.records) {
    os << trajectory_csv_row(r) << '\n';
    ms.push_back(r.magnetisation);
  }
  out.write("trajectory.csv", os.str());
  if (!ms.empty()) out.write("hist.csv", histogram_of(ms, 1.5 * std::sqrt(sim.params.beta), 60));
  const std::string fin = (fs::path(cfg.outdir) / "final.chk").string();
  write_checkpoint(fin, make_checkpoint(sim, res.final_state, res.final_step));
  out.note("final.chk");
  if (!res.last_checkpoint.empty()) out.note("state.chk");
  return kExitOk;
}

Field state_for_analysis(const ExperimentConfig& cfg) {
  if (!cfg.checkpoint.empty()) return read_checkpoint(cfg.checkpoint, cfg.sim.grid()).field();
  return run(cfg.sim).final_state;
}

int cmd_label(const ExperimentConfig& cfg, Outputs& out, bool with_defects) {
  const Field phi = state_for_analysis(cfg);
  const auto g = phi.grid;
  const double beta = cfg.sim.params.beta;
  auto part = std::make_shared<const BlockPartition>(g);
  const double t = lattice_green_zero(g, cfg.sim.params.eta);
  const auto bf = block_average(part, phi, t);
  const auto label = phase_label(classify_blocks(bf, beta, cfg.delta), part, beta);
  const auto kinds = partition_bad(label);
  const auto rep = verify_badset_inequalities(label, bf, beta, cfg.delta);
  const auto defects = extract_defects(label, cfg.gamma);

  json j;
  j["m_N"] = magnetisation(phi);
  j["n_blocks"] = part->num_blocks();
  j["n_bad"] = label.num_bad();
  j["n_frustrated"] = rep.frustrated;
  j["n_interface"] = rep.interface;
  j["badset_violations"] = rep.violations;
  j["C_delta"] = badset_constant(cfg.delta);
  out.write("label.json", j.dump(2) + "\n");
  out.write("defect_summary.csv",
            defect_summary_csv_header() + "\n" + defect_summary_csv_row(label, kinds, defects) + "\n");
  if (with_defects) {
    out.write("defects.json", defect_report_json(defects) + "\n");
    const auto er = erase_small_defects(label, defects);
    json e;
    std::size_t changed = 0;
    for (std::size_t b = 0; b < er.sigma2.size(); ++b)
      if (label.sigma[b] != er.sigma2[b]) ++changed;
    e["blocks_changed"] = changed;
    e["inconsistent_defects"] = er.inconsistent;
    e["boundary_area_sigma2"] = boundary_area(*part, er.sigma2);
    out.write("erasure.json", e.dump(2) + "\n");
  }
  return rep.violations == 0 ? kExitOk : kExitError;
}

int cmd_chessboard(const ExperimentConfig& cfg, Outputs& out) {
  const auto g = cfg.sim.grid();
  auto part = std::make_shared<const BlockPartition>(g);
  if (g.side() % 4 != 0) throw ConfigError("chessboard estimates need N divisible by 4");
  const double beta = cfg.sim.params.beta;
  const double t = lattice_green_zero(g, cfg.sim.params.eta);
  auto log_f = [part, beta, t](const Field& phi, std::size_t b) {
    double w2 = 0.0;
    for (auto s : part->sites_of(b)) w2 += phi[s] * phi[s] - t;
    w2 *= phi.grid.cell_volume();
    return (beta - w2) / std::sqrt(beta);
  };
  ChessboardAccumulator acc(part, cfg.chess_blocks, log_f);
  run(cfg.sim, [&](const Field& phi, const TrajectoryRecord&) { acc.add(phi); });
  const auto rep = acc.report();
  json j;
  j["log_lhs"] = rep.log_lhs;
  j["log_rhs"] = rep.log_rhs;
  j["margin"] = rep.margin;
  j["stderr"] = rep.margin_err;
  j["min_ess"] = rep.min_ess;
  j["samples"] = rep.samples;
  j["verdict"] = rep.inconclusive ? "inconclusive" : (rep.margin <= 3.0 * rep.margin_err ? "holds" : "violated");
  out.write("chessboard.json", j.dump(2) + "\n");
  return rep.inconclusive ? kExitInconclusive : kExitOk;
}

int cmd_gap(const ExperimentConfig& cfg, Outputs& out) {
  const auto res = run(cfg.sim);
  std::vector<double> ms;
  for (const auto& r : res.records) ms.push_back(r.magnetisation);
  const double scale = cfg.chi_scale * std::sqrt(cfg.sim.params.beta);
  const auto g = spectral_gap_estimate(ms, cfg.sim.dt * static_cast<double>(cfg.sim.thin), scale);
  json j;
  j["lambda"] = g.lambda;
  j["stderr"] = g.err;
  j["tau_int"] = g.tau_int;
  j["inconclusive"] = g.inconclusive;
  if (g.inconclusive) j["reason"] = g.reason;
  j["poincare_quotient"] = ms.empty() ? 0.0 : poincare_quotient(ms, cfg.sim.grid().volume(), scale);
  out.write("gap.json", j.dump(2) + "\n");
  out.write("gap_vs_N.csv", gap_vs_n_csv({GapRow{cfg.sim.side, g.lambda, g.err, "autocorrelation"}}));
  return g.inconclusive ? kExitInconclusive : kExitOk;
}

int cmd_ldp_scan(const ExperimentConfig& cfg, Outputs& out) {
  const double root = std::sqrt(cfg.sim.params.beta);
  const double zeta = cfg.zeta;
  if (cfg.windows < 2) throw ConfigError("ldp-scan needs at least two umbrella windows");
  std::vector<RateInput> inputs;
  std::vector<GapRow> gaps;
  json runs = json::array();
  for (int N : cfg.n_ladder) {
    UmbrellaPlan plan;
    plan.base = cfg.sim;
    plan.base.side = N;
    plan.kappa = cfg.kappa;
    plan.exchanges = cfg.exchanges;
    plan.steps_per_exchange = cfg.steps_per_exchange;
    plan.burn_in_exchanges = cfg.burn_in_exchanges;
    const double hi = 1.3 * root;
    for (std::size_t i = 0; i < cfg.windows; ++i)
      plan.centres.push_back(hi * static_cast<double>(i) / static_cast<double>(cfg.windows - 1));
    const auto ur = run_umbrella(plan, cfg.sim.seed + static_cast<std::uint64_t>(N));
    const double vol = std::pow(static_cast<double>(N), plan.base.dim);
    const auto su = summarise_umbrella(ur.windows, vol, zeta * root, cfg.chi_scale * root);
    inputs.push_back({N, su.prob});
    gaps.push_back({N, su.poincare.value, su.poincare.err, "poincare"});
    const double lp = su.prob.log_p;
    const double pq = su.poincare.value;
    runs.push_back({{"N", N}, {"log_p", lp}, {"poincare_quotient", pq}, {"log_p_err", su.prob.err}, {"exchange_acceptance", ur.exchange_acceptance}});
  }
  const auto rep = ldp_rate(inputs, cfg.sim.dim);
  out.write("rate_vs_N.csv", rate_vs_n_csv(rep));
  out.write("gap_vs_N.csv", gap_vs_n_csv(gaps));
  json j;
  j["runs"] = runs;
  j["max_pair_z"] = rep.max_pair_z;
  j["pairwise_consistent"] = rep.pairwise_consistent;
  out.write("ldp_scan.json", j.dump(2) + "\n");
  return rep.inconclusive ? kExitInconclusive : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phi4 lattice field theory toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  std::string outdir;
  const std::vector<std::string> names{"renorm", "sample", "evolve", "label", "defects", "chessboard", "gap", "ldp-scan"};
  for (const auto& n : names) {
    auto* sub = app.add_subcommand(n);
    sub->add_option("-c,--config", config_path, "INI configuration file")->required();
    sub->add_option("-o,--outdir", outdir, "output directory (overrides [io] outdir)");
  }
  app.add_flag_callback("--keys", [] {
    std::cout << documented_keys();
    std::exit(0);
  }, "list configuration keys");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  const auto start = std::chrono::steady_clock::now();
  int status = kExitError;
  try {
    ExperimentConfig cfg = load_config(config_path);
    if (!outdir.empty()) cfg.outdir = outdir;
    Outputs out(cfg, cmd);
    try {
      if (cmd == "renorm")
        status = cmd_renorm(cfg, out);
      else if (cmd == "sample")
        status = cmd_sample(cfg, out);
      else if (cmd == "evolve")
        status = cmd_evolve(cfg, out);
      else if (cmd == "label")
        status = cmd_label(cfg, out, false);
      else if (cmd == "defects")
        status = cmd_label(cfg, out, true);
      else if (cmd == "chessboard")
        status = cmd_chessboard(cfg, out);
      else if (cmd == "gap")
        status = cmd_gap(cfg, out);
      else if (cmd == "ldp-scan")
        status = cmd_ldp_scan(cfg, out);
    } catch (const DivergenceError& e) {
      std::cerr << "error: " << e.what() << '\n';
      status = kExitError;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.manifest(wall, status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return status;
}
