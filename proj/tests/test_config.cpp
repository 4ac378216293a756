#include <cstdlib>

#include "doctest.h"
#include "phi4/config.hpp"
#include "phi4/error.hpp"

using namespace phi4;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "cfg.ini");
  } catch (const UsageError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("full configuration") {
  const std::string text = R"([model]
dim = 3
N = 4
eps = 0.5
beta = 6
eta = 0.25
K = 8

[dynamics]
scheme = galerkin
drift = gaussian
dt = 0.001
n_steps = 100
burn_in = 10
thin = 2
seed = 99
initial = plus

[analysis]
delta = 0.25
gamma = 0.4
zeta = 0.5
block_sets = 1, 2,4
n_ladder = 8,12

[io]
outdir = out/run1
formats = csv
)";
  unsetenv("PHI4_OUTDIR");
  const auto c = parse_config(text);
  CHECK(c.sim.dim == 3);
  CHECK(c.sim.side == 4);
  CHECK(c.sim.eps_inv == 2);
  CHECK(c.sim.params.beta == 6.0);
  CHECK(c.sim.params.K == 8.0);
  CHECK(c.sim.scheme == Scheme::Galerkin);
  CHECK(c.sim.model == DriftModel::Gaussian);
  CHECK(c.sim.initial == InitialState::Plus);
  CHECK(c.sim.seed == 99);
  CHECK(c.block_sets == std::vector<std::size_t>{1, 2, 4});
  CHECK(c.n_ladder == std::vector<int>{8, 12});
  CHECK(c.outdir == "out/run1");
  CHECK(c.formats == std::vector<std::string>{"csv"});
  CHECK(c.source == text);
  setenv("PHI4_OUTDIR", "/tmp/elsewhere", 1);
  CHECK(parse_config(text).outdir == "/tmp/elsewhere");
  unsetenv("PHI4_OUTDIR");
}

TEST_CASE("defaults") {
  const auto c = parse_config("[model]\nbeta = 2\n");
  CHECK(c.sim.dim == 2);
  CHECK(std::isinf(c.sim.params.K));
  CHECK(c.delta == 0.5);
}

TEST_CASE("diagnostics name the line and key") {
  const auto unknown = error_of("[model]\nbeta = 2\nbetta = 3\n");
  CHECK(unknown.find("cfg.ini:3") != std::string::npos);
  CHECK(unknown.find("betta") != std::string::npos);
  const auto bad = error_of("[model]\n\nbeta = two\n");
  CHECK(bad.find("cfg.ini:3") != std::string::npos);
  CHECK(bad.find("model.beta") != std::string::npos);
  CHECK(error_of("[modle]\nbeta = 2\n").find("unknown section [modle]") != std::string::npos);
  CHECK(error_of("beta = 2\n").find("outside any section") != std::string::npos);
  CHECK(error_of("[model]\neps = 0.3\n").find("model.eps") != std::string::npos);
  CHECK(error_of("[dynamics]\nscheme = rk4\n").find("dynamics.scheme") != std::string::npos);
  CHECK(error_of("[dynamics]\nseed = -4\n").find("dynamics.seed") != std::string::npos);
  CHECK(error_of("[analysis]\ndelta = 1.5\n").find("delta") != std::string::npos);
  CHECK(error_of("[model]\nbeta = -1\n").find("beta") != std::string::npos);
  CHECK(error_of("[dynamics]\ndt = 0.5\n").find("stability") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), UsageError);
}

TEST_CASE("key listing") {
  const auto keys = documented_keys();
  CHECK(keys.find("[model] beta") != std::string::npos);
  CHECK(keys.find("[dynamics] checkpoint_every") != std::string::npos);
  CHECK(keys.find("[io] formats") != std::string::npos);
}
