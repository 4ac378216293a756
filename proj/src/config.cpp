#include "phi4/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "phi4/error.hpp"

namespace phi4 {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Line of `key` inside [section], for diagnostics.
int find_line(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  std::string cur;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[') {
      cur = trim(t.substr(1, t.find(']') - 1));
      if (key.empty() && cur == section) return n;
      continue;
    }
    const auto eq = t.find('=');
    if (cur == section && eq != std::string::npos && trim(t.substr(0, eq)) == key) return n;
  }
  return 0;
}

double to_double(const std::string& v) {
  if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return d;
}

std::uint64_t to_u64(const std::string& v) {
  std::size_t pos = 0;
  if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
  const auto x = std::stoull(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return x;
}

int to_int(const std::string& v) {
  std::size_t pos = 0;
  const int x = std::stoi(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return x;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected a boolean");
}

template <class T, class F>
std::vector<T> to_list(const std::string& v, F conv) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<T>(conv(item)));
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"model",
       {
           {"dim", [](auto& c, auto& v) { c.sim.dim = to_int(v); }},
           {"N", [](auto& c, auto& v) {
              const double x = to_double(v);
              if (x < 1 || std::abs(x - std::round(x)) > 1e-12) throw ConfigError("N must be a positive integer");
              c.sim.side = static_cast<int>(std::lround(x));
            }},
           {"eps", [](auto& c, auto& v) {
              const double e = to_double(v);
              const double inv = 1.0 / e;
              if (!(e > 0) || std::abs(inv - std::round(inv)) > 1e-9) throw ConfigError("1/eps must be an integer");
              c.sim.eps_inv = static_cast<int>(std::lround(inv));
            }},
           {"beta", [](auto& c, auto& v) { c.sim.params.beta = to_double(v); }},
           {"eta", [](auto& c, auto& v) { c.sim.params.eta = to_double(v); }},
           {"K", [](auto& c, auto& v) { c.sim.params.K = to_double(v); }},
           {"plateau", [](auto& c, auto& v) {
              c.sim.params.profile = CutoffProfile(to_double(v), c.sim.params.profile.outer());
            }},
           {"outer", [](auto& c, auto& v) {
              c.sim.params.profile = CutoffProfile(c.sim.params.profile.plateau(), to_double(v));
            }},
       }},
      {"dynamics",
       {
           {"scheme", [](auto& c, auto& v) {
              if (v == "lattice")
                c.sim.scheme = Scheme::Lattice;
              else if (v == "galerkin")
                c.sim.scheme = Scheme::Galerkin;
              else
                throw std::invalid_argument("expected lattice or galerkin");
            }},
           {"drift", [](auto& c, auto& v) {
              if (v == "phi4")
                c.sim.model = DriftModel::Phi4;
              else if (v == "gaussian")
                c.sim.model = DriftModel::Gaussian;
              else
                throw std::invalid_argument("expected phi4 or gaussian");
            }},
           {"initial", [](auto& c, auto& v) {
              if (v == "zero")
                c.sim.initial = InitialState::Zero;
              else if (v == "plus")
                c.sim.initial = InitialState::Plus;
              else if (v == "minus")
                c.sim.initial = InitialState::Minus;
              else if (v == "gff")
                c.sim.initial = InitialState::Gff;
              else
                throw std::invalid_argument("expected zero, plus, minus or gff");
            }},
           {"dt", [](auto& c, auto& v) { c.sim.dt = to_double(v); }},
           {"n_steps", [](auto& c, auto& v) { c.sim.n_steps = to_u64(v); }},
           {"burn_in", [](auto& c, auto& v) { c.sim.burn_in = to_u64(v); }},
           {"thin", [](auto& c, auto& v) { c.sim.thin = to_u64(v); }},
           {"seed", [](auto& c, auto& v) { c.sim.seed = to_u64(v); }},
           {"checkpoint_every", [](auto& c, auto& v) { c.sim.checkpoint_every = to_u64(v); }},
           {"safety", [](auto& c, auto& v) { c.sim.safety = to_double(v); }},
           {"noise", [](auto& c, auto& v) { c.sim.noise = to_bool(v); }},
           {"umbrella_kappa", [](auto& c, auto& v) { c.sim.umbrella_kappa = to_double(v); }},
           {"umbrella_centre", [](auto& c, auto& v) { c.sim.umbrella_centre = to_double(v); }},
       }},
      {"analysis",
       {
           {"delta", [](auto& c, auto& v) { c.delta = to_double(v); }},
           {"gamma", [](auto& c, auto& v) { c.gamma = to_double(v); }},
           {"zeta", [](auto& c, auto& v) { c.zeta = to_double(v); }},
           {"a0", [](auto& c, auto& v) { c.a0 = to_double(v); }},
           {"block_sets", [](auto& c, auto& v) { c.block_sets = to_list<std::size_t>(v, to_u64); }},
           {"chess_blocks", [](auto& c, auto& v) { c.chess_blocks = to_list<std::size_t>(v, to_u64); }},
           {"n_ladder", [](auto& c, auto& v) { c.n_ladder = to_list<int>(v, to_int); }},
           {"mode_ladder", [](auto& c, auto& v) { c.mode_ladder = to_list<int>(v, to_int); }},
           {"chi_scale", [](auto& c, auto& v) { c.chi_scale = to_double(v); }},
           {"samples", [](auto& c, auto& v) { c.samples = to_u64(v); }},
           {"scale_m", [](auto& c, auto& v) { c.scale_m = to_int(v); }},
           {"per_octave", [](auto& c, auto& v) { c.per_octave = to_int(v); }},
           {"plane_axis", [](auto& c, auto& v) { c.plane_axis = to_int(v); }},
           {"plane_offset", [](auto& c, auto& v) { c.plane_offset = to_int(v); }},
           {"windows", [](auto& c, auto& v) { c.windows = to_u64(v); }},
           {"kappa", [](auto& c, auto& v) { c.kappa = to_double(v); }},
           {"exchanges", [](auto& c, auto& v) { c.exchanges = to_u64(v); }},
           {"steps_per_exchange", [](auto& c, auto& v) { c.steps_per_exchange = to_u64(v); }},
           {"burn_in_exchanges", [](auto& c, auto& v) { c.burn_in_exchanges = to_u64(v); }},
       }},
      {"io",
       {
           {"outdir", [](auto& c, auto& v) { c.outdir = v; }},
           {"formats", [](auto& c, auto& v) { c.formats = to_list<std::string>(v, [](const std::string& s) { return s; }); }},
           {"checkpoint", [](auto& c, auto& v) { c.checkpoint = v; }},
       }},
  };
  return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw UsageError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig cfg;
  cfg.source = text;
  const auto& sch = schema();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw UsageError(origin + ": key '" + section + "' outside any section");
    const auto sit = sch.find(section);
    if (sit == sch.end())
      throw UsageError(origin + ":" + std::to_string(find_line(text, section, "")) + ": unknown section [" + section +
                       "]");
    for (const auto& [key, val] : body) {
      const int line = find_line(text, section, key);
      const auto kit = sit->second.find(key);
      if (kit == sit->second.end())
        throw UsageError(origin + ":" + std::to_string(line) + ": unknown key '" + key + "' in [" + section + "]");
      const auto value = trim(val.data());
      try {
        kit->second(cfg, value);
      } catch (const std::invalid_argument& e) {
        throw UsageError(origin + ":" + std::to_string(line) + ": bad value '" + value + "' for " + section + "." +
                         key + " (" + e.what() + ")");
      } catch (const std::out_of_range&) {
        throw UsageError(origin + ":" + std::to_string(line) + ": value out of range for " + section + "." + key);
      } catch (const ConfigError& e) {
        throw UsageError(origin + ":" + std::to_string(line) + ": " + section + "." + key + ": " + e.what());
      }
    }
  }
  if (const char* env = std::getenv("PHI4_OUTDIR"); env && *env) cfg.outdir = env;
  try {
    cfg.sim.validate();
  } catch (const ConfigError& e) {
    throw UsageError(origin + ": " + e.what());
  }
  if (!(cfg.delta > 0 && cfg.delta < 1)) throw UsageError(origin + ": analysis.delta must lie in (0,1)");
  if (!(cfg.gamma > 0 && cfg.gamma < 1)) throw UsageError(origin + ": analysis.gamma must lie in (0,1)");
  if (!(cfg.zeta > 0 && cfg.zeta < 1)) throw UsageError(origin + ": analysis.zeta must lie in (0,1)");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string documented_keys() {
  std::ostringstream os;
  for (const auto& [section, keys] : schema())
    for (const auto& [key, setter] : keys) os << '[' << section << "] " << key << '\n';
  return os.str();
}

}  // namespace phi4
