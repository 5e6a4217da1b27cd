#include "stc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "stc/protocol.hpp"
#include "stc/trace.hpp"

namespace stc {

namespace {

constexpr std::uint64_t kGraphDomain = 0x6772617068ULL;  // "graph"
constexpr std::uint64_t kInitDomain = 0x696e6974ULL;     // "init"

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end || !std::isfinite(out))
    throw ConfigError(key, "expected a finite number, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

NoiseKind parse_noise_kind(const std::string& v) {
  if (v == "zero") return NoiseKind::zero;
  if (v == "uniform") return NoiseKind::uniform;
  if (v == "sign_preserving") return NoiseKind::sign_preserving;
  if (v == "sinusoid_plus_uniform") return NoiseKind::sinusoid_plus_uniform;
  throw ConfigError("noise.kind", "unknown noise kind '" + v + "'");
}

DelayKind parse_delay_kind(const std::string& v) {
  if (v == "zero") return DelayKind::zero;
  if (v == "constant") return DelayKind::constant;
  if (v == "uniform") return DelayKind::uniform;
  throw ConfigError("delay.kind", "unknown delay kind '" + v + "'");
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + format_double(v[k]);
  return out;
}

}  // namespace

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::cycle: return "cycle";
    case GraphKind::complete: return "complete";
    case GraphKind::path: return "path";
    case GraphKind::er: return "er";
    case GraphKind::rg: return "rg";
    case GraphKind::edges: return "edges";
  }
  return "?";
}

GraphKind parse_graph_kind(const std::string& s) {
  for (GraphKind k : {GraphKind::cycle, GraphKind::complete, GraphKind::path, GraphKind::er,
                      GraphKind::rg, GraphKind::edges})
    if (to_string(k) == s) return k;
  throw ConfigError("graph.kind", "unknown graph kind '" + s + "'");
}

KeyValues read_key_values(std::istream& in) {
  std::vector<std::string> plain;
  std::vector<std::string> embedded;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#!", 0) == 0) {
      embedded.push_back(line.substr(2));
      continue;
    }
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    plain.push_back(t);
  }
  const auto& lines = embedded.empty() ? plain : embedded;
  KeyValues kv;
  for (const std::string& raw : lines) {
    const auto eq = raw.find('=');
    if (eq == std::string::npos) throw ConfigError("", "line without '=': '" + trim(raw) + "'");
    const std::string key = trim(raw.substr(0, eq));
    if (key.empty()) throw ConfigError("", "empty key in line '" + trim(raw) + "'");
    if (!kv.emplace(key, trim(raw.substr(eq + 1))).second) throw ConfigError(key, "duplicate key");
  }
  return kv;
}

ExperimentConfig parse_config(const KeyValues& kv, bool apply_env) {
  ExperimentConfig c;
  std::set<std::string> seen;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    seen.insert(key);
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  auto num = [&](const std::string& key, double& out) {
    if (auto v = get(key)) out = to_double(key, *v);
  };
  auto count = [&](const std::string& key, std::size_t& out) {
    if (auto v = get(key)) out = static_cast<std::size_t>(to_u64(key, *v));
  };

  if (auto v = get("graph.kind")) c.graph.kind = parse_graph_kind(*v);
  count("graph.n", c.graph.n);
  num("graph.p", c.graph.p);
  num("graph.width", c.graph.width);
  num("graph.height", c.graph.height);
  num("graph.range", c.graph.range);
  if (auto v = get("graph.edges")) {
    for (const std::string& e : split(*v, ',')) {
      const auto dash = e.find('-');
      if (dash == std::string::npos) throw ConfigError("graph.edges", "expected i-j, got '" + e + "'");
      c.graph.edges.emplace_back(to_u64("graph.edges", trim(e.substr(0, dash))),
                                 to_u64("graph.edges", trim(e.substr(dash + 1))));
    }
  }

  if (auto v = get("x0.kind")) {
    if (*v == "values") c.x0.kind = InitKind::values;
    else if (*v == "uniform") c.x0.kind = InitKind::uniform;
    else throw ConfigError("x0.kind", "unknown initial-state kind '" + *v + "'");
  }
  if (auto v = get("x0.values")) {
    for (const std::string& s : split(*v, ',')) c.x0.values.push_back(to_double("x0.values", s));
    if (!kv.count("x0.kind")) c.x0.kind = InitKind::values;
  }
  num("x0.low", c.x0.low);
  num("x0.high", c.x0.high);

  num("eps", c.eps);

  if (auto v = get("noise.kind")) c.noise.kind = parse_noise_kind(*v);
  if (auto v = get("noise.bound")) {
    const double b = to_double("noise.bound", *v);
    if (c.noise.kind == NoiseKind::uniform) c.noise.low = -b;
    if (c.noise.kind == NoiseKind::uniform || c.noise.kind == NoiseKind::sign_preserving) c.noise.high = b;
    if (c.noise.kind == NoiseKind::zero || c.noise.kind == NoiseKind::sinusoid_plus_uniform)
      throw ConfigError("noise.bound", "not meaningful for noise kind " + to_string(c.noise.kind));
  }
  num("noise.low", c.noise.low);
  num("noise.high", c.noise.high);
  num("noise.amplitude", c.noise.amplitude);
  num("noise.v_range", c.noise.v_range);
  if (auto v = get("noise.per_link")) c.noise.per_link = to_bool("noise.per_link", *v);

  if (auto v = get("delay.kind")) c.delay.kind = parse_delay_kind(*v);
  num("delay.tau_max", c.delay.tau_max);
  num("delay.rho", c.delay.rho);
  if (auto v = get("mode.delayed")) c.delayed = to_bool("mode.delayed", *v);

  num("horizon", c.horizon);
  num("metric.h", c.h_metric);
  if (auto v = get("seed")) c.seed = to_u64("seed", *v);

  count("montecarlo.trials", c.montecarlo.trials);
  count("montecarlo.window", c.montecarlo.window);
  if (auto v = get("montecarlo.sizes"))
    for (const std::string& s : split(*v, ','))
      c.montecarlo.sizes.push_back(static_cast<std::size_t>(to_u64("montecarlo.sizes", s)));
  if (auto v = get("montecarlo.families")) {
    for (const std::string& s : split(*v, ',')) {
      try {
        c.montecarlo.families.push_back(parse_graph_kind(s));
      } catch (const ConfigError&) {
        throw ConfigError("montecarlo.families", "unknown graph kind '" + s + "'");
      }
    }
  }
  count("montecarlo.threads", c.montecarlo.threads);
  count("montecarlo.rg_reference_n", c.montecarlo.rg_reference_n);

  for (const auto& [key, value] : kv)
    if (!seen.count(key)) throw ConfigError(key, "unknown key");

  if (apply_env) {
    if (const char* env = std::getenv(kSeedEnvVar); env && *env) c.seed = to_u64(kSeedEnvVar, env);
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
  };
  require(eps > 0.0 && eps < 1.0, "eps", "must lie in (0,1)");
  require(horizon > 0.0, "horizon", "must be positive");
  require(h_metric > 0.0, "metric.h", "must be positive");

  const GraphConfig& g = graph;
  switch (g.kind) {
    case GraphKind::cycle: require(g.n >= 3, "graph.n", "cycle needs at least 3 nodes"); break;
    case GraphKind::complete:
    case GraphKind::path: require(g.n >= 2, "graph.n", "needs at least 2 nodes"); break;
    case GraphKind::er:
      require(g.n >= 2, "graph.n", "needs at least 2 nodes");
      require(g.p > 0.0 && g.p <= 1.0, "graph.p", "must lie in (0,1]");
      break;
    case GraphKind::rg:
      require(g.n >= 2, "graph.n", "needs at least 2 nodes");
      require(g.width > 0.0 && g.height > 0.0, "graph.width", "region must have positive size");
      require(g.range > 0.0, "graph.range", "must be positive");
      break;
    case GraphKind::edges:
      require(!g.edges.empty(), "graph.edges", "edge list required for graph.kind=edges");
      try {
        const Graph built = Graph::from_edges(g.n, g.edges);
        require(is_connected(built), "graph.edges", "graph must be connected");
      } catch (const std::invalid_argument& e) {
        throw ConfigError("graph.edges", e.what());
      }
      break;
  }

  if (x0.kind == InitKind::values) {
    require(x0.values.size() == g.n, "x0.values", "needs exactly graph.n entries");
  } else {
    require(x0.low <= x0.high, "x0.low", "must not exceed x0.high");
  }

  try {
    noise.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("noise.kind", e.what());
  }
  try {
    delay.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("delay.kind", e.what());
  }
  require(delayed || delay.kind == DelayKind::zero, "mode.delayed",
          "a delay model requires mode.delayed=true");

  const MonteCarloConfig& mc = montecarlo;
  if (mc.trials > 0) {
    require(mc.window > 0, "montecarlo.window", "must be positive");
    require(x0.kind == InitKind::uniform, "x0.kind", "Monte Carlo trials need x0.kind=uniform");
    for (GraphKind k : mc.families)
      require(k == GraphKind::er || k == GraphKind::rg || k == GraphKind::cycle || k == GraphKind::complete ||
                  k == GraphKind::path,
              "montecarlo.families", "only generated families can be swept");
    for (std::size_t n : mc.sizes) require(n >= 3, "montecarlo.sizes", "sizes must be at least 3");
  }
}

ExperimentConfig load_config(const std::string& path, bool apply_env) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  return parse_config(read_key_values(in), apply_env);
}

std::vector<std::pair<std::string, std::string>> echo_config(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> out;
  auto put = [&](std::string k, std::string v) { out.emplace_back(std::move(k), std::move(v)); };
  put("graph.kind", to_string(c.graph.kind));
  put("graph.n", std::to_string(c.graph.n));
  switch (c.graph.kind) {
    case GraphKind::er: put("graph.p", format_double(c.graph.p)); break;
    case GraphKind::rg:
      put("graph.width", format_double(c.graph.width));
      put("graph.height", format_double(c.graph.height));
      put("graph.range", format_double(c.graph.range));
      break;
    case GraphKind::edges: {
      std::string s;
      for (std::size_t k = 0; k < c.graph.edges.size(); ++k)
        s += (k ? "," : "") + std::to_string(c.graph.edges[k].first) + "-" +
             std::to_string(c.graph.edges[k].second);
      put("graph.edges", s);
      break;
    }
    default: break;
  }
  if (c.montecarlo.trials > 0) {
    // Families swept by the campaign may need parameters of either kind.
    if (c.graph.kind != GraphKind::er) put("graph.p", format_double(c.graph.p));
    if (c.graph.kind != GraphKind::rg) {
      put("graph.width", format_double(c.graph.width));
      put("graph.height", format_double(c.graph.height));
      put("graph.range", format_double(c.graph.range));
    }
  }
  if (c.x0.kind == InitKind::values) {
    put("x0.kind", "values");
    put("x0.values", join_doubles(c.x0.values));
  } else {
    put("x0.kind", "uniform");
    put("x0.low", format_double(c.x0.low));
    put("x0.high", format_double(c.x0.high));
  }
  put("eps", format_double(c.eps));
  put("noise.kind", to_string(c.noise.kind));
  switch (c.noise.kind) {
    case NoiseKind::zero: break;
    case NoiseKind::uniform:
      put("noise.low", format_double(c.noise.low));
      put("noise.high", format_double(c.noise.high));
      break;
    case NoiseKind::sign_preserving: put("noise.high", format_double(c.noise.high)); break;
    case NoiseKind::sinusoid_plus_uniform:
      put("noise.amplitude", format_double(c.noise.amplitude));
      put("noise.v_range", format_double(c.noise.v_range));
      break;
  }
  put("noise.per_link", c.noise.per_link ? "true" : "false");
  put("mode.delayed", c.delayed ? "true" : "false");
  put("delay.kind", to_string(c.delay.kind));
  if (c.delay.kind != DelayKind::zero) put("delay.tau_max", format_double(c.delay.tau_max));
  put("delay.rho", format_double(c.delay.rho));
  put("horizon", format_double(c.horizon));
  put("metric.h", format_double(c.h_metric));
  put("seed", std::to_string(c.seed));
  if (c.montecarlo.trials > 0) {
    put("montecarlo.trials", std::to_string(c.montecarlo.trials));
    put("montecarlo.window", std::to_string(c.montecarlo.window));
    std::string sizes;
    for (std::size_t k = 0; k < c.montecarlo.sizes.size(); ++k)
      sizes += (k ? "," : "") + std::to_string(c.montecarlo.sizes[k]);
    if (!sizes.empty()) put("montecarlo.sizes", sizes);
    std::string fams;
    for (std::size_t k = 0; k < c.montecarlo.families.size(); ++k)
      fams += (k ? "," : "") + to_string(c.montecarlo.families[k]);
    if (!fams.empty()) put("montecarlo.families", fams);
    put("montecarlo.threads", std::to_string(c.montecarlo.threads));
    put("montecarlo.rg_reference_n", std::to_string(c.montecarlo.rg_reference_n));
  }
  return out;
}

Instance make_instance(const GraphConfig& gc, const InitConfig& ic, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, kGraphDomain));
  Instance inst;
  switch (gc.kind) {
    case GraphKind::cycle: inst.graph = make_cycle(gc.n); break;
    case GraphKind::complete: inst.graph = make_complete(gc.n); break;
    case GraphKind::path: inst.graph = make_path(gc.n); break;
    case GraphKind::er: inst.graph = make_connected_erdos_renyi(gc.n, gc.p, rng); break;
    case GraphKind::rg:
      inst.graph = make_connected_random_geometric(gc.n, Region{gc.width, gc.height}, gc.range, rng).graph;
      break;
    case GraphKind::edges: inst.graph = Graph::from_edges(gc.n, gc.edges); break;
  }
  if (ic.kind == InitKind::values) {
    inst.x0 = ic.values;
  } else {
    CounterStream stream(derive_seed(seed, kInitDomain));
    inst.x0.resize(inst.graph.size());
    for (double& v : inst.x0) v = stream.next_uniform(ic.low, ic.high);
  }
  return inst;
}

}  // namespace stc
