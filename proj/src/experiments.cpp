#include "stc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace stc {

namespace {

constexpr double kExactnessTolerance = 1e-9;

std::string opt_time(const std::optional<double>& t) { return t ? format_double(*t) : "none"; }

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_preamble(std::ostream& os, const Preamble& lines) {
  for (const auto& [k, v] : lines) os << "#! " << k << '=' << v << '\n';
}

CheckResult check(std::string name, bool passed, std::string detail) {
  return {std::move(name), passed, std::move(detail)};
}

}  // namespace

EngineConfig engine_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  EngineConfig e;
  e.eps = cfg.eps;
  e.horizon = cfg.horizon;
  e.delayed = cfg.delayed;
  e.noise = cfg.noise;
  e.delay = cfg.delay;
  e.seed = seed;
  return e;
}

EnvelopeMode envelope_mode(const ExperimentConfig& cfg) {
  if (cfg.delayed && cfg.delay.bound() > 0.0) return EnvelopeMode::delayed;
  return cfg.noise.bound() == 0.0 ? EnvelopeMode::noiseless : EnvelopeMode::noisy;
}

std::size_t RunResult::violations() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(),
                                                [](const CheckResult& c) { return !c.passed; }));
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunResult res;
  res.instance = make_instance(cfg.graph, cfg.x0, cfg.seed);
  const Graph& g = res.instance.graph;
  res.trace = simulate(g, res.instance.x0, engine_config(cfg, cfg.seed));
  const Trace& tr = res.trace;

  const double w = cfg.noise.bound();
  const double tau = cfg.delayed ? cfg.delay.bound() : 0.0;
  res.bounds = compute_bounds(cfg.eps, tr.chi0(), g.max_degree(), w, tau);
  const EnvelopeMode mode = envelope_mode(cfg);
  switch (mode) {
    case EnvelopeMode::noiseless: res.radius = std::max(cfg.eps, cfg.eps * tr.chi0()); break;
    case EnvelopeMode::noisy: res.radius = res.bounds.r; break;
    case EnvelopeMode::delayed: res.radius = res.bounds.r_bar; break;
  }
  res.containment = containment(tr, g, res.radius, cfg.h_metric);
  res.convergence = convergence_time(tr);

  const double defect = exactness_defect(tr);
  res.checks.push_back(check("exactness", defect <= kExactnessTolerance,
                             "max_defect=" + format_double(defect)));

  const EnvelopeReport env = envelope_check(tr, res.bounds, mode);
  std::string env_detail = "lower=" + format_double(env.lower) + " upper=" + format_double(env.upper) +
                           " min_margin=" + format_double(env.min_margin);
  if (env.first_violation)
    env_detail += " first_violation_t=" + format_double(env.first_violation->time) +
                  " node=" + std::to_string(env.first_violation->node);
  res.checks.push_back(check("envelope", env.ok(), env_detail));

  if (mode == EnvelopeMode::noiseless) {
    const LyapunovReport ly = lyapunov_check(tr, g);
    res.checks.push_back(check("lyapunov", ly.monotone(),
                               "checks=" + std::to_string(ly.checks) +
                                   " worst_increase=" + format_double(ly.worst_increase)));
    if (tr.quiesced_at()) {
      const Membership m = in_set_E(tr.state_at(tr.horizon()), g, cfg.eps, tr.chi0());
      res.checks.push_back(check("final_in_E", m.inside, "margin=" + format_double(m.margin)));
    }
  } else {
    const double w_eff = w + 3.0 * tau;
    const LemmaReport l1 = threshold_lemma_check(tr, res.radius, g.max_degree(), w_eff);
    res.checks.push_back(check("threshold_lemma", l1.ok(),
                               "checked=" + std::to_string(l1.checked) +
                                   " violations=" + std::to_string(l1.violations)));
    const LemmaReport l2 = sign_lemma_check(tr, res.radius);
    res.checks.push_back(check("sign_lemma", l2.ok(),
                               "checked=" + std::to_string(l2.checked) +
                                   " violations=" + std::to_string(l2.violations)));
  }
  // Once inside, the run must stay inside up to the horizon.
  const bool stays = !res.containment.first_entry || res.containment.contained();
  res.checks.push_back(check("containment", stays,
                             "first_entry=" + opt_time(res.containment.first_entry) +
                                 " sustained_entry=" + opt_time(res.containment.sustained_entry) +
                                 " post_entry_max=" + format_double(res.containment.post_entry_max)));
  return res;
}

Preamble summary_lines(const RunResult& r) {
  Preamble out;
  auto put = [&](std::string k, std::string v) { out.emplace_back(std::move(k), std::move(v)); };
  put("n", std::to_string(r.instance.graph.size()));
  put("d_max", std::to_string(r.instance.graph.max_degree()));
  put("chi0", format_double(r.bounds.chi0));
  put("r", format_double(r.bounds.r));
  put("gamma", format_double(r.bounds.gamma));
  put("r_bar", format_double(r.bounds.r_bar));
  put("gamma_bar", format_double(r.bounds.gamma_bar));
  put("radius", format_double(r.radius));
  put("entry_time_D", opt_time(r.containment.sustained_entry));
  put("convergence_time", opt_time(r.convergence));
  put("quiesced_at", opt_time(r.trace.quiesced_at()));
  put("A_MLA", "na");
  put("A_MND", "na");
  put("A_MDEC", "na");
  for (const CheckResult& c : r.checks)
    put("check." + c.name, std::string(c.passed ? "pass" : "FAIL") + " " + c.detail);
  put("violations", std::to_string(r.violations()));
  return out;
}

void write_run_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                       const RunResult& result) {
  std::filesystem::create_directories(dir);
  const Preamble echo = echo_config(cfg);
  {
    auto out = open_output(dir / "trace.csv");
    write_trace_csv(out, result.trace, echo);
  }
  auto out = open_output(dir / "summary.txt");
  write_preamble(out, echo);
  for (const auto& [k, v] : summary_lines(result)) out << k << '=' << v << '\n';
}

// ---------------------------------------------------------------------------

std::size_t MonteCarloResult::violations() const {
  return static_cast<std::size_t>(
      std::count_if(trials.begin(), trials.end(), [](const TrialRecord& t) { return !t.contained(); }));
}

const SweepPoint* MonteCarloResult::find(GraphKind family, std::size_t n) const {
  for (const SweepPoint& p : points)
    if (p.family == family && p.n == n) return &p;
  return nullptr;
}

std::uint64_t trial_seed(std::uint64_t master, GraphKind family, std::size_t n, std::size_t trial) {
  return derive_seed(master, static_cast<std::uint64_t>(family) + 1, n, trial);
}

namespace {

TrialRecord run_trial(const ExperimentConfig& cfg, GraphKind family, std::size_t n, std::size_t trial) {
  TrialRecord rec;
  rec.family = family;
  rec.n = n;
  rec.trial = trial;
  rec.seed = trial_seed(cfg.seed, family, n, trial);

  GraphConfig gc = cfg.graph;
  gc.kind = family;
  gc.n = n;
  if (family == GraphKind::rg && cfg.montecarlo.rg_reference_n > 0) {
    const double scale = std::sqrt(static_cast<double>(n) / static_cast<double>(cfg.montecarlo.rg_reference_n));
    gc.width *= scale;
    gc.height *= scale;
  }
  const Instance inst = make_instance(gc, cfg.x0, rec.seed);
  const Graph& g = inst.graph;
  rec.d_max = g.max_degree();
  const auto [lo, hi] = std::minmax_element(inst.x0.begin(), inst.x0.end());
  rec.chi0 = std::max(std::fabs(*lo), std::fabs(*hi));
  const double tau = cfg.delayed ? cfg.delay.bound() : 0.0;
  rec.r = radius_r_delay(cfg.eps, rec.chi0, rec.d_max, cfg.noise.bound(), tau);

  EngineConfig ec = engine_config(cfg, rec.seed);
  ec.record.events = false;
  ec.record.tail_polls = cfg.montecarlo.window;
  AverageMonitor monitor(g, inst.x0, rec.r);
  Simulation sim(g, inst.x0, ec);
  sim.set_observer(&monitor);
  const Trace trace = sim.run();

  rec.entry = monitor.entry_time();
  rec.post_entry_max = monitor.post_entry_max();
  rec.indices = window_indices(trace, g, cfg.montecarlo.window);
  return rec;
}

}  // namespace

MonteCarloResult run_montecarlo(const ExperimentConfig& cfg, std::size_t threads) {
  cfg.validate();
  const MonteCarloConfig& mc = cfg.montecarlo;
  if (mc.trials == 0) throw ConfigError("montecarlo.trials", "Monte Carlo block missing");
  const std::vector<GraphKind> families =
      mc.families.empty() ? std::vector<GraphKind>{cfg.graph.kind} : mc.families;
  const std::vector<std::size_t> sizes =
      mc.sizes.empty() ? std::vector<std::size_t>{cfg.graph.n} : mc.sizes;

  struct Job {
    GraphKind family;
    std::size_t n;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  for (GraphKind f : families)
    for (std::size_t n : sizes)
      for (std::size_t k = 0; k < mc.trials; ++k) jobs.push_back({f, n, k});

  MonteCarloResult result;
  result.trials.resize(jobs.size());
  std::size_t degree = threads ? threads : mc.threads;
  if (degree == 0) degree = std::max(1u, std::thread::hardware_concurrency());
  degree = std::min(degree, jobs.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        result.trials[k] = run_trial(cfg, jobs[k].family, jobs[k].n, jobs[k].trial);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  if (degree <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < degree; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::size_t at = 0;
  for (GraphKind f : families) {
    for (std::size_t n : sizes) {
      std::vector<WindowIndices> per_trial;
      for (std::size_t k = 0; k < mc.trials; ++k) per_trial.push_back(result.trials[at++].indices);
      result.points.push_back({f, n, aggregate_indices(std::move(per_trial), mc.window, cfg.horizon)});
    }
  }
  return result;
}

void write_montecarlo_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                              const MonteCarloResult& result) {
  std::filesystem::create_directories(dir);
  const Preamble echo = echo_config(cfg);
  {
    auto out = open_output(dir / "montecarlo.csv");
    write_preamble(out, echo);
    out << "family,n,trials,window,horizon,A_MLA,A_MND,A_MDEC\n";
    for (const SweepPoint& p : result.points) {
      out << to_string(p.family) << ',' << p.n << ',' << p.report.trials << ',' << p.report.window << ','
          << format_double(p.report.horizon) << ',' << format_double(p.report.a_mla) << ','
          << format_double(p.report.a_mnd) << ',' << format_double(p.report.a_mdec) << '\n';
    }
  }
  auto out = open_output(dir / "trials.csv");
  write_preamble(out, echo);
  out << "family,n,trial,seed,d_max,chi0,r,entry_time,post_entry_max,contained,samples,mla,mnd,mdec\n";
  for (const TrialRecord& t : result.trials) {
    out << to_string(t.family) << ',' << t.n << ',' << t.trial << ',' << t.seed << ',' << t.d_max << ','
        << format_double(t.chi0) << ',' << format_double(t.r) << ',' << (t.entry ? format_double(*t.entry) : "")
        << ',' << format_double(t.post_entry_max) << ',' << (t.contained() ? 1 : 0) << ','
        << t.indices.samples << ',' << format_double(t.indices.mla) << ',' << format_double(t.indices.mnd)
        << ',' << format_double(t.indices.mdec) << '\n';
  }
}

// ---------------------------------------------------------------------------

OracleCheckResult oracle_check(const ExperimentConfig& cfg, double dt, std::optional<double> tolerance) {
  cfg.validate();
  if (cfg.delayed) throw ConfigError("mode.delayed", "oracle check covers the delay-free protocol only");
  const Instance inst = make_instance(cfg.graph, cfg.x0, cfg.seed);
  const Graph& g = inst.graph;
  if (!(dt > 0.0) || dt >= cfg.eps / (8.0 * static_cast<double>(g.max_degree())))
    throw std::invalid_argument("dt must satisfy 0 < dt < eps / (8 d_max)");

  // The reference run extends one second past the horizon so the noise log
  // covers every decision the integrator may take before the horizon.
  EngineConfig ref = engine_config(cfg, cfg.seed);
  ref.horizon = cfg.horizon + 1.0;
  ref.record.events = false;
  ref.record.noise_log = true;
  const Trace exact = simulate(g, inst.x0, ref);

  EngineConfig grid = engine_config(cfg, cfg.seed);
  const Trace approx = oracle_run(g, inst.x0, grid, exact.noise_log(), dt);

  OracleCheckResult out;
  out.dt = dt;
  out.tolerance = tolerance.value_or(10.0 * dt);
  const auto steps = static_cast<std::size_t>(std::floor(cfg.horizon / dt + 1e-9));
  for (std::size_t m = 0; m <= steps; ++m) {
    const double t = std::min(static_cast<double>(m) * dt, cfg.horizon);
    for (NodeId i = 0; i < g.size(); ++i) {
      const double d = std::fabs(exact.node_state_at(i, t) - approx.node_state_at(i, t));
      out.deviation = std::max(out.deviation, d);
      if (d > out.tolerance && !out.first_exceeded) out.first_exceeded = t;
    }
  }
  return out;
}

}  // namespace stc
