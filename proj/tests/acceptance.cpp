// Acceptance gate: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stc/analysis.hpp"
#include "stc/config.hpp"
#include "stc/experiments.hpp"
#include "stc/trace.hpp"

using namespace stc;

namespace {

constexpr std::size_t kSeeds = 100;
constexpr std::size_t kOracleSeeds = 20;
constexpr std::size_t kDelaySeeds = 20;

class Stopwatch {
 public:
  void start() { t0_ = std::chrono::steady_clock::now(); }
  void stop() { total_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }
  double seconds() const { return total_; }

 private:
  std::chrono::steady_clock::time_point t0_;
  double total_ = 0.0;
};

// FNV-1a over output bytes.
struct Digest {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void add(const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  }
};

std::string run_outputs(const ExperimentConfig& cfg, const RunResult& res) {
  std::ostringstream os;
  const auto echo = echo_config(cfg);
  write_trace_csv(os, res.trace, echo);
  for (const auto& [k, v] : echo) os << "#! " << k << '=' << v << '\n';
  for (const auto& [k, v] : summary_lines(res)) os << k << '=' << v << '\n';
  return os.str();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const CheckResult* find_check(const RunResult& r, const std::string& name) {
  for (const CheckResult& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

bool check_passed(const RunResult& r, const std::string& name) {
  const CheckResult* c = find_check(r, name);
  return c != nullptr && c->passed;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Verdict {
  bool pass = true;
  std::string detail;
  double seconds = 0.0;
};

void report(int id, const Verdict& v, double budget) {
  std::printf("criterion %d: %s %s runtime=%.2fs", id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), v.seconds);
  if (budget > 0.0) std::printf(" budget=%.0fs", budget);
  std::printf("\n");
  std::fflush(stdout);
}

ExperimentConfig cycle10(double horizon) {
  ExperimentConfig cfg;
  cfg.graph.kind = GraphKind::cycle;
  cfg.graph.n = 10;
  cfg.x0.kind = InitKind::uniform;
  cfg.x0.low = -10.0;
  cfg.x0.high = 10.0;
  cfg.eps = 0.05;
  cfg.horizon = horizon;
  return cfg;
}

std::uint64_t seed_for(int criterion, std::size_t k) { return 1000u * static_cast<std::uint64_t>(criterion) + k; }

// Results of one full pass over criteria 2 to 10.
struct Pass {
  std::map<int, Verdict> verdicts;
  std::map<int, std::uint64_t> digests;
  LemmaReport lemma_threshold;
  LemmaReport lemma_sign;
  std::size_t lemma_runs = 0;
  std::size_t lemma_failed_runs = 0;
};

// Runs every seed of one configuration family, timing only the simulation and
// its checks. `judge` returns an empty string on success.
template <class Configure, class Judge>
Verdict sweep(Pass& pass, int id, std::size_t seeds, const std::filesystem::path& sample_dir,
              Configure configure, Judge judge) {
  Verdict v;
  Stopwatch sw;
  Digest d;
  std::size_t failed = 0;
  std::string first;
  for (std::size_t k = 0; k < seeds; ++k) {
    ExperimentConfig cfg = configure();
    cfg.seed = seed_for(id, k);
    sw.start();
    const RunResult res = run_experiment(cfg);
    const std::string why = judge(res);
    sw.stop();
    if (!why.empty()) {
      ++failed;
      if (first.empty()) first = "seed=" + std::to_string(cfg.seed) + " " + why;
    }
    d.add(run_outputs(cfg, res));
    if (k == 0) write_run_outputs(sample_dir / ("c" + std::to_string(id)), cfg, res);
  }
  v.pass = failed == 0;
  v.seconds = sw.seconds();
  v.detail = "runs=" + std::to_string(seeds) + " failed=" + std::to_string(failed);
  if (!first.empty()) v.detail += " first_failure{" + first + "}";
  pass.digests[id] = d.h;
  return v;
}

std::string other_checks_ok(const RunResult& r) {
  for (const CheckResult& c : r.checks) {
    if (c.name == "threshold_lemma" || c.name == "sign_lemma") continue;
    if (!c.passed) return "check " + c.name + " failed: " + c.detail;
  }
  return {};
}

void record_lemmas(Pass& pass, const RunResult& r) {
  const CheckResult* a = find_check(r, "threshold_lemma");
  const CheckResult* b = find_check(r, "sign_lemma");
  ++pass.lemma_runs;
  if (a == nullptr || b == nullptr || !a->passed || !b->passed) ++pass.lemma_failed_runs;
  const Graph& g = r.instance.graph;
  const LemmaReport l1 = threshold_lemma_check(r.trace, r.radius, g.max_degree(), r.bounds.w_bound);
  const LemmaReport l2 = sign_lemma_check(r.trace, r.radius);
  pass.lemma_threshold.checked += l1.checked;
  pass.lemma_threshold.violations += l1.violations;
  pass.lemma_sign.checked += l2.checked;
  pass.lemma_sign.violations += l2.violations;
}

Verdict criterion2(Pass& pass, const std::filesystem::path& dir) {
  double worst_quiesce = 0.0;
  Verdict v = sweep(pass, 2, kSeeds, dir, [] { return cycle10(200.0); }, [&](const RunResult& r) -> std::string {
    if (!r.trace.quiesced_at()) return "did not quiesce";
    worst_quiesce = std::max(worst_quiesce, *r.trace.quiesced_at());
    for (const char* name : {"final_in_E", "envelope", "lyapunov", "exactness"})
      if (!check_passed(r, name)) return std::string("check ") + name + " failed";
    return {};
  });
  v.detail += " latest_quiescence=" + fmt(worst_quiesce);
  v.pass = v.pass && v.seconds < 5.0;
  return v;
}

Verdict criterion3(Pass& pass, const std::filesystem::path& dir) {
  double lo = 1e300, hi = 0.0;
  std::vector<double> times;
  auto configure = [] {
    ExperimentConfig cfg = cycle10(60.0);
    cfg.noise = NoiseSpec::uniform(-0.01, 0.01);
    return cfg;
  };
  Verdict v = sweep(pass, 3, kSeeds, dir, configure, [&](const RunResult& r) -> std::string {
    record_lemmas(pass, r);
    if (const std::string e = other_checks_ok(r); !e.empty()) return e;
    if (!r.convergence) return "controls still switching at the horizon";
    times.push_back(*r.convergence);
    lo = std::min(lo, *r.convergence);
    hi = std::max(hi, *r.convergence);
    const Membership m = in_set_D(r.trace.state_at(r.trace.horizon()), r.instance.graph, r.bounds.r);
    if (!m.inside) return "frozen state outside D, margin=" + fmt(m.margin);
    if (*r.convergence < 1.0 || *r.convergence > 30.0) return "convergence_time=" + fmt(*r.convergence);
    return {};
  });
  std::sort(times.begin(), times.end());
  const auto within = std::count_if(times.begin(), times.end(), [](double t) { return t >= 1.0 && t <= 30.0; });
  v.detail += " within_[1,30]=" + std::to_string(within) + " convergence_time_range=[" + fmt(lo) + "," + fmt(hi) + "]";
  if (!times.empty()) v.detail += " median=" + fmt(times[times.size() / 2]);
  v.pass = v.pass && v.seconds < 10.0;
  return v;
}

ExperimentConfig general_noise(GraphKind kind) {
  ExperimentConfig cfg = cycle10(100.0);
  cfg.graph.kind = kind;
  cfg.noise = NoiseSpec::sinusoid_plus_uniform(0.04, 0.16);
  return cfg;
}

Verdict criterion4(Pass& pass, const std::filesystem::path& dir) {
  double latest = 0.0;
  Verdict v = sweep(pass, 4, kSeeds, dir, [] { return general_noise(GraphKind::cycle); },
                    [&](const RunResult& r) -> std::string {
                      record_lemmas(pass, r);
                      if (const std::string e = other_checks_ok(r); !e.empty()) return e;
                      const ContainmentReport& c = r.containment;
                      if (!c.first_entry) return "never entered D";
                      if (!c.contained()) return "left D after first entry";
                      latest = std::max(latest, *c.first_entry);
                      if (*c.first_entry >= 60.0) return "entry_time=" + fmt(*c.first_entry);
                      return {};
                    });
  v.detail += " latest_entry=" + fmt(latest);
  v.pass = v.pass && v.seconds < 30.0;
  return v;
}

Verdict criterion5(Pass& pass, const std::filesystem::path& dir) {
  double peak = 0.0, variation = 0.0;
  auto configure = [] {
    ExperimentConfig cfg = cycle10(200.0);
    cfg.noise = NoiseSpec::sign_preserving(0.2);
    return cfg;
  };
  Verdict v = sweep(pass, 5, kSeeds, dir, configure, [&](const RunResult& r) -> std::string {
    record_lemmas(pass, r);
    if (const std::string e = other_checks_ok(r); !e.empty()) return e;
    const double m = max_abs_state(r.trace);
    peak = std::max(peak, m);
    if (m > 10.7333 + 1e-9) return "max|x|=" + fmt(m);
    const double h = r.trace.horizon();
    const double var = max_variation(r.trace, 0.9 * h, h);
    variation = std::max(variation, var);
    if (var >= 0.5) return "tail_variation=" + fmt(var);
    return {};
  });
  v.detail += " max_abs_state=" + fmt(peak) + " max_tail_variation=" + fmt(variation);
  v.pass = v.pass && v.seconds < 30.0;
  return v;
}

Verdict criterion6(Pass& pass) {
  Verdict v;
  Stopwatch sw;
  Digest d;
  double worst = 0.0;
  std::size_t runs = 0, failed = 0;
  std::string first;
  for (GraphKind kind : {GraphKind::path, GraphKind::cycle}) {
    for (bool noisy : {false, true}) {
      for (std::size_t k = 0; k < kOracleSeeds; ++k) {
        ExperimentConfig cfg = cycle10(1.0);
        cfg.graph.kind = kind;
        cfg.graph.n = kind == GraphKind::path ? 3 : 10;
        if (noisy) cfg.noise = NoiseSpec::uniform(-0.2, 0.2);
        cfg.seed = seed_for(6, runs);
        sw.start();
        const OracleCheckResult o = oracle_check(cfg, 1e-4, 1e-3);
        sw.stop();
        ++runs;
        worst = std::max(worst, o.deviation);
        d.add(format_double(o.deviation) + "\n");
        if (!o.passed()) {
          ++failed;
          if (first.empty())
            first = "seed=" + std::to_string(cfg.seed) + " graph=" + to_string(kind) +
                    " deviation=" + fmt(o.deviation);
        }
      }
    }
  }
  v.pass = failed == 0 && sw.seconds() < 120.0;
  v.seconds = sw.seconds();
  v.detail = "runs=" + std::to_string(runs) + " failed=" + std::to_string(failed) + " max_deviation=" + fmt(worst) +
             " horizon=1";
  if (!first.empty()) v.detail += " first_failure{" + first + "}";
  pass.digests[6] = d.h;
  return v;
}

Verdict criterion7(Pass& pass, const std::filesystem::path& dir) {
  Verdict v;
  Stopwatch sw;
  Digest d;
  std::size_t runs = 0, failed = 0;
  double min_margin = 1e300;
  std::string first;
  for (bool sign_preserving : {false, true}) {
    for (std::size_t k = 0; k < kDelaySeeds; ++k) {
      ExperimentConfig cfg = cycle10(100.0);
      cfg.noise = sign_preserving ? NoiseSpec::sign_preserving(0.2) : NoiseSpec::uniform(-0.2, 0.2);
      cfg.delayed = true;
      cfg.delay = DelaySpec::uniform(0.02);
      cfg.seed = seed_for(7, runs);
      sw.start();
      const RunResult r = run_experiment(cfg);
      const EnvelopeReport env = envelope_check(r.trace, r.bounds, EnvelopeMode::delayed);
      sw.stop();
      ++runs;
      min_margin = std::min(min_margin, env.min_margin);
      if (!env.ok() || !check_passed(r, "exactness")) {
        ++failed;
        if (first.empty()) first = "seed=" + std::to_string(cfg.seed) + " envelope violated";
      }
      d.add(run_outputs(cfg, r));
      if (runs == 1) write_run_outputs(dir / "c7", cfg, r);
    }
  }

  // Zero delay through the delayed engine against the delay-free engine.
  std::size_t identical = 0;
  for (std::size_t k = 0; k < kDelaySeeds; ++k) {
    ExperimentConfig plain = cycle10(20.0);
    plain.noise = NoiseSpec::uniform(-0.2, 0.2);
    plain.seed = seed_for(7, 100 + k);
    ExperimentConfig zero = plain;
    zero.delayed = true;
    zero.delay = DelaySpec::uniform(0.0);
    sw.start();
    const RunResult a = run_experiment(plain);
    const RunResult b = run_experiment(zero);
    std::ostringstream sa, sb;
    write_trace_csv(sa, a.trace);
    write_trace_csv(sb, b.trace);
    sw.stop();
    if (sa.str() == sb.str()) {
      ++identical;
    } else if (first.empty()) {
      first = "seed=" + std::to_string(plain.seed) + " zero-delay trace differs";
    }
    d.add(sa.str());
  }
  v.pass = failed == 0 && identical == kDelaySeeds && sw.seconds() < 60.0;
  v.seconds = sw.seconds();
  v.detail = "runs=" + std::to_string(runs) + " envelope_failed=" + std::to_string(failed) +
             " min_margin_to_gamma_bar=" + fmt(min_margin) + " zero_delay_identical=" + std::to_string(identical) +
             "/" + std::to_string(kDelaySeeds);
  if (!first.empty()) v.detail += " first_failure{" + first + "}";
  pass.digests[7] = d.h;
  return v;
}

Verdict criterion8(const Pass& pass) {
  Verdict v;
  v.pass = pass.lemma_runs == 3 * kSeeds && pass.lemma_failed_runs == 0 && pass.lemma_threshold.ok() &&
           pass.lemma_sign.ok();
  v.detail = "runs=" + std::to_string(pass.lemma_runs) + " threshold_checked=" +
             std::to_string(pass.lemma_threshold.checked) + " threshold_violations=" +
             std::to_string(pass.lemma_threshold.violations) + " sign_checked=" +
             std::to_string(pass.lemma_sign.checked) + " sign_violations=" +
             std::to_string(pass.lemma_sign.violations);
  return v;
}

ExperimentConfig montecarlo_config() {
  ExperimentConfig cfg;
  cfg.graph.kind = GraphKind::er;
  cfg.graph.n = 40;
  cfg.graph.p = 0.08;
  cfg.graph.width = 1000.0;
  cfg.graph.height = 1000.0;
  cfg.graph.range = 160.0;
  cfg.x0.kind = InitKind::uniform;
  cfg.x0.low = -2.0;
  cfg.x0.high = 2.0;
  cfg.eps = 0.1;
  cfg.noise = NoiseSpec::uniform(-0.2, 0.2);
  cfg.horizon = 1000.0;
  cfg.seed = 9000;
  cfg.montecarlo.trials = 50;
  cfg.montecarlo.window = 100;
  cfg.montecarlo.sizes = {40, 70, 100};
  cfg.montecarlo.families = {GraphKind::er, GraphKind::rg};
  cfg.montecarlo.rg_reference_n = 100;
  return cfg;
}

Verdict criterion9(Pass& pass, const std::filesystem::path& dir, std::size_t threads) {
  Verdict v;
  const ExperimentConfig cfg = montecarlo_config();
  Stopwatch sw;
  sw.start();
  const MonteCarloResult mc = run_montecarlo(cfg, threads);
  sw.stop();
  v.seconds = sw.seconds();

  std::size_t over = 0;
  double worst_ratio = 0.0;
  for (const TrialRecord& t : mc.trials) {
    if (!t.entry || t.post_entry_max > t.r) ++over;
    worst_ratio = std::max(worst_ratio, t.post_entry_max / t.r);
  }
  const bool a = over == 0 && mc.trials.size() == 300;

  std::string mnd;
  bool b = true;
  double prev = 1e300;
  for (std::size_t n : cfg.montecarlo.sizes) {
    const SweepPoint* p = mc.find(GraphKind::er, n);
    if (p == nullptr) {
      b = false;
      continue;
    }
    mnd += " ER" + std::to_string(n) + "=" + fmt(p->report.a_mnd);
    b = b && p->report.a_mnd < prev;
    prev = p->report.a_mnd;
  }
  for (std::size_t n : cfg.montecarlo.sizes)
    if (const SweepPoint* p = mc.find(GraphKind::rg, n)) mnd += " RG" + std::to_string(n) + "=" + fmt(p->report.a_mnd);
  const SweepPoint* er100 = mc.find(GraphKind::er, 100);
  const SweepPoint* rg100 = mc.find(GraphKind::rg, 100);
  const bool c = er100 != nullptr && rg100 != nullptr && er100->report.a_mnd < rg100->report.a_mnd;

  v.pass = a && b && c && v.seconds < 900.0;
  v.detail = std::string("(a)=") + (a ? "ok" : "fail") + " (b)=" + (b ? "ok" : "fail") + " (c)=" + (c ? "ok" : "fail") +
             " trials=" + std::to_string(mc.trials.size()) + " over_r=" + std::to_string(over) +
             " worst_post_entry_over_r=" + fmt(worst_ratio) + " A_MND:" + mnd;

  write_montecarlo_outputs(dir / "c9", cfg, mc);
  Digest d;
  d.add(read_file(dir / "c9" / "montecarlo.csv"));
  d.add(read_file(dir / "c9" / "trials.csv"));
  pass.digests[9] = d.h;
  return v;
}

Verdict criterion10(Pass& pass, const std::filesystem::path& dir) {
  double tightest = 1e300;
  Verdict v = sweep(pass, 10, kSeeds, dir, [] { return general_noise(GraphKind::complete); },
                    [&](const RunResult& r) -> std::string {
                      const ContainmentReport& c = r.containment;
                      if (!c.first_entry || !c.contained()) return "did not stay in D";
                      const double limit = 2.0 * r.bounds.r / static_cast<double>(r.instance.graph.size());
                      const double spread = max_spread_after(r.trace, *c.first_entry, 0.01);
                      tightest = std::min(tightest, limit - spread);
                      if (!(spread < limit)) return "spread=" + fmt(spread) + " limit=" + fmt(limit);
                      return {};
                    });
  v.detail += " min_slack=" + fmt(tightest);
  v.pass = v.pass && v.seconds < 30.0;
  return v;
}

Pass run_pass(const std::filesystem::path& dir, std::size_t mc_threads, bool print) {
  Pass pass;
  auto emit = [&](int id, const Verdict& v, double budget) {
    pass.verdicts[id] = v;
    if (print) report(id, v, budget);
  };
  emit(2, criterion2(pass, dir), 5);
  emit(3, criterion3(pass, dir), 10);
  emit(4, criterion4(pass, dir), 30);
  emit(5, criterion5(pass, dir), 30);
  emit(6, criterion6(pass), 120);
  emit(7, criterion7(pass, dir), 60);
  emit(8, criterion8(pass), 0);
  emit(9, criterion9(pass, dir, mc_threads), 900);
  emit(10, criterion10(pass, dir), 30);
  return pass;
}

Verdict criterion1() {
  Verdict v;
  const double g1 = gamma_bound(0.05, 2, 0.01);
  const double g2 = gamma_bound(0.05, 2, 0.2);
  const double r = radius_r(0.05, 10.0, 2, 0.2);
  v.pass = std::fabs(g1 - 0.53667) <= 1e-4 && std::fabs(g2 - 10.7333) <= 1e-2 && std::fabs(r - 1.7033) <= 1e-2;
  v.detail = "gamma(0.05,2,0.01)=" + fmt(g1) + " gamma(0.05,2,0.2)=" + fmt(g2) + " r(0.05,10,2,0.2)=" + fmt(r);
  return v;
}

bool same_files(const std::filesystem::path& a, const std::filesystem::path& b, std::size_t& compared) {
  bool same = true;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), a);
    ++compared;
    if (read_file(entry.path()) != read_file(b / rel)) {
      std::printf("  differs: %s\n", rel.string().c_str());
      same = false;
    }
  }
  return same;
}

}  // namespace

int main() {
  const std::filesystem::path root = std::filesystem::temp_directory_path() / "stc_acceptance";
  std::filesystem::remove_all(root);

  bool all = true;
  const Verdict c1 = criterion1();
  report(1, c1, 0);
  all = all && c1.pass;

  const Pass first = run_pass(root / "first", 0, true);
  for (const auto& [id, v] : first.verdicts) all = all && v.pass;

  // Second invocation with identical seeds and a different Monte Carlo thread count.
  Stopwatch sw;
  sw.start();
  const Pass second = run_pass(root / "second", 2, false);
  std::size_t files = 0;
  bool same = same_files(root / "first", root / "second", files);
  std::string differing;
  for (const auto& [id, h] : first.digests) {
    const auto it = second.digests.find(id);
    if (it == second.digests.end() || it->second != h) {
      same = false;
      differing += " " + std::to_string(id);
    }
  }
  sw.stop();
  Verdict c11;
  c11.pass = same;
  c11.seconds = sw.seconds();
  c11.detail = "digests=" + std::to_string(first.digests.size()) + " sample_files=" + std::to_string(files) +
               (differing.empty() ? std::string() : " differing_criteria:" + differing);
  report(11, c11, 0);
  all = all && c11.pass;

  std::filesystem::remove_all(root);
  std::printf("acceptance: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}
