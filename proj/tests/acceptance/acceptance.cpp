// End-to-end acceptance checks. Runs the benchmark suite for three master
// seeds and prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cvo/harness/benchmark.hpp"
#include "cvo/metrics/metrics.hpp"
#include "cvo/nn/gradcheck.hpp"
#include "cvo/strategies/strategies.hpp"

namespace fs = std::filesystem;
using namespace cvo;
using harness::BenchmarkResult;
using harness::RunConfig;
using harness::StrategyResult;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::vector<std::pair<std::string, Verdict>> g_results;
std::vector<std::string> g_lines;

void report(int id, const std::string& name, Verdict v) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] criterion %2d  %-28s ", v.pass ? "PASS" : "FAIL", id,
                name.c_str());
  g_lines.push_back(head + v.detail);
  std::printf("%s\n", g_lines.back().c_str());
  std::fflush(stdout);
  g_results.emplace_back(name, std::move(v));
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

const StrategyResult& find(const BenchmarkResult& r, const std::string& label) {
  for (const auto& s : r.strategies)
    if (s.label == label) return s;
  throw std::runtime_error("strategy " + label + " missing from run");
}

// ---------------------------------------------------------------- criterion 1

Verdict formula_oracles() {
  const auto start = Clock::now();
  int checks = 0, bad = 0;
  auto expect = [&](double got, double want) {
    ++checks;
    if (!(std::abs(got - want) <= 1e-12)) ++bad;
  };

  // Worked 3x3 example.
  {
    const auto m = metrics::LossMatrix::from_rows({{2.0, 1.5, 1.4}, {2.5, 1.0, 1.1}, {3.0, 1.2, 0.5}});
    const std::vector<std::optional<double>> sc = {std::nullopt, 1.4, 0.9};
    expect(metrics::bwt(m, 3), -0.6);
    expect(metrics::forgetting_ratio(m, 3), 0.35);
    expect(metrics::fwt(m, sc, 3), 0.4);
    expect(metrics::bwt(m, 2), 2.0 - 2.5);
    expect(metrics::forgetting_ratio(m, 2), 0.25);
    expect(metrics::fwt(m, sc, 2), 0.4);
    const auto s = metrics::summarize(m);
    expect(s.average, (4.9 + 4.6 + 4.7) / 9.0);
    expect(s.final_value, 4.7 / 3.0);
    expect(*s.past[2], 2.1);
    expect(*s.future[0], 1.45);
  }
  // 4x4 with closed-form values.
  {
    const auto m = metrics::LossMatrix::from_rows({{0.9, 1.3, 1.1, 1.7},
                                                   {1.2, 0.6, 1.0, 1.4},
                                                   {0.8, 0.9, 0.4, 1.2},
                                                   {1.0, 0.5, 0.7, 0.3}});
    const std::vector<std::optional<double>> sc = {std::nullopt, 1.1, 0.7, 0.8};
    expect(metrics::bwt(m, 4), -0.1);
    expect(metrics::forgetting_ratio(m, 4), (0.1 / 0.9 + 0.75) / 3.0);
    expect(metrics::fwt(m, sc, 4), (0.5 + 0.3 + 0.5) / 3.0);
    expect(metrics::bwt(m, 3), (0.1 - 0.3) / 2.0);
    const auto s = metrics::summarize(m);
    expect(s.average, (5.0 + 4.2 + 3.3 + 2.5) / 16.0);
    expect(s.final_value, 2.5 / 4.0);
    expect(s.current[3], 0.3);
  }
  // 2x2 summary example.
  {
    const auto m = metrics::LossMatrix::from_rows({{1.0, 3.0}, {2.0, 2.0}});
    const auto s = metrics::summarize(m);
    expect(s.average, 2.0);
    expect(s.final_value, 2.0);
    expect(*s.past[1], 2.0);
    expect(*s.future[0], 3.0);
    expect(metrics::bwt(m, 2), -1.0);
    expect(metrics::forgetting_ratio(m, 2), 1.0);
  }
  const double t = seconds_since(start);
  return {bad == 0 && t < 1.0,
          std::to_string(checks - bad) + "/" + std::to_string(checks) + " values within 1e-12, " +
              sci(t) + " s"};
}

// ---------------------------------------------------------------- criterion 2

Verdict gradient_exactness() {
  const auto start = Clock::now();
  Rng rng(2024);
  double worst_net = 0.0;
  for (int t = 0; t < 10; ++t)
    worst_net = std::max(worst_net, nn::check_loss_gradient(nn::random_gradcheck_case(rng)));

  double worst_ewc = 0.0, worst_lwf = 0.0;
  for (int t = 0; t < 5; ++t) {
    strategies::EwcState st;
    std::vector<double> theta;
    for (int i = 0; i < 40; ++i) {
      st.fisher.push_back(rng.uniform(0.0, 2.0));
      st.anchors.push_back(rng.normal(0.0, 1.0));
      theta.push_back(rng.normal(0.0, 1.0));
    }
    st.experiences_absorbed = 1;
    const double lambda = rng.uniform(0.5, 100.0);
    // The penalty is quadratic, so central differences are exact for any
    // step; a larger one keeps cancellation error out of the comparison.
    const auto pg = strategies::ewc_penalty_and_grad(theta, st, lambda);
    worst_ewc = std::max(
        worst_ewc, nn::max_gradient_error(
                       [&](std::span<const double> x) {
                         return strategies::ewc_penalty_and_grad(x, st, lambda).value;
                       },
                       theta, pg.grad, 1e-3));

    const auto c = nn::random_gradcheck_case(rng);
    const auto teacher = nn::init_params(c.spec, rng);
    const double alpha = rng.uniform(0.1, 10.0);
    const auto lg = strategies::lwf_loss_and_grad(c.params, teacher, c.spec, c.batch.inputs, alpha);
    worst_lwf = std::max(
        worst_lwf, nn::max_gradient_error(
                       [&](std::span<const double> v) {
                         nn::ParamVector p = c.params;
                         p.values.assign(v.begin(), v.end());
                         return strategies::lwf_loss_and_grad(p, teacher, c.spec, c.batch.inputs,
                                                              alpha)
                             .value;
                       },
                       c.params.values, lg.grad));
  }
  const double t = seconds_since(start);
  return {worst_net < 1e-4 && worst_ewc < 1e-6 && worst_lwf < 1e-6 && t < 30.0,
          "network " + sci(worst_net) + ", ewc " + sci(worst_ewc) + ", lwf " + sci(worst_lwf) +
              ", " + sci(t) + " s"};
}

// ------------------------------------------------------------- benchmark runs

std::map<std::string, std::string> csv_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    const fs::path rel = fs::relative(e.path(), root);
    if (harness::is_timing_artifact(rel)) continue;
    std::ifstream f(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    out[rel.generic_string()] = ss.str();
  }
  return out;
}

BenchmarkResult run(RunConfig config, const std::string& what) {
  const auto start = Clock::now();
  std::printf("  running %s (seed %llu) -> %s\n", what.c_str(),
              static_cast<unsigned long long>(config.master_seed), config.output_dir.c_str());
  std::fflush(stdout);
  fs::remove_all(config.output_dir);
  auto r = harness::run_benchmark(config);
  std::printf("    done in %.1f s\n", seconds_since(start));
  std::fflush(stdout);
  return r;
}

struct SeedRuns {
  BenchmarkResult small;   // sweep of every strategy, scratch and joint
  BenchmarkResult action;  // action-conditioned naive
  BenchmarkResult large;   // large-preset naive with scratch
};

const std::vector<std::string> kEwcSweep = {"ewc_1", "ewc_10", "ewc_100", "ewc_1000"};
const std::vector<std::string> kLwfSweep = {"lwf_0.1", "lwf_1", "lwf_10"};
const std::vector<std::string> kReplay = {"replay_164", "replay_820", "replay_1640"};

SeedRuns run_seed(const fs::path& work, std::uint64_t seed) {
  RunConfig base;
  base.master_seed = seed;
  base.cache_dir = work / "cache";
  const std::string tag = "seed" + std::to_string(seed);

  SeedRuns out;
  RunConfig small = base;
  small.output_dir = work / tag / "small";
  small.strategies = {"naive"};
  for (const auto* group : {&kEwcSweep, &kLwfSweep, &kReplay})
    small.strategies.insert(small.strategies.end(), group->begin(), group->end());
  out.small = run(small, "small preset, all strategies");

  RunConfig action = base;
  action.output_dir = work / tag / "action";
  action.strategies = {"naive"};
  action.action_conditioned = true;
  action.scratch = false;
  action.joint = false;
  out.action = run(action, "action-conditioned naive");

  RunConfig large = base;
  large.output_dir = work / tag / "large";
  large.strategies = {"naive"};
  large.preset = nn::Preset::Large;
  large.joint = false;
  out.large = run(large, "large preset naive");
  return out;
}

// ------------------------------------------------------------ trend criteria

struct SignSummary {
  int bwt_ok = 0, fr_ok = 0, spec_ok = 0, n_forget = 0;
  int fwt_ok = 0, n_fwt = 0;
  std::string worst;
};

// Median over seeds, per k, of BWT, FR and current-minus-past, and FWT.
SignSummary forgetting_signs(const std::vector<const StrategyResult*>& runs) {
  SignSummary s;
  const std::size_t K = runs.front()->loss.size();
  const std::size_t half = (K + 1) / 2;
  double worst_bwt = -1e300;
  for (std::size_t k = std::max<std::size_t>(half, 2); k <= K; ++k) {
    std::vector<double> b, f, gap;
    for (const auto* r : runs) {
      b.push_back(*r->bwt[k - 1]);
      f.push_back(*r->fr[k - 1]);
      gap.push_back(r->summary.current[k - 1] - *r->summary.past[k - 1]);
    }
    ++s.n_forget;
    s.bwt_ok += median(b) < 0.0;
    s.fr_ok += median(f) > 0.0;
    s.spec_ok += median(gap) < 0.0;
    worst_bwt = std::max(worst_bwt, median(b));
  }
  for (std::size_t k = 5; k <= K; ++k) {
    std::vector<double> w;
    for (const auto* r : runs) w.push_back(*r->fwt[k - 1]);
    ++s.n_fwt;
    s.fwt_ok += median(w) > 0.0;
  }
  s.worst = sci(worst_bwt);
  return s;
}

std::string frac(int ok, int n) { return std::to_string(ok) + "/" + std::to_string(n); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  fs::path work = "acceptance_runs";
  int n_seeds = 3;
  bool strict = false;
  app.add_option("--work-dir", work, "directory for benchmark outputs");
  app.add_option("--seeds", n_seeds, "number of master seeds")->check(CLI::Range(1, 10));
  app.add_flag("--strict", strict, "exit nonzero when any criterion fails");
  CLI11_PARSE(app, argc, argv);

  const auto start = Clock::now();
  report(1, "formula oracles", formula_oracles());
  report(2, "gradient exactness", gradient_exactness());

  // Criterion 3: two default runs; the second reuses the first one's dataset cache.
  {
    RunConfig a;
    a.output_dir = work / "determinism" / "a";
    a.cache_dir = work / "determinism" / "cache";
    fs::remove_all(a.cache_dir);
    RunConfig b = a;
    b.output_dir = work / "determinism" / "b";
    run(a, "default benchmark (fresh datasets)");
    run(b, "default benchmark (cached datasets)");
    const auto fa = csv_bytes(a.output_dir), fb = csv_bytes(b.output_dir);
    std::size_t same = 0;
    for (const auto& [name, bytes] : fa) {
      auto it = fb.find(name);
      same += it != fb.end() && it->second == bytes;
    }
    report(3, "determinism",
           {fa.size() == fb.size() && same == fa.size() && !fa.empty(),
            std::to_string(same) + "/" + std::to_string(fa.size()) + " CSV files byte-identical"});
  }

  std::vector<SeedRuns> seeds;
  for (int s = 1; s <= n_seeds; ++s) seeds.push_back(run_seed(work, static_cast<std::uint64_t>(s)));

  auto finals = [&](const std::string& label, auto pick) {
    std::vector<double> v;
    for (const auto& s : seeds) v.push_back(find(pick(s), label).summary.final_value);
    return v;
  };
  auto small = [](const SeedRuns& s) -> const BenchmarkResult& { return s.small; };

  // Criteria 4 and 5: naive forgetting and forward transfer.
  {
    std::vector<const StrategyResult*> runs;
    for (const auto& s : seeds) runs.push_back(&find(s.small, "naive"));
    const auto sg = forgetting_signs(runs);
    report(4, "naive forgetting",
           {sg.bwt_ok == sg.n_forget && sg.fr_ok == sg.n_forget && sg.spec_ok == sg.n_forget,
            "k >= K/2: median BWT<0 " + frac(sg.bwt_ok, sg.n_forget) + " (max " + sg.worst +
                "), FR>0 " + frac(sg.fr_ok, sg.n_forget) + ", current<past " +
                frac(sg.spec_ok, sg.n_forget)});
    report(5, "forward transfer",
           {sg.fwt_ok == sg.n_fwt, "k >= 5: median FWT>0 " + frac(sg.fwt_ok, sg.n_fwt)});
  }

  // Criterion 6: replay helps, regularization does not.
  {
    const double naive = mean(finals("naive", small));
    const double replay = mean(finals("replay_1640", small));
    // The sweep member with the lowest mean final validation loss stands for
    // each regularizer.
    auto select = [&](const std::vector<std::string>& sweep) {
      std::string best;
      double best_val = 1e300;
      for (const auto& label : sweep) {
        std::vector<double> v;
        for (const auto& s : seeds) v.push_back(find(s.small, label).final_val_loss);
        if (mean(v) < best_val) best_val = mean(v), best = label;
      }
      return best;
    };
    const std::string ewc = select(kEwcSweep), lwf = select(kLwfSweep);
    const double e = mean(finals(ewc, small)), l = mean(finals(lwf, small));
    const double ed = mean(finals("ewc_100", small)), ld = mean(finals("lwf_1", small));
    const bool ok = replay <= 0.9 * naive && std::abs(e / naive - 1.0) <= 0.15 &&
                    std::abs(l / naive - 1.0) <= 0.15;
    report(6, "replay helps, regularizers do not",
           {ok, "naive " + sci(naive) + ", replay_1640 x" + sci(replay / naive) + ", " + ewc +
                    " x" + sci(e / naive) + ", " + lwf + " x" + sci(l / naive) +
                    " (ewc_100 x" + sci(ed / naive) + ", lwf_1 x" + sci(ld / naive) + ")"});
  }

  // Criterion 7: action conditioning.
  {
    std::vector<double> early_a, early_n, fin_a, fin_n;
    for (const auto& s : seeds) {
      const auto& a = find(s.action, "naive").summary;
      const auto& n = find(s.small, "naive").summary;
      const std::size_t k3 = std::min<std::size_t>(2, a.checkpoint_mean.size() - 1);
      early_a.push_back(a.checkpoint_mean[k3]);
      early_n.push_back(n.checkpoint_mean[k3]);
      fin_a.push_back(a.final_value);
      fin_n.push_back(n.final_value);
    }
    const double ea = mean(early_a), en = mean(early_n), fa = mean(fin_a), fn = mean(fin_n);
    report(7, "action conditioning",
           {ea < en && fa <= 0.8 * fn,
            "after 3: " + sci(ea) + " vs " + sci(en) + ", final " + sci(fa) + " vs " + sci(fn) +
                " (x" + sci(fa / fn) + ")"});
  }

  // Criterion 8: joint gap.
  {
    std::vector<double> joint;
    for (const auto& s : seeds) joint.push_back(s.small.joint->final_value);
    const double j = mean(joint);
    std::string closest;
    double closest_v = 1e300;
    bool ok = true;
    for (const auto& st : seeds.front().small.strategies) {
      const double f = mean(finals(st.label, small));
      ok = ok && j < f;
      if (f < closest_v) closest_v = f, closest = st.label;
    }
    report(8, "joint gap",
           {ok, "joint " + sci(j) + ", best continual " + closest + " " + sci(closest_v)});
  }

  // Criterion 9: the large preset shows the same signs.
  {
    std::vector<const StrategyResult*> runs;
    for (const auto& s : seeds) runs.push_back(&find(s.large, "naive"));
    const auto sg = forgetting_signs(runs);
    const bool ok = sg.bwt_ok == sg.n_forget && sg.fr_ok == sg.n_forget &&
                    sg.spec_ok == sg.n_forget && sg.fwt_ok == sg.n_fwt;
    const double lf = mean(finals("naive", [](const SeedRuns& s) -> const BenchmarkResult& {
      return s.large;
    }));
    report(9, "scale insensitivity",
           {ok, "large: BWT<0 " + frac(sg.bwt_ok, sg.n_forget) + ", FR>0 " +
                    frac(sg.fr_ok, sg.n_forget) + ", current<past " +
                    frac(sg.spec_ok, sg.n_forget) + ", FWT>0 " + frac(sg.fwt_ok, sg.n_fwt) +
                    ", final " + sci(lf)});
  }

  // Criterion 10: dataset statistics per seed over every generated apartment.
  {
    bool ok = true;
    std::string detail;
    for (const auto& s : seeds) {
      double n = 0, f = 0, c = 0;
      for (const auto& a : s.small.dataset_stats) {
        n += static_cast<double>(a.records);
        f += static_cast<double>(a.forward);
        c += static_cast<double>(a.collisions);
      }
      const double ff = f / n, cf = c / n;
      ok = ok && ff >= 0.45 && ff <= 0.70 && cf >= 0.05 && cf <= 0.20;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%sforward %.3f collisions %.3f", detail.empty() ? "" : "; ",
                    ff, cf);
      detail += buf;
    }
    report(10, "dataset statistics", {ok, detail});
  }

  // Criterion 11: wall time per experience grows with buffer capacity.
  {
    std::vector<double> times;
    for (const auto& label : kReplay) {
      std::vector<double> per_seed;
      for (const auto& s : seeds) {
        const auto& reps = find(s.small, label).reports;
        double t = 0.0;
        for (const auto& r : reps) t += r.wall_seconds;
        per_seed.push_back(t / static_cast<double>(reps.size()));
      }
      times.push_back(mean(per_seed));
    }
    report(11, "buffer/time monotonicity",
           {times[0] < times[1] && times[1] < times[2],
            "seconds per experience " + sci(times[0]) + " < " + sci(times[1]) + " < " +
                sci(times[2])});
  }

  // Criterion 12: after experience 1 the action-conditioned model's dtheta
  // spread stays within the ground truth's, for every action.
  {
    int seeds_ok = 0;
    std::string detail;
    for (const auto& s : seeds) {
      const auto& v = find(s.action, "naive").variability.front();
      bool ok = true;
      for (int a = 0; a < 3; ++a) {
        if (!v.predicted[a] || !v.ground_truth[a]) continue;
        const double p = (*v.predicted[a])[2].stddev, g = (*v.ground_truth[a])[2].stddev;
        ok = ok && p <= g;
        char buf[48];
        std::snprintf(buf, sizeof buf, "%s%.4f/%.4f", detail.empty() ? "" : " ", p, g);
        detail += buf;
      }
      seeds_ok += ok;
      detail += ok ? " ok;" : " no;";
    }
    const int needed = (2 * n_seeds + 2) / 3;
    report(12, "variability narrative",
           {seeds_ok >= needed,
            frac(seeds_ok, n_seeds) + " seeds (pred/gt dtheta std per action: " + detail + ")"});
  }

  int passed = 0;
  for (const auto& [name, v] : g_results) passed += v.pass;
  char tail[64];
  std::snprintf(tail, sizeof tail, "%d/%zu criteria passed in %.0f s", passed, g_results.size(),
                seconds_since(start));
  g_lines.push_back(tail);
  std::printf("%s\n", tail);
  std::ofstream out(work / "acceptance_report.txt");
  for (const auto& line : g_lines) out << line << '\n';
  return strict && passed != static_cast<int>(g_results.size()) ? 1 : 0;
}
