// Command-line front end: dataset generation, benchmark runs, evaluation,
// plotting and gradient checks.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cvo/harness/benchmark.hpp"
#include "cvo/harness/csv.hpp"
#include "cvo/harness/seeding.hpp"
#include "cvo/metrics/metrics.hpp"
#include "cvo/nn/checkpoint.hpp"
#include "cvo/nn/gradcheck.hpp"
#include "cvo/strategies/strategies.hpp"

namespace fs = std::filesystem;
using namespace cvo;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "key = value run configuration file");
  cmd->add_option("--seed", opts.seed, "master seed override");
  cmd->add_option("--output", opts.output_dir, "output directory override");
}

harness::RunConfig resolve(const CommonOptions& opts) {
  harness::RunConfig c = opts.config_path.empty() ? harness::RunConfig{}
                                                  : harness::load_config(opts.config_path);
  if (opts.seed) c.master_seed = *opts.seed;
  harness::apply_env_overrides(c);
  if (!opts.output_dir.empty()) c.output_dir = opts.output_dir;
  c.validate();
  return c;
}

int cmd_gen_data(const harness::RunConfig& config, const std::string& csv_dir) {
  const auto data = harness::prepare_datasets(config);
  std::printf("%zu apartments ready in %s (%zu generated)\n", data.files.size(),
              config.resolved_cache_dir().string().c_str(), data.generated);
  std::size_t records = 0, forward = 0, collisions = 0;
  for (const auto& s : data.stats) {
    records += s.records;
    forward += s.forward;
    collisions += s.collisions;
  }
  std::printf("forward %.2f%%  collisions %.2f%%  over %zu records\n",
              100.0 * forward / records, 100.0 * collisions / records, records);
  if (!csv_dir.empty()) {
    fs::create_directories(csv_dir);
    for (std::size_t i = 0; i < data.files.size(); ++i) {
      const auto& ds = i < data.train.size() ? data.train[i] : data.holdout[i - data.train.size()];
      envsim::export_csv(fs::path(csv_dir) / (data.files[i].stem().string() + ".csv"), ds);
    }
    std::printf("csv written to %s\n", csv_dir.c_str());
  }
  return 0;
}

std::string sci(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4e", *v);
  return buf;
}

void print_summary(const fs::path& dir) {
  const auto summary = harness::read_csv(dir / "summary.csv");
  std::printf("%-14s %12s %12s %12s\n", "strategy", "average", "final", "held-out");
  const std::size_t sc = summary.column("strategy");
  for (std::size_t r = 0; r < summary.rows.size(); ++r) {
    const auto avg = summary.optional_number(r, "average");
    const auto hold = summary.optional_number(r, "holdout_final");
    std::printf("%-14s %12s %12s %12s\n", summary.rows[r][sc].c_str(), sci(avg).c_str(),
                sci(summary.number(r, "final")).c_str(), sci(hold).c_str());
  }
}

int cmd_run(const harness::RunConfig& config) {
  const auto result = harness::run_benchmark(config);
  print_summary(config.output_dir);
  for (const auto& [stage, secs] : result.manifest.stage_seconds)
    std::printf("  %-24s %8.1f s\n", stage.c_str(), secs);
  return 0;
}

int cmd_eval(const harness::RunConfig& config, const std::string& checkpoint) {
  if (!checkpoint.empty()) {
    const auto ckpt = nn::read_checkpoint(checkpoint);
    const auto data = harness::prepare_datasets(config);
    strategies::Model model{ckpt.spec, ckpt.params,
                            ckpt.spec.input_dim == strategies::input_dim(data.train.front().n_rays, true)};
    std::printf("%-6s %12s %10s %10s %10s\n", "exp", "loss", "L_z", "L_x", "L_theta");
    double sum = 0.0;
    for (std::size_t j = 0; j < data.train.size(); ++j) {
      const auto set = strategies::tensorize(data.train[j].test, model.action_conditioned);
      const double loss = metrics::eval_loss(model, set);
      const auto c = metrics::component_losses(model, set);
      sum += loss;
      std::printf("%-6zu %12.4e %10.4f %10.4f %10.4f\n", j + 1, loss, c.z, c.x, c.theta);
    }
    std::printf("mean   %12.4e\n", sum / static_cast<double>(data.train.size()));
    return 0;
  }
  const auto problems = harness::verify_manifest(config.output_dir);
  for (const auto& p : problems) std::fprintf(stderr, "%s\n", p.c_str());
  print_summary(config.output_dir);
  std::printf("manifest: %s\n", problems.empty() ? "all checksums verified" : "MISMATCH");
  return problems.empty() ? 0 : 1;
}

int cmd_plot(const harness::RunConfig& config) {
  const auto files = harness::render_plots(config.output_dir);
  std::printf("%zu plots written to %s\n", files.size(), (config.output_dir / "plots").string().c_str());
  return 0;
}

int cmd_grad_check(const harness::RunConfig& config, int trials) {
  Rng rng(harness::derive_seed(config.master_seed, harness::Stream::Scratch, 0));
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto c = nn::random_gradcheck_case(rng);
    const double err = nn::check_loss_gradient(c);
    worst = std::max(worst, err);
    std::printf("case %2d  input %d  hidden %zu layers  params %5zu  max rel err %.3e\n", t + 1,
                c.spec.input_dim, c.spec.hidden.size(), c.params.size(), err);
  }
  const bool ok = worst < 1e-4;
  std::printf("worst %.3e  %s\n", worst, ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continual visual-odometry laboratory"};
  app.require_subcommand(1);

  CommonOptions gen_opts, run_opts, eval_opts, plot_opts, grad_opts;
  std::string csv_dir, checkpoint;
  int trials = 10;

  auto* gen = app.add_subcommand("gen-data", "generate or refresh the dataset cache");
  add_common(gen, gen_opts);
  gen->add_option("--export-csv", csv_dir, "also write one CSV per apartment into this directory");
  auto* run = app.add_subcommand("run", "run the full benchmark");
  add_common(run, run_opts);
  auto* eval = app.add_subcommand("eval", "verify a finished run or evaluate a checkpoint");
  add_common(eval, eval_opts);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file to evaluate on the test splits");
  auto* plot = app.add_subcommand("plot", "re-render SVG plots from a run's CSVs");
  add_common(plot, plot_opts);
  auto* grad = app.add_subcommand("grad-check", "finite-difference check of the backward pass");
  add_common(grad, grad_opts);
  grad->add_option("--trials", trials, "number of random networks")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_gen_data(resolve(gen_opts), csv_dir);
    if (*run) return cmd_run(resolve(run_opts));
    if (*eval) return cmd_eval(resolve(eval_opts), checkpoint);
    if (*plot) return cmd_plot(resolve(plot_opts));
    if (*grad) return cmd_grad_check(resolve(grad_opts), trials);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
