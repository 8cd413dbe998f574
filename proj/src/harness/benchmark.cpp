#include "cvo/harness/benchmark.hpp"

#include <chrono>
#include <fstream>
#include <stdexcept>

#include "cvo/envsim/apartment.hpp"
#include "cvo/harness/csv.hpp"
#include "cvo/harness/seeding.hpp"
#include "cvo/nn/checkpoint.hpp"
#include "cvo/version.hpp"

namespace cvo::harness {

namespace fs = std::filesystem;
using strategies::TensorSet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ApartmentStats stats_of(const envsim::ApartmentSpec& apt, const envsim::ExperienceDataset& ds,
                        bool holdout) {
  ApartmentStats s;
  s.apartment_id = ds.apartment_id;
  s.holdout = holdout;
  s.gain = apt.sensor.gain;
  s.bias = apt.sensor.bias;
  s.depth_noise_std = apt.sensor.depth_noise_std;
  s.motion_scale = apt.motion_scale;
  for (const auto* split : {&ds.train, &ds.val, &ds.test}) {
    for (const auto& r : *split) {
      ++s.records;
      s.forward += r.action == envsim::Action::Forward;
      s.left += r.action == envsim::Action::Left;
      s.right += r.action == envsim::Action::Right;
      s.collisions += r.collided;
    }
  }
  return s;
}

}  // namespace

fs::path dataset_path(const RunConfig& config, int apartment_index) {
  char name[96];
  std::snprintf(name, sizeof name, "s%llu_n%d_a%03d.cvod",
                static_cast<unsigned long long>(config.master_seed), config.samples_per_apartment,
                apartment_index);
  return config.resolved_cache_dir() / name;
}

BenchmarkData prepare_datasets(const RunConfig& config) {
  config.validate();
  fs::create_directories(config.resolved_cache_dir());
  BenchmarkData data;
  const int total = config.n_train_apartments + config.n_holdout_apartments;
  for (int a = 0; a < total; ++a) {
    const bool holdout = a >= config.n_train_apartments;
    // The apartment itself is cheap to regenerate; its sensor parameters feed
    // the statistics table even on a cache hit.
    const auto apt = envsim::generate_apartment(derive_seed(config.master_seed, Stream::Apartment, a),
                                                {}, static_cast<std::uint32_t>(a));
    const fs::path path = dataset_path(config, a);
    envsim::ExperienceDataset ds;
    bool loaded = false;
    if (fs::exists(path)) {
      try {
        ds = envsim::read_dataset(path);
        loaded = ds.apartment_id == static_cast<std::uint32_t>(a) &&
                 ds.size() == static_cast<std::size_t>(config.samples_per_apartment);
      } catch (const std::exception&) {
        loaded = false;
      }
    }
    if (!loaded) {
      Rng rng(derive_seed(config.master_seed, Stream::Traj, a));
      ds = envsim::build_experience(apt, static_cast<std::size_t>(config.samples_per_apartment), rng);
      envsim::quantize_to_storage(ds);
      const fs::path tmp = path.string() + ".tmp";
      envsim::write_dataset(tmp, ds);
      fs::rename(tmp, path);
      ++data.generated;
    }
    data.stats.push_back(stats_of(apt, ds, holdout));
    data.files.push_back(path);
    (holdout ? data.holdout : data.train).push_back(std::move(ds));
  }
  return data;
}

bool is_timing_artifact(const fs::path& relative) {
  const std::string name = relative.filename().string();
  return name == "timing.csv" || name == "buffer_time.svg" || name == kManifestName ||
         name == kPartialManifestName;
}

namespace {

struct EvalSets {
  std::vector<TensorSet> test;
  std::vector<TensorSet> val;
  TensorSet pooled_test;
  TensorSet holdout;  // every record of every held-out apartment
  bool has_holdout = false;
};

TensorSet concat(const std::vector<const std::vector<envsim::StepRecord>*>& parts, bool action) {
  std::vector<envsim::StepRecord> all;
  for (const auto* p : parts) all.insert(all.end(), p->begin(), p->end());
  return strategies::tensorize(all, action);
}

EvalSets make_eval_sets(const BenchmarkData& data, bool action) {
  EvalSets e;
  std::vector<const std::vector<envsim::StepRecord>*> tests, hold;
  for (const auto& ds : data.train) {
    e.test.push_back(strategies::tensorize(ds.test, action));
    e.val.push_back(strategies::tensorize(ds.val, action));
    tests.push_back(&ds.test);
  }
  e.pooled_test = concat(tests, action);
  for (const auto& ds : data.holdout)
    for (const auto* s : {&ds.train, &ds.val, &ds.test}) hold.push_back(s);
  e.has_holdout = !hold.empty();
  if (e.has_holdout) e.holdout = concat(hold, action);
  return e;
}

void evaluate_row(const strategies::Model& model, const EvalSets& sets, std::size_t k,
                  StrategyResult& out) {
  std::vector<double> row;
  std::vector<metrics::ComponentLosses> comps;
  for (const auto& t : sets.test) {
    const nn::Matrix pred = strategies::predict(model, t.inputs);
    row.push_back(nn::mse_loss(pred, t.targets));
    comps.push_back(metrics::component_losses(pred, t.targets));
  }
  out.loss.set_row(k, row);
  out.components.push_back(std::move(comps));
  out.variability.push_back(metrics::prediction_variability(model, sets.pooled_test));
  out.holdout.push_back(sets.has_holdout ? std::optional<double>(metrics::eval_loss(model, sets.holdout))
                                         : std::nullopt);
}

StrategyResult run_strategy(const RunConfig& config, const std::string& label,
                            const BenchmarkData& data, const EvalSets& sets,
                            const std::vector<std::optional<double>>& scratch) {
  StrategyResult out;
  out.label = label;
  out.config = config.strategy(label);
  const std::size_t K = data.train.size();
  out.loss = metrics::LossMatrix(K);

  Rng init(derive_seed(config.master_seed, Stream::Init, 0));
  strategies::Model model =
      strategies::make_model(config.preset, data.train.front().n_rays, config.action_conditioned, init);
  strategies::StrategyState state;
  for (std::size_t k = 0; k < K; ++k) {
    Rng epoch_rng(derive_seed(config.master_seed, Stream::Epoch, k));
    out.reports.push_back(strategies::train_experience(model, data.train[k], out.config, state, epoch_rng));
    Rng fisher_rng(derive_seed(config.master_seed, Stream::Fisher, k));
    Rng buffer_rng(derive_seed(config.master_seed, Stream::Buffer, k));
    strategies::finish_experience(model, data.train[k], out.config, state, fisher_rng, buffer_rng);
    evaluate_row(model, sets, k, out);
  }

  out.summary = metrics::summarize(out.loss);
  const bool have_scratch = !scratch.empty();
  for (std::size_t k = 1; k <= K; ++k) {
    if (k < 2) {
      out.bwt.emplace_back();
      out.fr.emplace_back();
      out.fwt.emplace_back();
      continue;
    }
    out.bwt.emplace_back(metrics::bwt(out.loss, k));
    out.fr.emplace_back(metrics::forgetting_ratio(out.loss, k));
    out.fwt.push_back(have_scratch ? std::optional<double>(metrics::fwt(out.loss, scratch, k))
                                   : std::nullopt);
  }
  double val_sum = 0.0;
  for (const auto& v : sets.val) val_sum += metrics::eval_loss(model, v);
  out.final_val_loss = val_sum / static_cast<double>(sets.val.size());

  if (config.save_checkpoints) {
    nn::Checkpoint ckpt{model.spec, model.params, config.master_seed,
                        "init=derive_seed(master,init,0); epochs=derive_seed(master,epoch,k)",
                        static_cast<std::uint64_t>(K)};
    fs::create_directories(config.output_dir / label);
    nn::write_checkpoint(config.output_dir / label / "final.ckpt", ckpt);
  }
  return out;
}

// ---- CSV writers ----------------------------------------------------------

const char* kComponentNames[3] = {"dz", "dx", "dtheta"};

void write_strategy_csvs(const fs::path& dir, const StrategyResult& r) {
  fs::create_directories(dir);
  const std::size_t K = r.loss.size();

  CsvTable lm;
  lm.header.push_back("k");
  for (std::size_t j = 1; j <= K; ++j) lm.header.push_back("j" + std::to_string(j));
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<std::string> row{std::to_string(k + 1)};
    for (std::size_t j = 0; j < K; ++j) row.push_back(fmt(r.loss.at(k, j)));
    lm.rows.push_back(std::move(row));
  }
  write_csv(dir / "loss_matrix.csv", lm);

  CsvTable mt;
  mt.header = {"k", "bwt", "fr", "fwt", "avg", "past", "current", "future", "holdout"};
  for (std::size_t k = 0; k < K; ++k) {
    mt.rows.push_back({std::to_string(k + 1), fmt(r.bwt[k]), fmt(r.fr[k]), fmt(r.fwt[k]),
                       fmt(r.summary.checkpoint_mean[k]), fmt(r.summary.past[k]),
                       fmt(r.summary.current[k]), fmt(r.summary.future[k]), fmt(r.holdout[k])});
  }
  write_csv(dir / "metrics.csv", mt);

  CsvTable bl;
  bl.header = {"k", "block", "first_j", "last_j", "mean"};
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t b = 0; b < r.summary.block_means[k].size(); ++b) {
      const std::size_t lo = b * metrics::kBlockWidth + 1;
      const std::size_t hi = std::min(K, lo + metrics::kBlockWidth - 1);
      bl.rows.push_back({std::to_string(k + 1), std::to_string(b + 1), std::to_string(lo),
                         std::to_string(hi), fmt(r.summary.block_means[k][b])});
    }
  }
  write_csv(dir / "blocks.csv", bl);

  CsvTable cp;
  cp.header = {"k", "j", "l_z", "l_x", "l_theta"};
  for (std::size_t k = 0; k < K; ++k) {
    metrics::ComponentLosses past{}, future{};
    for (std::size_t j = 0; j < K; ++j) {
      const auto& c = r.components[k][j];
      cp.rows.push_back({std::to_string(k + 1), std::to_string(j + 1), fmt(c.z), fmt(c.x), fmt(c.theta)});
      auto& acc = j < k ? past : future;
      if (j != k) acc.z += c.z, acc.x += c.x, acc.theta += c.theta;
    }
    const auto& cur = r.components[k][k];
    if (k > 0) {
      const double n = static_cast<double>(k);
      cp.rows.push_back({std::to_string(k + 1), "past", fmt(past.z / n), fmt(past.x / n), fmt(past.theta / n)});
    }
    cp.rows.push_back({std::to_string(k + 1), "current", fmt(cur.z), fmt(cur.x), fmt(cur.theta)});
    if (k + 1 < K) {
      const double n = static_cast<double>(K - k - 1);
      cp.rows.push_back({std::to_string(k + 1), "future", fmt(future.z / n), fmt(future.x / n),
                         fmt(future.theta / n)});
    }
  }
  write_csv(dir / "components.csv", cp);

  CsvTable vr;
  vr.header = {"k", "action", "component", "pred_mean", "pred_std", "gt_mean", "gt_std"};
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t a = 0; a < 3; ++a) {
      const auto& p = r.variability[k].predicted[a];
      const auto& g = r.variability[k].ground_truth[a];
      if (!p) continue;
      for (int c = 0; c < 3; ++c) {
        vr.rows.push_back({std::to_string(k + 1), envsim::action_name(static_cast<envsim::Action>(a)),
                           kComponentNames[c], fmt((*p)[c].mean), fmt((*p)[c].stddev),
                           fmt((*g)[c].mean), fmt((*g)[c].stddev)});
      }
    }
  }
  write_csv(dir / "variability.csv", vr);

  CsvTable tl;
  tl.header = {"k", "epoch", "train_loss", "val_loss", "best_epoch", "stream_size"};
  for (std::size_t k = 0; k < r.reports.size(); ++k) {
    const auto& rep = r.reports[k];
    for (int e = 0; e < rep.epochs_run; ++e)
      tl.rows.push_back({std::to_string(k + 1), std::to_string(e + 1), fmt(rep.train_loss[e]),
                         fmt(rep.val_loss[e]), std::to_string(rep.best_epoch),
                         std::to_string(rep.stream_size)});
  }
  write_csv(dir / "train_log.csv", tl);
}

void write_dataset_stats(const fs::path& file, const std::vector<ApartmentStats>& stats) {
  CsvTable t;
  t.header = {"apartment", "role", "gain", "bias", "depth_noise_std", "motion_scale", "records",
              "forward_frac", "left_frac", "right_frac", "collision_frac"};
  for (const auto& s : stats) {
    const double n = static_cast<double>(s.records);
    t.rows.push_back({std::to_string(s.apartment_id), s.holdout ? "holdout" : "train", fmt(s.gain),
                      fmt(s.bias), fmt(s.depth_noise_std), fmt(s.motion_scale),
                      std::to_string(s.records), fmt(s.forward / n), fmt(s.left / n),
                      fmt(s.right / n), fmt(s.collisions / n)});
  }
  write_csv(file, t);
}

}  // namespace

BenchmarkResult run_benchmark(const RunConfig& config) {
  config.validate();
  BenchmarkResult result;
  result.config = config;
  RunManifest& manifest = result.manifest;
  manifest.tool_version = kToolVersion;
  manifest.config_text = config.canonical_text();
  manifest.config_hash = sha256_hex(manifest.config_text);
  fs::create_directories(config.output_dir);
  const fs::path out = config.output_dir;
  std::vector<fs::path> external;

  try {
    auto t0 = Clock::now();
    const BenchmarkData data = prepare_datasets(config);
    manifest.stage_seconds.emplace_back("datasets", seconds_since(t0));
    for (const auto& f : data.files) external.push_back(f);
    result.dataset_stats = data.stats;
    write_dataset_stats(out / "dataset_stats.csv", data.stats);

    const std::uint64_t m = config.master_seed;
    const std::size_t K = data.train.size();
    for (int a = 0; a < config.n_train_apartments + config.n_holdout_apartments; ++a) {
      manifest.seeds.emplace_back("apartment." + std::to_string(a), derive_seed(m, Stream::Apartment, a));
      manifest.seeds.emplace_back("traj." + std::to_string(a), derive_seed(m, Stream::Traj, a));
    }
    manifest.seeds.emplace_back("init.continual", derive_seed(m, Stream::Init, 0));
    manifest.seeds.emplace_back("init.joint", derive_seed(m, Stream::Init, 1));
    for (std::size_t k = 0; k < K; ++k) {
      manifest.seeds.emplace_back("epoch." + std::to_string(k), derive_seed(m, Stream::Epoch, k));
      manifest.seeds.emplace_back("fisher." + std::to_string(k), derive_seed(m, Stream::Fisher, k));
      manifest.seeds.emplace_back("buffer." + std::to_string(k), derive_seed(m, Stream::Buffer, k));
      manifest.seeds.emplace_back("scratch." + std::to_string(k), derive_seed(m, Stream::Scratch, k));
    }
    manifest.seeds.emplace_back("epoch.joint", derive_seed(m, Stream::Epoch, K));

    const EvalSets sets = make_eval_sets(data, config.action_conditioned);
    const strategies::StrategyConfig base = config.strategy("naive");

    // Scratch baselines come first so every strategy's FWT can be filled in.
    if (config.scratch) {
      t0 = Clock::now();
      result.scratch.assign(K, std::nullopt);
      CsvTable sc;
      sc.header = {"j", "test_loss", "epochs_run", "best_epoch"};
      for (std::size_t j = 0; j < K; ++j) {
        const auto s = strategies::scratch_baseline(data.train[j], base, config.preset,
                                                    derive_seed(m, Stream::Scratch, j));
        result.scratch[j] = s.test_loss;
        result.scratch_reports.push_back(s.report);
        sc.rows.push_back({std::to_string(j + 1), fmt(s.test_loss), std::to_string(s.report.epochs_run),
                           std::to_string(s.report.best_epoch)});
      }
      write_csv(out / "scratch.csv", sc);
      manifest.stage_seconds.emplace_back("scratch", seconds_since(t0));
    }

    CsvTable timing;
    timing.header = {"strategy", "k", "wall_seconds", "epochs_run", "stream_size"};
    for (const auto& label : config.strategies) {
      t0 = Clock::now();
      StrategyResult r = run_strategy(config, label, data, sets, result.scratch);
      write_strategy_csvs(out / label, r);
      for (std::size_t k = 0; k < r.reports.size(); ++k)
        timing.rows.push_back({label, std::to_string(k + 1), fmt(r.reports[k].wall_seconds),
                               std::to_string(r.reports[k].epochs_run),
                               std::to_string(r.reports[k].stream_size)});
      manifest.stage_seconds.emplace_back("strategy." + label, seconds_since(t0));
      result.strategies.push_back(std::move(r));
    }

    if (config.joint) {
      t0 = Clock::now();
      Rng init(derive_seed(m, Stream::Init, 1));
      strategies::Model model = strategies::make_model(config.preset, data.train.front().n_rays,
                                                       config.action_conditioned, init);
      Rng epoch_rng(derive_seed(m, Stream::Epoch, K));
      JointResult j;
      j.report = strategies::joint_train(model, data.train, base, epoch_rng);
      CsvTable jt;
      jt.header = {"j", "test_loss"};
      double sum = 0.0;
      for (std::size_t e = 0; e < K; ++e) {
        j.test_loss.push_back(metrics::eval_loss(model, sets.test[e]));
        sum += j.test_loss.back();
        jt.rows.push_back({std::to_string(e + 1), fmt(j.test_loss.back())});
      }
      j.final_value = sum / static_cast<double>(K);
      if (sets.has_holdout) j.holdout = metrics::eval_loss(model, sets.holdout);
      write_csv(out / "joint.csv", jt);
      CsvTable jl;
      jl.header = {"epoch", "train_loss", "val_loss", "best_epoch", "stream_size"};
      for (int e = 0; e < j.report.epochs_run; ++e)
        jl.rows.push_back({std::to_string(e + 1), fmt(j.report.train_loss[e]), fmt(j.report.val_loss[e]),
                           std::to_string(j.report.best_epoch), std::to_string(j.report.stream_size)});
      write_csv(out / "joint_train_log.csv", jl);
      if (config.save_checkpoints) {
        fs::create_directories(out / "joint");
        nn::write_checkpoint(out / "joint" / "final.ckpt",
                             {model.spec, model.params, m, "init=derive_seed(master,init,1)",
                              static_cast<std::uint64_t>(j.report.epochs_run)});
      }
      timing.rows.push_back({"joint", "", fmt(j.report.wall_seconds), std::to_string(j.report.epochs_run),
                             std::to_string(j.report.stream_size)});
      result.joint = std::move(j);
      manifest.stage_seconds.emplace_back("joint", seconds_since(t0));
    }
    for (std::size_t j = 0; j < result.scratch_reports.size(); ++j) {
      const auto& rep = result.scratch_reports[j];
      timing.rows.push_back({"scratch", std::to_string(j + 1), fmt(rep.wall_seconds),
                             std::to_string(rep.epochs_run), std::to_string(rep.stream_size)});
    }

    CsvTable summary;
    summary.header = {"strategy", "average", "final", "final_val", "holdout_final"};
    for (const auto& r : result.strategies)
      summary.rows.push_back({r.label, fmt(r.summary.average), fmt(r.summary.final_value),
                              fmt(r.final_val_loss), fmt(r.holdout.back())});
    if (result.joint)
      summary.rows.push_back({"joint", "", fmt(result.joint->final_value), "", fmt(result.joint->holdout)});
    write_csv(out / "summary.csv", summary);
    write_csv(out / "timing.csv", timing);

    t0 = Clock::now();
    render_plots(out);
    manifest.stage_seconds.emplace_back("plots", seconds_since(t0));

    manifest.files = inventory(out);
    for (const auto& f : external) {
      const fs::path rel = fs::relative(f, out);
      if (rel.empty() || *rel.begin() == "..") manifest.files.push_back(describe_file(out, f));
    }
    write_manifest(out, manifest);
  } catch (const std::exception& e) {
    manifest.status = "partial";
    manifest.error = e.what();
    try {
      manifest.files = inventory(out);
      write_manifest(out, manifest);
    } catch (...) {
    }
    throw;
  }
  return result;
}

}  // namespace cvo::harness
