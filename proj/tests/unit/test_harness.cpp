#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

#include "cvo/core/contract.hpp"
#include "cvo/harness/benchmark.hpp"
#include "cvo/harness/csv.hpp"
#include "cvo/harness/manifest.hpp"
#include "cvo/harness/seeding.hpp"
#include "cvo/harness/svg.hpp"

using namespace cvo;
using namespace cvo::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

RunConfig tiny(const fs::path& out) {
  RunConfig c;
  c.master_seed = 5;
  c.n_train_apartments = 2;
  c.n_holdout_apartments = 1;
  c.samples_per_apartment = 150;
  c.strategies = {"naive", "ewc_10", "lwf_1", "replay_40"};
  c.max_epochs = 2;
  c.fisher_samples = 32;
  c.output_dir = out;
  return c;
}

// Relative path -> bytes for every deterministic artifact of a run.
std::map<std::string, std::string> artifacts(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), root);
    if (is_timing_artifact(rel) || rel.begin()->string() == "data") continue;
    out[rel.generic_string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("derive_seed is deterministic and separates streams") {
  CHECK(derive_seed(7, "apartment", 3) == derive_seed(7, "apartment", 3));
  CHECK(derive_seed(7, Stream::Fisher, 2) == derive_seed(7, "fisher", 2));
  CHECK_THROWS_AS(derive_seed(7, "dropout", 0), ContractViolation);

  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t m = rng.next_u64();
    CHECK_MESSAGE(derive_seed(m, "apartment", 0) != derive_seed(m, "apartment", 1), m);
  }

  // All (label, index) pairs for one master are distinct.
  std::set<std::uint64_t> seen;
  const char* labels[] = {"apartment", "traj", "init", "epoch", "scratch", "fisher", "buffer"};
  for (const char* l : labels)
    for (std::uint64_t i = 0; i < 64; ++i) seen.insert(derive_seed(3, l, i));
  CHECK(seen.size() == 7u * 64u);
}

TEST_CASE("small masters do not alias each other's streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 16; ++m)
    for (std::uint64_t i = 0; i < 64; ++i) seen.insert(derive_seed(m, Stream::Apartment, i));
  CHECK(seen.size() == 16u * 64u);
}

TEST_CASE("changing the master changes every derived seed") {
  const char* labels[] = {"apartment", "traj", "init", "epoch", "scratch", "fisher", "buffer"};
  for (std::uint64_t m = 0; m < 100; ++m)
    for (const char* l : labels)
      for (std::uint64_t i = 0; i < 8; ++i) {
        const std::uint64_t a = derive_seed(m, l, i), b = derive_seed(m + 1, l, i);
        CHECK(a != b);
        // Avalanche: roughly half the bits flip.
        const int flips = __builtin_popcountll(a ^ b);
        CHECK(flips > 10);
        CHECK(flips < 54);
      }
}

TEST_CASE("config parsing") {
  const auto c = parse_config(R"(# comment
[run]
seed = 9
n_train_apartments = 3
strategies = [naive, "ewc_10", replay_100]
action_conditioned = true
preset = large
output_dir = "out/x"   # trailing comment
learning_rate = 1e-3
)");
  CHECK(c.master_seed == 9u);
  CHECK(c.n_train_apartments == 3);
  CHECK(c.strategies == std::vector<std::string>{"naive", "ewc_10", "replay_100"});
  CHECK(c.action_conditioned);
  CHECK(c.preset == nn::Preset::Large);
  CHECK(c.output_dir == fs::path("out/x"));
  CHECK(c.learning_rate == 1e-3);
  CHECK(c.resolved_cache_dir() == fs::path("out/x") / "data");
  CHECK(c.strategy("ewc_10").lambda == 10.0);
  CHECK(c.strategy("ewc_10").action_conditioned);

  CHECK_THROWS(parse_config("colour = blue\n"));
  CHECK_THROWS(parse_config("n_train_apartments = 0\n").validate());
  CHECK_THROWS(parse_config("scratch = maybe\n"));
  CHECK_THROWS(parse_config("strategies = [naive\n"));
  RunConfig bad;
  bad.strategies.clear();
  CHECK_THROWS(bad.validate());
  CHECK(RunConfig{}.canonical_text() == RunConfig{}.canonical_text());
  CHECK(parse_config("seed = 2\n").canonical_text() != RunConfig{}.canonical_text());
}

TEST_CASE("environment variable overrides the output directory") {
  RunConfig c;
  ::setenv(kOutputDirEnv, "/tmp/cvo_env_override", 1);
  apply_env_overrides(c);
  CHECK(c.output_dir == fs::path("/tmp/cvo_env_override"));
  ::unsetenv(kOutputDirEnv);
  RunConfig d;
  apply_env_overrides(d);
  CHECK(d.output_dir == fs::path("runs/default"));
}

TEST_CASE("csv formatting and schema errors") {
  CHECK(fmt(0.1) == "0.1");
  CHECK(fmt(std::optional<double>{}) == "");
  const auto dir = testutil::temp_dir("harness_csv");
  CsvTable t{{"a", "b"}, {{"1", "x"}, {"2.5", ""}}};
  write_csv(dir / "t.csv", t);
  const auto back = read_csv(dir / "t.csv");
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(back.number(1, "a") == 2.5);
  CHECK_FALSE(back.optional_number(1, "b").has_value());
  try {
    back.number(0, "b");
    FAIL("expected a schema error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }
  try {
    back.require_columns({"a", "zeta"}, "t.csv");
    FAIL("expected a schema error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("zeta") != std::string::npos);
  }
}

TEST_CASE("svg rendering") {
  Chart c;
  c.title = "t";
  c.x_label = "k";
  c.y_label = "loss";
  c.series.push_back({"one", {1.0}, {0.5}, {}, {}, false});
  const std::string svg = render_svg(c);
  CHECK(svg.find("<circle") != std::string::npos);
  CHECK(svg.find("<polyline") == std::string::npos);
  CHECK(svg.find("<path") == std::string::npos);
  CHECK(svg.rfind("<?xml", 0) == 0);

  Chart d = c;
  d.series[0] = {"band", {1, 2, 3}, {0.1, 0.2, std::nullopt}, {0.0, 0.1, 0.2}, {0.2, 0.3, 0.4}, false};
  d.reference = 0.15;
  d.reference_label = "joint";
  CHECK(render_svg(d) == render_svg(d));
  CHECK(render_svg(d).find("<polygon") != std::string::npos);
}

TEST_CASE("manifest verification") {
  const auto dir = testutil::temp_dir("harness_manifest");
  fs::create_directories(dir / "sub");
  std::ofstream(dir / "a.txt") << "alpha";
  std::ofstream(dir / "sub" / "b.txt") << "beta";
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  RunManifest m;
  m.config_hash = sha256_hex("cfg");
  m.files = inventory(dir);
  REQUIRE(m.files.size() == 2u);
  write_manifest(dir, m);
  CHECK(verify_manifest(dir).empty());
  const auto back = read_manifest(dir / kManifestName);
  CHECK(back.files.size() == 2u);
  CHECK(back.config_hash == m.config_hash);

  std::ofstream(dir / "sub" / "b.txt") << "BETA";
  CHECK(verify_manifest(dir).size() == 1u);
  fs::remove(dir / "a.txt");
  CHECK(verify_manifest(dir).size() == 2u);

  RunManifest partial;
  partial.status = "partial";
  partial.error = "boom";
  write_manifest(dir, partial);
  CHECK(fs::exists(dir / kPartialManifestName));
}

TEST_CASE("single-apartment run yields a 1x1 matrix and no transfer values") {
  const auto dir = testutil::temp_dir("harness_one");
  RunConfig c = tiny(dir);
  c.n_train_apartments = 1;
  c.n_holdout_apartments = 0;
  c.strategies = {"naive"};
  c.joint = false;
  const auto r = run_benchmark(c);
  REQUIRE(r.strategies.size() == 1u);
  CHECK(r.strategies[0].loss.size() == 1u);
  const auto m = read_csv(dir / "naive" / "metrics.csv");
  REQUIRE(m.rows.size() == 1u);
  CHECK_FALSE(m.optional_number(0, "bwt").has_value());
  CHECK_FALSE(m.optional_number(0, "fr").has_value());
  CHECK_FALSE(m.optional_number(0, "fwt").has_value());
  const auto lm = read_csv(dir / "naive" / "loss_matrix.csv");
  CHECK(lm.rows.size() == 1u);
}

TEST_CASE("tiny benchmark is deterministic, cache-safe and fully inventoried") {
  const auto root = testutil::temp_dir("harness_det");
  RunConfig a = tiny(root / "a");
  a.cache_dir = root / "cache";
  RunConfig b = a;
  b.output_dir = root / "b";  // same cache, now populated
  RunConfig fresh = tiny(root / "c");  // its own cache

  const auto ra = run_benchmark(a);
  const auto files_a = artifacts(root / "a");
  CHECK(ra.strategies.size() == 4u);
  CHECK(ra.joint.has_value());
  run_benchmark(b);
  run_benchmark(fresh);
  CHECK(files_a.size() > 20u);
  CHECK(files_a == artifacts(root / "b"));
  CHECK(files_a == artifacts(root / "c"));

  // Every written file is listed with a matching checksum.
  CHECK(verify_manifest(root / "a").empty());
  const auto manifest = read_manifest(root / "a" / kManifestName);
  CHECK(manifest.status == "complete");
  std::set<std::string> listed;
  for (const auto& f : manifest.files) listed.insert(f.path);
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "a").generic_string();
    if (rel == kManifestName) continue;
    CHECK_MESSAGE(listed.count(rel) == 1u, rel);
  }

  // Plots re-render identically from the CSVs.
  const auto before = slurp(root / "a" / "plots" / "average_loss.svg");
  render_plots(root / "a");
  CHECK(slurp(root / "a" / "plots" / "average_loss.svg") == before);

  // A malformed CSV is reported with the offending column.
  {
    std::ofstream f(root / "a" / "summary.csv");
    f << "strategy,average,final\nnaive,1,1\n";
  }
  try {
    render_plots(root / "a");
    FAIL("expected a schema error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("final_val") != std::string::npos);
  }
}

TEST_CASE("invalid configs abort before writing") {
  const auto dir = testutil::temp_dir("harness_bad");
  RunConfig c = tiny(dir);
  c.strategies = {"nonsense"};
  CHECK_THROWS(run_benchmark(c));
}
