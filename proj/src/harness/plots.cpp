#include <fstream>
#include <map>
#include <stdexcept>

#include "cvo/harness/benchmark.hpp"
#include "cvo/harness/csv.hpp"
#include "cvo/harness/svg.hpp"

namespace cvo::harness {

namespace fs = std::filesystem;

namespace {

void save(const fs::path& file, const Chart& chart, std::vector<fs::path>& written) {
  std::ofstream f(file, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + file.string());
  f << render_svg(chart);
  written.push_back(file);
}

Series column_series(const CsvTable& t, const std::string& name, const std::string& label) {
  Series s;
  s.name = label;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    s.x.push_back(t.number(r, "k"));
    s.y.push_back(t.optional_number(r, name));
  }
  return s;
}

}  // namespace

std::vector<fs::path> render_plots(const fs::path& run_dir) {
  const CsvTable summary = read_csv(run_dir / "summary.csv");
  summary.require_columns({"strategy", "average", "final", "final_val", "holdout_final"}, "summary.csv");
  const fs::path plots = run_dir / "plots";
  fs::create_directories(plots);
  std::vector<fs::path> written;

  std::vector<std::string> labels;
  std::optional<double> joint_final;
  const std::size_t strategy_col = summary.column("strategy");
  for (std::size_t r = 0; r < summary.rows.size(); ++r) {
    const std::string& label = summary.rows[r][strategy_col];
    if (label == "joint") joint_final = summary.number(r, "final");
    else labels.push_back(label);
  }

  Chart avg;
  avg.title = "Average test loss over all experiences";
  avg.x_label = "experience k";
  avg.y_label = "mean test loss";
  avg.reference = joint_final;
  avg.reference_label = joint_final ? "joint" : "";

  for (const auto& label : labels) {
    const CsvTable m = read_csv(run_dir / label / "metrics.csv");
    m.require_columns({"k", "bwt", "fr", "fwt", "avg", "past", "current", "future", "holdout"},
                      label + "/metrics.csv");
    avg.series.push_back(column_series(m, "avg", label));

    Chart pcf;
    pcf.title = "Past, current and future loss (" + label + ")";
    pcf.x_label = "experience k";
    pcf.y_label = "test loss";
    pcf.series = {column_series(m, "past", "past"), column_series(m, "current", "current"),
                  column_series(m, "future", "future"), column_series(m, "holdout", "held-out")};
    save(plots / ("past_current_future_" + label + ".svg"), pcf, written);

    Chart tr;
    tr.title = "Backward and forward transfer (" + label + ")";
    tr.x_label = "experience k";
    tr.y_label = "loss difference";
    tr.series = {column_series(m, "bwt", "BWT"), column_series(m, "fwt", "FWT")};
    tr.reference = 0.0;
    save(plots / ("transfer_" + label + ".svg"), tr, written);

    Chart fr;
    fr.title = "Forgetting ratio (" + label + ")";
    fr.x_label = "experience k";
    fr.y_label = "FR";
    fr.series = {column_series(m, "fr", "FR")};
    save(plots / ("forgetting_" + label + ".svg"), fr, written);

    const CsvTable v = read_csv(run_dir / label / "variability.csv");
    v.require_columns({"k", "action", "component", "pred_mean", "pred_std", "gt_mean", "gt_std"},
                      label + "/variability.csv");
    const std::size_t action_col = v.column("action"), comp_col = v.column("component");
    for (const char* component : {"dz", "dx", "dtheta"}) {
      Chart vc;
      vc.title = std::string("Prediction variability, ") + component + " (" + label + ")";
      vc.x_label = "experience k";
      vc.y_label = std::string(component) + " (mean +/- 2 std)";
      std::map<std::string, std::pair<Series, Series>> by_action;
      for (std::size_t r = 0; r < v.rows.size(); ++r) {
        if (v.rows[r][comp_col] != component) continue;
        auto& [pred, gt] = by_action[v.rows[r][action_col]];
        const double k = v.number(r, "k");
        const double pm = v.number(r, "pred_mean"), ps = v.number(r, "pred_std");
        const double gm = v.number(r, "gt_mean"), gs = v.number(r, "gt_std");
        pred.x.push_back(k);
        pred.y.push_back(pm);
        pred.band_lo.push_back(pm - 2 * ps);
        pred.band_hi.push_back(pm + 2 * ps);
        gt.x.push_back(k);
        gt.y.push_back(gm);
        gt.band_lo.push_back(gm - 2 * gs);
        gt.band_hi.push_back(gm + 2 * gs);
      }
      for (auto& [action, pair] : by_action) {
        pair.first.name = action + " predicted";
        pair.second.name = action + " truth";
        vc.series.push_back(std::move(pair.first));
        vc.series.push_back(std::move(pair.second));
      }
      save(plots / ("variability_" + label + "_" + component + ".svg"), vc, written);
    }
  }
  save(plots / "average_loss.svg", avg, written);

  // Final loss against training time; replay capacities make the trade-off.
  if (fs::exists(run_dir / "timing.csv")) {
    const CsvTable t = read_csv(run_dir / "timing.csv");
    t.require_columns({"strategy", "k", "wall_seconds"}, "timing.csv");
    std::map<std::string, std::pair<double, int>> wall;
    const std::size_t sc = t.column("strategy");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      auto& [sum, n] = wall[t.rows[r][sc]];
      sum += t.number(r, "wall_seconds");
      ++n;
    }
    Chart bt;
    bt.title = "Final loss against training time per experience";
    bt.x_label = "mean wall seconds per experience";
    bt.y_label = "final average test loss";
    for (std::size_t r = 0; r < summary.rows.size(); ++r) {
      const std::string& label = summary.rows[r][strategy_col];
      if (label == "joint" || !wall.count(label)) continue;
      Series s;
      s.name = label;
      s.markers_only = true;
      s.x.push_back(wall[label].first / wall[label].second);
      s.y.push_back(summary.number(r, "final"));
      bt.series.push_back(std::move(s));
    }
    save(plots / "buffer_time.svg", bt, written);
  }
  return written;
}

}  // namespace cvo::harness
