#include "experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "parallel.hpp"
#include "simulations.hpp"
#include "trainer.hpp"

namespace loca {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr const char* kSchemaVersion = "1";
constexpr double kMpCritical = 0.005;

struct Context {
  std::uint64_t seed = 0;
  int workers = 1;
  fs::path out;
  Clock::time_point started = Clock::now();

  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - started).count();
  }
};

Json config_echo(const KvConfig& config) {
  Json echo = Json::object();
  for (const auto& [key, value] : config.entries()) echo[key] = value;
  return echo;
}

void write_summary(const Context& ctx, const std::string& name, Json body,
                   const KvConfig& config) {
  body["provenance"] = {{"version", version_string()},
                        {"seed", ctx.seed},
                        {"workers", ctx.workers},
                        {"wall_time_seconds", ctx.elapsed()},
                        {"config", config_echo(config)}};
  write_text_file_atomic(ctx.out / (name + ".json"), body.dump(2) + "\n");
}

std::vector<double> default_rho_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 30; ++i) grid.push_back(static_cast<double>(i) / 100.0);
  return grid;
}

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix w(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) w(i, j) = rng.gaussian();
  return w;
}

// ---------------------------------------------------------------- theorem1

RunOutcome run_theorem1(const Context& ctx, const KvConfig& config) {
  const auto k_list = config.get_int_list("K", {100, 150, 200});
  const auto r_list = config.get_int_list("r", {8, 16});
  const Index trials = config.get_int("trials", 200);
  require(trials >= 1, Errc::invalid_argument, "theorem1: trials must be >= 1");
  for (Index k : k_list)
    for (Index r : r_list)
      require(3 * r < k, Errc::invalid_argument,
              "theorem1: requires r < K/3 (got r=" + std::to_string(r) +
                  ", K=" + std::to_string(k) + ")");

  CsvWriter csv(ctx.out / "theorem1.csv",
                {"schema_version", "K", "r", "method", "mean_ratio", "stderr", "trials", "seed"});
  Json cells = Json::array();
  bool all_ok = true;
  bool any_indeterminate = false;
  for (Index k : k_list) {
    for (Index r : r_list) {
      OrderingResult cell = theorem1_cell(k, r, trials, ctx.seed, ctx.workers);
      auto emit = [&](const MethodStats& m) {
        csv.row({kSchemaVersion, fmt_int(k), fmt_int(r), m.method, fmt_double(m.ratio.mean),
                 fmt_double(m.ratio.se), fmt_int(trials), fmt_int(static_cast<std::int64_t>(ctx.seed))});
      };
      emit(cell.random_fourier);
      emit(cell.lowrank);
      emit(cell.top_amplitude);
      emit(cell.top_coeff);
      if (k % 2 == 0) {
        csv.row({kSchemaVersion, fmt_int(k), fmt_int(r), "m1_bracket", fmt_double(cell.m1_ratio),
                 fmt_double(cell.m1_se), fmt_int(trials), fmt_int(static_cast<std::int64_t>(ctx.seed))});
        csv.row({kSchemaVersion, fmt_int(k), fmt_int(r), "m2_bracket", fmt_double(cell.m2_ratio),
                 fmt_double(cell.m2_se), fmt_int(trials), fmt_int(static_cast<std::int64_t>(ctx.seed))});
      }
      Json jc;
      jc["K"] = k;
      jc["r"] = r;
      jc["mean_ratio"] = {{"fourier_random", cell.random_fourier.ratio.mean},
                          {"lowrank", cell.lowrank.ratio.mean},
                          {"fourier_top_amplitude", cell.top_amplitude.ratio.mean},
                          {"fourier_top_coeff", cell.top_coeff.ratio.mean}};
      jc["ordering_ok"] = cell.ordering_ok;
      jc["indeterminate"] = cell.indeterminate;
      cells.push_back(jc);
      all_ok = all_ok && cell.ordering_ok;
      any_indeterminate = any_indeterminate || cell.indeterminate;
    }
  }
  csv.finish();
  Json body;
  body["experiment"] = "theorem1";
  body["schema_version"] = kSchemaVersion;
  body["cells"] = cells;
  body["all_ok"] = all_ok;
  body["indeterminate"] = any_indeterminate;
  write_summary(ctx, "theorem1", body, config);
  if (any_indeterminate)
    return {RunStatus::acceptance_failure, "theorem1: ordering verdict indeterminate (need trials >= 2)"};
  if (!all_ok) return {RunStatus::acceptance_failure, "theorem1: ordering verdict failed"};
  return {RunStatus::ok, "theorem1: ordering verified on all cells"};
}

// ---------------------------------------------------------------- theorem2

RunOutcome run_theorem2(const Context& ctx, const KvConfig& config) {
  const Index k = config.get_int("K", 64);
  const Index budget = config.get_int("budget", 256);
  const Index trials = config.get_int("trials", 500);
  const double tolerance = config.get_real("tolerance", 0.015);
  Theorem2Result result = theorem2_check(k, budget, trials, ctx.seed, ctx.workers);

  CsvWriter csv(ctx.out / "theorem2.csv",
                {"schema_version", "K", "budget", "method", "mean_error", "stderr", "trials", "seed"});
  csv.row({kSchemaVersion, fmt_int(k), fmt_int(budget), "fourier_top_coeff",
           fmt_double(result.fourier_top_coeff.mean), fmt_double(result.fourier_top_coeff.se),
           fmt_int(trials), fmt_int(static_cast<std::int64_t>(ctx.seed))});
  csv.row({kSchemaVersion, fmt_int(k), fmt_int(budget), "dct_top", fmt_double(result.dct_top.mean),
           fmt_double(result.dct_top.se), fmt_int(trials), fmt_int(static_cast<std::int64_t>(ctx.seed))});
  csv.finish();

  const bool ok = result.relative_gap < tolerance;
  Json body;
  body["experiment"] = "theorem2";
  body["schema_version"] = kSchemaVersion;
  body["K"] = k;
  body["budget"] = budget;
  body["mean_error_fourier_top_coeff"] = result.fourier_top_coeff.mean;
  body["mean_error_dct_top"] = result.dct_top.mean;
  body["relative_gap"] = result.relative_gap;
  body["tolerance"] = tolerance;
  body["pass"] = ok;
  write_summary(ctx, "theorem2", body, config);
  if (!ok)
    return {RunStatus::acceptance_failure,
            "theorem2: relative gap " + fmt_double(result.relative_gap) + " above tolerance"};
  return {RunStatus::ok, "theorem2: relative gap " + fmt_double(result.relative_gap)};
}

// ------------------------------------------------------------------ noniid

RunOutcome run_noniid(const Context& ctx, const KvConfig& config) {
  const Index k = config.get_int("K", 300);
  const auto r_list = config.get_int_list("r", {8, 16, 24, 32});
  const auto rho_grid = config.get_real_list("rho_grid", default_rho_grid());
  const Index trials = config.get_int("trials", 100);
  std::vector<Index> ranks(r_list.begin(), r_list.end());
  NoniidSweepResult sweep = noniid_sweep(k, ranks, rho_grid, trials, ctx.seed, ctx.workers);

  CsvWriter csv(ctx.out / "noniid.csv", {"schema_version", "K", "r", "rho", "method", "mean_ratio",
                                         "stderr", "trials", "seed"});
  for (const NoniidRankResult& rank : sweep.ranks) {
    for (const NoniidCurvePoint& point : rank.points) {
      csv.row({kSchemaVersion, fmt_int(k), fmt_int(rank.r), fmt_double(point.rho), "lowrank",
               fmt_double(point.lowrank.mean), fmt_double(point.lowrank.se), fmt_int(trials),
               fmt_int(static_cast<std::int64_t>(ctx.seed))});
      csv.row({kSchemaVersion, fmt_int(k), fmt_int(rank.r), fmt_double(point.rho), "dct_top",
               fmt_double(point.dct_top.mean), fmt_double(point.dct_top.se), fmt_int(trials),
               fmt_int(static_cast<std::int64_t>(ctx.seed))});
    }
  }
  csv.finish();

  Json ranks_json = Json::array();
  bool r8_ok = true;
  for (const NoniidRankResult& rank : sweep.ranks) {
    Json jr;
    jr["r"] = rank.r;
    jr["dct_reference"] = rank.dct_reference;
    if (rank.rho_c.has_value())
      jr["rho_c"] = *rank.rho_c;
    else
      jr["rho_c"] = "above_grid";
    ranks_json.push_back(jr);
    if (rank.r == 8) r8_ok = rank.rho_c.has_value() && *rank.rho_c >= 0.06 && *rank.rho_c <= 0.12;
  }
  const bool has_r8 = std::find(ranks.begin(), ranks.end(), Index{8}) != ranks.end();
  const bool pass = sweep.iid_ordering_ok && sweep.monotone && (!has_r8 || r8_ok);

  Json body;
  body["experiment"] = "noniid";
  body["schema_version"] = kSchemaVersion;
  body["K"] = k;
  body["ranks"] = ranks_json;
  body["iid_ordering_ok"] = sweep.iid_ordering_ok;
  body["rho_c_monotone"] = sweep.monotone;
  body["pass"] = pass;
  write_summary(ctx, "noniid", body, config);
  if (!pass) return {RunStatus::acceptance_failure, "noniid: critical-correlation checks failed"};
  std::string msg = "noniid: rho_c =";
  for (const NoniidRankResult& rank : sweep.ranks)
    msg += " " + (rank.rho_c ? fmt_double(*rank.rho_c) : std::string("above_grid"));
  return {RunStatus::ok, msg};
}

// ---------------------------------------------------------------------- mp

RunOutcome run_mp(const Context& ctx, const KvConfig& config) {
  const Index k = config.get_int("K", 300);
  const Index seeds = config.get_int("seeds", 20);
  const Index trials = config.get_int("trials", 50);
  const auto rho_list = config.get_real_list("rho_grid", {0.0, 0.09});
  require(k >= 4, Errc::invalid_argument, "mp: K too small");
  require(seeds >= 1 && trials >= 1, Errc::invalid_argument, "mp: seeds/trials must be >= 1");

  CsvWriter csv(ctx.out / "mp.csv",
                {"schema_version", "K", "rho", "seed_index", "trials", "mean_outside_mass", "seed"});
  Json per_rho = Json::array();
  bool rho0_ok = true;
  bool corr_ok = true;
  for (std::size_t ri = 0; ri < rho_list.size(); ++ri) {
    const double rho = rho_list[ri];
    std::vector<double> seed_means(static_cast<std::size_t>(seeds));
    parallel_for_index(seeds, ctx.workers, [&](std::int64_t s) {
      Rng rng(mix_seed(ctx.seed, {0x3d9, static_cast<std::uint64_t>(ri),
                                  static_cast<std::uint64_t>(s)}));
      double sum = 0.0;
      for (Index t = 0; t < trials; ++t) {
        Matrix w = sample_correlated_matrix(k, rho, rng);
        sum += esd(w).outside_mass;
      }
      seed_means[static_cast<std::size_t>(s)] = sum / static_cast<double>(trials);
    });
    Index below = 0;
    double total = 0.0;
    for (Index s = 0; s < seeds; ++s) {
      const double mean_t = seed_means[static_cast<std::size_t>(s)];
      csv.row({kSchemaVersion, fmt_int(k), fmt_double(rho), fmt_int(s), fmt_int(trials),
               fmt_double(mean_t), fmt_int(static_cast<std::int64_t>(ctx.seed))});
      if (mean_t < kMpCritical) ++below;
      total += mean_t;
    }
    const double overall = total / static_cast<double>(seeds);
    Json jr;
    jr["rho"] = rho;
    jr["mean_outside_mass"] = overall;
    jr["seeds_below_critical"] = below;
    per_rho.push_back(jr);
    if (rho == 0.0) rho0_ok = below * 20 >= seeds * 17;  // at least 17/20
    if (rho > 0.0) corr_ok = corr_ok && overall >= 0.06 && overall <= 0.11;
  }
  csv.finish();

  const bool pass = rho0_ok && corr_ok;
  Json body;
  body["experiment"] = "mp";
  body["schema_version"] = kSchemaVersion;
  body["K"] = k;
  body["critical_value"] = kMpCritical;
  body["per_rho"] = per_rho;
  body["pass"] = pass;
  write_summary(ctx, "mp", body, config);
  if (!pass) return {RunStatus::acceptance_failure, "mp: outside-mass diagnostic out of range"};
  return {RunStatus::ok, "mp: outside-mass diagnostic within range"};
}

// ---------------------------------------------------------------- normality

RunOutcome run_normality(const Context& ctx, const KvConfig& config) {
  const Index dim = config.get_int("dim", 128);
  const Index seeds = config.get_int("seeds", 20);
  NormalityConfig nc;
  nc.reference_samples = config.get_int("reference_samples", nc.reference_samples);
  nc.sigma_perturb = config.get_real("sigma_perturb", nc.sigma_perturb);
  nc.accepted_distributions =
      static_cast<int>(config.get_int("accepted_distributions", nc.accepted_distributions));
  nc.sets_per_distribution =
      static_cast<int>(config.get_int("sets_per_distribution", nc.sets_per_distribution));
  nc.epsilon = config.get_real("epsilon", nc.epsilon);
  nc.bins = static_cast<int>(config.get_int("bins", nc.bins));
  nc.max_attempts = config.get_int("max_attempts", nc.max_attempts);
  const double significance = config.get_real("significance", 0.05);
  require(dim >= 2 && seeds >= 1, Errc::invalid_argument, "normality: bad dims/seeds");

  CsvWriter csv(ctx.out / "normality.csv", {"schema_version", "dim", "distribution", "seed_index",
                                            "p_value", "statistic", "reject", "seed"});
  struct Row {
    double p = 0.0;
    double stat = 0.0;
  };
  std::vector<Row> gauss_rows(static_cast<std::size_t>(seeds));
  std::vector<Row> uniform_rows(static_cast<std::size_t>(seeds));
  parallel_for_index(seeds, ctx.workers, [&](std::int64_t s) {
    {
      Rng rng(mix_seed(ctx.seed, {0xa0, static_cast<std::uint64_t>(s)}));
      Matrix w = gaussian_matrix(dim, dim, rng);
      NormalityReport rep = normality_test(w, nc, rng);
      gauss_rows[static_cast<std::size_t>(s)] = {rep.p_value, rep.statistic};
    }
    {
      Rng rng(mix_seed(ctx.seed, {0xa1, static_cast<std::uint64_t>(s)}));
      Matrix w(dim, dim);
      const double half_width = std::sqrt(3.0);  // unit-variance uniform
      for (Index i = 0; i < dim; ++i)
        for (Index j = 0; j < dim; ++j) w(i, j) = rng.uniform(-half_width, half_width);
      NormalityReport rep = normality_test(w, nc, rng);
      uniform_rows[static_cast<std::size_t>(s)] = {rep.p_value, rep.statistic};
    }
  });

  Index gauss_keep = 0;
  Index uniform_reject = 0;
  for (Index s = 0; s < seeds; ++s) {
    const Row& g = gauss_rows[static_cast<std::size_t>(s)];
    const Row& u = uniform_rows[static_cast<std::size_t>(s)];
    csv.row({kSchemaVersion, fmt_int(dim), "gaussian", fmt_int(s), fmt_double(g.p),
             fmt_double(g.stat), g.p < significance ? "1" : "0",
             fmt_int(static_cast<std::int64_t>(ctx.seed))});
    csv.row({kSchemaVersion, fmt_int(dim), "uniform", fmt_int(s), fmt_double(u.p),
             fmt_double(u.stat), u.p < significance ? "1" : "0",
             fmt_int(static_cast<std::int64_t>(ctx.seed))});
    if (g.p > significance) ++gauss_keep;
    if (u.p < significance) ++uniform_reject;
  }
  csv.finish();

  const double keep_frac = static_cast<double>(gauss_keep) / static_cast<double>(seeds);
  const double reject_frac = static_cast<double>(uniform_reject) / static_cast<double>(seeds);
  const bool pass = keep_frac >= 0.9 && reject_frac >= 0.9;
  Json body;
  body["experiment"] = "normality";
  body["schema_version"] = kSchemaVersion;
  body["dim"] = dim;
  body["significance"] = significance;
  body["gaussian_nonreject_fraction"] = keep_frac;
  body["uniform_reject_fraction"] = reject_frac;
  body["pass"] = pass;
  write_summary(ctx, "normality", body, config);
  if (!pass)
    return {RunStatus::acceptance_failure, "normality: calibration fractions out of range"};
  return {RunStatus::ok, "normality: null kept " + fmt_double(keep_frac) +
                             ", alternative rejected " + fmt_double(reject_frac)};
}

// --------------------------------------------------------------------- toy

RunOutcome run_toy(const Context& ctx, const KvConfig& config) {
  const Index seeds = config.get_int("seeds", 10);
  AltSchedule schedule;
  schedule.coeff_steps = config.get_int("coeff_steps", 10);
  schedule.loc_steps = config.get_int("loc_steps", 10);
  schedule.total_steps = config.get_int("total_steps", 3000000);
  schedule.alternating_total = config.get_int("alternating_steps", 2700000);
  schedule.lr_coeff = config.get_real("lr_coeff", 0.02);
  schedule.lr_loc = config.get_real("lr_loc", 0.05);
  schedule.batch_size = config.get_int("batch_size", 1);
  schedule.loc_lr_restart_period = config.get_int("restart_period", 150000);
  schedule.loc_lr_peak = config.get_real("restart_peak", 8.0);
  schedule.restart_locations = config.get_int("restart_locations", 1) != 0;
  const double loss_threshold = config.get_real("loss_threshold", 1e-6);
  require(seeds >= 1, Errc::invalid_argument, "toy: seeds must be >= 1");

  CsvWriter csv(ctx.out / "toy.csv", {"schema_version", "seed_index", "final_loss", "ablation_loss",
                                      "loss_ratio", "recovered", "steps", "seed"});
  struct SeedResult {
    double final_loss = std::numeric_limits<double>::infinity();
    double ablation_loss = std::numeric_limits<double>::infinity();
    bool recovered = false;
    bool diverged = false;
  };
  std::vector<SeedResult> results(static_cast<std::size_t>(seeds));
  // Trajectory CSVs are decimated to a plottable density.
  const Index loss_stride = std::max<Index>(1, schedule.total_steps / 2000);
  parallel_for_index(seeds, ctx.workers, [&](std::int64_t s) {
    SeedResult& res = results[static_cast<std::size_t>(s)];
    ToyTask task = build_toy_task(mix_seed(ctx.seed, {0x707, static_cast<std::uint64_t>(s)}));
    Rng init_rng(mix_seed(ctx.seed, {0x708, static_cast<std::uint64_t>(s)}));
    SpectralAdapter init;
    init.rows = task.dim;
    init.cols = task.dim;
    init.alpha = 1.0;
    init.coeffs.assign(task.truth.coeffs.size(), 0.0);
    init.locations.resize(task.truth.coeffs.size());
    for (auto& loc : init.locations) {
      loc[0] = init_rng.uniform(0.0, static_cast<double>(task.dim - 1));
      loc[1] = init_rng.uniform(0.0, static_cast<double>(task.dim - 1));
    }
    try {
      Rng train_rng(mix_seed(ctx.seed, {0x709, static_cast<std::uint64_t>(s)}));
      TrainerState state = alternating_train_from(task, schedule, init, train_rng);
      res.final_loss = state.final_loss;
      auto trained = round_locations(state.param.locations, task.dim, task.dim);
      auto truth = round_locations(task.truth.locations, task.dim, task.dim);
      std::set<std::pair<Index, Index>> a, b;
      for (const auto& cell : trained) a.insert({cell[0], cell[1]});
      for (const auto& cell : truth) b.insert({cell[0], cell[1]});
      res.recovered = (a == b);

      CsvWriter loss_csv(ctx.out / ("toy_loss_seed" + std::to_string(s) + ".csv"),
                         {"schema_version", "step", "loss", "phase", "seed"});
      for (std::size_t t = 0; t < state.loss_history.size(); ++t) {
        if ((t + 1) % static_cast<std::size_t>(loss_stride) != 0 &&
            t + 1 != state.loss_history.size())
          continue;
        loss_csv.row({kSchemaVersion, fmt_int(static_cast<std::int64_t>(t + 1)),
                      fmt_double(state.loss_history[t]), phase_name(state.phase_history[t]),
                      fmt_int(static_cast<std::int64_t>(ctx.seed))});
      }
      loss_csv.finish();

      CsvWriter loc_csv(ctx.out / ("toy_locations_seed" + std::to_string(s) + ".csv"),
                        {"schema_version", "step", "coeff_index", "row", "col", "row_rounded",
                         "col_rounded", "seed"});
      const std::size_t snap_stride =
          std::max<std::size_t>(1, state.snapshots.size() / 1000);
      for (std::size_t k = 0; k < state.snapshots.size(); ++k) {
        if (k % snap_stride != 0 && k + 1 != state.snapshots.size()) continue;
        const LocationSnapshot& snap = state.snapshots[k];
        auto cells = round_locations(snap.locations, task.dim, task.dim);
        for (std::size_t i = 0; i < snap.locations.size(); ++i)
          loc_csv.row({kSchemaVersion, fmt_int(snap.step), fmt_int(static_cast<std::int64_t>(i)),
                       fmt_double(snap.locations[i][0]), fmt_double(snap.locations[i][1]),
                       fmt_int(cells[i][0]), fmt_int(cells[i][1]),
                       fmt_int(static_cast<std::int64_t>(ctx.seed))});
      }
      loc_csv.finish();
      save_checkpoint(state,
                      (ctx.out / ("toy_checkpoint_seed" + std::to_string(s) + ".txt")).string());
    } catch (const Error&) {
      res.diverged = true;
    }
    AltSchedule frozen = schedule;
    frozen.alternating_total = 0;  // locations fixed at their random init
    // the frozen-location objective is convex; it plateaus long before the
    // full exploration budget
    frozen.total_steps = std::min<Index>(schedule.total_steps, 200000);
    try {
      Rng ablation_rng(mix_seed(ctx.seed, {0x709, static_cast<std::uint64_t>(s)}));
      TrainerState ablation = alternating_train_from(task, frozen, init, ablation_rng);
      res.ablation_loss = ablation.final_loss;
    } catch (const Error&) {
    }
  });

  Index converged = 0;
  Index ratio_ok = 0;
  for (Index s = 0; s < seeds; ++s) {
    const SeedResult& res = results[static_cast<std::size_t>(s)];
    const double ratio = res.ablation_loss / std::max(res.final_loss, 1e-300);
    const bool good = !res.diverged && res.final_loss < loss_threshold && res.recovered;
    if (good) ++converged;
    if (ratio >= 10.0) ++ratio_ok;
    csv.row({kSchemaVersion, fmt_int(s), fmt_double(res.final_loss), fmt_double(res.ablation_loss),
             fmt_double(ratio), res.recovered ? "1" : "0", fmt_int(schedule.total_steps),
             fmt_int(static_cast<std::int64_t>(ctx.seed))});
  }
  csv.finish();

  const double recovered_fraction = static_cast<double>(converged) / static_cast<double>(seeds);
  const bool ratios_pass = ratio_ok * 10 >= seeds * 8;
  const bool pass = recovered_fraction >= 0.8 && ratios_pass;
  Json body;
  body["experiment"] = "toy";
  body["schema_version"] = kSchemaVersion;
  body["seeds"] = seeds;
  body["recovered_fraction"] = recovered_fraction;
  body["loss_threshold"] = loss_threshold;
  body["ablation_ratio_ok"] = ratio_ok;
  body["pass"] = pass;
  write_summary(ctx, "toy", body, config);
  if (!pass)
    return {RunStatus::acceptance_failure,
            "toy: recovered fraction " + fmt_double(recovered_fraction)};
  return {RunStatus::ok, "toy: recovered fraction " + fmt_double(recovered_fraction)};
}

// ---------------------------------------------------------------- gradcheck

RunOutcome run_gradcheck(const Context& ctx, const KvConfig& config) {
  const Index cases = config.get_int("cases", 20);
  const double oracle_tol = config.get_real("oracle_tolerance", 1e-10);
  const double fd_tol = config.get_real("fd_tolerance", 1e-5);
  require(cases >= 1, Errc::invalid_argument, "gradcheck: cases must be >= 1");

  CsvWriter csv(ctx.out / "gradcheck.csv",
                {"schema_version", "case", "budget", "rows", "cols", "coeff_oracle_maxdiff",
                 "loc_oracle_maxdiff", "coeff_fd_maxrel", "pass", "seed"});
  bool all_ok = true;
  for (Index c = 0; c < cases; ++c) {
    Rng rng(mix_seed(ctx.seed, {0x6c, static_cast<std::uint64_t>(c)}));
    const Index n = 4 + rng.uniform_index(13);  // 4 .. 16
    const Index budget = 1 + rng.uniform_index(8);
    SpectralAdapter param;
    param.rows = n;
    param.cols = n;
    param.alpha = 0.5 + rng.uniform();
    param.coeffs.resize(static_cast<std::size_t>(budget));
    param.locations.resize(static_cast<std::size_t>(budget));
    for (Index i = 0; i < budget; ++i) {
      param.coeffs[static_cast<std::size_t>(i)] = rng.gaussian();
      param.locations[static_cast<std::size_t>(i)] = {
          rng.uniform(0.0, static_cast<double>(n - 1)),
          rng.uniform(0.0, static_cast<double>(n - 1))};
    }
    // quadratic loss L = 0.5 ||DeltaW - target||^2
    Matrix target = gaussian_matrix(n, n, rng);
    const DctBasis basis = DctBasis::get(n, n);
    Matrix delta = materialize(param);
    Matrix upstream = delta - target;
    Matrix z = spectrum_gradient(upstream, basis);

    auto coeff_z = coeff_gradient(param, z);
    auto coeff_direct = coeff_gradient_direct(param, upstream);
    double coeff_diff = 0.0;
    for (std::size_t i = 0; i < coeff_z.size(); ++i)
      coeff_diff = std::max(coeff_diff, std::abs(coeff_z[i] - coeff_direct[i]));

    auto loc_z = location_gradient(param, z);
    auto loc_direct = location_gradient_direct(param, upstream);
    double loc_diff = 0.0;
    for (std::size_t i = 0; i < loc_z.size(); ++i) {
      loc_diff = std::max(loc_diff, std::abs(loc_z[i][0] - loc_direct[i][0]));
      loc_diff = std::max(loc_diff, std::abs(loc_z[i][1] - loc_direct[i][1]));
    }

    // central finite difference on each coefficient
    const double h = 1e-4;
    double fd_rel = 0.0;
    for (std::size_t i = 0; i < param.coeffs.size(); ++i) {
      SpectralAdapter bumped = param;
      bumped.coeffs[i] = param.coeffs[i] + h;
      const double up = 0.5 * (materialize(bumped) - target).squaredNorm();
      bumped.coeffs[i] = param.coeffs[i] - h;
      const double down = 0.5 * (materialize(bumped) - target).squaredNorm();
      const double fd = (up - down) / (2.0 * h);
      const double scale = std::max({std::abs(fd), std::abs(coeff_z[i]), 1e-8});
      fd_rel = std::max(fd_rel, std::abs(fd - coeff_z[i]) / scale);
    }

    const bool ok = coeff_diff <= oracle_tol && loc_diff <= oracle_tol && fd_rel <= fd_tol;
    all_ok = all_ok && ok;
    csv.row({kSchemaVersion, fmt_int(c), fmt_int(budget), fmt_int(n), fmt_int(n),
             fmt_double(coeff_diff), fmt_double(loc_diff), fmt_double(fd_rel), ok ? "1" : "0",
             fmt_int(static_cast<std::int64_t>(ctx.seed))});
  }
  csv.finish();

  Json body;
  body["experiment"] = "gradcheck";
  body["schema_version"] = kSchemaVersion;
  body["cases"] = cases;
  body["oracle_tolerance"] = oracle_tol;
  body["fd_tolerance"] = fd_tol;
  body["pass"] = all_ok;
  write_summary(ctx, "gradcheck", body, config);
  if (!all_ok) return {RunStatus::acceptance_failure, "gradcheck: tolerance exceeded"};
  return {RunStatus::ok, "gradcheck: all cases within tolerance"};
}

// ------------------------------------------------------------------- bench

RunOutcome run_bench(const Context& ctx, const KvConfig& config) {
  const auto sizes = config.get_int_list("sizes", {128, 256, 512, 1024});
  const auto budgets = config.get_int_list("budgets", {1, 10, 100, 1000});
  const Index reps = config.get_int("reps", 3);
  const double tol = config.get_real("tolerance", 1e-8);

  CsvWriter csv(ctx.out / "bench.csv", {"schema_version", "rows", "cols", "budget", "path",
                                        "seconds", "max_abs_dev", "seed"});
  bool numerics_ok = true;
  Json rows_json = Json::array();
  auto time_of = [&](const std::function<Matrix()>& fn, Matrix& out) {
    double best = std::numeric_limits<double>::infinity();
    for (Index rep = 0; rep < reps; ++rep) {
      auto t0 = Clock::now();
      out = fn();
      best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
    }
    return best;
  };
  auto run_case = [&](Index n, Index budget) {
    Rng rng(mix_seed(ctx.seed, {0xbe, static_cast<std::uint64_t>(n),
                                static_cast<std::uint64_t>(budget)}));
    std::vector<double> coeffs(static_cast<std::size_t>(budget));
    std::vector<GridCell> cells(static_cast<std::size_t>(budget));
    for (Index i = 0; i < budget; ++i) {
      coeffs[static_cast<std::size_t>(i)] = rng.gaussian();
      cells[static_cast<std::size_t>(i)] = {rng.uniform_index(n), rng.uniform_index(n)};
    }
    const DctBasis basis = DctBasis::get(n, n);
    Matrix spectrum = scatter(coeffs, cells, n, n);
    Matrix dense, sparse, fast;
    const double t_dense = time_of([&] { return idct2_dense(spectrum, basis); }, dense);
    const double t_sparse = time_of([&] { return idct2_sparse_cells(coeffs, cells, basis); }, sparse);
    const double t_fast = time_of([&] { return fast_idct2(spectrum); }, fast);
    const double dev_sparse = (sparse - dense).cwiseAbs().maxCoeff();
    const double dev_fast = (fast - dense).cwiseAbs().maxCoeff();
    numerics_ok = numerics_ok && dev_sparse <= tol && dev_fast <= tol;
    csv.row({kSchemaVersion, fmt_int(n), fmt_int(n), fmt_int(budget), "dense", fmt_double(t_dense),
             "0", fmt_int(static_cast<std::int64_t>(ctx.seed))});
    csv.row({kSchemaVersion, fmt_int(n), fmt_int(n), fmt_int(budget), "sparse",
             fmt_double(t_sparse), fmt_double(dev_sparse), fmt_int(static_cast<std::int64_t>(ctx.seed))});
    csv.row({kSchemaVersion, fmt_int(n), fmt_int(n), fmt_int(budget), "fast", fmt_double(t_fast),
             fmt_double(dev_fast), fmt_int(static_cast<std::int64_t>(ctx.seed))});
    Json jr;
    jr["size"] = n;
    jr["budget"] = budget;
    jr["seconds"] = {{"dense", t_dense}, {"sparse", t_sparse}, {"fast", t_fast}};
    rows_json.push_back(jr);
    return std::array<double, 3>{t_dense, t_sparse, t_fast};
  };

  bool sparse_wins_small_budget = true;
  bool dense_wins_full_budget = true;
  for (Index n : sizes) {
    for (Index b : budgets) {
      if (b > n * n) continue;
      auto times = run_case(n, b);
      if (b <= 10 && n >= 512) sparse_wins_small_budget = sparse_wins_small_budget && times[1] < times[0];
    }
  }
  // full-budget case at a smaller size: the dense product path should not lose
  {
    const Index n = std::min<Index>(sizes.front(), 128);
    auto times = run_case(n, n * n);
    dense_wins_full_budget = times[0] <= times[1];
  }
  csv.finish();

  Json body;
  body["experiment"] = "bench";
  body["schema_version"] = kSchemaVersion;
  body["cases"] = rows_json;
  body["numerics_ok"] = numerics_ok;
  body["sparse_faster_at_small_budget"] = sparse_wins_small_budget;
  body["dense_not_slower_at_full_budget"] = dense_wins_full_budget;
  body["pass"] = numerics_ok;
  write_summary(ctx, "bench", body, config);
  if (!numerics_ok)
    return {RunStatus::acceptance_failure, "bench: path outputs disagree beyond tolerance"};
  return {RunStatus::ok, "bench: all paths numerically equivalent"};
}

// Per-experiment key allowlists; a typo in a config file fails fast.
void validate_keys(const std::string& name, const KvConfig& config) {
  static const std::map<std::string, std::set<std::string>> allowed = {
      {"theorem1", {"K", "r", "trials"}},
      {"theorem2", {"K", "budget", "trials", "tolerance"}},
      {"noniid", {"K", "r", "rho_grid", "trials"}},
      {"mp", {"K", "seeds", "trials", "rho_grid"}},
      {"normality",
       {"dim", "seeds", "reference_samples", "sigma_perturb", "accepted_distributions",
        "sets_per_distribution", "epsilon", "bins", "max_attempts", "significance"}},
      {"toy",
       {"seeds", "coeff_steps", "loc_steps", "total_steps", "alternating_steps", "lr_coeff",
        "lr_loc", "batch_size", "restart_period", "restart_peak", "restart_locations", "loss_threshold"}},
      {"gradcheck", {"cases", "oracle_tolerance", "fd_tolerance"}},
      {"bench", {"sizes", "budgets", "reps", "tolerance"}},
  };
  auto it = allowed.find(name);
  if (it == allowed.end()) return;  // unknown experiment reported by the dispatcher
  for (const auto& [key, value] : config.entries()) {
    if (key == "seed" || key == "workers" || key == "out") continue;
    require(it->second.count(key) > 0, Errc::invalid_argument,
            "config: unknown key '" + key + "' for experiment " + name);
  }
}

}  // namespace

const char* version_string() { return "0.1.0"; }

RunOutcome run_experiment(const std::string& name, const KvConfig& config,
                          const std::string& out_dir) {
  try {
    validate_keys(name, config);
    Context ctx;
    auto seed = config.get_int_opt("seed");
    if (!seed.has_value())
      return {RunStatus::config_error, "config: 'seed' is required for every experiment"};
    ctx.seed = static_cast<std::uint64_t>(*seed);
    ctx.workers = static_cast<int>(config.get_int("workers", 1));
    require(ctx.workers >= 1, Errc::invalid_argument, "config: workers must be >= 1");
    ctx.out = out_dir;
    std::filesystem::create_directories(ctx.out);

    if (name == "theorem1") return run_theorem1(ctx, config);
    if (name == "theorem2") return run_theorem2(ctx, config);
    if (name == "noniid") return run_noniid(ctx, config);
    if (name == "mp") return run_mp(ctx, config);
    if (name == "normality") return run_normality(ctx, config);
    if (name == "toy") return run_toy(ctx, config);
    if (name == "gradcheck") return run_gradcheck(ctx, config);
    if (name == "bench") return run_bench(ctx, config);
    return {RunStatus::config_error, "unknown experiment: " + name};
  } catch (const Error& e) {
    switch (e.code()) {
      case Errc::invalid_argument:
      case Errc::dimension_mismatch:
      case Errc::io:
        return {RunStatus::config_error, e.what()};
      default:
        return {RunStatus::acceptance_failure, e.what()};
    }
  } catch (const std::exception& e) {
    return {RunStatus::config_error, e.what()};
  }
}

}  // namespace loca
