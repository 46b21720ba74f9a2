#include "simulations.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"

namespace loca {

namespace {

// Eigenvalues of W^T W in descending order (squared singular values).
std::vector<double> gram_eigenvalues_desc(const Matrix& w) {
  Matrix gram = w.transpose() * w;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, Errc::numeric, "gram eigensolve failed");
  const Index n = solver.eigenvalues().size();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    out[static_cast<std::size_t>(n - 1 - i)] = std::max(0.0, solver.eigenvalues()(i));
  return out;
}

double tail_sum(std::span<const double> desc, Index skip) {
  double sum = 0.0;
  for (std::size_t i = static_cast<std::size_t>(skip); i < desc.size(); ++i) sum += desc[i];
  return sum;
}

std::vector<double> dct_cell_energies(const Matrix& w) {
  const Matrix f = dct2(w, DctBasis::get(w.rows(), w.cols()));
  std::vector<double> out(static_cast<std::size_t>(f.size()));
  for (Index i = 0; i < f.size(); ++i) {
    const double v = f(i);
    out[static_cast<std::size_t>(i)] = v * v;
  }
  return out;
}

bool separated(const MeanStderr& hi, const MeanStderr& lo) {
  return hi.mean - lo.mean >= 2.0 * std::sqrt(hi.se * hi.se + lo.se * lo.se);
}

}  // namespace

OrderingResult theorem1_cell(Index k, Index r, Index trials, std::uint64_t master_seed,
                             int workers) {
  require(k >= 2, Errc::invalid_argument, "theorem1_cell: K must be >= 2");
  require(3 * r < k, Errc::invalid_argument, "theorem1_cell: requires r < K/3");
  require(trials >= 1, Errc::invalid_argument, "theorem1_cell: trials must be >= 1");
  const BudgetSpec budget = BudgetSpec::from_rank(k, k, r);
  const ConjugateLayout& layout = ConjugateLayout::get(k, k);
  const double total_cells = static_cast<double>(k) * static_cast<double>(k);

  std::vector<double> l1(static_cast<std::size_t>(trials));
  std::vector<double> lr(static_cast<std::size_t>(trials));
  std::vector<double> l2(static_cast<std::size_t>(trials));
  std::vector<double> l3(static_cast<std::size_t>(trials));

  parallel_for_index(trials, workers, [&](std::int64_t t) {
    Rng rng(mix_seed(master_seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(r),
                                   0, static_cast<std::uint64_t>(t)}));
    Matrix w(k, k);
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < k; ++j) w(i, j) = rng.gaussian();
    const double energy = w.squaredNorm();
    const CMatrix f = dft2(w);
    std::vector<double> cell_energy = energy::retained_cell_energies(f, layout);

    double kept_random = 0.0;
    for (std::int64_t idx : rng.sample_without_replacement(layout.retained_count(), budget.n1))
      kept_random += cell_energy[static_cast<std::size_t>(idx)];
    l1[static_cast<std::size_t>(t)] = (energy - kept_random) / (total_cells);

    std::vector<double> slot_energy = energy::retained_slot_energies(f, layout);
    l2[static_cast<std::size_t>(t)] =
        (energy - energy::top_sum(std::move(cell_energy), budget.n2_cells())) / total_cells;
    l3[static_cast<std::size_t>(t)] =
        (energy - energy::top_sum(std::move(slot_energy), budget.n3)) / total_cells;

    std::vector<double> eigs = gram_eigenvalues_desc(w);
    lr[static_cast<std::size_t>(t)] = tail_sum(eigs, r) / total_cells;
  });

  OrderingResult out;
  out.k = k;
  out.r = r;
  out.trials = trials;
  out.random_fourier = {"fourier_random", mean_stderr(l1)};
  out.lowrank = {"lowrank", mean_stderr(lr)};
  out.top_amplitude = {"fourier_top_amplitude", mean_stderr(l2)};
  out.top_coeff = {"fourier_top_coeff", mean_stderr(l3)};

  // Order-statistic brackets for the top-amplitude scheme (even K only):
  // all-chi2 ensembles with K^2/2 -+ 2 cells bracket the exact mixed ensemble.
  if (k % 2 == 0) {
    const Index half = k * k / 2;
    Rng rng_m1(mix_seed(master_seed, {static_cast<std::uint64_t>(k),
                                      static_cast<std::uint64_t>(r), 1}));
    Rng rng_m2(mix_seed(master_seed, {static_cast<std::uint64_t>(k),
                                      static_cast<std::uint64_t>(r), 2}));
    const Index bracket_trials = std::max<Index>(trials, 200);
    const std::pair<Index, int> p1[] = {{half - 2, 2}};
    const std::pair<Index, int> p2[] = {{half + 2, 2}};
    MeanStderr m1 = chi_square_order_sum(p1, budget.n2_cells(), bracket_trials, rng_m1);
    MeanStderr m2 = chi_square_order_sum(p2, budget.n2_cells(), bracket_trials, rng_m2);
    out.m1_ratio = 1.0 - m1.mean / total_cells;
    out.m2_ratio = 1.0 - m2.mean / total_cells;
    out.m1_se = m1.se / total_cells;
    out.m2_se = m2.se / total_cells;
  }

  if (trials < 2) {
    out.indeterminate = true;
    out.ordering_ok = false;
  } else {
    out.ordering_ok = separated(out.random_fourier.ratio, out.lowrank.ratio) &&
                      separated(out.lowrank.ratio, out.top_amplitude.ratio) &&
                      separated(out.top_amplitude.ratio, out.top_coeff.ratio);
  }
  return out;
}

Theorem2Result theorem2_check(Index k, Index budget, Index trials, std::uint64_t master_seed,
                              int workers) {
  require(k >= 2, Errc::invalid_argument, "theorem2_check: K must be >= 2");
  require(budget >= 0 && budget <= k * k, Errc::invalid_argument,
          "theorem2_check: budget out of range");
  require(trials >= 1, Errc::invalid_argument, "theorem2_check: trials must be >= 1");
  const ConjugateLayout& layout = ConjugateLayout::get(k, k);
  require(budget <= layout.slot_count(), Errc::invalid_argument,
          "theorem2_check: budget exceeds slot count");

  std::vector<double> f3(static_cast<std::size_t>(trials));
  std::vector<double> dct(static_cast<std::size_t>(trials));
  parallel_for_index(trials, workers, [&](std::int64_t t) {
    Rng rng(mix_seed(master_seed, {static_cast<std::uint64_t>(k), 7,
                                   static_cast<std::uint64_t>(t)}));
    Matrix w(k, k);
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < k; ++j) w(i, j) = rng.gaussian();
    const double energy = w.squaredNorm();
    std::vector<double> slots = energy::retained_slot_energies(dft2(w), layout);
    f3[static_cast<std::size_t>(t)] = energy - energy::top_sum(std::move(slots), budget);
    std::vector<double> cells = dct_cell_energies(w);
    dct[static_cast<std::size_t>(t)] = energy - energy::top_sum(std::move(cells), budget);
  });

  Theorem2Result out;
  out.k = k;
  out.budget = budget;
  out.trials = trials;
  out.fourier_top_coeff = mean_stderr(f3);
  out.dct_top = mean_stderr(dct);
  if (out.dct_top.mean == 0.0 && out.fourier_top_coeff.mean == 0.0) {
    out.relative_gap = 0.0;
  } else {
    out.relative_gap = std::abs(out.fourier_top_coeff.mean - out.dct_top.mean) / out.dct_top.mean;
  }
  return out;
}

Matrix sample_correlated_matrix(Index k, double rho, Rng& rng) {
  require(k >= 1, Errc::invalid_argument, "sample_correlated_matrix: K must be >= 1");
  require(rho >= 0.0, Errc::invalid_argument, "sample_correlated_matrix: rho must be >= 0");
  const double shared = std::sqrt(rho) * rng.gaussian();
  Matrix w(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) w(i, j) = shared + rng.gaussian();
  return w;
}

NoniidSweepResult noniid_sweep(Index k, std::span<const Index> ranks,
                               std::span<const double> rho_grid, Index trials,
                               std::uint64_t master_seed, int workers) {
  require(k >= 2, Errc::invalid_argument, "noniid_sweep: K must be >= 2");
  require(!ranks.empty(), Errc::invalid_argument, "noniid_sweep: no ranks given");
  require(!rho_grid.empty(), Errc::invalid_argument, "noniid_sweep: empty rho grid");
  require(trials >= 2, Errc::invalid_argument, "noniid_sweep: trials must be >= 2");
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    require(rho_grid[i] >= 0.0, Errc::invalid_argument, "noniid_sweep: rho must be >= 0");
    if (i > 0)
      require(rho_grid[i] > rho_grid[i - 1], Errc::invalid_argument,
              "noniid_sweep: rho grid must be ascending");
  }
  std::vector<BudgetSpec> budgets;
  for (Index r : ranks) budgets.push_back(BudgetSpec::from_rank(k, k, r));

  // rho = 0 supplies the i.i.d. DCT reference; append it when absent.
  std::vector<double> grid(rho_grid.begin(), rho_grid.end());
  const bool grid_has_zero = grid.front() == 0.0;
  if (!grid_has_zero) grid.insert(grid.begin(), 0.0);

  const double total_cells = static_cast<double>(k) * static_cast<double>(k);
  const std::size_t n_r = ranks.size();
  const std::size_t n_rho = grid.size();
  // errors[rho_idx][rank_idx][trial]
  std::vector<std::vector<std::vector<double>>> err_lowrank(
      n_rho, std::vector<std::vector<double>>(n_r, std::vector<double>(
                                                       static_cast<std::size_t>(trials))));
  auto err_dct = err_lowrank;

  for (std::size_t gi = 0; gi < n_rho; ++gi) {
    const double rho = grid[gi];
    const double expected_energy = total_cells * (1.0 + rho);
    parallel_for_index(trials, workers, [&](std::int64_t t) {
      Rng rng(mix_seed(master_seed, {static_cast<std::uint64_t>(k), 0,
                                     static_cast<std::uint64_t>(gi),
                                     static_cast<std::uint64_t>(t)}));
      Matrix w = sample_correlated_matrix(k, rho, rng);
      const double energy = w.squaredNorm();
      std::vector<double> eigs = gram_eigenvalues_desc(w);
      std::vector<double> cells = dct_cell_energies(w);
      std::sort(cells.begin(), cells.end(), std::greater<double>());
      // prefix sums over the sorted spectrum serve every rank's budget
      std::vector<double> prefix(cells.size() + 1, 0.0);
      for (std::size_t i = 0; i < cells.size(); ++i) prefix[i + 1] = prefix[i] + cells[i];
      for (std::size_t ri = 0; ri < n_r; ++ri) {
        err_lowrank[gi][ri][static_cast<std::size_t>(t)] =
            tail_sum(eigs, budgets[ri].r) / expected_energy;
        err_dct[gi][ri][static_cast<std::size_t>(t)] =
            (energy - prefix[static_cast<std::size_t>(budgets[ri].nd)]) / expected_energy;
      }
    });
  }

  NoniidSweepResult out;
  out.k = k;
  out.trials = trials;
  out.ranks.resize(n_r);
  for (std::size_t ri = 0; ri < n_r; ++ri) {
    NoniidRankResult& rank = out.ranks[ri];
    rank.r = ranks[ri];
    rank.dct_reference = mean_stderr(err_dct[0][ri]).mean;
    for (std::size_t gi = grid_has_zero ? 0 : 1; gi < n_rho; ++gi) {
      NoniidCurvePoint point;
      point.rho = grid[gi];
      point.lowrank = mean_stderr(err_lowrank[gi][ri]);
      point.dct_top = mean_stderr(err_dct[gi][ri]);
      rank.points.push_back(point);
    }
    // first crossing of the low-rank curve below the i.i.d. DCT level
    const double ref = rank.dct_reference;
    std::optional<double> crossing;
    double prev_rho = grid[0];
    double prev_val = mean_stderr(err_lowrank[0][ri]).mean;
    if (prev_val < ref) crossing = prev_rho;
    for (std::size_t gi = 1; gi < n_rho && !crossing; ++gi) {
      const double cur_rho = grid[gi];
      const double cur_val = mean_stderr(err_lowrank[gi][ri]).mean;
      if (cur_val < ref) {
        const double t = (prev_val - ref) / (prev_val - cur_val);
        crossing = prev_rho + t * (cur_rho - prev_rho);
      }
      prev_rho = cur_rho;
      prev_val = cur_val;
    }
    rank.rho_c = crossing;
  }

  const double iid_lowrank = mean_stderr(err_lowrank[0][0]).mean;
  out.iid_ordering_ok = out.ranks[0].dct_reference < iid_lowrank;
  out.monotone = true;
  for (std::size_t ri = 0; ri < n_r; ++ri) {
    if (!out.ranks[ri].rho_c.has_value()) {
      out.monotone = false;
      break;
    }
    if (ri > 0 && *out.ranks[ri].rho_c <= *out.ranks[ri - 1].rho_c) out.monotone = false;
  }
  return out;
}

}  // namespace loca
