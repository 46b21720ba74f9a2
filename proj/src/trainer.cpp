#include "trainer.hpp"
#include <limits>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace loca {

namespace {

Index clamp_index(Index v, Index hi) { return std::clamp<Index>(v, 0, hi); }

// Quadratic toy loss and its gradient work off sufficient statistics: with
// E = M - M*, the MSE over a row set S is tr(W3^T W3 E B_S E^T) / dim where
// B_S = W1 (x_S x_S^T / |S|) W1^T.
struct ToyQuadratic {
  const ToyTask* task;
  Matrix a;        // W3^T W3
  Matrix b_full;   // W1 second_moment W1^T
  Matrix m_true;   // idct2 of the ground-truth spectrum
  double dim = 0;

  explicit ToyQuadratic(const ToyTask& t) : task(&t) {
    a = t.w3.transpose() * t.w3;
    b_full = t.w1 * t.second_moment * t.w1.transpose();
    m_true = idct2_dense(
        scatter(t.truth.coeffs, round_locations(t.truth.locations, t.dim, t.dim), t.dim, t.dim),
        DctBasis::get(t.dim, t.dim));
    dim = static_cast<double>(t.dim);
  }

  Matrix batch_second_moment(Rng& rng, Index batch) const {
    Matrix xb(task->dim, batch);
    for (Index j = 0; j < batch; ++j)
      xb.col(j) = task->x.col(rng.uniform_index(task->n_samples));
    return task->w1 * (xb * xb.transpose() / static_cast<double>(batch)) * task->w1.transpose();
  }

  double loss(const Matrix& m, const Matrix& b) const {
    Matrix e = m - m_true;
    return (a * e * b).cwiseProduct(e).sum() / dim;
  }

  Matrix gradient(const Matrix& m, const Matrix& b) const {
    Matrix e = m - m_true;
    return (2.0 / dim) * (a * e * b);
  }
};

}  // namespace

std::vector<GridCell> round_locations(std::span<const std::array<double, 2>> locations,
                                      Index rows, Index cols) {
  std::vector<GridCell> out(locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) {
    GridCell cell = round_cell(locations[i][0], locations[i][1]);
    out[i] = {clamp_index(cell[0], rows - 1), clamp_index(cell[1], cols - 1)};
  }
  return out;
}

Matrix materialize(const SpectralAdapter& param) {
  require(param.rows >= 1 && param.cols >= 1, Errc::invalid_argument,
          "materialize: dims must be >= 1");
  require(param.coeffs.size() == param.locations.size(), Errc::dimension_mismatch,
          "materialize: coefficient/location counts differ");
  const DctBasis basis = DctBasis::get(param.rows, param.cols);
  auto cells = round_locations(param.locations, param.rows, param.cols);
  return param.alpha * idct2_sparse_cells(param.coeffs, cells, basis);
}

Matrix spectrum_gradient(const Matrix& upstream, const DctBasis& basis) {
  return dct2(upstream, basis);
}

std::vector<double> coeff_gradient(const SpectralAdapter& param, const Matrix& z) {
  require(z.rows() == param.rows && z.cols() == param.cols, Errc::dimension_mismatch,
          "coeff_gradient: Z does not match parameter dims");
  auto cells = round_locations(param.locations, param.rows, param.cols);
  std::vector<double> out(param.coeffs.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    out[i] = param.alpha * z(cells[i][0], cells[i][1]);
  return out;
}

std::vector<std::array<double, 2>> location_gradient(const SpectralAdapter& param,
                                                     const Matrix& z) {
  require(z.rows() == param.rows && z.cols() == param.cols, Errc::dimension_mismatch,
          "location_gradient: Z does not match parameter dims");
  auto cells = round_locations(param.locations, param.rows, param.cols);
  std::vector<std::array<double, 2>> out(param.coeffs.size());
  const Index last_row = param.rows - 1;
  const Index last_col = param.cols - 1;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double scale = param.alpha * param.coeffs[i];
    if (scale == 0.0) {
      out[i] = {0.0, 0.0};  // locations of dead coefficients never move
      continue;
    }
    const auto [r, c] = cells[i];
    double grad_row;
    if (r == 0)
      grad_row = scale * (z(1, c) - z(0, c));
    else if (r == last_row)
      grad_row = scale * (z(last_row, c) - z(last_row - 1, c));
    else
      grad_row = scale * (z(r + 1, c) - z(r - 1, c)) / 2.0;
    double grad_col;
    if (c == 0)
      grad_col = scale * (z(r, 1) - z(r, 0));
    else if (c == last_col)
      grad_col = scale * (z(r, last_col) - z(r, last_col - 1));
    else
      grad_col = scale * (z(r, c + 1) - z(r, c - 1)) / 2.0;
    out[i] = {grad_row, grad_col};
  }
  return out;
}

std::vector<double> coeff_gradient_direct(const SpectralAdapter& param, const Matrix& upstream) {
  require(upstream.rows() == param.rows && upstream.cols() == param.cols,
          Errc::dimension_mismatch, "coeff_gradient_direct: upstream dims mismatch");
  const DctBasis basis = DctBasis::get(param.rows, param.cols);
  auto cells = round_locations(param.locations, param.rows, param.cols);
  std::vector<double> out(param.coeffs.size());
  const double unit[] = {1.0};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const GridCell cell[] = {cells[i]};
    Matrix atom = param.alpha * idct2_sparse_cells(unit, cell, basis);
    out[i] = upstream.cwiseProduct(atom).sum();
  }
  return out;
}

std::vector<std::array<double, 2>> location_gradient_direct(const SpectralAdapter& param,
                                                            const Matrix& upstream) {
  require(upstream.rows() == param.rows && upstream.cols() == param.cols,
          Errc::dimension_mismatch, "location_gradient_direct: upstream dims mismatch");
  const DctBasis basis = DctBasis::get(param.rows, param.cols);
  auto cells = round_locations(param.locations, param.rows, param.cols);
  std::vector<std::array<double, 2>> out(param.coeffs.size());
  const Index last_row = param.rows - 1;
  const Index last_col = param.cols - 1;
  auto shifted = [&](Index r, Index c, double coeff) {
    const double coeffs[] = {coeff};
    const GridCell cell[] = {GridCell{r, c}};
    return idct2_sparse_cells(coeffs, cell, basis);
  };
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double a = param.coeffs[i];
    if (a == 0.0) {
      out[i] = {0.0, 0.0};
      continue;
    }
    const auto [r, c] = cells[i];
    Matrix d_row;
    if (r == 0)
      d_row = param.alpha * (shifted(1, c, a) - shifted(0, c, a));
    else if (r == last_row)
      d_row = param.alpha * (shifted(last_row, c, a) - shifted(last_row - 1, c, a));
    else
      d_row = param.alpha * (shifted(r + 1, c, a) - shifted(r - 1, c, a)) / 2.0;
    Matrix d_col;
    if (c == 0)
      d_col = param.alpha * (shifted(r, 1, a) - shifted(r, 0, a));
    else if (c == last_col)
      d_col = param.alpha * (shifted(r, last_col, a) - shifted(r, last_col - 1, a));
    else
      d_col = param.alpha * (shifted(r, c + 1, a) - shifted(r, c - 1, a)) / 2.0;
    out[i] = {upstream.cwiseProduct(d_row).sum(), upstream.cwiseProduct(d_col).sum()};
  }
  return out;
}

void sgd_step(std::span<double> values, std::span<const double> grads, double lr) {
  require(values.size() == grads.size(), Errc::dimension_mismatch,
          "sgd_step: value/gradient counts differ");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= lr * grads[i];
}

ToyTask build_toy_task(std::uint64_t seed) {
  Rng rng(mix_seed(seed, {0x70f}));
  ToyTask task;
  const Index d = task.dim;
  const double input_sd = std::sqrt(20.0);
  task.x.resize(d, task.n_samples);
  for (Index j = 0; j < task.n_samples; ++j)
    for (Index i = 0; i < d; ++i) task.x(i, j) = rng.gaussian(0.0, input_sd);
  task.second_moment = task.x * task.x.transpose() / static_cast<double>(task.n_samples);

  const double layer_sd = std::sqrt(0.2);
  auto draw_full_rank = [&]() {
    Matrix m(d, d);
    for (int attempt = 0; attempt < 1000; ++attempt) {
      for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) m(i, j) = rng.gaussian(0.0, layer_sd);
      Eigen::JacobiSVD<Matrix> svd(m);
      if (svd.singularValues().minCoeff() > 0.1) return m;
    }
    fail(Errc::numeric, "build_toy_task: could not draw a well-conditioned layer");
  };
  // Besides full rank, the layers must keep the quoted coefficient learning
  // rate inside the stable region of every single-cell quadratic (stiffest
  // curvature (2/d) max(A~) max(B~) below 2 / lr with margin), otherwise the
  // coefficient phases amplify instead of fitting.
  const DctBasis basis = DctBasis::get(d, d);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    task.w1 = draw_full_rank();
    task.w3 = draw_full_rank();
    const Matrix a_rot = basis.row_basis() * (task.w3.transpose() * task.w3) *
                         basis.row_basis().transpose();
    const Matrix b_rot = basis.col_basis() *
                         (task.w1 * task.second_moment * task.w1.transpose()) *
                         basis.col_basis().transpose();
    const double stiffest = (2.0 / static_cast<double>(d)) *
                            a_rot.diagonal().maxCoeff() * b_rot.diagonal().maxCoeff();
    if (stiffest < 50.0) break;
    require(attempt < 999, Errc::numeric, "build_toy_task: could not draw a trainable task");
  }

  task.truth.rows = d;
  task.truth.cols = d;
  std::vector<std::int64_t> flat = rng.sample_without_replacement(d * d, 3);
  for (std::int64_t cell : flat) {
    task.truth.locations.push_back({static_cast<double>(cell / d), static_cast<double>(cell % d)});
    // The target spectrum must be identifiable: a coefficient at the scale of
    // numerical noise has no recoverable location, so resample until each one
    // carries a detectable share of the signal.
    double coeff = rng.gaussian(0.0, layer_sd);
    while (std::abs(coeff) < 0.25) coeff = rng.gaussian(0.0, layer_sd);
    task.truth.coeffs.push_back(coeff);
  }

  const Matrix m2 = idct2_dense(
      scatter(task.truth.coeffs, round_locations(task.truth.locations, d, d), d, d),
      DctBasis::get(d, d));
  task.y = task.w3 * m2 * task.w1 * task.x;
  return task;
}

double toy_loss(const ToyTask& task, const SpectralAdapter& param) {
  ToyQuadratic quad(task);
  return quad.loss(materialize(param), quad.b_full);
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::coefficients: return "coefficients";
    case Phase::locations: return "locations";
    case Phase::coefficients_only: return "coefficients_only";
  }
  return "unknown";
}

namespace {

// Exact least-squares coefficients and loss for a fixed cell configuration;
// closed form in the DCT domain: Gram[i][j] = A~[r_i, r_j] * B~[s_i, s_j].
struct ConfigScore {
  std::vector<double> coeffs;
  double loss = 0.0;
};

class ConfigScorer {
 public:
  ConfigScorer(const ToyQuadratic& quad, const ToyTask& task) {
    const DctBasis basis = DctBasis::get(task.dim, task.dim);
    a_rot_ = basis.row_basis() * quad.a * basis.row_basis().transpose();
    b_rot_ = basis.col_basis() * quad.b_full * basis.col_basis().transpose();
    const Matrix s_true =
        scatter(task.truth.coeffs, round_locations(task.truth.locations, task.dim, task.dim),
                task.dim, task.dim);
    target_ = a_rot_ * s_true * b_rot_;
    base_ = (quad.a * quad.m_true * quad.b_full).cwiseProduct(quad.m_true).sum();
    dim_ = quad.dim;
  }

  ConfigScore score(std::span<const GridCell> cells, double alpha) const {
    const Index n = static_cast<Index>(cells.size());
    Matrix gram(n, n);
    Eigen::VectorXd rhs(n);
    for (Index i = 0; i < n; ++i) {
      rhs(i) = target_(cells[i][0], cells[i][1]) / alpha;
      for (Index j = 0; j < n; ++j)
        gram(i, j) = a_rot_(cells[i][0], cells[j][0]) * b_rot_(cells[i][1], cells[j][1]);
    }
    // minimum-norm solve tolerates collided cells (rank-deficient Gram)
    Eigen::VectorXd solution = gram.completeOrthogonalDecomposition().solve(rhs);
    ConfigScore out;
    out.coeffs.assign(solution.data(), solution.data() + n);
    out.loss = (base_ - solution.dot(rhs) * alpha * alpha) / dim_;
    return out;
  }

 private:
  Matrix a_rot_, b_rot_, target_;
  double base_ = 0.0;
  double dim_ = 1.0;
};

TrainerState run_training(const ToyTask& task, const AltSchedule& schedule,
                          SpectralAdapter param, Rng& rng) {
  require(schedule.coeff_steps >= 1 && schedule.loc_steps >= 1, Errc::invalid_argument,
          "alternating_train: phase lengths must be >= 1");
  require(schedule.alternating_total <= schedule.total_steps, Errc::invalid_argument,
          "alternating_train: alternating steps exceed total");
  require(schedule.batch_size >= 0 && schedule.batch_size <= task.n_samples,
          Errc::invalid_argument, "alternating_train: bad batch size");
  const DctBasis basis = DctBasis::get(param.rows, param.cols);
  ToyQuadratic quad(task);
  const bool full_batch = schedule.batch_size == 0 || schedule.batch_size == task.n_samples;

  TrainerState state;
  state.param = std::move(param);
  state.loss_history.reserve(static_cast<std::size_t>(schedule.total_steps));
  state.phase_history.reserve(static_cast<std::size_t>(schedule.total_steps));
  state.snapshots.push_back({0, state.param.locations});

  // Identified-component tracking: score each rounded cell configuration the
  // walk visits by its exact training loss, remember the best.
  const bool track_best = schedule.alternating_total > 0;
  ConfigScorer scorer(quad, task);
  std::vector<GridCell> last_cells;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<GridCell> best_cells;
  std::vector<double> best_coeffs;

  const Index cycle = schedule.coeff_steps + schedule.loc_steps;
  // divergence guard references the full-batch scale, immune to batch noise
  const double initial_loss = quad.loss(materialize(state.param), quad.b_full);
  for (Index t = 1; t <= schedule.total_steps; ++t) {
    Phase phase;
    if (t <= schedule.alternating_total)
      phase = (t % cycle) < schedule.coeff_steps ? Phase::coefficients : Phase::locations;
    else
      phase = Phase::coefficients_only;

    if (schedule.restart_locations && schedule.loc_lr_restart_period > 0 && t > 1 &&
        t <= schedule.alternating_total && t % schedule.loc_lr_restart_period == 1) {
      for (auto& loc : state.param.locations) {
        loc[0] = rng.uniform(0.0, static_cast<double>(state.param.rows - 1));
        loc[1] = rng.uniform(0.0, static_cast<double>(state.param.cols - 1));
      }
      std::fill(state.param.coeffs.begin(), state.param.coeffs.end(), 0.0);
    }

    // Collided locations can push the stiffest coefficient direction past the
    // stable step size; under minibatch exploration a runaway fit is repaired
    // by re-zeroing the coefficients (their init value) while the locations
    // keep walking. Full-batch schedules keep plain abort semantics.
    if (!full_batch && t % schedule.coeff_steps == 0 &&
        quad.loss(materialize(state.param), quad.b_full) > 30.0 * initial_loss)
      std::fill(state.param.coeffs.begin(), state.param.coeffs.end(), 0.0);

    const Matrix b = full_batch ? quad.b_full : quad.batch_second_moment(rng, schedule.batch_size);
    const Matrix m = materialize(state.param);
    const double loss = quad.loss(m, b);
    require(std::isfinite(loss), Errc::diverged, "alternating_train: loss diverged");
    // The divergence guard tracks the full-batch loss at cycle boundaries;
    // single-batch spikes during exploration are not divergence.
    if (t % cycle == 0 || full_batch)
      require(quad.loss(m, quad.b_full) <= 1e6 * initial_loss + 1e-30, Errc::diverged,
              "alternating_train: loss diverged");
    state.loss_history.push_back(loss);
    state.phase_history.push_back(phase);

    const Matrix z = spectrum_gradient(quad.gradient(m, b), basis);
    if (phase == Phase::locations) {
      double lr_now = schedule.lr_loc;
      if (schedule.loc_lr_restart_period > 0) {
        const double frac = static_cast<double>(t % schedule.loc_lr_restart_period) /
                            static_cast<double>(schedule.loc_lr_restart_period);
        lr_now *= std::pow(schedule.loc_lr_peak, 1.0 - frac);
      }
      auto grads = location_gradient(state.param, z);
      for (std::size_t i = 0; i < grads.size(); ++i) {
        state.param.locations[i][0] -= lr_now * grads[i][0];
        state.param.locations[i][1] -= lr_now * grads[i][1];
        state.param.locations[i][0] =
            std::clamp(state.param.locations[i][0], 0.0, static_cast<double>(state.param.rows - 1));
        state.param.locations[i][1] =
            std::clamp(state.param.locations[i][1], 0.0, static_cast<double>(state.param.cols - 1));
      }
    } else {
      auto grads = coeff_gradient(state.param, z);
      sgd_step(state.param.coeffs, grads, schedule.lr_coeff);
    }

    if (track_best && t <= schedule.alternating_total) {
      auto cells = round_locations(state.param.locations, state.param.rows, state.param.cols);
      if (cells != last_cells) {
        last_cells = cells;
        ConfigScore fit = scorer.score(cells, state.param.alpha);
        if (fit.loss < best_loss) {
          best_loss = fit.loss;
          best_cells = cells;
          best_coeffs = fit.coeffs;
        }
      }
    }
    if (t == schedule.alternating_total && track_best && !best_cells.empty()) {
      // Freeze on the identified components before the coefficient-only tail.
      ConfigScore current = scorer.score(last_cells, state.param.alpha);
      if (best_loss < current.loss) {
        for (std::size_t i = 0; i < best_cells.size(); ++i) {
          state.param.locations[i] = {static_cast<double>(best_cells[i][0]),
                                      static_cast<double>(best_cells[i][1])};
          state.param.coeffs[i] = best_coeffs[i];
        }
      }
    }

    if (t % cycle == 0 || t == schedule.total_steps)
      state.snapshots.push_back({t, state.param.locations});
    state.step = t;
    state.phase = phase;
  }
  state.final_loss = quad.loss(materialize(state.param), quad.b_full);
  return state;
}

}  // namespace

TrainerState alternating_train(const ToyTask& task, const AltSchedule& schedule, Rng& rng) {
  SpectralAdapter param;
  param.rows = task.dim;
  param.cols = task.dim;
  param.alpha = 1.0;
  const std::size_t budget = task.truth.coeffs.size();
  param.coeffs.assign(budget, 0.0);
  param.locations.resize(budget);
  for (auto& loc : param.locations) {
    loc[0] = rng.uniform(0.0, static_cast<double>(task.dim - 1));
    loc[1] = rng.uniform(0.0, static_cast<double>(task.dim - 1));
  }
  return run_training(task, schedule, std::move(param), rng);
}

TrainerState alternating_train_from(const ToyTask& task, const AltSchedule& schedule,
                                    SpectralAdapter initial, Rng& rng) {
  return run_training(task, schedule, std::move(initial), rng);
}

void save_checkpoint(const TrainerState& state, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), Errc::io, "save_checkpoint: cannot open " + path);
  out.precision(17);
  out << "rows = " << state.param.rows << "\n";
  out << "cols = " << state.param.cols << "\n";
  out << "alpha = " << state.param.alpha << "\n";
  out << "budget = " << state.param.budget() << "\n";
  out << "step = " << state.step << "\n";
  out << "phase = " << phase_name(state.phase) << "\n";
  out << "coeffs =";
  for (double a : state.param.coeffs) out << " " << a;
  out << "\n";
  out << "loc_rows =";
  for (const auto& l : state.param.locations) out << " " << l[0];
  out << "\n";
  out << "loc_cols =";
  for (const auto& l : state.param.locations) out << " " << l[1];
  out << "\n";
  require(out.good(), Errc::io, "save_checkpoint: write failed for " + path);
}

TrainerState load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::io, "load_checkpoint: cannot open " + path);
  TrainerState state;
  std::string line;
  std::vector<double> loc_rows, loc_cols;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    std::istringstream value(line.substr(eq + 1));
    if (key == "rows") value >> state.param.rows;
    else if (key == "cols") value >> state.param.cols;
    else if (key == "alpha") value >> state.param.alpha;
    else if (key == "step") value >> state.step;
    else if (key == "phase") {
      std::string name;
      value >> name;
      if (name == "coefficients") state.phase = Phase::coefficients;
      else if (name == "locations") state.phase = Phase::locations;
      else if (name == "coefficients_only") state.phase = Phase::coefficients_only;
      else fail(Errc::io, "load_checkpoint: unknown phase " + name);
    } else if (key == "coeffs") {
      double v;
      while (value >> v) state.param.coeffs.push_back(v);
    } else if (key == "loc_rows") {
      double v;
      while (value >> v) loc_rows.push_back(v);
    } else if (key == "loc_cols") {
      double v;
      while (value >> v) loc_cols.push_back(v);
    }
  }
  require(loc_rows.size() == loc_cols.size() && loc_rows.size() == state.param.coeffs.size(),
          Errc::io, "load_checkpoint: inconsistent parameter lists");
  state.param.locations.resize(loc_rows.size());
  for (std::size_t i = 0; i < loc_rows.size(); ++i)
    state.param.locations[i] = {loc_rows[i], loc_cols[i]};
  return state;
}

}  // namespace loca
