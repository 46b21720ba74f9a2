// scratch: during training, how often does the rounded location triple hit
// the ground-truth set, and what is the minimum full-batch loss along the way?
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <set>

#include "rng.hpp"
#include "trainer.hpp"

using namespace loca;

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 0;
  const std::uint64_t master = argc > 10 ? std::strtoull(argv[10], nullptr, 10) : 11;
  const Index total = argc > 2 ? std::strtol(argv[2], nullptr, 10) : 20000;
  const double lr_l = argc > 3 ? std::strtod(argv[3], nullptr) : 0.05;
  const Index batch = argc > 4 ? std::strtol(argv[4], nullptr, 10) : 32;
  const double mom = argc > 5 ? std::strtod(argv[5], nullptr) : 0.0;
  const double mom_a = argc > 6 ? std::strtod(argv[6], nullptr) : 0.0;
  const int decay = argc > 7 ? std::atoi(argv[7]) : 0;

  ToyTask task = build_toy_task(mix_seed(master, {0x707, seed}));
  std::set<std::pair<Index, Index>> truth;
  for (auto& l : task.truth.locations) {
    auto cells = round_locations({&l, 1}, 6, 6);
    truth.insert({cells[0][0], cells[0][1]});
  }

  AltSchedule sched{10, 10, (total*9)/10, total, 0.02, lr_l, batch};
  Rng rng(mix_seed(master, {0x708, seed}));

  SpectralAdapter param;
  param.rows = param.cols = 6;
  param.alpha = 1.0;
  param.coeffs.assign(3, 0.0);
  param.locations.resize(3);
  for (auto& loc : param.locations) {
    loc[0] = rng.uniform(0.0, 5.0);
    loc[1] = rng.uniform(0.0, 5.0);
  }

  // re-run the training loop manually so we can observe each step
  const DctBasis basis = DctBasis::get(6, 6);
  Matrix a2 = task.w3.transpose() * task.w3;
  Matrix b2 = task.w1 * task.second_moment * task.w1.transpose();
  Matrix m_true = idct2_dense(
      scatter(task.truth.coeffs, round_locations(task.truth.locations, 6, 6), 6, 6), basis);
  auto full_loss = [&](const SpectralAdapter& p) {
    Matrix e = materialize(p) - m_true;
    return (a2 * e * b2).cwiseProduct(e).sum() / 6.0;
  };

  {
    Matrix a_rot = basis.row_basis() * a2 * basis.row_basis().transpose();
    Matrix b_rot = basis.col_basis() * b2 * basis.col_basis().transpose();
    std::vector<double> curv;
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) curv.push_back(a_rot(r, r) * b_rot(c, c));
    std::vector<double> sorted = curv;
    std::sort(sorted.begin(), sorted.end());
    std::printf("curv-ranks:");
    for (auto& l : task.truth.locations) {
      int r = (int)std::lround(l[0]), c = (int)std::lround(l[1]);
      double v = curv[r * 6 + c];
      int rank = int(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
      std::printf(" %d/36", rank);
    }
    std::printf("\n");
  }
  Index visits = 0, first_visit = -1;
  double min_loss = 1e300;
  double vel[3][2] = {};
  std::vector<double> vel_a(3, 0.0);
  const Index cycle = sched.coeff_steps + sched.loc_steps;
  for (Index t = 1; t <= total; ++t) {
    const bool coeff_phase = (t % cycle) < sched.coeff_steps;
    Matrix xb(6, batch);
    for (Index j = 0; j < batch; ++j) xb.col(j) = task.x.col(rng.uniform_index(task.n_samples));
    Matrix bb = task.w1 * (xb * xb.transpose() / double(batch)) * task.w1.transpose();
    Matrix e = materialize(param) - m_true;
    Matrix g = (2.0 / 6.0) * (a2 * e * bb);
    Matrix z = spectrum_gradient(g, basis);
    if (coeff_phase) {
      auto grads = coeff_gradient(param, z);
      for (int i = 0; i < 3; ++i) {
        vel_a[i] = mom_a * vel_a[i] + grads[i];
        param.coeffs[i] -= sched.lr_coeff * vel_a[i];
      }
    } else {
      auto grads = location_gradient(param, z);
      double lr_now = sched.lr_loc;
      if (decay == 1) lr_now *= std::max(0.0, 1.0 - double(t) / double(sched.alternating_total));
      if (decay >= 2) {  // warm restarts: geometric decay, then hold at base
        const double period = double(decay);
        const double frac = std::fmod(double(t), period) / period;
        const double peak = argc > 9 ? std::strtod(argv[9], nullptr) : 8.0;
        lr_now *= std::pow(peak, 1.0 - frac);
      }
      for (int i = 0; i < 3; ++i) {
        vel[i][0] = mom * vel[i][0] + grads[i][0];
        vel[i][1] = mom * vel[i][1] + grads[i][1];
        param.locations[i][0] = std::clamp(param.locations[i][0] - lr_now * vel[i][0], 0.0, 5.0);
        param.locations[i][1] = std::clamp(param.locations[i][1] - lr_now * vel[i][1], 0.0, 5.0);
      }
    }
    auto cells = round_locations(param.locations, 6, 6);
    std::set<std::pair<Index, Index>> now;
    for (auto& c : cells) now.insert({c[0], c[1]});
    const bool in_truth = (now == truth);
    static bool was_in = false;
    if (in_truth) {
      ++visits;
      if (first_visit < 0) first_visit = t;
      if (!was_in && argc > 8 && argv[8][0] == 'v')
        std::printf("  enter t=%ld phase=%s loss=%.3e coeffs=%.2f/%.2f/%.2f\n", (long)t,
                    coeff_phase ? "coeff" : "loc", full_loss(param), param.coeffs[0],
                    param.coeffs[1], param.coeffs[2]);
    } else if (was_in && argc > 8 && argv[8][0] == 'v') {
      std::printf("  exit  t=%ld phase=%s loss=%.3e\n", (long)t, coeff_phase ? "coeff" : "loc",
                  full_loss(param));
    }
    was_in = in_truth;
    min_loss = std::min(min_loss, full_loss(param));
  }
  std::printf("seed %llu: visits=%ld first=%ld min_full_loss=%.3e final=%.3e\n",
              (unsigned long long)seed, (long)visits, (long)first_visit, min_loss,
              full_loss(param));
  return 0;
}
