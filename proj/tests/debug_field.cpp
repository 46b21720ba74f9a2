// scratch: inspect the location-gradient field around a trained state
#include <cstdio>
#include <cstdlib>

#include "rng.hpp"
#include "trainer.hpp"

using namespace loca;

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  ToyTask task = build_toy_task(mix_seed(11, {0x707, seed}));
  AltSchedule sched{10, 10, 16000, 20000, 0.02, 0.05, 128};
  Rng rng(mix_seed(11, {0x708, seed}));
  TrainerState st = alternating_train(task, sched, rng);

  std::printf("truth:");
  for (auto& l : task.truth.locations) std::printf(" (%.0f,%.0f)", l[0], l[1]);
  std::printf("\nfinal:");
  for (size_t i = 0; i < st.param.locations.size(); ++i)
    std::printf(" (%.2f,%.2f)a=%.3f", st.param.locations[i][0], st.param.locations[i][1],
                st.param.coeffs[i]);
  std::printf("  loss %.3e\n", st.final_loss);

  // gradient of coefficient `ci`'s row-location when its cell is forced to each row
  const DctBasis basis = DctBasis::get(task.dim, task.dim);
  Matrix a2 = task.w3.transpose() * task.w3;
  Matrix b2 = task.w1 * task.second_moment * task.w1.transpose();
  Matrix m_true = idct2_dense(
      scatter(task.truth.coeffs, round_locations(task.truth.locations, 6, 6), 6, 6), basis);
  auto z_of = [&](const SpectralAdapter& p) {
    Matrix e = materialize(p) - m_true;
    Matrix g = (2.0 / 6.0) * (a2 * e * b2);
    return spectrum_gradient(g, basis);
  };
  for (size_t ci = 0; ci < st.param.coeffs.size(); ++ci) {
    std::printf("coeff %zu: row-grad by forced row (col fixed):", ci);
    SpectralAdapter p = st.param;
    for (int r = 0; r < 6; ++r) {
      p.locations[ci][0] = r;
      Matrix z = z_of(p);
      auto g = location_gradient(p, z);
      std::printf(" r%d:%+0.4f", r, g[ci][0]);
    }
    std::printf("\n");
  }
  return 0;
}
