// scratch: does a coefficient adjacent to its true cell get captured?
#include <cstdio>
#include <cstdlib>

#include "rng.hpp"
#include "trainer.hpp"

using namespace loca;

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 0;
  const double lr_l = argc > 2 ? std::strtod(argv[2], nullptr) : 0.05;
  const Index batch = argc > 3 ? std::strtol(argv[3], nullptr, 10) : 0;
  ToyTask task = build_toy_task(mix_seed(11, {0x707, seed}));
  std::printf("truth:");
  for (auto& l : task.truth.locations) std::printf(" (%.0f,%.0f)", l[0], l[1]);
  std::printf("\n");

  SpectralAdapter init;
  init.rows = init.cols = 6;
  init.alpha = 1.0;
  init.coeffs.assign(3, 0.0);
  init.locations.resize(3);
  for (int i = 0; i < 3; ++i) init.locations[i] = task.truth.locations[i];
  // optionally displace the last coefficient by one cell along the row axis
  if (argc > 4 && std::strtol(argv[4], nullptr, 10) == 1) {
    double& row2 = init.locations[2][0];
    row2 = row2 >= 5.0 ? row2 - 1.0 : row2 + 1.0;
  }
  std::printf("init:");
  for (auto& l : init.locations) std::printf(" (%.2f,%.2f)", l[0], l[1]);
  std::printf("\n");

  AltSchedule sched{10, 10, 3000, 4000, 0.02, lr_l, batch};
  Rng rng(mix_seed(11, {0x708, seed}));
  TrainerState st = alternating_train_from(task, sched, init, rng);
  std::printf("final loss %.3e  locations:", st.final_loss);
  for (auto& l : st.param.locations) std::printf(" (%.2f,%.2f)", l[0], l[1]);
  std::printf("  coeffs:");
  for (double a : st.param.coeffs) std::printf(" %.3f", a);
  std::printf("\n");
  return 0;
}
