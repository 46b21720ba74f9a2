// scratch: exercise the trainer's identified-component selection directly
#include <cstdio>
#include <cstdlib>

#include "rng.hpp"
#include "trainer.hpp"

using namespace loca;

int main(int argc, char** argv) {
  const std::uint64_t master = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  for (std::uint64_t s = 0; s < 10; ++s) {
    ToyTask task = build_toy_task(mix_seed(master, {0x707, s}));
    Rng init_rng(mix_seed(master, {0x708, s}));
    SpectralAdapter init;
    init.rows = init.cols = task.dim;
    init.alpha = 1.0;
    init.coeffs.assign(3, 0.0);
    init.locations.resize(3);
    for (auto& loc : init.locations) {
      loc[0] = init_rng.uniform(0.0, 5.0);
      loc[1] = init_rng.uniform(0.0, 5.0);
    }
    AltSchedule sched;
    sched.coeff_steps = 10;
    sched.loc_steps = 10;
    sched.total_steps = 3000000;
    sched.alternating_total = 2700000;
    sched.lr_coeff = 0.02;
    sched.lr_loc = 0.05;
    sched.batch_size = 1;
    sched.loc_lr_restart_period = 150000;
    sched.loc_lr_peak = 16.0;
    sched.restart_locations = false;
    Rng train_rng(mix_seed(master, {0x709, s}));
    try {
      TrainerState st = alternating_train_from(task, sched, init, train_rng);
      auto cells = round_locations(st.param.locations, 6, 6);
      std::printf("seed %llu: final=%.3e cells", (unsigned long long)s, st.final_loss);
      for (auto& c : cells) std::printf(" (%ld,%ld)", (long)c[0], (long)c[1]);
      std::printf(" truth");
      for (auto& l : task.truth.locations) std::printf(" (%.0f,%.0f)", l[0], l[1]);
      std::printf("\n");
    } catch (const Error& e) {
      std::printf("seed %llu: diverged (%s)\n", (unsigned long long)s, e.what());
    }
  }
  return 0;
}
