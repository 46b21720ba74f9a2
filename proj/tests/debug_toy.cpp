// scratch diagnostics for the toy trainer; not part of the test suite
#include <cstdio>
#include <cstdlib>

#include "rng.hpp"
#include "trainer.hpp"

using namespace loca;

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 0;
  const Index total = argc > 2 ? std::strtol(argv[2], nullptr, 10) : 3000;
  const Index alt = argc > 3 ? std::strtol(argv[3], nullptr, 10) : 2000;
  const double lr_a = argc > 4 ? std::strtod(argv[4], nullptr) : 0.02;
  const double lr_l = argc > 5 ? std::strtod(argv[5], nullptr) : 0.05;
  const Index batch = argc > 6 ? std::strtol(argv[6], nullptr, 10) : 128;

  ToyTask task = build_toy_task(mix_seed(11, {0x707, seed}));
  std::printf("truth cells:");
  for (auto& l : task.truth.locations) std::printf(" (%.0f,%.0f)", l[0], l[1]);
  std::printf("  coeffs:");
  for (double a : task.truth.coeffs) std::printf(" %.3f", a);
  std::printf("\n");

  AltSchedule sched{10, 10, alt, total, lr_a, lr_l, batch};
  Rng rng(mix_seed(11, {0x708, seed}));
  TrainerState st = alternating_train(task, sched, rng);
  std::printf("final loss %.3e  phase %s\n", st.final_loss, phase_name(st.phase));
  std::printf("final locations:");
  for (auto& l : st.param.locations) std::printf(" (%.2f,%.2f)", l[0], l[1]);
  std::printf("\ncoeffs:");
  for (double a : st.param.coeffs) std::printf(" %.3f", a);
  std::printf("\n");
  for (const auto& snap : st.snapshots) {
    if (snap.step % 200 != 0 && snap.step != st.step) continue;
    std::printf("step %5ld loss %.3e  loc:", static_cast<long>(snap.step),
                snap.step > 0 && snap.step <= (Index)st.loss_history.size()
                    ? st.loss_history[static_cast<std::size_t>(snap.step - 1)]
                    : 0.0);
    for (auto& l : snap.locations) std::printf(" (%.2f,%.2f)", l[0], l[1]);
    std::printf("\n");
  }
  return 0;
}
