#include <cstdio>

#include "cli_common.hpp"
#include "qsq/povm_qutrit.hpp"

using namespace qsq;

int main(int argc, char** argv) {
  CLI::App app{"Check the qutrit POVM and its Naimark dilation"};
  long shots = 0;
  std::uint64_t seed = 1;
  int states = 1000;
  app.add_option("--shots", shots, "shots per estimate for the sampled check (0 disables)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "seed for random states and shots");
  app.add_option("--states", states, "random density matrices")->check(CLI::PositiveNumber);
  if (const int rc = cli::parse(app, argc, argv); rc >= 0) return rc;

  return cli::guarded("povm-verify", [&] {
    const povm::VerifyReport r = povm::verify(states, shots, seed);
    for (const auto& c : r.checks) {
      std::printf("%s  %-52s %.3e (tol %.1g)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.tolerance);
    }
    std::printf("reconstruction over %d states: max %.3e mean %.3e\n", r.states, r.max_reconstruction_error,
                r.mean_reconstruction_error);
    if (r.shots > 0) std::printf("shots %ld: rms error %.4e\n", r.shots, r.shot_rms_error);
    std::printf("%s\n", r.all_pass() ? "ALL PASS" : "FAILURES PRESENT");
    return r.all_pass() ? cli::kOk : cli::kFailure;
  });
}
