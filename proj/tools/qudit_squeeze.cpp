#include <cstdio>
#include <iostream>

#include "cli_common.hpp"

using namespace qsq;

namespace {

void report(const harness::SweepResult& r) {
  std::printf("%-6s %-14s %-12s %-10s %s\n", "N", "xi2_op", "t_op", "witness", "trace");
  for (const auto& t : r.traces) {
    std::printf("%-6d %-14s %-12s %-10.4g %s\n", t.n_sites, format_double(t.xi2_op).c_str(),
                format_double(t.t_op).c_str(), t.witness, t.file.c_str());
  }
  if (r.fit) {
    std::printf("fit: k = %.4f  prefactor = %.4f  R2 = %.4f\n", r.fit->k, r.fit->prefactor, r.fit->r2);
  } else {
    std::printf("fit: fewer than four points\n");
  }
}

int sweep(harness::RunConfig c, const std::string& out_dir) {
  if (!out_dir.empty()) c.out_dir = out_dir;
  const harness::SweepResult r = harness::run_sweep(c);
  harness::emit_plotdata(r, c.out_dir);
  report(r);
  std::printf("summary: %s/%s_summary.json\n", c.out_dir.c_str(), c.prefix.c_str());
  return cli::kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Qudit squeezing sweeps, scaling fits and figure presets"};
  app.require_subcommand(1);
  std::string config, in, out_dir;
  double gamma = 0.0;

  CLI::App* run = app.add_subcommand("run", "sweep from a JSON configuration");
  run->add_option("--config", config, "configuration JSON")->required();
  CLI::App* fit = app.add_subcommand("fit", "power-law fit of a scaling CSV");
  fit->add_option("--in", in, "CSV with N and xi2_op columns")->required();
  CLI::App* fig2 = app.add_subcommand("fig2", "two-axis twisting size sweep");
  fig2->add_option("--out-dir", out_dir, "output directory");
  CLI::App* fig3 = app.add_subcommand("fig3", "power-law XY size sweep");
  fig3->add_option("--gamma", gamma, "interaction exponent")->required();
  fig3->add_option("--out-dir", out_dir, "output directory");
  if (const int rc = cli::parse(app, argc, argv); rc >= 0) return rc;

  return cli::guarded("qudit-squeeze", [&] {
    if (*run) return sweep(harness::load_run_config(config), "");
    if (*fig2) return sweep(harness::fig2_config(), out_dir);
    if (*fig3) {
      if (!(gamma >= 0.0)) throw ConfigError("--gamma must be non-negative");
      return sweep(harness::fig3_config(gamma), out_dir);
    }
    const harness::ScalingFit f = harness::fit_scaling(harness::read_scaling_csv(in));
    Json j{{"k", f.k}, {"prefactor", f.prefactor}, {"r2", f.r2}, {"n_points", f.points.size()}};
    std::cout << j.dump(2) << '\n';
    return cli::kOk;
  });
}
