#include <fstream>
#include <iostream>

#include "cli_common.hpp"

using namespace qsq;

int main(int argc, char** argv) {
  CLI::App app{"Optimise a single-qudit probe for a spin sensing task"};
  int d = 3, restarts = 64;
  std::string task = "xy", out;
  std::uint64_t seed = 2024;
  app.add_option("--d", d, "local dimension")->required();
  app.add_option("--task", task, "encoded spin components")->check(CLI::IsMember({"x", "xy", "xyz"}));
  app.add_option("--restarts", restarts, "random restarts")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out, "result JSON (stdout when omitted)");
  if (const int rc = cli::parse(app, argc, argv); rc >= 0) return rc;

  return cli::guarded("qfim-optimize", [&] {
    if (d < 2) throw ConfigError("--d must be at least 2");
    OptimizerConfig cfg;
    cfg.restarts = restarts;
    cfg.seed = seed;
    const OptimizationResult r = optimize_probe(SensingTask::spin(d, task), cfg);
    Json j{{"d", d}, {"task", task}, {"seed", seed}, {"restarts", r.restarts_used},
           {"feasible_restarts", r.feasible_restarts}, {"feasible", r.feasible()}, {"converged", r.converged}};
    if (r.state) {
      j["state"] = vector_to_json(r.state->amplitudes());
      Json f = Json::array();
      for (Eigen::Index a = 0; a < r.qfim.rows(); ++a) {
        std::vector<double> row(r.qfim.cols());
        for (Eigen::Index b = 0; b < r.qfim.cols(); ++b) row[b] = r.qfim(a, b);
        f.push_back(row);
      }
      j["f"] = f;
      j["residual"] = r.commutativity_residual;
    } else {
      j["state"] = nullptr;
    }
    j["cost"] = r.cost.singular ? Json(nullptr) : Json(r.cost.value);
    const std::string text = j.dump(2);
    if (out.empty()) {
      std::cout << text << '\n';
    } else {
      std::ofstream os(out);
      if (!os) throw ConfigError("cannot write '" + out + "'");
      os << text << '\n';
      std::cout << (r.feasible() ? "cost " + std::to_string(r.cost.value) : std::string("infeasible")) << '\n';
    }
    return r.feasible() ? cli::kOk : cli::kInfeasible;
  });
}
