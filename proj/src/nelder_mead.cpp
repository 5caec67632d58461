#include "qsq/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qsq {

namespace {

struct Simplex {
  std::vector<std::vector<double>> points;
  std::vector<double> values;
};

NelderMeadResult run_once(const std::function<double(const std::vector<double>&)>& objective,
                          const std::vector<double>& start, double step,
                          const NelderMeadOptions& options, int budget) {
  const std::size_t n = start.size();
  Simplex s;
  s.points.assign(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) s.points[i + 1][i] += step;
  s.values.resize(n + 1);
  int evals = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    s.values[i] = objective(s.points[i]);
    ++evals;
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  bool converged = false;

  while (evals < budget) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        diameter = std::max(diameter, std::abs(s.points[i][k] - s.points[best][k]));
      }
    }
    if (s.values[worst] - s.values[best] <= options.f_tol && diameter <= options.x_tol) {
      converged = true;
      break;
    }
    if (diameter <= 1e-15) {
      converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += s.points[i][k];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double t, std::vector<double>& out) {
      for (std::size_t k = 0; k < n; ++k) out[k] = centroid[k] + t * (s.points[worst][k] - centroid[k]);
    };

    blend(-1.0, trial);
    const double fr = objective(trial);
    ++evals;
    if (fr < s.values[best]) {
      blend(-2.0, trial2);
      const double fe = objective(trial2);
      ++evals;
      if (fe < fr) {
        s.points[worst] = trial2;
        s.values[worst] = fe;
      } else {
        s.points[worst] = trial;
        s.values[worst] = fr;
      }
      continue;
    }
    if (fr < s.values[second]) {
      s.points[worst] = trial;
      s.values[worst] = fr;
      continue;
    }
    const bool outside = fr < s.values[worst];
    blend(outside ? -0.5 : 0.5, trial2);
    const double fc = objective(trial2);
    ++evals;
    if (fc < (outside ? fr : s.values[worst])) {
      s.points[worst] = trial2;
      s.values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k) {
        s.points[i][k] = s.points[best][k] + 0.5 * (s.points[i][k] - s.points[best][k]);
      }
      s.values[i] = objective(s.points[i]);
      ++evals;
    }
  }

  const auto it = std::min_element(s.values.begin(), s.values.end());
  const std::size_t best = static_cast<std::size_t>(it - s.values.begin());
  return NelderMeadResult{s.points[best], s.values[best], evals, converged};
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options) {
  NelderMeadResult result = run_once(objective, start, options.initial_step, options,
                                     options.max_evaluations);
  double step = options.initial_step;
  for (int r = 0; r < options.restarts && result.evaluations < options.max_evaluations; ++r) {
    // A collapsed simplex can stall away from the minimum; restart around the incumbent.
    step *= 0.1;
    NelderMeadResult next = run_once(objective, result.x, step, options,
                                     options.max_evaluations - result.evaluations);
    next.evaluations += result.evaluations;
    if (next.value <= result.value) {
      result = std::move(next);
    } else {
      result.evaluations = next.evaluations;
    }
  }
  return result;
}

}  // namespace qsq
