#pragma once

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "qsq/harness.hpp"

namespace qsq::cli {

inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kInfeasible = 2;
inline constexpr int kConfigError = 3;

/// QSQ_WORKERS sets the OpenMP thread count; nothing else is read from the environment.
inline void apply_workers() {
  const char* w = std::getenv("QSQ_WORKERS");
  if (!w || !*w) return;
  char* end = nullptr;
  const long n = std::strtol(w, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError(std::string("QSQ_WORKERS must be a positive integer, got '") + w + "'");
  omp_set_num_threads(static_cast<int>(n));
}

template <class F>
int guarded(const char* tool, F&& body) {
  try {
    apply_workers();
    return body();
  } catch (const harness::Infeasible& e) {
    std::fprintf(stderr, "%s: infeasible: %s\n", tool, e.what());
    return kInfeasible;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s: config error: %s\n", tool, e.what());
    return kConfigError;
  } catch (const UnsupportedCombination& e) {
    std::fprintf(stderr, "%s: config error: %s\n", tool, e.what());
    return kConfigError;
  } catch (const InvalidDimension& e) {
    std::fprintf(stderr, "%s: config error: %s\n", tool, e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: error: %s\n", tool, e.what());
    return kFailure;
  }
}

/// CLI11 parse with usage errors mapped to the config-error exit code.
inline int parse(CLI::App& app, int argc, char** argv) {
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  return -1;
}

}  // namespace qsq::cli
