#include "qsq/harness.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <omp.h>

#include "qsq/rng.hpp"

namespace qsq::harness {

namespace fs = std::filesystem;

namespace {

void require_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

HamiltonianSpec parse_hamiltonian(const Json& j) {
  require_keys(j, "hamiltonian", {"variant", "chi", "axes", "J0", "gamma", "V0", "terms"});
  if (!j.contains("variant")) throw ConfigError("hamiltonian.variant is required");
  const std::string v = upper(j.at("variant").get<std::string>());
  HamiltonianSpec h;
  if (v == "OAT") {
    h.variant = HamiltonianSpec::Variant::OAT;
  } else if (v == "TAT") {
    h.variant = HamiltonianSpec::Variant::TAT;
  } else if (v == "XY") {
    h.variant = HamiltonianSpec::Variant::XY;
  } else if (v == "CUSTOM") {
    h.variant = HamiltonianSpec::Variant::Custom;
  } else {
    throw ConfigError("unknown Hamiltonian variant '" + v + "'");
  }
  read(j, "chi", h.chi);
  read(j, "axes", h.oat_axes);
  read(j, "J0", h.J0);
  read(j, "gamma", h.gamma);
  read(j, "V0", h.V0);
  if (j.contains("terms")) {
    if (h.variant != HamiltonianSpec::Variant::Custom) throw ConfigError("terms are only valid for custom Hamiltonians");
    for (const Json& t : j.at("terms")) {
      require_keys(t, "hamiltonian.terms[]", {"sites", "op"});
      CustomTerm term;
      term.sites = t.at("sites").get<std::vector<int>>();
      try {
        term.op = HermitianOperator(operator_from_json(t.at("op")), 1e-10);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError(std::string("custom term: ") + e.what());
      }
      h.custom.push_back(std::move(term));
    }
  }
  return h;
}

Json hamiltonian_json(const HamiltonianSpec& h) {
  Json j{{"variant", to_string(h.variant)}};
  switch (h.variant) {
    case HamiltonianSpec::Variant::OAT:
      j["chi"] = h.chi;
      j["axes"] = h.oat_axes;
      break;
    case HamiltonianSpec::Variant::TAT:
      j["chi"] = h.chi;
      break;
    case HamiltonianSpec::Variant::XY:
      j["J0"] = h.J0;
      j["gamma"] = h.gamma;
      j["V0"] = h.V0;
      break;
    case HamiltonianSpec::Variant::Custom: {
      Json terms = Json::array();
      for (const auto& t : h.custom) terms.push_back({{"sites", t.sites}, {"op", operator_to_json(t.op.matrix())}});
      j["terms"] = terms;
      break;
    }
  }
  return j;
}

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

void finish_trace(Trace& t) {
  for (const auto& r : t.records) {
    if (r.singular || !std::isfinite(r.xi2)) {
      ++t.singular_rows;
      continue;
    }
    if (r.xi2 < t.xi2_op) {
      t.xi2_op = r.xi2;
      t.xi2_op_err = r.xi2_err;
      t.t_op = r.time;
    }
  }
  t.witness = witness_diagnostic(t.xi2_op, t.n_sites);
}

std::string trace_name(const RunConfig& c, int n) { return c.prefix + "_N" + std::to_string(n) + ".csv"; }

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + path + "'");
  return os;
}

}  // namespace

std::string to_string(BackendKind b) {
  switch (b) {
    case BackendKind::Dense:
      return "DENSE";
    case BackendKind::Symmetric:
      return "SYMMETRIC";
    case BackendKind::Gdtwa:
      return "GDTWA";
  }
  return "?";
}

BackendKind backend_kind_from_string(const std::string& s) {
  const std::string u = upper(s);
  if (u == "DENSE") return BackendKind::Dense;
  if (u == "SYMMETRIC") return BackendKind::Symmetric;
  if (u == "GDTWA") return BackendKind::Gdtwa;
  throw ConfigError("unknown backend '" + s + "'");
}

std::vector<double> TimeGrid::for_size(int n_sites, const HamiltonianSpec& spec) const {
  if (!times.empty()) return times;
  double tmax = t_max;
  if (per_coupling) {
    const double jeff = power_law_couplings(n_sites, spec.J0, spec.gamma).sum() / n_sites;
    tmax = std::min(cap, coefficient / jeff);
  } else if (coefficient > 0.0) {
    tmax = std::min(cap, coefficient / std::pow(static_cast<double>(n_sites), exponent));
  }
  std::vector<double> t(points);
  for (int i = 0; i < points; ++i) t[i] = points > 1 ? tmax * i / (points - 1) : 0.0;
  return t;
}

void RunConfig::validate() const {
  if (d < 2) throw ConfigError("task.d must be at least 2");
  if (axes.empty()) throw ConfigError("task.axes must not be empty");
  if (n_list.empty()) throw ConfigError("N list is empty");
  for (int n : n_list) {
    if (n < 1) throw ConfigError("every N must be positive");
  }
  if (std::set<int>(n_list.begin(), n_list.end()).size() != n_list.size()) throw ConfigError("N list has duplicates");
  if (reference.kind == ReferenceSpec::Kind::Basis && (reference.basis_index < 0 || reference.basis_index >= d)) {
    throw ConfigError("reference.basis out of range");
  }
  if (reference.kind == ReferenceSpec::Kind::Amplitudes && reference.amplitudes.size() != d) {
    throw ConfigError("reference.amplitudes must have d entries");
  }
  const bool xy = hamiltonian.variant == HamiltonianSpec::Variant::XY;
  if (backend == BackendKind::Symmetric) {
    if (xy && hamiltonian.gamma != 0.0) throw ConfigError("SYMMETRIC backend needs a collective Hamiltonian (XY with gamma = 0)");
    if (hamiltonian.variant == HamiltonianSpec::Variant::Custom) throw ConfigError("SYMMETRIC backend cannot host site-resolved custom terms");
  }
  if (backend == BackendKind::Dense) {
    for (int n : n_list) {
      if (std::pow(static_cast<double>(d), n) > static_cast<double>(kDenseLimit)) {
        throw ConfigError("DENSE backend limited to d^N <= " + std::to_string(kDenseLimit));
      }
    }
  }
  if (!grid.times.empty()) {
    if (grid.times.front() < 0.0) throw ConfigError("t grid must start at or after zero");
    for (std::size_t i = 1; i < grid.times.size(); ++i) {
      if (!(grid.times[i] > grid.times[i - 1])) throw ConfigError("t grid must be strictly increasing");
    }
  } else {
    if (grid.points < 1) throw ConfigError("t_grid.points must be positive");
    if (grid.per_coupling && !xy) throw ConfigError("per_coupling windows need the XY Hamiltonian");
    if (grid.per_coupling && !(grid.coefficient > 0.0)) throw ConfigError("per_coupling windows need a coefficient");
    if (grid.points > 1 && !(grid.t_max > 0.0) && !(grid.coefficient > 0.0)) {
      throw ConfigError("t_grid needs t_max or a coefficient");
    }
  }
  if (backend == BackendKind::Gdtwa) {
    if (gdtwa.n_traj < 2 || gdtwa.jackknife_blocks < 2) throw ConfigError("gdtwa needs n_traj >= 2 and at least two blocks");
    if (!(gdtwa.dt > 0.0)) throw ConfigError("gdtwa.dt must be positive");
  }
}

RunConfig parse_run_config(const Json& j) {
  require_keys(j, "config", {"task", "reference", "hamiltonian", "backend", "N", "t_grid", "gdtwa", "kappa", "krylov",
                             "seed", "output"});
  RunConfig c;
  try {
    if (j.contains("task")) {
      const Json& t = j.at("task");
      require_keys(t, "task", {"d", "axes"});
      read(t, "d", c.d);
      read(t, "axes", c.axes);
    }
    if (j.contains("reference")) {
      const Json& r = j.at("reference");
      require_keys(r, "reference", {"basis", "amplitudes", "optimize"});
      if (r.size() != 1) throw ConfigError("reference takes exactly one of basis, amplitudes, optimize");
      if (r.contains("basis")) {
        c.reference.kind = ReferenceSpec::Kind::Basis;
        read(r, "basis", c.reference.basis_index);
      } else if (r.contains("amplitudes")) {
        c.reference.kind = ReferenceSpec::Kind::Amplitudes;
        c.reference.amplitudes = vector_from_json(r.at("amplitudes"));
      } else {
        c.reference.kind = ReferenceSpec::Kind::Optimize;
        const Json& o = r.at("optimize");
        require_keys(o, "reference.optimize", {"restarts", "seed"});
        read(o, "restarts", c.reference.optimizer.restarts);
        read(o, "seed", c.reference.optimizer.seed);
      }
    }
    if (!j.contains("hamiltonian")) throw ConfigError("hamiltonian is required");
    c.hamiltonian = parse_hamiltonian(j.at("hamiltonian"));
    if (j.contains("backend")) c.backend = backend_kind_from_string(j.at("backend").get<std::string>());
    if (!j.contains("N")) throw ConfigError("N is required");
    read(j, "N", c.n_list);
    if (j.contains("t_grid")) {
      const Json& g = j.at("t_grid");
      require_keys(g, "t_grid", {"times", "points", "t_max", "coefficient", "exponent", "per_coupling", "cap"});
      read(g, "times", c.grid.times);
      read(g, "points", c.grid.points);
      read(g, "t_max", c.grid.t_max);
      read(g, "coefficient", c.grid.coefficient);
      read(g, "exponent", c.grid.exponent);
      read(g, "per_coupling", c.grid.per_coupling);
      read(g, "cap", c.grid.cap);
    }
    if (j.contains("gdtwa")) {
      const Json& g = j.at("gdtwa");
      require_keys(g, "gdtwa", {"n_traj", "dt", "jackknife_blocks", "validate_dt", "probe_traj", "probe_tolerance"});
      read(g, "n_traj", c.gdtwa.n_traj);
      read(g, "dt", c.gdtwa.dt);
      read(g, "jackknife_blocks", c.gdtwa.jackknife_blocks);
      read(g, "validate_dt", c.gdtwa.validate_dt);
      read(g, "probe_traj", c.gdtwa.probe_traj);
      read(g, "probe_tolerance", c.gdtwa.probe_tolerance);
    }
    if (j.contains("kappa")) {
      const Json& k = j.at("kappa");
      require_keys(k, "kappa", {"grid", "tolerance", "self_consistent_g"});
      read(k, "grid", c.kappa.grid);
      read(k, "tolerance", c.kappa.tolerance);
      read(k, "self_consistent_g", c.kappa.self_consistent_g);
    }
    if (j.contains("krylov")) {
      const Json& k = j.at("krylov");
      require_keys(k, "krylov", {"subspace", "tolerance"});
      read(k, "subspace", c.krylov.subspace);
      read(k, "tolerance", c.krylov.tolerance);
    }
    read(j, "seed", c.seed);
    if (j.contains("output")) {
      const Json& o = j.at("output");
      require_keys(o, "output", {"dir", "prefix"});
      read(o, "dir", c.out_dir);
      read(o, "prefix", c.prefix);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(is);
  } catch (const Json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_run_config(j);
}

Json to_json(const RunConfig& c) {
  Json j;
  j["task"] = {{"d", c.d}, {"axes", c.axes}};
  switch (c.reference.kind) {
    case ReferenceSpec::Kind::Basis:
      j["reference"] = {{"basis", c.reference.basis_index}};
      break;
    case ReferenceSpec::Kind::Amplitudes:
      j["reference"] = {{"amplitudes", vector_to_json(c.reference.amplitudes)}};
      break;
    case ReferenceSpec::Kind::Optimize:
      j["reference"] = {{"optimize", {{"restarts", c.reference.optimizer.restarts}, {"seed", c.reference.optimizer.seed}}}};
      break;
  }
  j["hamiltonian"] = hamiltonian_json(c.hamiltonian);
  j["backend"] = to_string(c.backend);
  j["N"] = c.n_list;
  Json g;
  if (!c.grid.times.empty()) {
    g["times"] = c.grid.times;
  } else {
    g["points"] = c.grid.points;
    if (c.grid.t_max > 0.0) g["t_max"] = c.grid.t_max;
    if (c.grid.coefficient > 0.0) {
      g["coefficient"] = c.grid.coefficient;
      if (c.grid.per_coupling) {
        g["per_coupling"] = true;
      } else {
        g["exponent"] = c.grid.exponent;
      }
    }
    if (std::isfinite(c.grid.cap)) g["cap"] = c.grid.cap;
  }
  j["t_grid"] = g;
  j["gdtwa"] = {{"n_traj", c.gdtwa.n_traj},
                {"dt", c.gdtwa.dt},
                {"jackknife_blocks", c.gdtwa.jackknife_blocks},
                {"validate_dt", c.gdtwa.validate_dt},
                {"probe_traj", c.gdtwa.probe_traj},
                {"probe_tolerance", c.gdtwa.probe_tolerance}};
  j["kappa"] = {{"grid", c.kappa.grid}, {"tolerance", c.kappa.tolerance}, {"self_consistent_g", c.kappa.self_consistent_g}};
  j["krylov"] = {{"subspace", c.krylov.subspace}, {"tolerance", c.krylov.tolerance}};
  j["seed"] = c.seed;
  j["output"] = {{"dir", c.out_dir}, {"prefix", c.prefix}};
  return j;
}

ScalingFit fit_scaling(const std::vector<ScalingPoint>& points) {
  if (points.size() < 4) throw ConfigError("scaling fit needs at least four points");
  const std::size_t n = points.size();
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    if (!(p.n > 0.0) || !(p.xi2 > 0.0) || !std::isfinite(p.xi2) || !std::isfinite(p.n)) {
      throw ConfigError("scaling fit needs positive finite N and xi2");
    }
    mx += std::log(p.n);
    my += std::log(p.xi2);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(p.n) - mx, dy = std::log(p.xi2) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw ConfigError("scaling fit needs at least two distinct N");
  ScalingFit f;
  f.points = points;
  const double slope = sxy / sxx;
  f.k = -slope;
  f.prefactor = std::exp(my - slope * mx);
  double ss_res = 0.0;
  for (const auto& p : points) {
    const double r = std::log(p.xi2) - (my + slope * (std::log(p.n) - mx));
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return f;
}

double witness_diagnostic(double xi2, int n_sites) {
  if (std::isinf(xi2) && xi2 > 0) return 0.0;
  if (!(xi2 > 0.0)) return NAN;
  return n_sites / std::sqrt(xi2);
}

PureState resolve_reference(const RunConfig& config) {
  switch (config.reference.kind) {
    case ReferenceSpec::Kind::Basis:
      return PureState::basis(config.d, config.reference.basis_index);
    case ReferenceSpec::Kind::Amplitudes:
      return PureState::normalized(config.reference.amplitudes);
    case ReferenceSpec::Kind::Optimize: {
      const OptimizationResult r = optimize_probe(SensingTask::spin(config.d, config.axes), config.reference.optimizer);
      if (!r.feasible()) throw Infeasible("no weakly commuting probe with a regular QFIM for this task");
      return *r.state;
    }
  }
  throw ConfigError("unknown reference kind");
}

Trace run_point(const RunConfig& config, int n, const ReadoutSet& readout) {
  Trace t;
  t.n_sites = n;
  const std::vector<double> grid = config.grid.for_size(n, config.hamiltonian);
  if (config.backend == BackendKind::Gdtwa) {
    GdtwaConfig g = config.gdtwa;
    g.t_grid = grid;
    g.master_seed = stream_seed(config.seed, static_cast<std::uint64_t>(n));
    g.kappa = config.kappa;
    const GdtwaResult res = run_gdtwa(g, config.hamiltonian, n, readout);
    for (const auto& r : res.records) t.records.push_back(r.record);
    t.probe_change = res.probe_change;
  } else {
    const Ensemble e =
        config.backend == BackendKind::Dense ? Ensemble::dense(n, config.d) : Ensemble::symmetric(n, config.d);
    const Hamiltonian h = build_hamiltonian(config.hamiltonian, e, &readout);
    const CollectiveReadout cr(e, readout);
    const bool sc = config.kappa.self_consistent_g;
    evolve(
        product_state(e, readout.reference), h, grid,
        [&](const EnsembleState& s) {
          t.records.push_back(
              make_record(s.time, cr.moments(s), readout.sql_cost, config.kappa, sc ? cr.spin_commutators(s) : RMatrix()));
        },
        config.krylov);
  }
  finish_trace(t);
  return t;
}

Json SweepResult::summary() const {
  Json j;
  j["schema"] = kSummarySchema;
  j["config"] = to_json(config);
  j["sql_cost"] = sql_cost;
  Json pts = Json::array();
  for (const auto& t : traces) {
    pts.push_back({{"N", t.n_sites},
                   {"xi2_op", number_or_null(t.xi2_op)},
                   {"xi2_op_err", number_or_null(t.xi2_op_err)},
                   {"t_op", number_or_null(t.t_op)},
                   {"witness_trF_lower_bound", number_or_null(t.witness)},
                   {"singular_rows", t.singular_rows},
                   {"rows", t.records.size()},
                   {"dt_probe_change", t.probe_change},
                   {"trace", t.file}});
  }
  j["points"] = pts;
  if (fit) {
    j["fit"] = {{"k", fit->k}, {"prefactor", fit->prefactor}, {"r2", fit->r2}, {"n_points", fit->points.size()}};
    if (fit->gamma) j["fit"]["gamma"] = *fit->gamma;
  } else {
    j["fit"] = nullptr;
  }
  return j;
}

SweepResult run_sweep(const RunConfig& config, bool write_files) {
  config.validate();
  SweepResult res;
  res.config = config;
  const SensingTask task = SensingTask::spin(config.d, config.axes);
  const ReadoutSet readout = build_readout(resolve_reference(config), task);
  res.sql_cost = readout.sql_cost;
  for (int a = 0; a < task.k(); ++a) res.labels.push_back(task.label(a));
  if (write_files) fs::create_directories(config.out_dir);

  const int m = static_cast<int>(config.n_list.size());
  res.traces.resize(m);
  std::vector<std::exception_ptr> errors(m);
  auto one = [&](int i) {
    try {
      Trace& t = res.traces[i];
      t = run_point(config, config.n_list[i], readout);
      if (write_files) {
        t.file = trace_name(config, t.n_sites);
        std::ofstream os = open_out((fs::path(config.out_dir) / t.file).string());
        write_trace_csv(os, t.records, res.labels,
                        std::string(kTraceSchema) + " backend=" + to_string(config.backend) + " N=" +
                            std::to_string(t.n_sites));
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  // GDTWA parallelises over trajectory blocks inside each point.
  if (config.backend == BackendKind::Gdtwa) {
    for (int i = 0; i < m; ++i) one(i);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < m; ++i) one(i);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<ScalingPoint> pts;
  for (const auto& t : res.traces) {
    if (std::isfinite(t.xi2_op) && t.xi2_op > 0.0) pts.push_back({static_cast<double>(t.n_sites), t.xi2_op});
  }
  if (pts.size() >= 4) {
    res.fit = fit_scaling(pts);
    if (config.hamiltonian.variant == HamiltonianSpec::Variant::XY) res.fit->gamma = config.hamiltonian.gamma;
  }
  if (write_files) {
    std::ofstream os = open_out((fs::path(config.out_dir) / (config.prefix + "_summary.json")).string());
    os << res.summary().dump(2) << '\n';
    write_scaling_csv((fs::path(config.out_dir) / (config.prefix + "_scaling.csv")).string(), res);
  }
  return res;
}

void write_scaling_csv(const std::string& path, const SweepResult& result) {
  const bool err = result.config.backend == BackendKind::Gdtwa;
  std::ofstream os = open_out(path);
  os << "# " << kScalingSchema << '\n';
  os << "N,xi2_op,t_op" << (err ? ",xi2_op_err" : "") << '\n';
  for (const auto& t : result.traces) {
    os << t.n_sites << ',' << format_double(t.xi2_op) << ',' << format_double(t.t_op);
    if (err) os << ',' << format_double(t.xi2_op_err);
    os << '\n';
  }
}

std::vector<ScalingPoint> read_scaling_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  const CsvTable t = read_csv(is);
  const std::size_t cn = t.column("N"), cx = t.column("xi2_op");
  std::vector<ScalingPoint> pts;
  for (const auto& r : t.rows) pts.push_back({r[cn], r[cx]});
  return pts;
}

std::vector<std::string> emit_plotdata(const SweepResult& result, const std::string& dir) {
  fs::create_directories(dir);
  const bool err = result.config.backend == BackendKind::Gdtwa;
  std::vector<std::string> paths;
  for (const auto& t : result.traces) {
    const std::string p = (fs::path(dir) / (result.config.prefix + "_plot_N" + std::to_string(t.n_sites) + ".csv")).string();
    std::ofstream os = open_out(p);
    os << "# " << kPlotSchema << " N=" << t.n_sites << '\n';
    os << "t,xi2" << (err ? ",xi2_err" : "") << '\n';
    for (const auto& r : t.records) {
      os << format_double(r.time) << ',' << format_double(r.singular ? INFINITY : r.xi2);
      if (err) os << ',' << format_double(r.xi2_err);
      os << '\n';
    }
    paths.push_back(p);
  }
  const std::string s = (fs::path(dir) / (result.config.prefix + "_scaling.csv")).string();
  write_scaling_csv(s, result);
  paths.push_back(s);
  return paths;
}

RunConfig fig2_config() {
  RunConfig c;
  c.d = 3;
  c.axes = "xy";
  c.reference.basis_index = 1;
  c.hamiltonian = HamiltonianSpec::tat(1.0);
  c.backend = BackendKind::Symmetric;
  c.n_list = {8, 16, 32, 64, 128, 256};
  c.grid.points = 200;
  c.grid.coefficient = 0.3;
  c.grid.exponent = 0.7;
  c.out_dir = "fig2";
  c.prefix = "fig2";
  return c;
}

RunConfig fig3_config(double gamma) {
  RunConfig c;
  c.d = 3;
  c.axes = "xy";
  c.reference.basis_index = 1;
  c.hamiltonian = HamiltonianSpec::xy(1.0, gamma, 2.0);
  c.backend = BackendKind::Gdtwa;
  c.n_list = {16, 32, 64, 128};
  c.grid.points = 200;
  c.grid.coefficient = 4.0;
  c.grid.per_coupling = true;
  c.grid.cap = 0.3;
  c.gdtwa.n_traj = 2000;
  std::ostringstream name;
  name << "fig3_gamma" << gamma;
  c.out_dir = name.str();
  c.prefix = name.str();
  return c;
}

}  // namespace qsq::harness
