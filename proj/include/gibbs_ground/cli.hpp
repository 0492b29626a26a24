#pragma once

// Batch front end: JSON model descriptions in, JSON reports and CSV tables out.

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gibbs_ground/classical.hpp"
#include "gibbs_ground/errors.hpp"
#include "gibbs_ground/lattice.hpp"
#include "gibbs_ground/model.hpp"
#include "gibbs_ground/spectral.hpp"
#include "gibbs_ground/verification.hpp"

namespace gibbs_ground {

inline constexpr int kSchemaVersion = 1;

struct Caps {
  std::size_t quantum_sites = kQuantumSiteCap;
  std::size_t dense_eigen_sites = kDenseEigenSiteCap;
  std::size_t classical_sites = kClassicalSiteCap;
};

struct RunConfig {
  std::size_t dimension = 1;
  std::size_t side_length = 1;
  CouplingTable couplings;
  std::string coupling_preset;  ///< empty when given explicitly
  std::string potential_preset;
  ClassicalPotential potential;
  std::vector<double> alphas;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  MetropolisOptions monte_carlo;
  Caps caps;

  Lattice lattice() const { return Lattice(dimension, side_length, kMaskWidth); }
  std::size_t sites() const { return lattice().size(); }
};

namespace detail {

using nlohmann::json;

inline std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing required field \"" + key + "\"");
  return j.at(key);
}

inline double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field + ": must be finite");
  return v;
}

inline std::size_t as_count(const json& j, const std::string& field) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw ConfigError(field + ": expected a nonnegative integer");
  }
  return j.get<std::size_t>();
}

inline SiteSet as_site_set(const json& j, std::size_t sites, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field + ": expected a list of site indices");
  SiteSet s;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto x = as_count(j[k], field + "[" + std::to_string(k) + "]");
    if (x >= sites) {
      throw ConfigError(field + "[" + std::to_string(k) + "]: site " + std::to_string(x) + " outside the lattice of " +
                        std::to_string(sites) + " sites");
    }
    if (s.contains(x)) throw ConfigError(field + ": site " + std::to_string(x) + " listed twice");
    s = s | SiteSet::of({x});
  }
  return s;
}

}  // namespace detail

/// Parses and validates a configuration document; presets are expanded to explicit tables.
inline RunConfig parse_config(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_and_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                      e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");

  RunConfig cfg;
  const auto& schema = detail::require(doc, "schema", "config");
  if (!schema.is_number_integer() || schema.get<int>() != kSchemaVersion) {
    throw ConfigError("schema: unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  }

  const auto& lat = detail::require(doc, "lattice", "config");
  cfg.dimension = detail::as_count(detail::require(lat, "dimension", "lattice"), "lattice.dimension");
  cfg.side_length = detail::as_count(detail::require(lat, "side_length", "lattice"), "lattice.side_length");
  std::optional<Lattice> lattice;
  try {
    lattice.emplace(cfg.dimension, cfg.side_length, kMaskWidth);
  } catch (const Error& e) {
    throw ConfigError(std::string("lattice: ") + e.what());
  }
  const auto n = lattice->size();

  if (doc.contains("caps")) {
    const auto& c = doc.at("caps");
    if (c.contains("quantum_sites")) cfg.caps.quantum_sites = detail::as_count(c.at("quantum_sites"), "caps.quantum_sites");
    if (c.contains("dense_eigen_sites")) {
      cfg.caps.dense_eigen_sites = detail::as_count(c.at("dense_eigen_sites"), "caps.dense_eigen_sites");
    }
    if (c.contains("classical_sites")) {
      cfg.caps.classical_sites = detail::as_count(c.at("classical_sites"), "caps.classical_sites");
    }
    if (cfg.caps.classical_sites > 40) throw ConfigError("caps.classical_sites: at most 40");
    if (cfg.caps.quantum_sites > 24) throw ConfigError("caps.quantum_sites: at most 24");
  }

  bool implied_linear_height = false;
  if (doc.contains("couplings")) {
    const auto& c = doc.at("couplings");
    if (c.is_object()) {
      const auto& preset = detail::require(c, "preset", "couplings");
      if (!preset.is_string()) throw ConfigError("couplings.preset: expected a string");
      cfg.coupling_preset = preset.get<std::string>();
      const double coupling = detail::as_number(detail::require(c, "J", "couplings"), "couplings.J");
      if (cfg.coupling_preset != "xx" && cfg.coupling_preset != "xxz") {
        throw ConfigError("couplings.preset: unknown preset \"" + cfg.coupling_preset + "\" (expected xx or xxz)");
      }
      cfg.couplings = xx_couplings(nearest_neighbor_pairs(*lattice), coupling);
      implied_linear_height = cfg.coupling_preset == "xxz";
    } else if (c.is_array()) {
      for (std::size_t k = 0; k < c.size(); ++k) {
        const std::string where = "couplings[" + std::to_string(k) + "]";
        const auto& e = c[k];
        CouplingEntry entry;
        entry.a = e.contains("A") ? detail::as_site_set(e.at("A"), n, where + ".A") : SiteSet{};
        entry.a_prime = e.contains("A_prime") ? detail::as_site_set(e.at("A_prime"), n, where + ".A_prime") : SiteSet{};
        entry.phi = detail::as_number(detail::require(e, "phi", where), where + ".phi");
        try {
          cfg.couplings.add(entry);
        } catch (const Error& err) {
          throw ConfigError(where + ": " + err.what());
        }
      }
    } else {
      throw ConfigError("couplings: expected a preset object or a list of entries");
    }
  }

  if (doc.contains("potential")) {
    if (implied_linear_height) throw ConfigError("potential: the xxz preset fixes U0 to the linear-height field");
    const auto& p = doc.at("potential");
    if (p.is_object()) {
      const auto& preset = detail::require(p, "preset", "potential");
      if (!preset.is_string()) throw ConfigError("potential.preset: expected a string");
      cfg.potential_preset = preset.get<std::string>();
      if (cfg.potential_preset == "ising-nn") {
        cfg.potential =
            ising_nearest_neighbor(*lattice, detail::as_number(detail::require(p, "K", "potential"), "potential.K"));
      } else if (cfg.potential_preset == "linear-height") {
        const double scale = p.contains("scale") ? detail::as_number(p.at("scale"), "potential.scale") : 1.0;
        auto u = linear_height_field(*lattice);
        for (auto& v : u) v *= scale;
        cfg.potential = linear_field(u);
      } else {
        throw ConfigError("potential.preset: unknown preset \"" + cfg.potential_preset +
                          "\" (expected ising-nn or linear-height)");
      }
    } else if (p.is_array()) {
      std::vector<PotentialTerm> terms;
      for (std::size_t k = 0; k < p.size(); ++k) {
        const std::string where = "potential[" + std::to_string(k) + "]";
        terms.push_back({detail::as_site_set(detail::require(p[k], "sites", where), n, where + ".sites"),
                         detail::as_number(detail::require(p[k], "c", where), where + ".c")});
      }
      try {
        cfg.potential = ClassicalPotential(std::move(terms));
      } catch (const Error& err) {
        throw ConfigError(std::string("potential: ") + err.what());
      }
    } else {
      throw ConfigError("potential: expected a preset object or a list of terms");
    }
  } else if (implied_linear_height) {
    cfg.potential_preset = "linear-height";
    cfg.potential = linear_field(linear_height_field(*lattice));
  }

  if (doc.contains("alpha") && doc.contains("alphas")) throw ConfigError("alphas: give either alpha or alphas, not both");
  if (doc.contains("alpha")) {
    cfg.alphas = {detail::as_number(doc.at("alpha"), "alpha")};
  } else if (doc.contains("alphas")) {
    const auto& a = doc.at("alphas");
    if (!a.is_array() || a.empty()) throw ConfigError("alphas: expected a nonempty list");
    for (std::size_t k = 0; k < a.size(); ++k) cfg.alphas.push_back(detail::as_number(a[k], "alphas[" + std::to_string(k) + "]"));
  } else {
    throw ConfigError("config: missing required field \"alpha\" (or \"alphas\")");
  }
  for (double a : cfg.alphas) {
    if (a < 0.0) throw ConfigError("alpha: must be nonnegative");
  }

  if (doc.contains("pairs")) {
    const auto& ps = doc.at("pairs");
    if (!ps.is_array()) throw ConfigError("pairs: expected a list of [x, y]");
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const std::string where = "pairs[" + std::to_string(k) + "]";
      if (!ps[k].is_array() || ps[k].size() != 2) throw ConfigError(where + ": expected [x, y]");
      const auto x = detail::as_count(ps[k][0], where + "[0]");
      const auto y = detail::as_count(ps[k][1], where + "[1]");
      if (x >= n || y >= n) throw ConfigError(where + ": site outside the lattice");
      if (x == y) throw ConfigError(where + ": a pair needs two distinct sites");
      cfg.pairs.emplace_back(x, y);
    }
  }

  if (doc.contains("trials")) cfg.trials = detail::as_count(doc.at("trials"), "trials");
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed: expected a nonnegative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("monte_carlo")) {
    const auto& mc = doc.at("monte_carlo");
    if (mc.contains("sweeps")) cfg.monte_carlo.sweeps = detail::as_count(mc.at("sweeps"), "monte_carlo.sweeps");
    if (mc.contains("burn_in")) cfg.monte_carlo.burn_in = detail::as_count(mc.at("burn_in"), "monte_carlo.burn_in");
    if (mc.contains("batches")) cfg.monte_carlo.batches = detail::as_count(mc.at("batches"), "monte_carlo.batches");
    if (cfg.monte_carlo.sweeps == 0) throw ConfigError("monte_carlo.sweeps: must be positive");
  }
  return cfg;
}

enum class Command { build, verify, correlate, sweep, sample };

inline Command parse_command(const std::string& name) {
  if (name == "build") return Command::build;
  if (name == "verify") return Command::verify;
  if (name == "correlate") return Command::correlate;
  if (name == "sweep") return Command::sweep;
  if (name == "sample") return Command::sample;
  throw ConfigError("unknown command \"" + name + "\"");
}

struct RunOptions {
  std::optional<std::uint64_t> seed;  ///< overrides the config seed
  unsigned threads = 1;
  bool timing = false;
};

struct CommandOutput {
  int exit_code = 0;
  std::string filename;
  std::string content;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json lattice_json(const RunConfig& cfg) {
  return {{"dimension", cfg.dimension}, {"side_length", cfg.side_length}, {"sites", cfg.sites()}};
}

inline json site_list(SiteSet s) { return s.sites(); }

inline json hypotheses_json(const HypothesisReport& h) {
  json odd = json::array();
  for (const auto& e : h.odd_entries) odd.push_back({{"A", site_list(e.a)}, {"A_prime", site_list(e.a_prime)}, {"phi", e.phi}});
  json viol = json::array();
  for (const auto& v : h.sign_violations) {
    viol.push_back({{"support", site_list(v.support)},
                    {"flipped_sites", site_list(SiteSet{v.config.bits})},
                    {"J_real", v.value.real()},
                    {"J_imag", v.value.imag()}});
  }
  return {{"passes", h.passes()}, {"odd_aprime_entries", odd}, {"sign_violations", viol}};
}

inline EnumerationOptions enumeration_options(const RunConfig& cfg, const RunOptions& opts) {
  return {cfg.caps.classical_sites, opts.threads};
}

inline void check_quantum(const RunConfig& cfg) {
  if (cfg.sites() > cfg.caps.quantum_sites) {
    throw SizeLimitError("quantum construction on " + std::to_string(cfg.sites()) + " sites", cfg.caps.quantum_sites);
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline CommandOutput run_build(const RunConfig& cfg) {
  check_quantum(cfg);
  const auto hyp = check_groundstate_hypotheses(cfg.couplings);
  json models = json::array();
  for (double alpha : cfg.alphas) {
    const ModelInstance m(cfg.lattice(), cfg.couplings, cfg.potential, alpha, cfg.caps.quantum_sites);
    const double hmax = m.h().max_abs();
    const double herm = m.h().hermiticity_deviation();
    models.push_back({{"alpha", alpha},
                      {"nonzeros", m.h().nonzeros()},
                      {"h_max_abs", hmax},
                      {"hermitian", herm <= kHermitianTolerance * hmax},
                      {"hermiticity_deviation", herm},
                      {"hermitian_relative_tolerance", kHermitianTolerance},
                      {"two_path_relative_deviation", m.two_path_deviation()},
                      {"two_path_relative_tolerance", kTwoPathTolerance},
                      {"union_sets", m.couplings().size()}});
  }
  json warnings = json::array();
  if (!hyp.passes()) warnings.push_back("statement-II hypotheses violated");
  json out = {{"command", "build"},
              {"schema", kSchemaVersion},
              {"lattice", lattice_json(cfg)},
              {"dimension", StateVector::dimension_of(cfg.sites())},
              {"coupling_entries", cfg.couplings.size()},
              {"potential_terms", cfg.potential.terms().size()},
              {"hypotheses", hypotheses_json(hyp)},
              {"models", models},
              {"warnings", warnings}};
  return {0, "build.json", dump(out)};
}

inline CommandOutput run_verify(const RunConfig& cfg, const RunOptions& opts) {
  check_quantum(cfg);
  VerifyOptions vo;
  vo.pairs = cfg.pairs;
  vo.trials = cfg.trials;
  vo.seed = opts.seed.value_or(cfg.seed);
  vo.timing = opts.timing;
  vo.spectral.dense_dimension_cap = std::size_t{1} << cfg.caps.dense_eigen_sites;
  bool ok = true;
  json models = json::array();
  for (double alpha : cfg.alphas) {
    const ModelInstance m(cfg.lattice(), cfg.couplings, cfg.potential, alpha, cfg.caps.quantum_sites);
    const auto report = verify_model(m, vo);
    ok = ok && report.all_asserted_passed();
    json checks = json::array();
    for (const auto& c : report.checks) {
      json rec = {{"name", c.name},         {"inputs_digest", c.inputs_digest}, {"values", c.values},
                  {"threshold", c.threshold}, {"passed", c.passed},             {"asserted", c.asserted}};
      if (!c.note.empty()) rec["note"] = c.note;
      if (c.wall_seconds) rec["wall_seconds"] = *c.wall_seconds;
      checks.push_back(rec);
    }
    models.push_back({{"alpha", alpha}, {"checks", checks}, {"all_asserted_passed", report.all_asserted_passed()}});
  }
  json out = {{"command", "verify"},
              {"schema", kSchemaVersion},
              {"seed", vo.seed},
              {"trials", vo.trials},
              {"lattice", lattice_json(cfg)},
              {"models", models},
              {"all_asserted_passed", ok}};
  return {ok ? 0 : 1, "verify.json", dump(out)};
}

inline CommandOutput run_correlate(const RunConfig& cfg, const RunOptions& opts) {
  const auto lattice = cfg.lattice();
  const auto n = lattice.size();
  const auto eo = enumeration_options(cfg, opts);
  std::string csv = "alpha,x,y,l,value,uncertainty,method\n";
  for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
    const double alpha = cfg.alphas[ai];
    std::optional<StateVector> psi;
    if (n <= cfg.caps.quantum_sites) psi = build_gibbs_state(cfg.potential, alpha, n, cfg.caps.quantum_sites);
    for (auto [x, y] : cfg.pairs) {
      const auto xy = SiteSet::of({x, y});
      for (int l : {1, 3}) {
        double value = 0.0;
        double unc = 0.0;
        std::string method;
        if (psi) {
          value = quantum_expectation(product_operator(axis_from_int(l), xy, n), *psi).value;
          unc = kReductionTolerance * std::abs(value);
          method = "quantum";
        } else if (n <= cfg.caps.classical_sites) {
          value = l == 3 ? classical_expectation([xy](SpinConfiguration s) { return s.product(xy); }, cfg.potential,
                                                 alpha, lattice, eo)
                         : classical_s1_expectation(cfg.potential, alpha, lattice, xy, eo);
          method = "exact";
        } else {
          MetropolisOptions mo = cfg.monte_carlo;
          mo.seed = opts.seed.value_or(cfg.seed) + ai;
          const auto& u0 = cfg.potential;
          ConfigurationFunctional f;
          if (l == 3) {
            f = [xy](SpinConfiguration s) { return static_cast<double>(s.product(xy)); };
          } else {
            f = [&u0, xy, alpha](SpinConfiguration s) { return std::exp(-0.5 * alpha * u0.flip_energy(s, xy)); };
          }
          const auto e = metropolis_estimate(f, cfg.potential, alpha, lattice, mo);
          value = e.estimate;
          unc = e.standard_error;
          method = "metropolis";
        }
        csv += fmt(alpha) + "," + std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(l) + "," +
               fmt(value) + "," + fmt(unc) + "," + method + "\n";
      }
    }
  }
  return {0, "correlate.csv", csv};
}

inline CommandOutput run_sweep(const RunConfig& cfg, const RunOptions& opts) {
  LroOptions lo;
  lo.enumeration = enumeration_options(cfg, opts);
  lo.metropolis = cfg.monte_carlo;
  lo.metropolis.seed = opts.seed.value_or(cfg.seed);
  const auto rows = lro_scan(cfg.potential, cfg.lattice(), cfg.pairs, cfg.alphas, lo);
  std::string csv = "alpha,x,y,method,s1s1,s1s1_stderr,s3s3,s3s3_stderr,m3_squared,m3_squared_stderr,m1,m1_stderr\n";
  for (const auto& r : rows) {
    csv += fmt(r.alpha) + "," + std::to_string(r.x) + "," + std::to_string(r.y) + "," + r.method + "," +
           fmt(r.s1s1.estimate) + "," + fmt(r.s1s1.standard_error) + "," + fmt(r.s3s3.estimate) + "," +
           fmt(r.s3s3.standard_error) + "," + fmt(r.m3_squared.estimate) + "," + fmt(r.m3_squared.standard_error) +
           "," + fmt(r.m1.estimate) + "," + fmt(r.m1.standard_error) + "\n";
  }
  return {0, "sweep.csv", csv};
}

inline CommandOutput run_sample(const RunConfig& cfg, const RunOptions& opts) {
  const auto lattice = cfg.lattice();
  const auto n = lattice.size();
  const std::uint64_t seed = opts.seed.value_or(cfg.seed);
  const auto& u0 = cfg.potential;
  json results = json::array();
  for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
    const double alpha = cfg.alphas[ai];
    std::vector<std::string> names{"m3_squared"};
    std::vector<ConfigurationFunctional> obs{[n](SpinConfiguration s) {
      const double m = magnetization(s, n);
      return m * m;
    }};
    for (auto [x, y] : cfg.pairs) {
      const auto xy = SiteSet::of({x, y});
      const std::string tag = "{" + std::to_string(x) + "," + std::to_string(y) + "}";
      names.push_back("s3s3" + tag);
      obs.emplace_back([xy](SpinConfiguration s) { return static_cast<double>(s.product(xy)); });
      names.push_back("s1s1" + tag);
      obs.emplace_back([&u0, xy, alpha](SpinConfiguration s) { return std::exp(-0.5 * alpha * u0.flip_energy(s, xy)); });
    }
    MetropolisOptions mo = cfg.monte_carlo;
    mo.seed = seed + ai;
    const auto res = metropolis_estimates(obs, u0, alpha, lattice, mo);
    json observables = json::array();
    for (std::size_t k = 0; k < names.size(); ++k) {
      observables.push_back({{"name", names[k]},
                             {"estimate", res.estimates[k].estimate},
                             {"standard_error", res.estimates[k].standard_error}});
    }
    results.push_back({{"alpha", alpha},
                       {"chain_seed", mo.seed},
                       {"acceptance_rate", res.acceptance_rate},
                       {"observables", observables}});
  }
  json out = {{"command", "sample"},
               {"schema", kSchemaVersion},
               {"seed", seed},
               {"sweeps", cfg.monte_carlo.sweeps},
               {"burn_in", cfg.monte_carlo.burn_in},
               {"batches", cfg.monte_carlo.batches},
               {"lattice", lattice_json(cfg)},
               {"results", results}};
  return {0, "sample.json", dump(out)};
}

inline const char* error_type(const std::exception& e) {
  if (dynamic_cast<const SizeLimitError*>(&e)) return "size_limit";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "non_convergence";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const ConstraintError*>(&e)) return "constraint";
  if (dynamic_cast<const InternalConsistencyError*>(&e)) return "internal_consistency";
  if (dynamic_cast<const UnsupportedModelError*>(&e)) return "unsupported_model";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  return "error";
}

}  // namespace detail

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitError = 2;

/// Error record emitted in place of the command's normal output.
inline CommandOutput error_output(const std::exception& e) {
  const nlohmann::json out = {{"error", {{"type", detail::error_type(e)}, {"message", e.what()}}}};
  return {kExitError, "error.json", detail::dump(out)};
}

/// Executes one command. Errors become structured records with exit status 2.
inline CommandOutput run_command(Command command, const RunConfig& cfg, const RunOptions& opts = {}) {
  try {
    switch (command) {
      case Command::build: return detail::run_build(cfg);
      case Command::verify: return detail::run_verify(cfg, opts);
      case Command::correlate: return detail::run_correlate(cfg, opts);
      case Command::sweep: return detail::run_sweep(cfg, opts);
      case Command::sample: return detail::run_sample(cfg, opts);
    }
  } catch (const Error& e) {
    return error_output(e);
  }
  return {kExitError, "error.json", "{}\n"};
}

}  // namespace gibbs_ground
