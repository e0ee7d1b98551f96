// Copyright 2026 The wignerlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/**
 * @file
 * Command-line front end.
 *
 *   wignerlab run [PATH] [--policy P] [--event R=L,...] [--given R=L,...]
 *   wignerlab sample [PATH] --n N --seed S [--policy P]
 *   wignerlab audit [PATH] [--tol T]
 *   wignerlab interference [PATH] [--tol T]
 *   wignerlab builtin NAME [--policy P] [--reps K] [--emit-scenario]
 *
 * PATH may also be given as --scenario PATH. Every command takes
 * --out {table|structured}. Exit status: 0 success, 1 usage, 2 scenario
 * file or parse error, 3 numerical or internal failure.
 * WIGNERLAB_DIM_CAP overrides the dimension cap.
 */

#pragma once

#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "wignerlab/evaluate.hpp"
#include "wignerlab/frlab.hpp"
#include "wignerlab/interference.hpp"
#include "wignerlab/render.hpp"
#include "wignerlab/scenario_io.hpp"

namespace wignerlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitScenario = 2;
inline constexpr int kExitNumerical = 3;

struct CliConfig {
  std::string command;
  std::string scenario_path;
  std::string builtin;
  std::string policy = "unitary-agents";
  std::uint64_t n = 1000;
  std::uint64_t seed = 0;
  double tolerance = kWeightTolerance;
  std::string out = "table";
  std::string event;
  std::string given;
  std::size_t repetitions = 1;
  bool emit_scenario = false;
};

namespace detail {

class UsageError : public Error {
 public:
  using Error::Error;
};

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"fr",       "fr-reversed", "fr-diagnostic", "fr-theta",
                                              "footnote", "doubleslit",  "doubleslit-detector", "statements"};
  return names;
}

inline Scenario builtin_scenario(const CliConfig& cfg) {
  const std::string& b = cfg.builtin;
  if (b == "fr") return build_fr_scenario();
  if (b == "fr-reversed") return build_fr_scenario(FrOrder::kWFirst);
  if (b == "fr-diagnostic") return build_fr_diagnostic_scenario();
  if (b == "fr-theta") return build_fr_theta_scenario();
  if (b == "footnote") return build_footnote_paradox(cfg.repetitions);
  if (b == "doubleslit") return build_double_slit_scenario(false);
  if (b == "doubleslit-detector") return build_double_slit_scenario(true);
  throw UsageError("unknown builtin '" + b + "'");
}

inline Scenario load_for(const CliConfig& cfg) {
  if (cfg.scenario_path.empty()) throw UsageError("no scenario given");
  if (!std::filesystem::exists(cfg.scenario_path))
    throw ScenarioError("file not found: '" + cfg.scenario_path + "'");
  return load_scenario(cfg.scenario_path);
}

inline Policy policy_of(const CliConfig& cfg) {
  if (auto p = parse_policy(cfg.policy)) return *p;
  throw UsageError("unknown policy '" + cfg.policy + "'");
}

inline OutputMode mode_of(const CliConfig& cfg) {
  if (cfg.out == "table") return OutputMode::kTable;
  if (cfg.out == "structured") return OutputMode::kStructured;
  throw UsageError("unknown output mode '" + cfg.out + "'");
}

/// "R=L,R=L" → conjunction.
inline Predicate parse_predicate(const std::string& text) {
  Predicate p;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string term = text.substr(start, end - start);
    const std::size_t eq = term.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == term.size())
      throw UsageError("predicate term '" + term + "' is not RECORD=LABEL");
    p.terms.push_back({term.substr(0, eq), term.substr(eq + 1)});
    start = end + 1;
  }
  return p;
}

inline std::string render_conditional(const CliConfig& cfg, const ConditionalResult& q, OutputMode mode) {
  if (mode == OutputMode::kStructured) {
    nlohmann::json j{{"schema", kSchemaVersion}, {"command", "conditional"}, {"event", cfg.event},
                     {"given", cfg.given},       {"valid", q.valid},         {"collapsed", q.collapsed},
                     {"gap", round12(q.gap)}};
    j["value"] = q.valid ? nlohmann::json(round12(q.value)) : nlohmann::json(nullptr);
    return j.dump(2) + "\n";
  }
  std::string out = "P(" + cfg.event + " | " + cfg.given + ") = ";
  out += q.valid ? format_probability(q.value) + "  [VALID]\n" : std::string("undefined  [INVALID]\n");
  if (!q.collapsed.empty()) out += "# collapsed: " + join(q.collapsed, ",") + "  gap " + format_g(q.gap) + "\n";
  return out;
}

inline std::string run_command(const CliConfig& cfg, const Scenario& s) {
  const OutputMode mode = mode_of(cfg);
  const RunResult r = evaluate(s, policy_of(cfg));
  if (!cfg.event.empty() || !cfg.given.empty()) {
    if (cfg.event.empty()) throw UsageError("--given needs --event");
    const Predicate given = cfg.given.empty() ? Predicate{} : parse_predicate(cfg.given);
    return render_conditional(cfg, conditional_probability(r, parse_predicate(cfg.event), given, cfg.tolerance), mode);
  }
  std::string out = render_run(r, mode);
  if (mode == OutputMode::kTable) out += render_marginal_summary(r);
  return out;
}

/// For every agent record and every later external step: the interference
/// of each outcome projector of that step, at each branch state just before
/// it, against the agent's record decomposition.
inline std::string interference_command(const CliConfig& cfg, const Scenario& s) {
  const OutputMode mode = mode_of(cfg);
  const auto cp = s.compiled_ptr();
  const CompiledScenario& c = *cp;
  nlohmann::json rows = nlohmann::json::array();
  std::string out = "# tolerance: " + format_g(cfg.tolerance) + "\n";
  for (const auto& agent : c.records) {
    if (!agent.agent) continue;
    const auto& d = c.steps[agent.step].outcomes->decomposition();
    for (const auto& later : c.records) {
      if (later.agent || later.step < agent.step) continue;
      const RunResult pre = evaluate_with(cp, std::vector<bool>(c.steps.size(), false), later.step);
      const auto& outcomes = c.steps[later.step].outcomes->decomposition();
      for (std::size_t m = 0; m < outcomes.size(); ++m) {
        const SelfAdjointOperator proj(c.layout, outcomes.projector(m));
        double max_term = 0.0, sup = 0.0, mix = 0.0;
        for (const auto& b : pre.branches) {
          const auto rep = block_interference_report(proj, d, b.state, cfg.tolerance);
          max_term = std::max(max_term, rep.max_abs_term);
          sup += b.weight * rep.superposition_expectation;
          mix += b.weight * rep.mixture_expectation;
        }
        const bool safe = max_term <= cfg.tolerance;
        rows.push_back({{"agent", agent.name}, {"later", later.name}, {"outcome", outcomes.block(m).label},
                        {"superposition", round12(sup)}, {"mixture", round12(mix)},
                        {"max_abs_term", round12(max_term)}, {"safe", safe}});
        out += agent.name + " vs " + later.name + "=" + outcomes.block(m).label + ": superposition " + format_g(sup) +
               ", mixture " + format_g(mix) + ", max |term| " + format_g(max_term) + (safe ? "  safe" : "  UNSAFE") +
               "\n";
      }
    }
  }
  if (mode == OutputMode::kStructured)
    return nlohmann::json{{"schema", kSchemaVersion}, {"command", "interference"}, {"tolerance", cfg.tolerance},
                          {"rows", rows}}
               .dump(2) +
           "\n";
  return out;
}

inline std::string double_slit_text(const DoubleSlitReport& d, OutputMode mode) {
  if (mode == OutputMode::kStructured) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [jk, t] : d.interference.terms) terms.push_back({{"j", jk.first}, {"k", jk.second}, {"term", round12(t)}});
    return nlohmann::json{{"schema", kSchemaVersion},
                          {"command", "doubleslit"},
                          {"superposition_expectation", round12(d.interference.superposition_expectation)},
                          {"mixture_expectation", round12(d.interference.mixture_expectation)},
                          {"terms", terms},
                          {"plain_expectation", round12(d.plain_expectation)},
                          {"detected_unitary_expectation", round12(d.detected_unitary_expectation)},
                          {"detected_collapse_expectation", round12(d.detected_collapse_expectation)}}
               .dump(2) +
           "\n";
  }
  std::string out = "# screen observable at (upper + lower)/sqrt(2), slit basis upper,lower\n";
  out += render_interference(d.interference, {"upper", "lower"});
  out += "screen expectation without detector: " + format_g(d.plain_expectation) + "\n";
  out += "screen expectation with detector, unitary-agents: " + format_g(d.detected_unitary_expectation) + "\n";
  out += "screen expectation with detector, collapse-on-record (naive): " +
         format_g(d.detected_collapse_expectation) + "\n";
  out += "detector readout: " + format_g(d.readout[0].probability) + " / " + format_g(d.readout[1].probability) + "\n";
  return out;
}

inline std::string builtin_command(const CliConfig& cfg) {
  const OutputMode mode = mode_of(cfg);
  if (cfg.builtin == "statements") {
    if (cfg.emit_scenario) throw UsageError("'statements' has no single scenario");
    return render_statements(statement_reports(), mode);
  }
  const Scenario s = builtin_scenario(cfg);
  if (cfg.emit_scenario) return serialize_scenario(s);
  std::string out = run_command(cfg, s);
  if (cfg.builtin == "doubleslit" && cfg.event.empty() && cfg.given.empty() && mode == OutputMode::kTable)
    out += double_slit_text(build_double_slit(), mode);
  return out;
}

inline void apply_dimension_cap_env() {
  const char* v = std::getenv("WIGNERLAB_DIM_CAP");
  if (!v || !*v) return;
  char* end = nullptr;
  const unsigned long long cap = std::strtoull(v, &end, 10);
  if (*end != '\0' || cap == 0) throw UsageError(std::string("WIGNERLAB_DIM_CAP must be a positive integer, got '") + v + "'");
  set_dimension_cap(static_cast<std::size_t>(cap));
}

}  // namespace detail

/// Runs one command; output and diagnostics go to the given streams.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"wignerlab: multi-agent measurement scenarios"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto common = [&](CLI::App* sub, bool takes_path) {
    if (takes_path) {
      sub->add_option("path", cfg.scenario_path, "scenario file (.scn)");
      sub->add_option("--scenario", cfg.scenario_path, "scenario file (.scn)");
    }
    sub->add_option("--out", cfg.out, "output mode")->check(CLI::IsMember({"table", "structured"}));
  };
  auto with_policy = [&](CLI::App* sub) {
    sub->add_option("--policy", cfg.policy, "evaluation policy")
        ->check(CLI::IsMember({"unitary-agents", "collapse-on-record"}));
  };
  auto with_tol = [&](CLI::App* sub) {
    sub->add_option("--tol", cfg.tolerance, "safety tolerance")->check(CLI::PositiveNumber);
  };
  auto with_query = [&](CLI::App* sub) {
    sub->add_option("--event", cfg.event, "conditional query event, RECORD=LABEL[,...]");
    sub->add_option("--given", cfg.given, "conditional query condition, RECORD=LABEL[,...]");
  };

  CLI::App* run = app.add_subcommand("run", "exact joint distribution of the records");
  common(run, true);
  with_policy(run);
  with_tol(run);
  with_query(run);
  CLI::App* smp = app.add_subcommand("sample", "seeded sampling of record tuples");
  common(smp, true);
  with_policy(smp);
  smp->add_option("--n", cfg.n, "repetitions")->check(CLI::PositiveNumber);
  smp->add_option("--seed", cfg.seed, "master seed");
  CLI::App* aud = app.add_subcommand("audit", "collapse audit of every agent measurement");
  common(aud, true);
  with_tol(aud);
  CLI::App* itf = app.add_subcommand("interference", "interference of later outcomes against agent records");
  common(itf, true);
  with_tol(itf);
  CLI::App* bi = app.add_subcommand("builtin", "built-in experiments");
  bi->add_option("name", cfg.builtin, "experiment")->required()->check(CLI::IsMember(detail::builtin_names()));
  common(bi, false);
  with_policy(bi);
  with_tol(bi);
  with_query(bi);
  bi->add_option("--reps", cfg.repetitions, "footnote repetitions")->check(CLI::Range(1, 8));
  bi->add_flag("--emit-scenario", cfg.emit_scenario, "print the scenario document instead of running it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    detail::apply_dimension_cap_env();
    if (run->parsed()) out << detail::run_command(cfg, detail::load_for(cfg));
    else if (smp->parsed()) {
      const Scenario s = detail::load_for(cfg);
      out << render_sample(sample(s, detail::policy_of(cfg), cfg.n, cfg.seed), detail::mode_of(cfg));
    } else if (aud->parsed()) {
      out << render_audit(audit(detail::load_for(cfg), cfg.tolerance), detail::mode_of(cfg));
    } else if (itf->parsed()) {
      out << detail::interference_command(cfg, detail::load_for(cfg));
    } else if (bi->parsed()) {
      out << detail::builtin_command(cfg);
    }
    return kExitOk;
  } catch (const detail::UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ScenarioError& e) {
    err << "scenario error: " << e.what() << "\n";
    return kExitScenario;
  } catch (const DimensionError& e) {
    err << "scenario error: " << e.what() << "\n";
    return kExitScenario;
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace wignerlab
