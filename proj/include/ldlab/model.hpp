#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ldlab/expr.hpp"
#include "ldlab/geometry.hpp"

namespace ldlab {

enum class TransitionKind { interaction, immigration, harvesting };

std::string to_string(TransitionKind k);
TransitionKind transition_kind_from_string(const std::string& s);

/// One jump type: direction Gamma on the integer lattice plus its limit
/// rate r_Gamma(x) (units 1/time). Immigration moves +e_i at a rate that
/// may stay positive on the boundary; harvesting moves -e_i and is
/// switched off by the simulator indicator at q_i = 0 and dropped from
/// boundary Hamiltonian pieces.
struct TransitionSpec {
  std::vector<int> gamma;
  Expr rate;
  TransitionKind kind = TransitionKind::interaction;
  /// optional finite-n override: evaluated at counts q (as x1..xd) with
  /// parameter n bound; replaces the default scaling n*rate(q/n)
  std::optional<Expr> rate_n;
};

/// A jump-process model: state space, transitions, parameters, and an
/// optional offspring list (k, v_k(x)) of per-individual rates for
/// producing k children at once (growth models).
struct ModelSpec {
  std::string name;
  Polyhedron space;
  std::vector<TransitionSpec> transitions;
  std::map<std::string, double> params;
  std::vector<std::pair<int, Expr>> offspring;

  ModelSpec(std::string name_, Polyhedron space_)
      : name(std::move(name_)), space(std::move(space_)) {}

  double eval_rate(const TransitionSpec& t, const Vec& x) const {
    return t.rate.eval(x, params);
  }
};

ModelSpec parse_model_json(const std::string& json_text);
ModelSpec load_model_file(const std::string& path);

/// canonical serialization; parse(model_to_json(m)) reproduces m
std::string model_to_json(const ModelSpec& m);

struct ValidationIssue {
  bool fatal = false;
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;
  std::vector<std::string> caveats;
  Vec box_lo, box_hi;  // probe box actually inspected
};

/// Structural checks plus numeric probes: rate nonnegativity on a
/// quasi-random grid, and decay of interaction rates near faces their
/// jump direction would exit. Probes inspect a compact box only; models
/// on open domains get that recorded as a caveat.
ValidationReport validate_model(const ModelSpec& m, int probe_points = 10000,
                                double box_span = 10.0);

/// Nine bundled models; names:
///   birth_death_immigration, birth_death_harvesting, growing_population,
///   yule, poisson_offspring, si_model, interacting_species,
///   prey_predator, sir_dynamics
ModelSpec builtin_model(const std::string& name);
std::vector<std::string> builtin_model_names();

/// Resolve "builtin:<name>" or a filesystem path.
ModelSpec resolve_model(const std::string& ref);

}  // namespace ldlab
