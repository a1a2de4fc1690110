#pragma once

#include "ldlab/model.hpp"

namespace ldlab {

/// One additive term of the generating Hamiltonian, evaluated at a fixed
/// state: contributes rate * (exp(<gamma, p>) - 1). Offspring entries
/// appear with gamma = k * e_1 and rate = x1 * v_k(x).
struct HTermView {
  Vec gamma;
  double rate = 0.0;
  TransitionKind kind = TransitionKind::interaction;
  bool offspring = false;
  /// true if some face active at the queried state has <gamma, n_j> < -tol,
  /// i.e. the term can be switched off by a boundary piece there
  bool blockable = false;
};

/// The family {H_J} of boundary-aware Hamiltonians of a model. A face
/// index set J switches off every term whose jump direction exits one of
/// the faces in J; H_empty keeps all terms. dagger/ddagger take the
/// max/min of H_J over all J contained in the active set of x.
class HamiltonianFamily {
 public:
  explicit HamiltonianFamily(ModelSpec model);

  const ModelSpec& model() const { return model_; }
  const Polyhedron& space() const { return model_.space; }

  /// H_J(x, p). J holds indices into space().closed_faces(); terms with
  /// <gamma, n_j> < -tol for some j in J are dropped.
  double piece(const FaceIndex& J, const Vec& x, const Vec& p) const;

  /// gradient of H_J in p (the velocity map of the piece)
  Vec grad_p_piece(const FaceIndex& J, const Vec& x, const Vec& p) const;

  /// Hessian of H_J in p (positive semidefinite)
  std::vector<Vec> hess_p_piece(const FaceIndex& J, const Vec& x,
                                const Vec& p) const;

  /// H_dagger(x, p) = max over J inside the active set at x
  double dagger(const Vec& x, const Vec& p) const;

  /// H_ddagger(x, p) = min over J inside the active set at x
  double ddagger(const Vec& x, const Vec& p) const;

  /// All subsets of the active set at x, deduplicated: two subsets that
  /// switch off the same terms are listed once (smallest representative
  /// first). The empty set always leads the list.
  std::vector<FaceIndex> active_pieces(const Vec& x) const;

  /// Terms evaluated at x, with blockability against the active set at x.
  std::vector<HTermView> terms_at(const Vec& x) const;

 private:
  struct Term {
    std::vector<int> gamma_int;
    Vec gamma;
    int transition_index = -1;  // -1 for offspring terms
    int offspring_index = -1;   // -1 for transition terms
    int k = 0;                  // offspring count
    TransitionKind kind = TransitionKind::interaction;
    bool offspring = false;
  };

  double term_rate(const Term& t, const Vec& x) const;
  bool blocked(const Term& t, const FaceIndex& J) const;
  /// evaluated rates at x, with the offspring tail truncated adaptively
  std::vector<double> rates_at(const Vec& x) const;
  /// dedup subsets of the faces in `active`; returns (subset, drop-mask)
  std::vector<std::pair<FaceIndex, std::vector<char>>> dedup_subsets(
      const Vec& x) const;

  ModelSpec model_;
  std::vector<Term> terms_;
};

/// Validates the model (probe-based) and builds its Hamiltonian family.
/// Throws ValidationError when a transition exits the state space with a
/// nonvanishing rate or any other fatal issue is found. validate=false
/// skips the probes (for deliberately broken comparison fixtures).
HamiltonianFamily build_hamiltonians(const ModelSpec& m, bool validate = true);

/// Superposition of two models on the same state space: transitions and
/// offspring lists concatenate, parameters merge. Conflicting values for
/// the same parameter name raise ValidationError. The Hamiltonian of the
/// sum is the pointwise sum of the Hamiltonians.
HamiltonianFamily sum_hamiltonians(const HamiltonianFamily& A,
                                   const HamiltonianFamily& B);

}  // namespace ldlab
