#pragma once

#include <span>
#include <vector>

#include "rodkit/mdp.hpp"

namespace rod {

enum class SRSource { ClosedForm, TD };

struct SRMatrix {
  Matrix psi;
  double gamma = 0.0;
  SRSource source = SRSource::ClosedForm;
};

/// Psi = (I - gamma P)^-1.
SRMatrix sr_closed_form(const Matrix& transition, double gamma);

/// Tabular TD estimate, zero-initialised, `passes` sweeps over data in order.
/// Teleport records count as single transitions.
SRMatrix sr_td_learn(std::span<const TransitionRecord> data, int n_states, double eta, double gamma,
                     int passes);

enum class BasisSource { SR, Laplacian };
enum class EigenOrder { Descending, Ascending };

/// Eigenpairs sorted by eigenvalue; columns of `vectors` are unit norm.
struct EigenBasis {
  Vector values;
  Matrix vectors;
  BasisSource source = BasisSource::SR;

  int size() const { return static_cast<int>(values.size()); }
  Vector vector(int i) const { return vectors.col(i); }
};

/// With symmetrize set, decomposes (M + M^T)/2. Otherwise decomposes M and
/// keeps real parts, warning when an imaginary part exceeds 1e-9.
///
/// Inside a cluster of repeated eigenvalues the basis is fixed by projecting
/// the standard basis vectors in state order and orthonormalising, so the
/// result does not depend on the solver's internal rotation. Each vector's
/// first nonzero entry is positive.
EigenBasis eigendecompose(const Matrix& m, bool symmetrize = true, EigenOrder order = EigenOrder::Descending,
                          BasisSource source = BasisSource::SR);

/// W(i,j) = 1 iff some action moves i to j, i != j.
Matrix adjacency_matrix(const TabularMDP& mdp);

struct LaplacianResult {
  Matrix laplacian;
  EigenBasis basis;  // ascending
};

/// L = D^-1/2 (D - W) D^-1/2. Throws DegreeError on an isolated vertex.
LaplacianResult normalized_laplacian(const Matrix& adjacency);

struct PvfEquivalenceReport {
  std::vector<double> eigenvalue_residuals;  // one per eigenvalue pair
  std::vector<double> subspace_angles;       // one per eigenvalue cluster
  double max_residual = 0.0;
  double max_angle = 0.0;
  int clusters = 0;
};

/// Compares the SR of the random walk with the normalized-Laplacian basis:
/// lambda_pvf = 1 - (1 - 1/lambda_sr)/gamma, and span(D^1/2 e_sr) = span(e_pvf),
/// pairing the i-th largest SR eigenvalue with the i-th smallest PVF eigenvalue.
/// The random walk moves to a uniformly chosen distinct neighbour.
PvfEquivalenceReport verify_pvf_sr_equivalence(const TabularMDP& mdp, double gamma);

struct TransitionLaplacianReport {
  bool gram_matches = false;  // T^T T == 2 (D - W) exactly
  double max_angle = 0.0;     // right singular subspaces vs eigenspaces of D - W
  double max_value_residual = 0.0;  // |sigma^2 - 2 mu|
};

/// One record per (s,a) of a deterministic MDP.
TransitionDataset full_transition_sweep(const TabularMDP& mdp);

/// Rows of T are phi(s') - phi(s) with one-hot phi. Every non-self edge of the
/// MDP must appear exactly once; otherwise PreconditionError.
TransitionLaplacianReport verify_transition_diff_laplacian(const TransitionDataset& data, const TabularMDP& mdp);

struct SFMatrix {
  Matrix psi_phi;
  Matrix phi;
};

/// (I - gamma P)^-1 Phi.
SFMatrix successor_features(const Matrix& phi, const Matrix& transition, double gamma);

/// Largest principal angle between the column spans of two orthonormal bases.
double principal_angle(const Matrix& a, const Matrix& b);

}  // namespace rod
