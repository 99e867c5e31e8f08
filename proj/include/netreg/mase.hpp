#pragma once

// Multiple adjacency spectral embedding with sparsity estimation.
//
// For graphs A^(1..N) on a common node set:
//   1. rho_hat = mean of the strict upper triangles of all A^(k);
//   2. V^(k)   = top-d eigenvectors of A^(k) ordered by |eigenvalue|
//                (the top-d left singular vectors of a symmetric matrix);
//   3. V_hat   = top-d left singular vectors of [V^(1) | ... | V^(N)];
//   4. R^(k)   = V_hat^T A^(k) V_hat / rho_hat.
//
// Score matrices are identified only up to a common orthogonal change of
// basis W (R -> W^T R W). Everything consumed downstream (pairwise Frobenius
// distances of the scaled scores) is invariant under that change.

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "netreg/graph_model.hpp"

namespace netreg {

/// n x d matrix with orthonormal columns. Each column is sign-normalised so
/// that its entry of largest magnitude is positive (lowest index on ties).
struct SubspaceBasis {
  Eigen::MatrixXd columns;
  /// Singular values belonging to the columns, descending.
  Eigen::VectorXd singular_values;
  /// True when sigma_d and sigma_{d+1} coincide to within 1e-10 relative:
  /// the d-dimensional subspace is then not uniquely defined.
  bool boundary_tie = false;

  int n() const noexcept { return static_cast<int>(columns.rows()); }
  int d() const noexcept { return static_cast<int>(columns.cols()); }
  /// Orthogonal projector V V^T.
  Eigen::MatrixXd projector() const { return columns * columns.transpose(); }
};

/// d x d symmetric score matrix R_hat^(k).
struct ScoreMatrix {
  Eigen::MatrixXd entries;
};

/// vec(R_hat / n) (column-stacked, length d^2) and its upper triangle
/// including the diagonal read row-wise (length d(d+1)/2).
struct ScaledScorePoint {
  Eigen::VectorXd coords;
  Eigen::VectorXd alt_coords;

  /// Reshape `coords` back into the d x d matrix Q_hat.
  Eigen::MatrixXd matrix() const;
};

enum class SpectralMethod {
  automatic,           ///< dense below 3000 nodes, subspace iteration above
  dense,               ///< tridiagonalisation + selected eigenpairs (LAPACK)
  subspace_iteration,  ///< block power iteration with Rayleigh-Ritz
};

/// Which basis projects A^(k) onto the score matrix.
enum class ProjectionBasis {
  joint,      ///< V_hat from the joint step (default)
  per_graph,  ///< the graph's own V^(k)
};

struct MaseOptions {
  ProjectionBasis projection = ProjectionBasis::joint;
  /// Use this value instead of estimating rho from the data.
  std::optional<double> fixed_sparsity;
  SpectralMethod method = SpectralMethod::automatic;
};

struct MaseResult {
  std::vector<ScoreMatrix> scores;
  double sparsity = 0.0;
  SubspaceBasis joint_basis;
};

/// Mean of A^(k)_ij over all graphs and all i < j. Returns 0 for edgeless
/// input; `sparse_mase` rejects that value. Throws ArgumentError when N < 1
/// or n < 2.
double estimate_sparsity(const GraphCollection& collection);
double estimate_sparsity(std::span<const Eigen::MatrixXd> matrices);

/// Top-d eigenvectors of a symmetric matrix by |eigenvalue|, ties in
/// |eigenvalue| broken by ascending eigenvalue position. Throws ArgumentError
/// for d outside [1, n] or a non-symmetric input. Emits a warning when the
/// d/(d+1) boundary is tied.
SubspaceBasis top_left_singular_vectors(const Eigen::MatrixXd& a, int d,
                                        SpectralMethod method = SpectralMethod::automatic);

/// Top-d left singular vectors of the column-wise concatenation of `bases`.
SubspaceBasis joint_subspace(std::span<const SubspaceBasis> bases, int d);

/// Full pipeline over binary graphs. Adjacency matrices are densified one at
/// a time, so memory stays O(n^2) regardless of N.
MaseResult sparse_mase(const GraphCollection& collection, int d, const MaseOptions& options = {});

/// Same estimator over arbitrary real symmetric matrices (e.g. the
/// probability matrices themselves, for noiseless checks).
MaseResult sparse_mase(std::span<const Eigen::MatrixXd> matrices, int d,
                       const MaseOptions& options = {});

std::vector<ScaledScorePoint> scaled_score_points(std::span<const ScoreMatrix> scores, int n);

/// Euclidean distances between `coords`, i.e. Frobenius distances between
/// the Q_hat matrices.
Eigen::MatrixXd pairwise_frobenius(std::span<const ScaledScorePoint> points);

/// Flip each column so its entry of largest |value| is positive.
void canonicalize_signs(Eigen::MatrixXd& columns);

}  // namespace netreg
