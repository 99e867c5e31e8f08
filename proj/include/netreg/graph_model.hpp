#pragma once

// Balanced multilayer stochastic blockmodels, their COSIE parameterisation,
// and seeded sampling of adjacency matrices.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace netreg {

/// Symmetric K x K matrix of edge probabilities.
class BlockMatrix {
public:
  /// Throws ArgumentError unless `entries` is square, symmetric and in [0, 1].
  explicit BlockMatrix(Eigen::MatrixXd entries);

  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  int size() const noexcept { return static_cast<int>(entries_.rows()); }

private:
  Eigen::MatrixXd entries_;
};

/// Community of every node, stored 0-based.
class CommunityMembership {
public:
  CommunityMembership(std::vector<int> assignment, int num_communities);

  const std::vector<int>& assignment() const noexcept { return assignment_; }
  int num_nodes() const noexcept { return static_cast<int>(assignment_.size()); }
  int num_communities() const noexcept { return num_communities_; }
  int community(int node) const { return assignment_.at(static_cast<std::size_t>(node)); }

  /// n x K one-hot matrix Z (rows sum to one).
  Eigen::MatrixXd one_hot() const;
  /// Diagonal of Z^T Z: the size of each community.
  Eigen::VectorXd community_sizes() const;

private:
  std::vector<int> assignment_;
  int num_communities_;
};

/// n x n symmetric matrix of edge probabilities.
class ProbabilityMatrix {
public:
  explicit ProbabilityMatrix(Eigen::MatrixXd entries);

  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  int n() const noexcept { return static_cast<int>(entries_.rows()); }

private:
  Eigen::MatrixXd entries_;
};

/// Binary, symmetric, hollow adjacency matrix. Entries are stored as bytes;
/// `to_dense()` materialises a double matrix for linear algebra.
class AdjacencyMatrix {
public:
  explicit AdjacencyMatrix(int n = 0);
  /// Throws ArgumentError unless `dense` is square, symmetric, hollow and 0/1.
  static AdjacencyMatrix from_dense(const Eigen::MatrixXd& dense);

  int n() const noexcept { return n_; }
  bool operator()(int i, int j) const noexcept {
    return bits_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
                 static_cast<std::size_t>(j)] != 0;
  }
  /// Sets both (i, j) and (j, i). Setting a diagonal entry throws.
  void set_edge(int i, int j, bool present = true);

  /// Number of undirected edges (strict upper triangle).
  std::int64_t edge_count() const noexcept;
  Eigen::MatrixXd to_dense() const;
  std::span<const std::uint8_t> bytes() const noexcept { return bits_; }

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

private:
  int n_;
  std::vector<std::uint8_t> bits_;
};

/// Graphs on a shared node set; the first `responses.size()` graphs are
/// labelled.
struct GraphCollection {
  std::vector<AdjacencyMatrix> graphs;
  std::vector<double> responses;
  /// Simulation-only ground-truth regressors t_1..t_N (empty for real data).
  std::vector<double> true_regressors;

  int size() const noexcept { return static_cast<int>(graphs.size()); }
  int n() const noexcept { return graphs.empty() ? 0 : graphs.front().n(); }
  bool supervised() const noexcept { return !responses.empty(); }
  /// Throws ArgumentError if graphs disagree on n, or there are more
  /// responses (or regressors) than graphs.
  void validate() const;
};

/// COSIE parameters (V; R^(1..N); rho). V has orthonormal columns.
struct CosieParameters {
  Eigen::MatrixXd subspace;
  std::vector<Eigen::MatrixXd> scores;
  double sparsity = 1.0;

  int d() const noexcept { return static_cast<int>(subspace.cols()); }
};

/// The two block-probability curves used by the simulation experiments.
///  curve-A: diagonal t/a, off-diagonal t/b, a = sqrt2/sin1, b = sqrt2/cos1
///           (vec(B(t)) traces a unit-speed line in R^4).
///  curve-B: diagonal t/2, off-diagonal t/5.
enum class CurveVariant { curve_a, curve_b };

std::string_view to_string(CurveVariant v) noexcept;
/// Accepts "curve-A"/"curve-B" (case-insensitive, '-' or '_').
CurveVariant parse_curve_variant(std::string_view text);

/// Largest t for which every entry of B(t) stays in [0, 1].
double max_admissible_t(CurveVariant v) noexcept;

/// 2 x 2 block matrix B(t) for the chosen curve. Throws RangeError when t
/// is outside [0, max_admissible_t(v)].
BlockMatrix build_block_probability(double t, CurveVariant v);

/// vec(B(t)) as a point of R^4 (column-major).
Eigen::VectorXd curve_point(double t, CurveVariant v);

/// First n/K nodes in community 0, next n/K in community 1, and so on.
/// Throws ArgumentError unless K >= 1 divides n.
CommunityMembership balanced_membership(int n, int num_communities);

/// P = Z B Z^T, i.e. P_ij = B(c(i), c(j)). Diagonal included.
ProbabilityMatrix probability_matrix(const CommunityMembership& z, const BlockMatrix& b);

/// Independent Bernoulli(P_ij) draws for i < j, mirrored, zero diagonal.
/// Draws are taken row by row over the strict upper triangle from a single
/// SplitMix64 stream seeded with `seed`.
AdjacencyMatrix sample_adjacency(const ProbabilityMatrix& p, std::uint64_t seed);

/// V = Z (Z^T Z)^{-1/2}, R^(k) = (Z^T Z)^{1/2} B^(k) (Z^T Z)^{1/2}, rho = 1.
/// Throws NumericalError when a community is empty.
CosieParameters msbm_to_cosie(const CommunityMembership& z,
                              std::span<const BlockMatrix> blocks);

/// One balanced two-block graph per t; graph k is sampled with seed
/// base_seed XOR k. Records `ts` as the true regressors.
GraphCollection sample_collection(std::span<const double> ts, int n, CurveVariant v,
                                  std::uint64_t base_seed);

}  // namespace netreg
