#pragma once

// One-dimensional isomap: localization graph, shortest-path dissimilarities,
// classical-MDS initialisation and raw-stress minimisation by SMACOF.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace netreg {

using Point = Eigen::VectorXd;

struct GraphEdge {
  int from;
  int to;
  double weight;
};

/// Undirected graph joining points closer than `radius` (strictly).
struct LocalizationGraph {
  int node_count = 0;
  double radius = 0.0;
  std::vector<GraphEdge> edges;  ///< from < to, lexicographic order
};

/// Symmetric, non-negative, zero-diagonal l x l matrix.
struct DissimilarityMatrix {
  Eigen::MatrixXd entries;
  int size() const noexcept { return static_cast<int>(entries.rows()); }
};

/// Scalar coordinates; meaningful only up to sign flip and translation.
struct Embedding1D {
  Eigen::VectorXd values;
  int size() const noexcept { return static_cast<int>(values.size()); }
};

struct StressTrace {
  /// stress[0] is the stress of the initial configuration; one entry per
  /// completed Guttman update afterwards. Non-increasing.
  std::vector<double> stress;
  int iterations = 0;
  bool converged = false;

  double initial() const { return stress.front(); }
  double final() const { return stress.back(); }
};

struct SmacofOptions {
  double tolerance = 1e-8;  ///< relative stress decrease that stops the loop
  int max_iterations = 1000;
  /// Extra random starts (uniform in [-scale, scale]) after the given z0;
  /// the lowest-stress result wins.
  int random_restarts = 0;
  std::uint64_t restart_seed = 0;
};

struct SmacofResult {
  Embedding1D embedding;
  StressTrace trace;
};

struct IsomapResult {
  Embedding1D embedding;
  StressTrace trace;
  DissimilarityMatrix dissimilarities;
  LocalizationGraph graph;
};

/// Edge (h, k) iff ||p_h - p_k|| < radius, weighted by that distance.
/// Throws ArgumentError for radius <= 0 or mismatched dimensions.
LocalizationGraph localization_graph(std::span<const Point> points, double radius);

/// Weighted shortest-path distances between the first l nodes; paths may
/// pass through any node. Throws ConnectivityError naming the first
/// disconnected pair.
DissimilarityMatrix shortest_path_matrix(const LocalizationGraph& graph, int l);

/// sum over all ordered pairs (h, k) of (|z_h - z_k| - delta_hk)^2.
double raw_stress(const Embedding1D& z, const DissimilarityMatrix& delta);

/// Classical MDS to one dimension, centred at zero. Returns zeros (with a
/// warning unless delta is identically zero) when the top eigenvalue of the
/// double-centred matrix is not positive.
Embedding1D cmds_embed(const DissimilarityMatrix& delta);

/// Raw-stress minimisation by Guttman transforms with unit weights:
///   z_h <- (1/l) * sum_k [ z_k + delta_hk * sgn(z_h - z_k) ],  sgn(0) = 0.
/// Stops when the relative decrease falls below `tolerance` or after
/// `max_iterations` updates. The result is re-centred at zero. Throws
/// ArgumentError for non-finite delta or invalid options.
SmacofResult smacof_minimize(const DissimilarityMatrix& delta, const Embedding1D& z0,
                             const SmacofOptions& options = {});

/// localization_graph -> shortest_path_matrix(l) -> cmds_embed -> smacof.
IsomapResult isomap_1d(std::span<const Point> points, double radius, int l,
                       const SmacofOptions& options = {});

}  // namespace netreg
