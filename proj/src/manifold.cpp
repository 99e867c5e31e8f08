#include "netreg/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <string>

#include "netreg/error.hpp"
#include "netreg/log.hpp"
#include "netreg/rng.hpp"

namespace netreg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void guttman_update(const Eigen::MatrixXd& delta, const Eigen::VectorXd& z, Eigen::VectorXd& next) {
  const Eigen::Index l = z.size();
  const double mean = z.mean();
  for (Eigen::Index h = 0; h < l; ++h) {
    double pull = 0.0;
    for (Eigen::Index k = 0; k < l; ++k) pull += delta(h, k) * sgn(z(h) - z(k));
    next(h) = mean + pull / static_cast<double>(l);
  }
}

SmacofResult smacof_single(const DissimilarityMatrix& delta, Eigen::VectorXd z,
                           const SmacofOptions& options) {
  SmacofResult out;
  Embedding1D current{z};
  double stress = raw_stress(current, delta);
  out.trace.stress.push_back(stress);

  Eigen::VectorXd next(z.size());
  for (int it = 0; it < options.max_iterations; ++it) {
    if (stress == 0.0) {
      out.trace.converged = true;
      break;
    }
    guttman_update(delta.entries, current.values, next);
    const double candidate = raw_stress(Embedding1D{next}, delta);
    if (candidate > stress) {
      // Rounding noise at a fixed point; the previous iterate is kept.
      out.trace.converged = true;
      break;
    }
    current.values.swap(next);
    ++out.trace.iterations;
    const double decrease = (stress - candidate) / stress;
    stress = candidate;
    out.trace.stress.push_back(stress);
    if (decrease < options.tolerance) {
      out.trace.converged = true;
      break;
    }
  }
  current.values.array() -= current.values.mean();
  out.embedding = std::move(current);
  return out;
}

}  // namespace

LocalizationGraph localization_graph(std::span<const Point> points, double radius) {
  if (!(radius > 0.0)) throw ArgumentError("neighbourhood parameter lambda must be positive");
  LocalizationGraph g;
  g.node_count = static_cast<int>(points.size());
  g.radius = radius;
  for (int h = 0; h < g.node_count; ++h) {
    for (int k = h + 1; k < g.node_count; ++k) {
      const Point& a = points[static_cast<std::size_t>(h)];
      const Point& b = points[static_cast<std::size_t>(k)];
      if (a.size() != b.size()) throw ArgumentError("points must share the same dimension");
      const double dist = (a - b).norm();
      if (dist < radius) g.edges.push_back({h, k, dist});
    }
  }
  return g;
}

DissimilarityMatrix shortest_path_matrix(const LocalizationGraph& graph, int l) {
  if (l < 1 || l > graph.node_count)
    throw ArgumentError("l = " + std::to_string(l) + " must lie in [1, " +
                        std::to_string(graph.node_count) + "]");
  std::vector<std::vector<std::pair<int, double>>> adjacency(static_cast<std::size_t>(graph.node_count));
  for (const auto& e : graph.edges) {
    adjacency[static_cast<std::size_t>(e.from)].emplace_back(e.to, e.weight);
    adjacency[static_cast<std::size_t>(e.to)].emplace_back(e.from, e.weight);
  }

  DissimilarityMatrix out{Eigen::MatrixXd::Zero(l, l)};
  using Entry = std::pair<double, int>;
  std::vector<double> dist(static_cast<std::size_t>(graph.node_count));
  for (int source = 0; source < l; ++source) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
    dist[static_cast<std::size_t>(source)] = 0.0;
    frontier.emplace(0.0, source);
    while (!frontier.empty()) {
      const auto [d, u] = frontier.top();
      frontier.pop();
      if (d > dist[static_cast<std::size_t>(u)]) continue;
      for (const auto& [v, w] : adjacency[static_cast<std::size_t>(u)]) {
        const double candidate = d + w;
        if (candidate < dist[static_cast<std::size_t>(v)]) {
          dist[static_cast<std::size_t>(v)] = candidate;
          frontier.emplace(candidate, v);
        }
      }
    }
    for (int target = 0; target < l; ++target) {
      const double d = dist[static_cast<std::size_t>(target)];
      if (d == kInf) {
        const int a = std::min(source, target);
        const int b = std::max(source, target);
        std::ostringstream msg;
        msg << "points " << a + 1 << " and " << b + 1
            << " are disconnected in the localization graph (lambda = " << graph.radius
            << "); try a larger lambda";
        throw ConnectivityError(msg.str(), a, b);
      }
      out.entries(source, target) = d;
    }
  }
  // Dijkstra from both ends may differ in the last bit; keep the matrix exactly symmetric.
  out.entries = 0.5 * (out.entries + out.entries.transpose()).eval();
  return out;
}

double raw_stress(const Embedding1D& z, const DissimilarityMatrix& delta) {
  const Eigen::Index l = z.values.size();
  if (delta.entries.rows() != l || delta.entries.cols() != l)
    throw ArgumentError("embedding and dissimilarity sizes differ");
  double total = 0.0;
  for (Eigen::Index h = 0; h < l; ++h)
    for (Eigen::Index k = 0; k < l; ++k) {
      const double r = std::abs(z.values(h) - z.values(k)) - delta.entries(h, k);
      total += r * r;
    }
  return total;
}

Embedding1D cmds_embed(const DissimilarityMatrix& delta) {
  const Eigen::Index l = delta.entries.rows();
  Embedding1D out{Eigen::VectorXd::Zero(l)};
  if (l < 2) return out;

  const Eigen::MatrixXd squared = delta.entries.array().square().matrix();
  const Eigen::VectorXd row_mean = squared.rowwise().mean();
  const Eigen::VectorXd col_mean = squared.colwise().mean().transpose();
  const double grand = squared.mean();
  Eigen::MatrixXd b(l, l);
  for (Eigen::Index j = 0; j < l; ++j)
    for (Eigen::Index i = 0; i < l; ++i)
      b(i, j) = -0.5 * (squared(i, j) - row_mean(i) - col_mean(j) + grand);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (b + b.transpose()));
  const double top = eig.eigenvalues()(l - 1);
  if (!(top > 0.0)) {
    if (delta.entries.cwiseAbs().maxCoeff() > 0.0)
      warn("classical MDS: top eigenvalue is not positive; returning a degenerate embedding");
    return out;
  }
  Eigen::VectorXd v = eig.eigenvectors().col(l - 1);
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
  out.values = v * std::sqrt(top);
  out.values.array() -= out.values.mean();
  return out;
}

SmacofResult smacof_minimize(const DissimilarityMatrix& delta, const Embedding1D& z0,
                             const SmacofOptions& options) {
  if (!(options.tolerance > 0.0)) throw ArgumentError("SMACOF tolerance must be positive");
  if (options.max_iterations < 1) throw ArgumentError("SMACOF max_iterations must be >= 1");
  if (options.random_restarts < 0) throw ArgumentError("random_restarts must be >= 0");
  if (!delta.entries.allFinite()) throw ArgumentError("dissimilarities contain NaN or Inf");
  if (z0.values.size() != delta.entries.rows()) throw ArgumentError("z0 size does not match delta");
  if (!z0.values.allFinite()) throw ArgumentError("initial configuration is not finite");

  SmacofResult best = smacof_single(delta, z0.values, options);
  if (options.random_restarts > 0) {
    SplitMix64 rng(options.restart_seed);
    const double scale = std::max(delta.entries.maxCoeff(), 1.0);
    for (int r = 0; r < options.random_restarts; ++r) {
      Eigen::VectorXd start(z0.values.size());
      for (Eigen::Index i = 0; i < start.size(); ++i) start(i) = rng.uniform(-scale, scale);
      SmacofResult candidate = smacof_single(delta, start, options);
      if (candidate.trace.final() < best.trace.final()) best = std::move(candidate);
    }
  }
  return best;
}

IsomapResult isomap_1d(std::span<const Point> points, double radius, int l,
                       const SmacofOptions& options) {
  if (l < 1 || l > static_cast<int>(points.size()))
    throw ArgumentError("isomap: l = " + std::to_string(l) + " must lie in [1, " +
                        std::to_string(points.size()) + "]");
  IsomapResult out;
  out.graph = localization_graph(points, radius);
  out.dissimilarities = shortest_path_matrix(out.graph, l);
  const Embedding1D start = cmds_embed(out.dissimilarities);
  SmacofResult fit = smacof_minimize(out.dissimilarities, start, options);
  out.embedding = std::move(fit.embedding);
  out.trace = std::move(fit.trace);
  return out;
}

}  // namespace netreg
