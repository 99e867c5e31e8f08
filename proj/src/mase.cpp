#include "netreg/mase.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include <lapacke.h>

#include "netreg/error.hpp"
#include "netreg/log.hpp"
#include "netreg/rng.hpp"

namespace netreg {
namespace {

constexpr int kDenseLimit = 3000;
constexpr double kTieTolerance = 1e-10;

struct Eigenpairs {
  Eigen::VectorXd values;   // selected eigenvalues, ordered by (-|value|, position)
  Eigen::MatrixXd vectors;  // matching eigenvectors
  double next_magnitude = -1.0;  // |lambda_{d+1}|, or -1 when d == n
};

void check_lapack(lapack_int info, const char* routine) {
  if (info != 0)
    throw NumericalError(std::string(routine) + " failed with info = " + std::to_string(info));
}

// Positions (in ascending eigenvalue order) of the d eigenvalues of largest
// magnitude, sorted by (-|value|, position).
std::vector<int> select_by_magnitude(const Eigen::VectorXd& ascending, int count) {
  std::vector<int> order(static_cast<std::size_t>(ascending.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(ascending(a)) > std::abs(ascending(b));
  });
  order.resize(static_cast<std::size_t>(count));
  return order;
}

Eigenpairs dense_top_eigenpairs(const Eigen::MatrixXd& a, int d) {
  const auto n = static_cast<lapack_int>(a.rows());
  Eigenpairs out;
  if (n == 1) {
    out.values = Eigen::VectorXd::Constant(1, a(0, 0));
    out.vectors = Eigen::MatrixXd::Ones(1, 1);
    return out;
  }

  // Reduce to tridiagonal form once: A = Q T Q^T.
  Eigen::MatrixXd reflectors = a;
  Eigen::VectorXd diag(n), off(n), tau(n);
  check_lapack(LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', n, reflectors.data(), n, diag.data(),
                              off.data(), tau.data()),
               "dsytrd");

  Eigen::VectorXd all = diag;
  Eigen::VectorXd scratch = off;
  check_lapack(LAPACKE_dsterf(n, all.data(), scratch.data()), "dsterf");

  const std::vector<int> chosen = select_by_magnitude(all, d);
  if (d < n) {
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (int p : chosen) taken[static_cast<std::size_t>(p)] = true;
    // The (d+1)-th magnitude: the largest |value| among the rest.
    for (lapack_int p = 0; p < n; ++p)
      if (!taken[static_cast<std::size_t>(p)])
        out.next_magnitude = std::max(out.next_magnitude, std::abs(all(p)));
  }

  // The chosen set is a block at each end of the ascending spectrum: the
  // contiguous run starting at position 0, plus the rest taken from the top.
  // Under exact ties the positions may differ but the eigenvalues do not.
  std::vector<int> sorted_positions = chosen;
  std::sort(sorted_positions.begin(), sorted_positions.end());
  int low = 0;
  while (low < d && sorted_positions[static_cast<std::size_t>(low)] == low) ++low;
  const int high = d - low;

  Eigen::MatrixXd tri_vectors(n, d);
  Eigen::VectorXd tri_values(d);
  int filled = 0;
  auto solve_block = [&](lapack_int il, lapack_int iu) {
    if (iu < il) return;
    Eigen::VectorXd dd = diag;
    Eigen::VectorXd ee = Eigen::VectorXd::Zero(n);
    ee.head(n - 1) = off.head(n - 1);
    lapack_int found = 0;
    const lapack_int width = iu - il + 1;
    Eigen::VectorXd w(n);
    Eigen::MatrixXd z(n, width);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(width));
    lapack_logical tryrac = 1;
    check_lapack(LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'I', n, dd.data(), ee.data(), 0.0, 0.0, il, iu,
                                &found, w.data(), z.data(), n, width, support.data(), &tryrac),
                 "dstemr");
    if (found != width) throw NumericalError("dstemr returned an unexpected number of eigenpairs");
    tri_vectors.middleCols(filled, width) = z;
    tri_values.segment(filled, width) = w.head(width);
    filled += static_cast<int>(width);
  };
  solve_block(1, low);
  solve_block(n - high + 1, n);

  // Back-transform to eigenvectors of A.
  check_lapack(LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', n, d, reflectors.data(), n, tau.data(),
                              tri_vectors.data(), n),
               "dormtr");

  // Order by (-|value|, position). Columns [0, low) hold positions 0..low-1,
  // columns [low, d) hold positions n-high..n-1.
  std::vector<int> position(static_cast<std::size_t>(d));
  for (int c = 0; c < d; ++c) position[static_cast<std::size_t>(c)] = c < low ? c : static_cast<int>(n) - high + (c - low);
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    const double ax = std::abs(tri_values(x));
    const double ay = std::abs(tri_values(y));
    if (ax != ay) return ax > ay;
    return position[static_cast<std::size_t>(x)] < position[static_cast<std::size_t>(y)];
  });
  out.values.resize(d);
  out.vectors.resize(n, d);
  for (int c = 0; c < d; ++c) {
    out.values(c) = tri_values(order[static_cast<std::size_t>(c)]);
    out.vectors.col(c) = tri_vectors.col(order[static_cast<std::size_t>(c)]);
  }
  return out;
}

Eigenpairs iterative_top_eigenpairs(const Eigen::MatrixXd& a, int d) {
  const Eigen::Index n = a.rows();
  const Eigen::Index block = std::min<Eigen::Index>(n, d + 10);
  SplitMix64 rng(0x5eed5eed5eedULL);
  Eigen::MatrixXd q(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) q(i, j) = rng.normal();
  q = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ() * Eigen::MatrixXd::Identity(n, block);

  Eigen::VectorXd ritz_values;
  Eigen::MatrixXd ritz_vectors;
  Eigen::VectorXd previous = Eigen::VectorXd::Zero(d);
  constexpr int kMaxIterations = 20000;
  for (int it = 0; it < kMaxIterations; ++it) {
    const Eigen::MatrixXd aq = a * q;
    const Eigen::MatrixXd t = q.transpose() * aq;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(0.5 * (t + t.transpose()));
    ritz_values = small.eigenvalues();
    const std::vector<int> chosen = select_by_magnitude(ritz_values, static_cast<int>(block));
    Eigen::MatrixXd rotation(block, block);
    Eigen::VectorXd sorted(block);
    for (Eigen::Index c = 0; c < block; ++c) {
      rotation.col(c) = small.eigenvectors().col(chosen[static_cast<std::size_t>(c)]);
      sorted(c) = ritz_values(chosen[static_cast<std::size_t>(c)]);
    }
    ritz_vectors = q * rotation;
    const Eigen::MatrixXd residual = aq * rotation - ritz_vectors * sorted.asDiagonal();
    const double scale = std::max(std::abs(sorted(0)), 1e-300);
    double worst = 0.0;
    for (int c = 0; c < d; ++c) worst = std::max(worst, residual.col(c).norm());
    const bool values_settled =
        ((sorted.head(d) - previous).cwiseAbs().array() <= 1e-13 * scale).all();
    previous = sorted.head(d);
    ritz_values = sorted;
    if (worst <= 1e-10 * scale && values_settled) break;
    if (it + 1 == kMaxIterations)
      throw NumericalError("subspace iteration did not converge");
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(aq * rotation).householderQ() *
        Eigen::MatrixXd::Identity(n, block);
  }

  Eigenpairs out;
  out.values = ritz_values.head(d);
  out.vectors = ritz_vectors.leftCols(d);
  out.next_magnitude = block > d ? std::abs(ritz_values(d)) : -1.0;
  return out;
}

void flag_boundary(SubspaceBasis& basis, double next_magnitude, const char* what) {
  if (next_magnitude < 0.0 || basis.d() == 0) return;
  const double scale = std::max(basis.singular_values(0), 1.0);
  const double last = basis.singular_values(basis.d() - 1);
  if (std::abs(last - next_magnitude) <= kTieTolerance * scale) {
    basis.boundary_tie = true;
    warn(std::string(what) + ": singular values " + std::to_string(basis.d()) + " and " +
         std::to_string(basis.d() + 1) + " are tied; the subspace is not uniquely defined");
  }
}

bool symmetric_within(const Eigen::MatrixXd& a, double tol) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

// Shared driver: `matrix(k)` materialises the k-th symmetric input.
MaseResult run_mase(int count, int n, double sparsity,
                    const std::function<Eigen::MatrixXd(int)>& matrix, int d,
                    const MaseOptions& options) {
  if (d < 1 || d > n)
    throw ArgumentError("embedding dimension d = " + std::to_string(d) + " must lie in [1, n = " +
                        std::to_string(n) + "]");
  if (options.fixed_sparsity) sparsity = *options.fixed_sparsity;
  if (!(sparsity > 0.0) || !std::isfinite(sparsity))
    throw NumericalError("estimated sparsity is zero (all graphs empty); score matrices are undefined");

  std::vector<SubspaceBasis> bases;
  bases.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    bases.push_back(top_left_singular_vectors(matrix(k), d, options.method));

  MaseResult out;
  out.sparsity = sparsity;
  out.joint_basis = joint_subspace(bases, d);
  out.scores.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const Eigen::MatrixXd& v = options.projection == ProjectionBasis::joint
                                   ? out.joint_basis.columns
                                   : bases[static_cast<std::size_t>(k)].columns;
    const Eigen::MatrixXd a = matrix(k);
    Eigen::MatrixXd r = v.transpose() * (a * v) / sparsity;
    r = 0.5 * (r + r.transpose()).eval();
    out.scores.push_back(ScoreMatrix{std::move(r)});
  }
  return out;
}

}  // namespace

Eigen::MatrixXd ScaledScorePoint::matrix() const {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(coords.size()))));
  return Eigen::Map<const Eigen::MatrixXd>(coords.data(), d, d);
}

void canonicalize_signs(Eigen::MatrixXd& columns) {
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    Eigen::Index best = 0;
    double magnitude = -1.0;
    for (Eigen::Index i = 0; i < columns.rows(); ++i) {
      if (std::abs(columns(i, c)) > magnitude) {
        magnitude = std::abs(columns(i, c));
        best = i;
      }
    }
    if (columns.rows() > 0 && columns(best, c) < 0.0) columns.col(c) *= -1.0;
  }
}

double estimate_sparsity(const GraphCollection& collection) {
  collection.validate();
  const int n = collection.n();
  if (collection.size() < 1 || n < 2)
    throw ArgumentError("sparsity estimation needs at least one graph with two or more nodes");
  std::int64_t edges = 0;
  for (const auto& g : collection.graphs) edges += g.edge_count();
  const double pairs = static_cast<double>(n) * (n - 1) / 2.0;
  return static_cast<double>(edges) / (collection.size() * pairs);
}

double estimate_sparsity(std::span<const Eigen::MatrixXd> matrices) {
  if (matrices.empty()) throw ArgumentError("sparsity estimation needs at least one graph");
  const Eigen::Index n = matrices.front().rows();
  if (n < 2) throw ArgumentError("sparsity estimation needs graphs with two or more nodes");
  double total = 0.0;
  for (const auto& m : matrices) {
    if (m.rows() != n || m.cols() != n) throw ArgumentError("all matrices must be n x n");
    for (Eigen::Index j = 1; j < n; ++j) total += m.col(j).head(j).sum();
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return total / (static_cast<double>(matrices.size()) * pairs);
}

SubspaceBasis top_left_singular_vectors(const Eigen::MatrixXd& a, int d, SpectralMethod method) {
  const auto n = static_cast<int>(a.rows());
  if (a.cols() != a.rows()) throw ArgumentError("top_left_singular_vectors needs a square matrix");
  if (d < 1 || d > n)
    throw ArgumentError("d = " + std::to_string(d) + " must lie in [1, " + std::to_string(n) + "]");
  if (!a.allFinite()) throw ArgumentError("matrix contains non-finite entries");
  if (!symmetric_within(a, 1e-12)) throw ArgumentError("matrix must be symmetric");

  if (method == SpectralMethod::automatic)
    method = n > kDenseLimit ? SpectralMethod::subspace_iteration : SpectralMethod::dense;
  const Eigenpairs pairs =
      method == SpectralMethod::dense ? dense_top_eigenpairs(a, d) : iterative_top_eigenpairs(a, d);

  SubspaceBasis basis;
  basis.columns = pairs.vectors;
  basis.singular_values = pairs.values.cwiseAbs();
  canonicalize_signs(basis.columns);
  flag_boundary(basis, pairs.next_magnitude, "top_left_singular_vectors");
  return basis;
}

SubspaceBasis joint_subspace(std::span<const SubspaceBasis> bases, int d) {
  if (bases.empty()) throw ArgumentError("joint_subspace needs at least one basis");
  const int n = bases.front().n();
  Eigen::Index width = 0;
  for (const auto& b : bases) {
    if (b.n() != n) throw ArgumentError("all bases must share n");
    width += b.d();
  }
  if (d < 1 || d > n || d > width)
    throw ArgumentError("joint dimension d = " + std::to_string(d) + " is not attainable");

  Eigen::MatrixXd stacked(n, width);
  Eigen::Index at = 0;
  for (const auto& b : bases) {
    stacked.middleCols(at, b.d()) = b.columns;
    at += b.d();
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU);
  SubspaceBasis out;
  out.columns = svd.matrixU().leftCols(d);
  out.singular_values = svd.singularValues().head(d);
  canonicalize_signs(out.columns);
  const double next = svd.singularValues().size() > d ? svd.singularValues()(d) : -1.0;
  flag_boundary(out, next, "joint_subspace");
  return out;
}

MaseResult sparse_mase(const GraphCollection& collection, int d, const MaseOptions& options) {
  const double rho = options.fixed_sparsity ? *options.fixed_sparsity : estimate_sparsity(collection);
  return run_mase(
      collection.size(), collection.n(), rho,
      [&](int k) { return collection.graphs[static_cast<std::size_t>(k)].to_dense(); }, d, options);
}

MaseResult sparse_mase(std::span<const Eigen::MatrixXd> matrices, int d, const MaseOptions& options) {
  if (matrices.empty()) throw ArgumentError("sparse_mase needs at least one matrix");
  const double rho = options.fixed_sparsity ? *options.fixed_sparsity : estimate_sparsity(matrices);
  return run_mase(
      static_cast<int>(matrices.size()), static_cast<int>(matrices.front().rows()), rho,
      [&](int k) { return matrices[static_cast<std::size_t>(k)]; }, d, options);
}

std::vector<ScaledScorePoint> scaled_score_points(std::span<const ScoreMatrix> scores, int n) {
  if (n < 1) throw ArgumentError("node count must be >= 1");
  std::vector<ScaledScorePoint> out;
  out.reserve(scores.size());
  for (const auto& s : scores) {
    const Eigen::MatrixXd q = s.entries / static_cast<double>(n);
    const Eigen::Index d = q.rows();
    ScaledScorePoint p;
    p.coords = Eigen::Map<const Eigen::VectorXd>(q.data(), q.size());
    p.alt_coords.resize(d * (d + 1) / 2);
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i; j < d; ++j) p.alt_coords(at++) = q(i, j);
    out.push_back(std::move(p));
  }
  return out;
}

Eigen::MatrixXd pairwise_frobenius(std::span<const ScaledScorePoint> points) {
  const auto count = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(count, count);
  for (Eigen::Index h = 0; h < count; ++h) {
    for (Eigen::Index k = h + 1; k < count; ++k) {
      const auto& a = points[static_cast<std::size_t>(h)].coords;
      const auto& b = points[static_cast<std::size_t>(k)].coords;
      if (a.size() != b.size()) throw ArgumentError("points must share the same dimension");
      dist(h, k) = dist(k, h) = (a - b).norm();
    }
  }
  return dist;
}

}  // namespace netreg
