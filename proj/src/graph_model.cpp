#include "netreg/graph_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "netreg/error.hpp"
#include "netreg/rng.hpp"

namespace netreg {
namespace {

// curve-A denominators
const double kCurveA_Diag = std::sqrt(2.0) / std::sin(1.0);
const double kCurveA_Off = std::sqrt(2.0) / std::cos(1.0);

bool is_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != m(j, i)) return false;
  return true;
}

bool in_unit_interval(const Eigen::MatrixXd& m) {
  return (m.array() >= 0.0).all() && (m.array() <= 1.0).all();
}

}  // namespace

BlockMatrix::BlockMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || !is_symmetric(entries_))
    throw ArgumentError("block matrix must be non-empty, square and symmetric");
  if (!in_unit_interval(entries_))
    throw ArgumentError("block matrix entries must lie in [0, 1]");
}

CommunityMembership::CommunityMembership(std::vector<int> assignment, int num_communities)
    : assignment_(std::move(assignment)), num_communities_(num_communities) {
  if (num_communities_ < 1) throw ArgumentError("number of communities must be >= 1");
  for (int c : assignment_)
    if (c < 0 || c >= num_communities_)
      throw ArgumentError("community index " + std::to_string(c) + " out of range");
}

Eigen::MatrixXd CommunityMembership::one_hot() const {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(num_nodes(), num_communities_);
  for (int i = 0; i < num_nodes(); ++i) z(i, assignment_[static_cast<std::size_t>(i)]) = 1.0;
  return z;
}

Eigen::VectorXd CommunityMembership::community_sizes() const {
  Eigen::VectorXd sizes = Eigen::VectorXd::Zero(num_communities_);
  for (int c : assignment_) sizes(c) += 1.0;
  return sizes;
}

ProbabilityMatrix::ProbabilityMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (!is_symmetric(entries_)) throw ArgumentError("probability matrix must be symmetric");
  if (!in_unit_interval(entries_))
    throw ArgumentError("probability matrix entries must lie in [0, 1]");
}

AdjacencyMatrix::AdjacencyMatrix(int n)
    : n_(n), bits_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {
  if (n < 0) throw ArgumentError("node count must be non-negative");
}

AdjacencyMatrix AdjacencyMatrix::from_dense(const Eigen::MatrixXd& dense) {
  if (dense.rows() != dense.cols()) throw ArgumentError("adjacency matrix must be square");
  const int n = static_cast<int>(dense.rows());
  AdjacencyMatrix a(n);
  for (int i = 0; i < n; ++i) {
    if (dense(i, i) != 0.0) throw ArgumentError("adjacency matrix must be hollow");
    for (int j = i + 1; j < n; ++j) {
      const double v = dense(i, j);
      if (v != dense(j, i)) throw ArgumentError("adjacency matrix must be symmetric");
      if (v != 0.0 && v != 1.0) throw ArgumentError("adjacency matrix must be binary");
      if (v == 1.0) a.set_edge(i, j);
    }
  }
  return a;
}

void AdjacencyMatrix::set_edge(int i, int j, bool present) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw ArgumentError("node index out of range");
  if (i == j) throw ArgumentError("adjacency matrices are hollow; no self-loops");
  const auto un = static_cast<std::size_t>(n_);
  const std::uint8_t v = present ? 1 : 0;
  bits_[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(j)] = v;
  bits_[static_cast<std::size_t>(j) * un + static_cast<std::size_t>(i)] = v;
}

std::int64_t AdjacencyMatrix::edge_count() const noexcept {
  std::int64_t count = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) count += (*this)(i, j) ? 1 : 0;
  return count;
}

Eigen::MatrixXd AdjacencyMatrix::to_dense() const {
  Eigen::MatrixXd m(n_, n_);
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) m(i, j) = (*this)(i, j) ? 1.0 : 0.0;
  return m;
}

void GraphCollection::validate() const {
  const int nodes = n();
  for (const auto& g : graphs)
    if (g.n() != nodes) throw ArgumentError("all graphs in a collection must share n");
  if (responses.size() > graphs.size())
    throw ArgumentError("more responses than graphs");
  if (!true_regressors.empty() && true_regressors.size() != graphs.size())
    throw ArgumentError("true regressors must be given for every graph");
}

std::string_view to_string(CurveVariant v) noexcept {
  return v == CurveVariant::curve_a ? "curve-A" : "curve-B";
}

CurveVariant parse_curve_variant(std::string_view text) {
  std::string s;
  for (char c : text) s.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "curve-a" || s == "a") return CurveVariant::curve_a;
  if (s == "curve-b" || s == "b") return CurveVariant::curve_b;
  throw ArgumentError("unknown curve variant '" + std::string(text) + "' (expected curve-A or curve-B)");
}

double max_admissible_t(CurveVariant v) noexcept {
  return v == CurveVariant::curve_a ? kCurveA_Diag : 2.0;
}

BlockMatrix build_block_probability(double t, CurveVariant v) {
  if (!(t >= 0.0 && t <= max_admissible_t(v)))
    throw RangeError("t = " + std::to_string(t) + " outside [0, " +
                     std::to_string(max_admissible_t(v)) + "] for " + std::string(to_string(v)));
  const double diag = v == CurveVariant::curve_a ? t / kCurveA_Diag : t / 2.0;
  const double off = v == CurveVariant::curve_a ? t / kCurveA_Off : t / 5.0;
  Eigen::MatrixXd b(2, 2);
  b << diag, off, off, diag;
  return BlockMatrix(std::move(b));
}

Eigen::VectorXd curve_point(double t, CurveVariant v) {
  const Eigen::MatrixXd b = build_block_probability(t, v).entries();
  return Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
}

CommunityMembership balanced_membership(int n, int num_communities) {
  if (num_communities < 1 || n < 1 || n % num_communities != 0)
    throw ArgumentError("balanced membership needs K >= 1 dividing n (n = " + std::to_string(n) +
                        ", K = " + std::to_string(num_communities) + ")");
  const int block = n / num_communities;
  std::vector<int> assignment(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) assignment[static_cast<std::size_t>(i)] = i / block;
  return CommunityMembership(std::move(assignment), num_communities);
}

ProbabilityMatrix probability_matrix(const CommunityMembership& z, const BlockMatrix& b) {
  if (z.num_communities() > b.size())
    throw ArgumentError("membership refers to more communities than the block matrix has");
  const int n = z.num_nodes();
  Eigen::MatrixXd p(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) p(i, j) = b.entries()(z.community(i), z.community(j));
  return ProbabilityMatrix(std::move(p));
}

AdjacencyMatrix sample_adjacency(const ProbabilityMatrix& p, std::uint64_t seed) {
  const int n = p.n();
  AdjacencyMatrix a(n);
  SplitMix64 rng(seed);
  const Eigen::MatrixXd& pe = p.entries();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(pe(i, j))) a.set_edge(i, j);
  return a;
}

CosieParameters msbm_to_cosie(const CommunityMembership& z, std::span<const BlockMatrix> blocks) {
  const Eigen::VectorXd sizes = z.community_sizes();
  if ((sizes.array() <= 0.0).any())
    throw NumericalError("Z^T Z is singular: at least one community is empty");
  const Eigen::VectorXd root = sizes.array().sqrt();

  CosieParameters out;
  out.subspace = z.one_hot() * root.cwiseInverse().asDiagonal();
  out.scores.reserve(blocks.size());
  for (const auto& b : blocks) {
    if (b.size() != z.num_communities())
      throw ArgumentError("block matrix dimension does not match the number of communities");
    out.scores.push_back(root.asDiagonal() * b.entries() * root.asDiagonal());
  }
  out.sparsity = 1.0;
  return out;
}

GraphCollection sample_collection(std::span<const double> ts, int n, CurveVariant v,
                                  std::uint64_t base_seed) {
  const CommunityMembership z = balanced_membership(n, 2);
  GraphCollection out;
  out.graphs.reserve(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const ProbabilityMatrix p = probability_matrix(z, build_block_probability(ts[k], v));
    out.graphs.push_back(sample_adjacency(p, base_seed ^ static_cast<std::uint64_t>(k)));
  }
  out.true_regressors.assign(ts.begin(), ts.end());
  return out;
}

}  // namespace netreg
