#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ac2cd/problem.hpp"
#include "ac2cd/rng.hpp"

namespace ac2cd {

// f(x) = 1/2 (Qx)^T D (Qx) - q^T x with Q of size m x n (dense or compressed
// sparse columns) and D diagonal. Partials go through the residual vector
// r(x) = D Q x, so one derivative costs a single column pass.
class StructuredQuadratic final : public Objective {
 public:
  StructuredQuadratic(Eigen::MatrixXd q_dense, Vec diag, Vec linear);
  StructuredQuadratic(Eigen::SparseMatrix<double> q_sparse, Vec diag, Vec linear);

  Index dim() const override { return linear_.size(); }
  double value(const Vec& x) const override;
  double partial(Index i, const Vec& x) const override;
  double pair_move_value(const Vec& x, Index i, Index j, double t) const override;
  Vec gradient(const Vec& x) const override;

  bool has_pair_lipschitz() const override { return true; }
  double pair_lipschitz(Index i, Index j) const override;
  bool is_quadratic() const override { return true; }
  double pair_curvature(Index i, Index j) const override;

  std::unique_ptr<OracleState> make_state(const Vec& x0) const override;

  Index rows() const { return rows_; }
  bool sparse() const { return sparse_; }
  const Eigen::MatrixXd& dense_matrix() const { return q_dense_; }
  const Eigen::SparseMatrix<double>& sparse_matrix() const { return q_sparse_; }
  const Vec& diagonal() const { return diag_; }
  const Vec& linear() const { return linear_; }

  // r += coef * D (Q_i - Q_j); one pass over the two columns.
  void add_scaled_column_diff(Vec& r, double coef, Index i, Index j) const;
  // Q_i^T r
  double column_dot(Index i, const Vec& r) const;
  // D Q x
  Vec residual_at(const Vec& x) const;

 private:
  bool sparse_;
  Index rows_;
  Eigen::MatrixXd q_dense_;
  Eigen::SparseMatrix<double> q_sparse_;
  Vec diag_;
  Vec linear_;
};

// Residual-cached evaluation state for StructuredQuadratic. Invariant:
// r == D Q x up to float drift; refresh() rebuilds it from scratch.
class QuadraticOracleState final : public OracleState {
 public:
  QuadraticOracleState(const StructuredQuadratic& obj, Vec x0);

  const Vec& point() const override { return x_; }
  double value() const override { return fval_; }
  double partial(Index i) const override { return obj_.column_dot(i, r_) - obj_.linear()[i]; }
  double move_value(Index i, Index j, double t) const override;
  void apply_move(Index i, Index j, double t) override;
  void clamp_coordinate(Index i, double v) override { x_[i] = v; }
  void refresh() override;

  const Vec& residual() const { return r_; }
  // Test hook for the cache-coherence check: deliberately perturbs r.
  void corrupt_residual(double bump) { r_[0] += bump; }

 private:
  struct PairCache {
    std::uint64_t version = ~std::uint64_t{0};
    Index i = -1, j = -1;
    double slope = 0.0, kappa = 0.0;
  };
  const PairCache& pair_data(Index i, Index j) const;

  const StructuredQuadratic& obj_;
  Vec x_;
  Vec r_;
  double fval_;
  std::uint64_t version_ = 0;
  mutable PairCache cache_;
};

// f(x) = sum_i [ a_i/2 (x_i - c_i)^2 + log(1 + exp(b_i (x_i - d_i))) ], a_i > 0.
// Each term is strongly convex with modulus a_i and has derivative Lipschitz
// constant L_i = a_i + b_i^2 / 4.
class SeparableLogExp final : public Objective {
 public:
  SeparableLogExp(Vec a, Vec b, Vec c, Vec d);

  Index dim() const override { return a_.size(); }
  double value(const Vec& x) const override;
  double partial(Index i, const Vec& x) const override;
  double pair_move_value(const Vec& x, Index i, Index j, double t) const override;

  bool has_pair_lipschitz() const override { return true; }
  double pair_lipschitz(Index i, Index j) const override { return lips_[i] + lips_[j]; }
  bool has_coordinate_lipschitz() const override { return true; }
  Vec coordinate_lipschitz_constants() const override { return lips_; }

  std::unique_ptr<OracleState> make_state(const Vec& x0) const override;

  double term(Index i, double xi) const;
  double term_derivative(Index i, double xi) const;
  double term_second_derivative(Index i, double xi) const;

  const Vec& a() const { return a_; }
  const Vec& b() const { return b_; }
  const Vec& c() const { return c_; }
  const Vec& d() const { return d_; }
  const Vec& coordinate_lipschitz() const { return lips_; }
  double strong_convexity() const { return a_.minCoeff(); }

 private:
  Vec a_, b_, c_, d_;
  Vec lips_;
};

enum class Family { Chebyshev, SvmDual, LogExpEquality, NonconvexSimplex };

const char* family_name(Family family);
Family family_from_name(const std::string& name);

// A reproducible problem instance: (family, seed, dimensions) regenerate it
// bit-identically.
struct GeneratedInstance {
  Family family = Family::Chebyshev;
  std::uint64_t seed = 0;
  Index n = 0;
  Index m = 0;
  int regime = 0;           // logexp generator variant
  double neg_fraction = 0;  // nonconvex D sign fraction
  Index neg_count = 0;      // negative entries actually placed in D
  double box_c = 0.0;       // SVM regularization bound C
  Problem problem;
  std::optional<double> reference_optimum;

  std::shared_ptr<const StructuredQuadratic> quadratic;  // null for logexp
  std::shared_ptr<const SeparableLogExp> separable;      // null otherwise

  // Family-specific default starting point policy.
  Vec default_start(std::uint64_t start_seed) const;
};

// Smallest enclosing ball of n standard-normal points in R^m, as the simplex
// program min x^T Q^T Q x - sum_i ||v_i||^2 x_i (columns of Q are the points).
GeneratedInstance gen_chebyshev(Index n, Index m, std::uint64_t seed);
GeneratedInstance make_chebyshev_from_points(const Eigen::MatrixXd& points);

// Separable strongly convex objective on {x : sum x = 0}, no bounds.
// regime 1: a ~ U(0,15), b,c,d ~ U(-15,15); regime 2: a ~ U(0,2), b ~ U(-2,2),
// c,d ~ U(-10,10).
GeneratedInstance gen_logexp(Index n, std::uint64_t seed, int regime);
GeneratedInstance make_logexp_from_params(Vec a, Vec b, Vec c, Vec d);

// Indefinite quadratic on the simplex: D has ceil(neg_fraction * m) negative
// diagonal entries at seeded positions.
GeneratedInstance gen_nonconvex(Index n, Index m, double neg_fraction, std::uint64_t seed);

// Reads a sparse classification file and builds the transformed SVM dual:
// constraint sum x = 0, bounds [0,C] / [-C,0] by label sign.
GeneratedInstance load_svm_dual(std::istream& in, double c_bound);
GeneratedInstance load_svm_dual_file(const std::string& path, double c_bound);

// Deterministic two-blob classification dataset in sparse text format.
std::string make_svm_toy_dataset(Index n, Index dim, std::uint64_t seed);

void write_instance(const GeneratedInstance& inst, std::ostream& out);
GeneratedInstance read_instance(std::istream& in);
void write_instance_file(const GeneratedInstance& inst, const std::string& path);
GeneratedInstance read_instance_file(const std::string& path);

// Shortest decimal representation that round-trips exactly.
std::string format_double(double v);
double parse_double(const std::string& token);

}  // namespace ac2cd
