#include "ac2cd/instances.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace ac2cd {

namespace {

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

StructuredQuadratic::StructuredQuadratic(Eigen::MatrixXd q_dense, Vec diag, Vec linear)
    : sparse_(false),
      rows_(q_dense.rows()),
      q_dense_(std::move(q_dense)),
      diag_(std::move(diag)),
      linear_(std::move(linear)) {
  if (diag_.size() != rows_ || q_dense_.cols() != linear_.size()) {
    throw Error(ErrorCode::ConfigError, "quadratic payload dimensions disagree");
  }
}

StructuredQuadratic::StructuredQuadratic(Eigen::SparseMatrix<double> q_sparse, Vec diag,
                                         Vec linear)
    : sparse_(true),
      rows_(q_sparse.rows()),
      q_sparse_(std::move(q_sparse)),
      diag_(std::move(diag)),
      linear_(std::move(linear)) {
  q_sparse_.makeCompressed();
  if (diag_.size() != rows_ || q_sparse_.cols() != linear_.size()) {
    throw Error(ErrorCode::ConfigError, "quadratic payload dimensions disagree");
  }
}

double StructuredQuadratic::value(const Vec& x) const {
  const Vec s = sparse_ ? Vec(q_sparse_ * x) : Vec(q_dense_ * x);
  return 0.5 * s.dot(diag_.cwiseProduct(s)) - linear_.dot(x);
}

double StructuredQuadratic::partial(Index i, const Vec& x) const {
  const Vec s = sparse_ ? Vec(q_sparse_ * x) : Vec(q_dense_ * x);
  return column_dot(i, diag_.cwiseProduct(s)) - linear_[i];
}

Vec StructuredQuadratic::gradient(const Vec& x) const {
  const Vec s = sparse_ ? Vec(q_sparse_ * x) : Vec(q_dense_ * x);
  const Vec r = diag_.cwiseProduct(s);
  Vec g = sparse_ ? Vec(q_sparse_.transpose() * r) : Vec(q_dense_.transpose() * r);
  return g - linear_;
}

double StructuredQuadratic::pair_move_value(const Vec& x, Index i, Index j, double t) const {
  const Vec s = sparse_ ? Vec(q_sparse_ * x) : Vec(q_dense_ * x);
  const Vec r = diag_.cwiseProduct(s);
  const double val = 0.5 * s.dot(r) - linear_.dot(x);
  const double slope = (column_dot(i, r) - linear_[i]) - (column_dot(j, r) - linear_[j]);
  return val + t * slope + 0.5 * t * t * pair_curvature(i, j);
}

double StructuredQuadratic::pair_lipschitz(Index i, Index j) const {
  return std::abs(pair_curvature(i, j));
}

double StructuredQuadratic::pair_curvature(Index i, Index j) const {
  double acc = 0.0;
  if (!sparse_) {
    for (Index r = 0; r < rows_; ++r) {
      const double w = q_dense_(r, i) - q_dense_(r, j);
      acc += diag_[r] * w * w;
    }
    return acc;
  }
  Eigen::SparseMatrix<double>::InnerIterator it_i(q_sparse_, i);
  Eigen::SparseMatrix<double>::InnerIterator it_j(q_sparse_, j);
  while (it_i || it_j) {
    if (it_i && (!it_j || it_i.row() < it_j.row())) {
      acc += diag_[it_i.row()] * it_i.value() * it_i.value();
      ++it_i;
    } else if (it_j && (!it_i || it_j.row() < it_i.row())) {
      acc += diag_[it_j.row()] * it_j.value() * it_j.value();
      ++it_j;
    } else {
      const double w = it_i.value() - it_j.value();
      acc += diag_[it_i.row()] * w * w;
      ++it_i;
      ++it_j;
    }
  }
  return acc;
}

double StructuredQuadratic::column_dot(Index i, const Vec& r) const {
  if (!sparse_) return q_dense_.col(i).dot(r);
  double acc = 0.0;
  for (Eigen::SparseMatrix<double>::InnerIterator it(q_sparse_, i); it; ++it) {
    acc += it.value() * r[it.row()];
  }
  return acc;
}

void StructuredQuadratic::add_scaled_column_diff(Vec& r, double coef, Index i, Index j) const {
  if (!sparse_) {
    for (Index row = 0; row < rows_; ++row) {
      r[row] += coef * diag_[row] * (q_dense_(row, i) - q_dense_(row, j));
    }
    return;
  }
  for (Eigen::SparseMatrix<double>::InnerIterator it(q_sparse_, i); it; ++it) {
    r[it.row()] += coef * diag_[it.row()] * it.value();
  }
  for (Eigen::SparseMatrix<double>::InnerIterator it(q_sparse_, j); it; ++it) {
    r[it.row()] -= coef * diag_[it.row()] * it.value();
  }
}

Vec StructuredQuadratic::residual_at(const Vec& x) const {
  const Vec s = sparse_ ? Vec(q_sparse_ * x) : Vec(q_dense_ * x);
  return diag_.cwiseProduct(s);
}

std::unique_ptr<OracleState> StructuredQuadratic::make_state(const Vec& x0) const {
  return std::make_unique<QuadraticOracleState>(*this, x0);
}

QuadraticOracleState::QuadraticOracleState(const StructuredQuadratic& obj, Vec x0)
    : obj_(obj), x_(std::move(x0)), r_(obj.rows()), fval_(0.0) {
  refresh();
}

const QuadraticOracleState::PairCache& QuadraticOracleState::pair_data(Index i, Index j) const {
  if (cache_.version != version_ || cache_.i != i || cache_.j != j) {
    cache_.version = version_;
    cache_.i = i;
    cache_.j = j;
    cache_.slope = partial(i) - partial(j);
    cache_.kappa = obj_.pair_curvature(i, j);
  }
  return cache_;
}

double QuadraticOracleState::move_value(Index i, Index j, double t) const {
  const PairCache& pd = pair_data(i, j);
  return fval_ + t * pd.slope + 0.5 * t * t * pd.kappa;
}

void QuadraticOracleState::apply_move(Index i, Index j, double t) {
  const PairCache& pd = pair_data(i, j);
  fval_ += t * pd.slope + 0.5 * t * t * pd.kappa;
  obj_.add_scaled_column_diff(r_, t, i, j);
  x_[i] += t;
  x_[j] -= t;
  ++version_;
}

void QuadraticOracleState::refresh() {
  const Vec s = obj_.sparse() ? Vec(obj_.sparse_matrix() * x_) : Vec(obj_.dense_matrix() * x_);
  r_ = obj_.diagonal().cwiseProduct(s);
  fval_ = 0.5 * s.dot(r_) - obj_.linear().dot(x_);
  ++version_;
}

SeparableLogExp::SeparableLogExp(Vec a, Vec b, Vec c, Vec d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
  const Index n = a_.size();
  if (b_.size() != n || c_.size() != n || d_.size() != n) {
    throw Error(ErrorCode::ConfigError, "logexp parameter vectors disagree in length");
  }
  for (Index i = 0; i < n; ++i) {
    if (!(a_[i] > 0.0)) throw Error(ErrorCode::ConfigError, "logexp requires a_i > 0");
  }
  lips_ = a_ + 0.25 * b_.cwiseProduct(b_);
}

double SeparableLogExp::term(Index i, double xi) const {
  const double u = xi - c_[i];
  return 0.5 * a_[i] * u * u + softplus(b_[i] * (xi - d_[i]));
}

double SeparableLogExp::term_derivative(Index i, double xi) const {
  return a_[i] * (xi - c_[i]) + b_[i] * sigmoid(b_[i] * (xi - d_[i]));
}

double SeparableLogExp::term_second_derivative(Index i, double xi) const {
  const double s = sigmoid(b_[i] * (xi - d_[i]));
  return a_[i] + b_[i] * b_[i] * s * (1.0 - s);
}

double SeparableLogExp::value(const Vec& x) const {
  double acc = 0.0;
  for (Index i = 0; i < dim(); ++i) acc += term(i, x[i]);
  return acc;
}

double SeparableLogExp::partial(Index i, const Vec& x) const { return term_derivative(i, x[i]); }

double SeparableLogExp::pair_move_value(const Vec& x, Index i, Index j, double t) const {
  // Delta form: vanishes exactly once t underflows against the coordinates.
  const double delta = (term(i, x[i] + t) - term(i, x[i])) + (term(j, x[j] - t) - term(j, x[j]));
  return value(x) + delta;
}

namespace {

class LogExpOracleState final : public OracleState {
 public:
  LogExpOracleState(const SeparableLogExp& obj, Vec x) : obj_(obj), x_(std::move(x)) {
    fval_ = obj_.value(x_);
  }

  const Vec& point() const override { return x_; }
  double value() const override { return fval_; }
  double partial(Index i) const override { return obj_.term_derivative(i, x_[i]); }
  double move_value(Index i, Index j, double t) const override {
    return fval_ + pair_delta(i, j, t);
  }
  void apply_move(Index i, Index j, double t) override {
    fval_ += pair_delta(i, j, t);
    x_[i] += t;
    x_[j] -= t;
  }
  void clamp_coordinate(Index i, double v) override { x_[i] = v; }
  void refresh() override { fval_ = obj_.value(x_); }

 private:
  double pair_delta(Index i, Index j, double t) const {
    return (obj_.term(i, x_[i] + t) - obj_.term(i, x_[i])) +
           (obj_.term(j, x_[j] - t) - obj_.term(j, x_[j]));
  }

  const SeparableLogExp& obj_;
  Vec x_;
  double fval_;
};

}  // namespace

std::unique_ptr<OracleState> SeparableLogExp::make_state(const Vec& x0) const {
  return std::make_unique<LogExpOracleState>(*this, x0);
}

const char* family_name(Family family) {
  switch (family) {
    case Family::Chebyshev: return "chebyshev";
    case Family::SvmDual: return "svm-dual";
    case Family::LogExpEquality: return "logexp";
    case Family::NonconvexSimplex: return "nonconvex";
  }
  return "unknown";
}

Family family_from_name(const std::string& name) {
  if (name == "chebyshev") return Family::Chebyshev;
  if (name == "svm-dual" || name == "svm") return Family::SvmDual;
  if (name == "logexp") return Family::LogExpEquality;
  if (name == "nonconvex") return Family::NonconvexSimplex;
  throw Error(ErrorCode::ConfigError, "unknown family '" + name + "'");
}

Vec GeneratedInstance::default_start(std::uint64_t start_seed) const {
  Rng rng(start_seed);
  Vec x = Vec::Zero(n);
  switch (family) {
    case Family::Chebyshev:
    case Family::NonconvexSimplex:
      x[static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)))] = 1.0;
      break;
    case Family::SvmDual: {
      std::vector<Index> pos, neg;
      for (Index i = 0; i < n; ++i) {
        (problem.bounds.lower(i).value() < 0.0 ? neg : pos).push_back(i);
      }
      if (!pos.empty() && !neg.empty()) {
        x[pos[static_cast<std::size_t>(rng.below(pos.size()))]] = 0.5 * box_c;
        x[neg[static_cast<std::size_t>(rng.below(neg.size()))]] = -0.5 * box_c;
      }
      break;
    }
    case Family::LogExpEquality:
      break;  // zero vector
  }
  return x;
}

GeneratedInstance make_chebyshev_from_points(const Eigen::MatrixXd& points) {
  const Index m = points.rows();
  const Index n = points.cols();
  Vec q(n);
  for (Index i = 0; i < n; ++i) q[i] = points.col(i).squaredNorm();
  // The simplex program carries the full Gram matrix, so D = 2I under the
  // 1/2 x^T Q^T D Q x convention.
  auto quad = std::make_shared<StructuredQuadratic>(points, Vec::Constant(m, 2.0), q);
  GeneratedInstance inst;
  inst.family = Family::Chebyshev;
  inst.n = n;
  inst.m = m;
  inst.quadratic = quad;
  inst.problem = Problem{n, 1.0, Bounds::uniform(n, ExtReal(0.0), ExtReal(1.0)), quad};
  return inst;
}

GeneratedInstance gen_chebyshev(Index n, Index m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw Error(ErrorCode::ConfigError, "chebyshev needs n >= 1, m >= 1");
  Rng rng(seed);
  Eigen::MatrixXd points(m, n);
  for (Index i = 0; i < n; ++i) {
    for (Index r = 0; r < m; ++r) points(r, i) = rng.normal();
  }
  GeneratedInstance inst = make_chebyshev_from_points(points);
  inst.seed = seed;
  return inst;
}

GeneratedInstance make_logexp_from_params(Vec a, Vec b, Vec c, Vec d) {
  const Index n = a.size();
  auto obj = std::make_shared<SeparableLogExp>(std::move(a), std::move(b), std::move(c),
                                               std::move(d));
  GeneratedInstance inst;
  inst.family = Family::LogExpEquality;
  inst.n = n;
  inst.m = 0;
  inst.separable = obj;
  inst.problem = Problem{n, 0.0, Bounds::unbounded(n), obj};
  return inst;
}

GeneratedInstance gen_logexp(Index n, std::uint64_t seed, int regime) {
  if (n < 2) throw Error(ErrorCode::ConfigError, "logexp needs n >= 2");
  if (regime != 1 && regime != 2) throw Error(ErrorCode::ConfigError, "logexp regime is 1 or 2");
  Rng rng(seed);
  Vec a(n), b(n), c(n), d(n);
  for (Index i = 0; i < n; ++i) {
    if (regime == 1) {
      a[i] = rng.uniform(0.0, 15.0);
      b[i] = rng.uniform(-15.0, 15.0);
      c[i] = rng.uniform(-15.0, 15.0);
      d[i] = rng.uniform(-15.0, 15.0);
    } else {
      a[i] = rng.uniform(0.0, 2.0);
      b[i] = rng.uniform(-2.0, 2.0);
      c[i] = rng.uniform(-10.0, 10.0);
      d[i] = rng.uniform(-10.0, 10.0);
    }
    if (a[i] == 0.0) a[i] = std::numeric_limits<double>::min();  // open interval
  }
  GeneratedInstance inst = make_logexp_from_params(a, b, c, d);
  inst.seed = seed;
  inst.regime = regime;
  return inst;
}

GeneratedInstance gen_nonconvex(Index n, Index m, double neg_fraction, std::uint64_t seed) {
  if (n < 2 || m < 1) throw Error(ErrorCode::ConfigError, "nonconvex needs n >= 2, m >= 1");
  if (!(neg_fraction > 0.0 && neg_fraction < 1.0)) {
    throw Error(ErrorCode::ConfigError, "neg_fraction must lie in (0,1)");
  }
  Rng rng(seed);
  Eigen::MatrixXd q_mat(m, n);
  for (Index i = 0; i < n; ++i) {
    for (Index r = 0; r < m; ++r) q_mat(r, i) = rng.normal();
  }
  Vec lin(n);
  for (Index i = 0; i < n; ++i) lin[i] = rng.uniform();
  const Index k = static_cast<Index>(std::ceil(neg_fraction * static_cast<double>(m)));
  std::vector<Index> order(static_cast<std::size_t>(m));
  for (Index r = 0; r < m; ++r) order[static_cast<std::size_t>(r)] = r;
  rng.shuffle(order);
  Vec diag = Vec::Ones(m);
  for (Index t = 0; t < k; ++t) diag[order[static_cast<std::size_t>(t)]] = rng.uniform(-1.0, 0.0);

  auto quad = std::make_shared<StructuredQuadratic>(std::move(q_mat), std::move(diag), lin);
  GeneratedInstance inst;
  inst.family = Family::NonconvexSimplex;
  inst.seed = seed;
  inst.n = n;
  inst.m = m;
  inst.neg_fraction = neg_fraction;
  inst.neg_count = k;
  inst.quadratic = quad;
  inst.problem = Problem{n, 1.0, Bounds::uniform(n, ExtReal(0.0), ExtReal(1.0)), quad};
  return inst;
}

namespace {

GeneratedInstance build_svm_instance(const std::vector<Eigen::Triplet<double>>& triplets,
                                     const std::vector<double>& labels, Index m, double c_bound) {
  const Index n = static_cast<Index>(labels.size());
  Eigen::SparseMatrix<double> q_mat(m, n);
  q_mat.setFromTriplets(triplets.begin(), triplets.end());
  Vec lin(n);
  std::vector<ExtReal> lower(static_cast<std::size_t>(n));
  std::vector<ExtReal> upper(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    lin[i] = labels[static_cast<std::size_t>(i)];
    if (labels[static_cast<std::size_t>(i)] > 0.0) {
      lower[static_cast<std::size_t>(i)] = ExtReal(0.0);
      upper[static_cast<std::size_t>(i)] = ExtReal(c_bound);
    } else {
      lower[static_cast<std::size_t>(i)] = ExtReal(-c_bound);
      upper[static_cast<std::size_t>(i)] = ExtReal(0.0);
    }
  }
  auto quad = std::make_shared<StructuredQuadratic>(std::move(q_mat), Vec::Ones(m), lin);
  GeneratedInstance inst;
  inst.family = Family::SvmDual;
  inst.n = n;
  inst.m = m;
  inst.box_c = c_bound;
  inst.quadratic = quad;
  inst.problem = Problem{n, 0.0, Bounds(std::move(lower), std::move(upper)), quad};
  return inst;
}

}  // namespace

GeneratedInstance load_svm_dual(std::istream& in, double c_bound) {
  if (!(c_bound > 0.0)) throw Error(ErrorCode::ConfigError, "C must be positive");
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> labels;
  Index max_feature = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;  // blank or comment-only line
    double label = 0.0;
    try {
      label = parse_double(token);
    } catch (const Error&) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad label");
    }
    if (label != 1.0 && label != -1.0) {
      throw Error(ErrorCode::LabelError,
                  "line " + std::to_string(line_no) + ": label must be -1 or +1");
    }
    const Index sample = static_cast<Index>(labels.size());
    labels.push_back(label);
    long long prev_index = 0;
    while (ls >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == token.size()) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": expected index:value");
      }
      long long feature = 0;
      const auto [iptr, iec] =
          std::from_chars(token.data(), token.data() + colon, feature);
      if (iec != std::errc() || iptr != token.data() + colon || feature < 1) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": bad feature index");
      }
      if (feature <= prev_index) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": indices must strictly increase");
      }
      prev_index = feature;
      double v = 0.0;
      try {
        v = parse_double(token.substr(colon + 1));
      } catch (const Error&) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": bad feature value");
      }
      max_feature = std::max(max_feature, static_cast<Index>(feature));
      triplets.emplace_back(static_cast<int>(feature - 1), static_cast<int>(sample), v);
    }
  }
  if (labels.empty()) throw Error(ErrorCode::ParseError, "no samples in input");
  return build_svm_instance(triplets, labels, std::max<Index>(max_feature, 1), c_bound);
}

GeneratedInstance load_svm_dual_file(const std::string& path, double c_bound) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  GeneratedInstance inst = load_svm_dual(in, c_bound);
  return inst;
}

std::string make_svm_toy_dataset(Index n, Index dim, std::uint64_t seed) {
  Rng rng(seed);
  std::ostringstream out;
  for (Index i = 0; i < n; ++i) {
    const int label = (i % 2 == 0) ? 1 : -1;
    out << (label > 0 ? "+1" : "-1");
    for (Index f = 0; f < dim; ++f) {
      const double v = 1.5 * label + rng.normal();
      out << ' ' << (f + 1) << ':' << format_double(v);
    }
    out << '\n';
  }
  return out.str();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
  if (token == "inf") return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  if (token == "nan") return std::numeric_limits<double>::quiet_NaN();
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;  // from_chars rejects a leading '+'
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (first == last || ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::ParseError, "bad number '" + token + "'");
  }
  return v;
}

namespace {

void write_vec(std::ostream& out, const char* key, const Vec& v) {
  out << key;
  for (Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v[i]);
  out << '\n';
}

Vec read_vec(std::istream& in, const std::string& key, Index count) {
  std::string token;
  in >> token;
  if (token != key) throw Error(ErrorCode::ParseError, "expected '" + key + "' section");
  Vec v(count);
  for (Index i = 0; i < count; ++i) {
    if (!(in >> token)) throw Error(ErrorCode::ParseError, "truncated '" + key + "' section");
    v[i] = parse_double(token);
  }
  return v;
}

}  // namespace

void write_instance(const GeneratedInstance& inst, std::ostream& out) {
  out << "ac2cd-instance 1\n";
  out << "family " << family_name(inst.family) << '\n';
  out << "seed " << inst.seed << '\n';
  out << "n " << inst.n << '\n';
  out << "m " << inst.m << '\n';
  out << "regime " << inst.regime << '\n';
  out << "neg_fraction " << format_double(inst.neg_fraction) << '\n';
  out << "neg_count " << inst.neg_count << '\n';
  out << "c " << format_double(inst.box_c) << '\n';
  out << "level " << format_double(inst.problem.level) << '\n';
  if (inst.reference_optimum) out << "fstar " << format_double(*inst.reference_optimum) << '\n';
  if (inst.separable) {
    out << "payload logexp\n";
    write_vec(out, "a", inst.separable->a());
    write_vec(out, "b", inst.separable->b());
    write_vec(out, "c", inst.separable->c());
    write_vec(out, "d", inst.separable->d());
  } else if (inst.quadratic->sparse()) {
    out << "payload quadratic-sparse\n";
    write_vec(out, "q", inst.quadratic->linear());
    write_vec(out, "d", inst.quadratic->diagonal());
    out << "Q\n";
    const auto& mat = inst.quadratic->sparse_matrix();
    for (Index i = 0; i < inst.n; ++i) {
      Index nnz = 0;
      for (Eigen::SparseMatrix<double>::InnerIterator it(mat, i); it; ++it) ++nnz;
      out << nnz;
      for (Eigen::SparseMatrix<double>::InnerIterator it(mat, i); it; ++it) {
        out << ' ' << it.row() << ':' << format_double(it.value());
      }
      out << '\n';
    }
  } else {
    out << "payload quadratic-dense\n";
    write_vec(out, "q", inst.quadratic->linear());
    write_vec(out, "d", inst.quadratic->diagonal());
    out << "Q\n";
    const auto& mat = inst.quadratic->dense_matrix();
    for (Index i = 0; i < inst.n; ++i) {
      for (Index r = 0; r < inst.m; ++r) out << (r ? " " : "") << format_double(mat(r, i));
      out << '\n';
    }
  }
  out << "end\n";
}

GeneratedInstance read_instance(std::istream& in) {
  auto expect = [&](const char* key) {
    std::string token;
    if (!(in >> token) || token != key) {
      throw Error(ErrorCode::ParseError, std::string("expected '") + key + "'");
    }
  };
  expect("ac2cd-instance");
  int version = 0;
  in >> version;
  if (version != 1) throw Error(ErrorCode::ParseError, "unsupported instance version");

  std::string token, family_token, payload;
  std::uint64_t seed = 0;
  Index n = 0, m = 0, neg_count = 0;
  int regime = 0;
  double neg_fraction = 0.0, c_bound = 0.0, level = 0.0;
  std::optional<double> fstar;
  while (in >> token) {
    if (token == "payload") {
      in >> payload;
      break;
    } else if (token == "family") {
      in >> family_token;
    } else if (token == "seed") {
      in >> seed;
    } else if (token == "n") {
      in >> n;
    } else if (token == "m") {
      in >> m;
    } else if (token == "regime") {
      in >> regime;
    } else if (token == "neg_fraction") {
      in >> token;
      neg_fraction = parse_double(token);
    } else if (token == "neg_count") {
      in >> neg_count;
    } else if (token == "c") {
      in >> token;
      c_bound = parse_double(token);
    } else if (token == "level") {
      in >> token;
      level = parse_double(token);
    } else if (token == "fstar") {
      in >> token;
      fstar = parse_double(token);
    } else {
      throw Error(ErrorCode::ParseError, "unknown header key '" + token + "'");
    }
  }
  const Family family = family_from_name(family_token);

  GeneratedInstance inst;
  if (payload == "logexp") {
    Vec a = read_vec(in, "a", n);
    Vec b = read_vec(in, "b", n);
    Vec c = read_vec(in, "c", n);
    Vec d = read_vec(in, "d", n);
    inst = make_logexp_from_params(std::move(a), std::move(b), std::move(c), std::move(d));
  } else if (payload == "quadratic-dense" || payload == "quadratic-sparse") {
    const Vec lin = read_vec(in, "q", n);
    const Vec diag = read_vec(in, "d", m);
    expect("Q");
    if (payload == "quadratic-dense") {
      Eigen::MatrixXd mat(m, n);
      for (Index i = 0; i < n; ++i) {
        for (Index r = 0; r < m; ++r) {
          if (!(in >> token)) throw Error(ErrorCode::ParseError, "truncated Q payload");
          mat(r, i) = parse_double(token);
        }
      }
      inst.quadratic = std::make_shared<StructuredQuadratic>(std::move(mat), diag, lin);
    } else {
      std::vector<Eigen::Triplet<double>> triplets;
      for (Index i = 0; i < n; ++i) {
        Index nnz = 0;
        if (!(in >> nnz)) throw Error(ErrorCode::ParseError, "truncated Q payload");
        for (Index t = 0; t < nnz; ++t) {
          if (!(in >> token)) throw Error(ErrorCode::ParseError, "truncated Q payload");
          const auto colon = token.find(':');
          if (colon == std::string::npos) {
            throw Error(ErrorCode::ParseError, "expected row:value in sparse payload");
          }
          triplets.emplace_back(static_cast<int>(std::stoll(token.substr(0, colon))),
                                static_cast<int>(i), parse_double(token.substr(colon + 1)));
        }
      }
      Eigen::SparseMatrix<double> mat(m, n);
      mat.setFromTriplets(triplets.begin(), triplets.end());
      inst.quadratic = std::make_shared<StructuredQuadratic>(std::move(mat), diag, lin);
    }
    Bounds bounds;
    if (family == Family::SvmDual) {
      std::vector<ExtReal> lower(static_cast<std::size_t>(n)), upper(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) {
        const bool pos = lin[i] > 0.0;
        lower[static_cast<std::size_t>(i)] = pos ? ExtReal(0.0) : ExtReal(-c_bound);
        upper[static_cast<std::size_t>(i)] = pos ? ExtReal(c_bound) : ExtReal(0.0);
      }
      bounds = Bounds(std::move(lower), std::move(upper));
    } else {
      bounds = Bounds::uniform(n, ExtReal(0.0), ExtReal(1.0));
    }
    inst.problem = Problem{n, level, std::move(bounds), inst.quadratic};
  } else {
    throw Error(ErrorCode::ParseError, "unknown payload kind '" + payload + "'");
  }
  expect("end");

  inst.family = family;
  inst.seed = seed;
  inst.n = n;
  inst.m = m;
  inst.regime = regime;
  inst.neg_fraction = neg_fraction;
  inst.neg_count = neg_count;
  inst.box_c = c_bound;
  inst.problem.level = level;
  inst.reference_optimum = fstar;
  return inst;
}

void write_instance_file(const GeneratedInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InstanceError, "cannot write '" + path + "'");
  write_instance(inst, out);
}

GeneratedInstance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InstanceError, "cannot open '" + path + "'");
  return read_instance(in);
}

}  // namespace ac2cd
