#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace parafoil {

/// Cone K = R_+^nonneg x Q^{soc[0]} x Q^{soc[1]} x ...
/// where Q^m = {(t, x) in R x R^{m-1} : |x| <= t}.
struct ConeDims {
  int nonneg{0};
  std::vector<int> soc;

  [[nodiscard]] int rows() const;
  /// Barrier degree: one per orthant row and one per second-order cone.
  [[nodiscard]] int degree() const { return nonneg + static_cast<int>(soc.size()); }
  friend bool operator==(const ConeDims&, const ConeDims&) = default;
};

/// Linear conic program in the standard form
///
///   minimize    c'x + offset
///   subject to  A x = b
///               G x + s = h,  s in K.
struct ConeProgram {
  Eigen::VectorXd c;
  double offset{0.0};
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  Eigen::SparseMatrix<double> G;
  Eigen::VectorXd h;
  ConeDims dims;

  [[nodiscard]] int num_vars() const { return static_cast<int>(c.size()); }
  /// Throws std::invalid_argument when the pieces disagree in size.
  void validate() const;

  /// Sparse triplet text format, see README.
  void write_triplets(std::ostream& out) const;
  static ConeProgram read_triplets(std::istream& in);
};

/// a'x + constant, with a stored as (index, coefficient) pairs.
struct AffineExpr {
  std::vector<std::pair<int, double>> terms;
  double constant{0.0};

  AffineExpr() = default;
  explicit AffineExpr(double value) : constant(value) {}
  static AffineExpr var(int index, double coeff = 1.0) {
    AffineExpr e;
    e.terms.emplace_back(index, coeff);
    return e;
  }
  AffineExpr& add(int index, double coeff) {
    terms.emplace_back(index, coeff);
    return *this;
  }
  AffineExpr& plus(double value) {
    constant += value;
    return *this;
  }
  [[nodiscard]] double eval(const Eigen::VectorXd& x) const;
};

/// Incremental assembly of a ConeProgram from affine constraints.
class ConeProgramBuilder {
 public:
  /// Adds `count` free variables and returns the first index.
  int add_variables(int count);
  [[nodiscard]] int num_vars() const { return num_vars_; }

  void add_cost(int index, double coeff);
  void add_cost_offset(double value) { offset_ += value; }

  /// expr == 0
  void add_equality(const AffineExpr& expr);
  /// expr >= 0
  void add_nonneg(const AffineExpr& expr);
  /// |(rows[1], ..., rows[m-1])| <= rows[0]
  void add_soc(std::vector<AffineExpr> rows);

  [[nodiscard]] int equality_rows() const { return static_cast<int>(equalities_.size()); }
  [[nodiscard]] int nonneg_rows() const { return static_cast<int>(nonneg_.size()); }
  [[nodiscard]] int soc_count() const { return static_cast<int>(socs_.size()); }

  [[nodiscard]] ConeProgram build() const;

 private:
  int num_vars_{0};
  std::vector<std::pair<int, double>> cost_;
  double offset_{0.0};
  std::vector<AffineExpr> equalities_;
  std::vector<AffineExpr> nonneg_;
  std::vector<std::vector<AffineExpr>> socs_;
};

}  // namespace parafoil
