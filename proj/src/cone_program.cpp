#include "parafoil/cone_program.hpp"

#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace parafoil {

int ConeDims::rows() const { return nonneg + std::accumulate(soc.begin(), soc.end(), 0); }

void ConeProgram::validate() const {
  const auto n = c.size();
  if (A.cols() != n && A.rows() > 0) throw std::invalid_argument("A has the wrong number of columns");
  if (A.rows() != b.size()) throw std::invalid_argument("A and b disagree in rows");
  if (G.cols() != n) throw std::invalid_argument("G has the wrong number of columns");
  if (G.rows() != h.size()) throw std::invalid_argument("G and h disagree in rows");
  if (dims.rows() != G.rows()) throw std::invalid_argument("cone dimensions do not cover G");
  if (dims.nonneg < 0) throw std::invalid_argument("negative orthant dimension");
  for (int m : dims.soc) {
    if (m < 1) throw std::invalid_argument("second-order cones need dimension >= 1");
  }
}

double AffineExpr::eval(const Eigen::VectorXd& x) const {
  double v = constant;
  for (const auto& [j, a] : terms) v += a * x[j];
  return v;
}

int ConeProgramBuilder::add_variables(int count) {
  const int first = num_vars_;
  num_vars_ += count;
  return first;
}

void ConeProgramBuilder::add_cost(int index, double coeff) { cost_.emplace_back(index, coeff); }

void ConeProgramBuilder::add_equality(const AffineExpr& expr) { equalities_.push_back(expr); }

void ConeProgramBuilder::add_nonneg(const AffineExpr& expr) { nonneg_.push_back(expr); }

void ConeProgramBuilder::add_soc(std::vector<AffineExpr> rows) {
  if (rows.empty()) throw std::invalid_argument("empty second-order cone");
  socs_.push_back(std::move(rows));
}

ConeProgram ConeProgramBuilder::build() const {
  using Triplet = Eigen::Triplet<double>;
  ConeProgram p;
  const int n = num_vars_;
  p.c = Eigen::VectorXd::Zero(n);
  for (const auto& [j, a] : cost_) p.c[j] += a;
  p.offset = offset_;

  std::vector<Triplet> at;
  p.b.resize(static_cast<Eigen::Index>(equalities_.size()));
  for (std::size_t i = 0; i < equalities_.size(); ++i) {
    for (const auto& [j, a] : equalities_[i].terms) at.emplace_back(static_cast<int>(i), j, a);
    p.b[static_cast<Eigen::Index>(i)] = -equalities_[i].constant;
  }
  p.A.resize(static_cast<Eigen::Index>(equalities_.size()), n);
  p.A.setFromTriplets(at.begin(), at.end());

  // Cone slack s = expr(x) = a'x + c becomes the row (-a) x + s = c.
  std::vector<Triplet> gt;
  std::vector<double> h;
  int row = 0;
  auto emit = [&](const AffineExpr& e) {
    for (const auto& [j, a] : e.terms) gt.emplace_back(row, j, -a);
    h.push_back(e.constant);
    ++row;
  };
  for (const auto& e : nonneg_) emit(e);
  p.dims.nonneg = static_cast<int>(nonneg_.size());
  for (const auto& cone : socs_) {
    for (const auto& e : cone) emit(e);
    p.dims.soc.push_back(static_cast<int>(cone.size()));
  }
  p.G.resize(row, n);
  p.G.setFromTriplets(gt.begin(), gt.end());
  p.h = Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
  return p;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix(std::ostream& out, const Eigen::SparseMatrix<double>& m) {
  for (int k = 0; k < m.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << fmt(it.value()) << '\n';
    }
  }
}

void write_sparse_vector(std::ostream& out, const char* name, const Eigen::VectorXd& v) {
  int nnz = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) nnz += v[i] != 0.0 ? 1 : 0;
  out << name << ' ' << nnz << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) out << i << ' ' << fmt(v[i]) << '\n';
  }
}

// Whitespace tokenizer that drops '#' comments.
class Tokens {
 public:
  explicit Tokens(std::istream& in) {
    std::string line;
    std::ostringstream body;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      body << line << '\n';
    }
    stream_.str(body.str());
  }
  std::string word() {
    std::string w;
    if (!(stream_ >> w)) throw std::runtime_error("triplet file ended unexpectedly");
    return w;
  }
  void expect(const std::string& w) {
    const std::string got = word();
    if (got != w) throw std::runtime_error("triplet file: expected '" + w + "', found '" + got + "'");
  }
  long integer() {
    const std::string w = word();
    std::size_t used = 0;
    const long v = std::stol(w, &used);
    if (used != w.size()) throw std::runtime_error("triplet file: bad integer '" + w + "'");
    return v;
  }
  double real() {
    const std::string w = word();
    std::size_t used = 0;
    const double v = std::stod(w, &used);
    if (used != w.size()) throw std::runtime_error("triplet file: bad number '" + w + "'");
    return v;
  }

 private:
  std::istringstream stream_;
};

Eigen::SparseMatrix<double> read_matrix(Tokens& t, long rows, long cols, long nnz) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(nnz));
  for (long k = 0; k < nnz; ++k) {
    const long i = t.integer();
    const long j = t.integer();
    const double v = t.real();
    if (i < 0 || i >= rows || j < 0 || j >= cols) throw std::runtime_error("triplet index out of range");
    trip.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  }
  Eigen::SparseMatrix<double> m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Eigen::VectorXd read_sparse_vector(Tokens& t, const std::string& name, long size) {
  t.expect(name);
  const long nnz = t.integer();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
  for (long k = 0; k < nnz; ++k) {
    const long i = t.integer();
    if (i < 0 || i >= size) throw std::runtime_error("triplet file: " + name + " index out of range");
    v[i] = t.real();
  }
  return v;
}

}  // namespace

void ConeProgram::write_triplets(std::ostream& out) const {
  out << "socp-triplets 1\n";
  out << "variables " << c.size() << '\n';
  out << "offset " << fmt(offset) << '\n';
  write_sparse_vector(out, "cost", c);
  out << "equalities " << A.rows() << ' ' << A.nonZeros() << '\n';
  write_matrix(out, A);
  write_sparse_vector(out, "b", b);
  out << "cones " << dims.nonneg << ' ' << dims.soc.size();
  for (int m : dims.soc) out << ' ' << m;
  out << '\n';
  out << "inequalities " << G.rows() << ' ' << G.nonZeros() << '\n';
  write_matrix(out, G);
  write_sparse_vector(out, "h", h);
  out << "end\n";
}

ConeProgram ConeProgram::read_triplets(std::istream& in) {
  Tokens t(in);
  t.expect("socp-triplets");
  if (t.integer() != 1) throw std::runtime_error("unsupported triplet format version");
  ConeProgram p;
  t.expect("variables");
  const long n = t.integer();
  if (n < 0) throw std::runtime_error("negative variable count");
  t.expect("offset");
  p.offset = t.real();
  p.c = read_sparse_vector(t, "cost", n);
  t.expect("equalities");
  const long me = t.integer();
  const long nnz_a = t.integer();
  p.A = read_matrix(t, me, n, nnz_a);
  p.b = read_sparse_vector(t, "b", me);
  t.expect("cones");
  p.dims.nonneg = static_cast<int>(t.integer());
  const long nsoc = t.integer();
  for (long k = 0; k < nsoc; ++k) p.dims.soc.push_back(static_cast<int>(t.integer()));
  t.expect("inequalities");
  const long mi = t.integer();
  const long nnz_g = t.integer();
  p.G = read_matrix(t, mi, n, nnz_g);
  p.h = read_sparse_vector(t, "h", mi);
  t.expect("end");
  p.validate();
  return p;
}

}  // namespace parafoil
