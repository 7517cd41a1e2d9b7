#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <vector>

namespace ewh {

/// Cone layout of the inequality block: first `l` nonnegative-orthant rows,
/// then one second-order cone per entry of `q` (entry = cone dimension).
struct ConeDims {
  int l = 0;
  std::vector<int> q;

  int rows() const {
    int m = l;
    for (int k : q) m += k;
    return m;
  }
  /// Barrier degree: 1 per LP row, 1 per second-order cone.
  int degree() const { return l + static_cast<int>(q.size()); }
};

/// Nesterov-Todd scaling point for R+^l x SOC cones.
/// W is symmetric; lambda = W z = W^{-1} s is the scaled point.
class NTScaling {
 public:
  void compute(const Eigen::VectorXd& s, const Eigen::VectorXd& z, const ConeDims& dims);

  Eigen::VectorXd apply_W(const Eigen::VectorXd& u) const;
  Eigen::VectorXd apply_Winv(const Eigen::VectorXd& u) const;
  Eigen::VectorXd apply_W2(const Eigen::VectorXd& u) const { return apply_W(apply_W(u)); }

  Eigen::VectorXd lambda;

  std::vector<double> w_lp;  // sqrt(s_i / z_i) per LP row
  struct Soc {
    double beta = 1.0;
    Eigen::VectorXd v;
  };
  std::vector<Soc> socs;
  ConeDims dims;
};

/// Sparse symmetric indefinite KKT system
///   [ 0   A'  G'  ] [ux]   [bx]
///   [ A   0   0   ] [uy] = [by]
///   [ G   0  -W^2 ] [uz]   [bz]
/// factored by sparse LU with partial pivoting and signed static
/// regularization (+delta on the x block, -delta on y/z), with iterative
/// refinement against the unregularized matrix.
///
/// Each second-order cone's dense block W^2 = beta^2 (2 vt vt' - J), where
/// vt = v o v, is stored in expanded form: a -beta^2 I diagonal plus two
/// bordered rank-one columns (sqrt(2) beta vt with pivot +1, and sqrt(2) beta
/// e1 with pivot -1, since -J = -2 e1 e1' + I). Entries of the expanded
/// system grow like the scaling point itself rather than its square, which
/// keeps late-stage factorizations numerically solvable.
class KktSolver {
 public:
  void setup(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& G,
             const ConeDims& dims, double reg = 1e-10);
  bool factorize(const NTScaling& scaling);
  /// Solves in place; rhs/solution layout is [bx; by; bz]. The bordered
  /// auxiliary coordinates are internal (zero right-hand side, result
  /// discarded).
  void solve(Eigen::VectorXd& xyz) const;

  int dim() const { return n_ + p_ + m_; }

 private:
  int n_ = 0, p_ = 0, m_ = 0, ext_ = 0;  // ext_: bordered columns (2 per SOC)
  double reg_ = 1e-10;
  ConeDims dims_;
  const Eigen::SparseMatrix<double>* A_ = nullptr;
  const Eigen::SparseMatrix<double>* G_ = nullptr;
  Eigen::SparseMatrix<double> K_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  std::vector<int> lp_slot_;
  // Per cone: k diagonal slots, then the vt border (k column + k row slots),
  // then the e1 border (1 column + 1 row slot).
  std::vector<std::vector<int>> soc_slots_;
  Eigen::VectorXd reg_diag_;
};

}  // namespace ewh
