#include "ewh/kkt.hpp"

#include <cmath>
#include <limits>

namespace ewh {

namespace {
// Reflection J u = (u0, -u1) for one cone block.
inline Eigen::VectorXd jmul(const Eigen::VectorXd& u) {
  Eigen::VectorXd r = -u;
  r(0) = u(0);
  return r;
}
}  // namespace

void NTScaling::compute(const Eigen::VectorXd& s, const Eigen::VectorXd& z,
                        const ConeDims& dims_in) {
  dims = dims_in;
  int m = dims.rows();
  lambda.resize(m);
  w_lp.resize(dims.l);
  socs.clear();
  socs.reserve(dims.q.size());

  for (int i = 0; i < dims.l; ++i) {
    w_lp[i] = std::sqrt(s(i) / z(i));
    lambda(i) = std::sqrt(s(i) * z(i));
  }
  int off = dims.l;
  for (int k : dims.q) {
    Eigen::VectorXd sb = s.segment(off, k), zb = z.segment(off, k);
    double snorm = std::sqrt(sb(0) * sb(0) - sb.tail(k - 1).squaredNorm());
    double znorm = std::sqrt(zb(0) * zb(0) - zb.tail(k - 1).squaredNorm());
    Eigen::VectorXd sbar = sb / snorm, zbar = zb / znorm;
    double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
    Soc sc;
    sc.v = (sbar + jmul(zbar)) / (2.0 * gamma);
    // Renormalize so that W = beta (2 v v' - J) satisfies W z = W^{-1} s
    // exactly; without this shift the matrix maps z to the right point but is
    // not the geometric-mean scaling, and the iterates drift off the central
    // path once the duality gap gets small.
    sc.v(0) += 1.0;
    sc.v /= std::sqrt(2.0 * sc.v(0));
    sc.beta = std::sqrt(snorm / znorm);
    // lambda = W z in a cancellation-free form built from the normalized
    // points: lam0 = gamma sqrt(ab), lam_tail mixes sbar/zbar tails.
    double sg = std::sqrt(snorm * znorm);
    double dd = 2.0 * gamma + sbar(0) + zbar(0);
    lambda(off) = gamma * sg;
    lambda.segment(off + 1, k - 1) =
        (sg / dd) * ((gamma + zbar(0)) * sbar.tail(k - 1) + (gamma + sbar(0)) * zbar.tail(k - 1));
    socs.push_back(std::move(sc));
    off += k;
  }
}

Eigen::VectorXd NTScaling::apply_W(const Eigen::VectorXd& u) const {
  Eigen::VectorXd r(u.size());
  for (int i = 0; i < dims.l; ++i) r(i) = w_lp[i] * u(i);
  int off = dims.l;
  for (size_t ci = 0; ci < dims.q.size(); ++ci) {
    int k = dims.q[ci];
    const auto& sc = socs[ci];
    Eigen::VectorXd ub = u.segment(off, k);
    r.segment(off, k) = sc.beta * (2.0 * sc.v * sc.v.dot(ub) - jmul(ub));
    off += k;
  }
  return r;
}

Eigen::VectorXd NTScaling::apply_Winv(const Eigen::VectorXd& u) const {
  Eigen::VectorXd r(u.size());
  for (int i = 0; i < dims.l; ++i) r(i) = u(i) / w_lp[i];
  int off = dims.l;
  for (size_t ci = 0; ci < dims.q.size(); ++ci) {
    int k = dims.q[ci];
    const auto& sc = socs[ci];
    // W^{-1} = beta^{-1} (2 J v v' J - J)
    Eigen::VectorXd ub = u.segment(off, k);
    Eigen::VectorXd jv = jmul(sc.v);
    r.segment(off, k) = (2.0 * jv * jv.dot(ub) - jmul(ub)) / sc.beta;
    off += k;
  }
  return r;
}

void KktSolver::setup(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& G,
                      const ConeDims& dims, double reg) {
  A_ = &A;
  G_ = &G;
  dims_ = dims;
  reg_ = reg;
  n_ = static_cast<int>(G.cols());
  p_ = static_cast<int>(A.rows());
  m_ = static_cast<int>(G.rows());
  ext_ = 2 * static_cast<int>(dims.q.size());
  int dim = n_ + p_ + m_ + ext_;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(A.nonZeros()) * 2 + static_cast<size_t>(G.nonZeros()) * 2 +
                dim + 8 * dims.q.size());
  for (int i = 0; i < n_; ++i) trips.emplace_back(i, i, reg_);
  for (int j = 0; j < p_; ++j) trips.emplace_back(n_ + j, n_ + j, -reg_);
  for (int c = 0; c < A.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it) {
      trips.emplace_back(n_ + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      trips.emplace_back(static_cast<int>(it.col()), n_ + static_cast<int>(it.row()), it.value());
    }
  for (int c = 0; c < G.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(G, c); it; ++it) {
      trips.emplace_back(n_ + p_ + static_cast<int>(it.row()), static_cast<int>(it.col()),
                         it.value());
      trips.emplace_back(static_cast<int>(it.col()), n_ + p_ + static_cast<int>(it.row()),
                         it.value());
    }
  int zoff = n_ + p_;
  for (int i = 0; i < dims.l; ++i) trips.emplace_back(zoff + i, zoff + i, -1.0 - reg_);
  // Expanded SOC blocks: -W^2 = -b^2 I - (sqrt(2) b vt)(sqrt(2) b vt)'
  // + (sqrt(2) b e1)(sqrt(2) b e1)' with vt = v o v, so each cone carries a
  // plain negative diagonal plus two bordered rank-one columns whose pivots
  // (+1 / -1) match the sign the eliminated term contributes.
  int off = dims.l;
  int eoff = zoff + m_;
  for (int k : dims.q) {
    for (int a = 0; a < k; ++a) trips.emplace_back(zoff + off + a, zoff + off + a, -1.0 - reg_);
    for (int a = 0; a < k; ++a) {
      trips.emplace_back(zoff + off + a, eoff, 1.0);
      trips.emplace_back(eoff, zoff + off + a, 1.0);
    }
    trips.emplace_back(eoff, eoff, 1.0);
    trips.emplace_back(zoff + off, eoff + 1, 1.0);
    trips.emplace_back(eoff + 1, zoff + off, 1.0);
    trips.emplace_back(eoff + 1, eoff + 1, -1.0);
    off += k;
    eoff += 2;
  }

  K_.resize(dim, dim);
  K_.setFromTriplets(trips.begin(), trips.end());
  K_.makeCompressed();

  // Record value-array slots for the scaling-dependent entries so factorize()
  // can overwrite them without rebuilding the pattern.
  double* base = K_.valuePtr();
  lp_slot_.resize(dims.l);
  for (int i = 0; i < dims.l; ++i)
    lp_slot_[i] = static_cast<int>(&K_.coeffRef(zoff + i, zoff + i) - base);
  soc_slots_.clear();
  off = dims.l;
  eoff = zoff + m_;
  for (int k : dims.q) {
    std::vector<int> slots;
    slots.reserve(static_cast<size_t>(3 * k) + 2);
    for (int a = 0; a < k; ++a)
      slots.push_back(static_cast<int>(&K_.coeffRef(zoff + off + a, zoff + off + a) - base));
    for (int a = 0; a < k; ++a)
      slots.push_back(static_cast<int>(&K_.coeffRef(zoff + off + a, eoff) - base));
    for (int a = 0; a < k; ++a)
      slots.push_back(static_cast<int>(&K_.coeffRef(eoff, zoff + off + a) - base));
    slots.push_back(static_cast<int>(&K_.coeffRef(zoff + off, eoff + 1) - base));
    slots.push_back(static_cast<int>(&K_.coeffRef(eoff + 1, zoff + off) - base));
    soc_slots_.push_back(std::move(slots));
    off += k;
    eoff += 2;
  }

  reg_diag_.resize(dim);
  reg_diag_.head(n_).setConstant(reg_);
  reg_diag_.segment(n_, p_ + m_).setConstant(-reg_);
  reg_diag_.tail(ext_).setZero();
  lu_.analyzePattern(K_);
}

bool KktSolver::factorize(const NTScaling& sc) {
  double* vals = K_.valuePtr();
  for (int i = 0; i < dims_.l; ++i)
    vals[lp_slot_[i]] = -sc.w_lp[i] * sc.w_lp[i] - reg_;
  for (size_t ci = 0; ci < dims_.q.size(); ++ci) {
    int k = dims_.q[ci];
    const auto& s = sc.socs[ci];
    const auto& slots = soc_slots_[ci];
    double b2 = s.beta * s.beta;
    // vt = v o v = (v'v, 2 v0 v1); the fundamental identity P(v)^2 = P(v o v)
    // gives W^2 = b^2 (2 vt vt' - J) with det(vt) = det(v)^2 = 1.
    Eigen::VectorXd vt(k);
    vt(0) = s.v.squaredNorm();
    vt.tail(k - 1) = 2.0 * s.v(0) * s.v.tail(k - 1);
    double sb = std::sqrt(2.0) * s.beta;
    for (int a = 0; a < k; ++a) vals[slots[a]] = -b2 - reg_;
    for (int a = 0; a < k; ++a) {
      vals[slots[k + a]] = sb * vt(a);       // border column
      vals[slots[2 * k + a]] = sb * vt(a);   // border row
    }
    vals[slots[3 * k]] = sb;      // e1 border column
    vals[slots[3 * k + 1]] = sb;  // e1 border row
  }
  lu_.factorize(K_);
  return lu_.info() == Eigen::Success;
}

void KktSolver::solve(Eigen::VectorXd& xyz) const {
  int dim = n_ + p_ + m_ + ext_;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  rhs.head(n_ + p_ + m_) = xyz;
  Eigen::VectorXd full = lu_.solve(rhs);
  // Refine against the unregularized matrix K0 = K - diag(reg), keeping the
  // best iterate: the static regularization perturbs K, and late-stage
  // systems are ill-conditioned enough that refinement can start diverging.
  double rhs_norm = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
  Eigen::VectorXd best = full;
  double best_res = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 10; ++round) {
    Eigen::VectorXd resid = rhs - (K_ * full - reg_diag_.cwiseProduct(full));
    double rn = resid.lpNorm<Eigen::Infinity>();
    if (rn < best_res) {
      best_res = rn;
      best = full;
    } else {
      break;
    }
    if (rn <= 1e-14 * rhs_norm) break;
    full += lu_.solve(resid);
  }
  xyz = best.head(n_ + p_ + m_);
}

}  // namespace ewh
