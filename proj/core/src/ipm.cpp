#include "ewh/ipm.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace ewh {

namespace {

constexpr double kInfStep = std::numeric_limits<double>::infinity();

// Jordan product u o v per cone block.
Eigen::VectorXd jordan_mul(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                           const ConeDims& dims) {
  Eigen::VectorXd r(u.size());
  for (int i = 0; i < dims.l; ++i) r(i) = u(i) * v(i);
  int off = dims.l;
  for (int k : dims.q) {
    auto ub = u.segment(off, k), vb = v.segment(off, k);
    r(off) = ub.dot(vb);
    r.segment(off + 1, k - 1) = ub(0) * vb.tail(k - 1) + vb(0) * ub.tail(k - 1);
    off += k;
  }
  return r;
}

// Solve lambda o u = d for u (Arrow-matrix inverse per block).
Eigen::VectorXd jordan_div(const Eigen::VectorXd& lambda, const Eigen::VectorXd& d,
                           const ConeDims& dims) {
  Eigen::VectorXd u(d.size());
  for (int i = 0; i < dims.l; ++i) u(i) = d(i) / lambda(i);
  int off = dims.l;
  for (int k : dims.q) {
    auto lb = lambda.segment(off, k);
    auto db = d.segment(off, k);
    double rho2 = lb(0) * lb(0) - lb.tail(k - 1).squaredNorm();
    double u0 = (lb(0) * db(0) - lb.tail(k - 1).dot(db.tail(k - 1))) / rho2;
    u(off) = u0;
    u.segment(off + 1, k - 1) = (db.tail(k - 1) - u0 * lb.tail(k - 1)) / lb(0);
    off += k;
  }
  return u;
}

// Identity element of the cone algebra.
Eigen::VectorXd cone_identity(const ConeDims& dims) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dims.rows());
  e.head(dims.l).setOnes();
  int off = dims.l;
  for (int k : dims.q) {
    e(off) = 1.0;
    off += k;
  }
  return e;
}

// Largest alpha >= 0 with u + alpha du staying in the cone (boundary step).
double max_step(const Eigen::VectorXd& u, const Eigen::VectorXd& du, const ConeDims& dims) {
  double alpha = kInfStep;
  for (int i = 0; i < dims.l; ++i)
    if (du(i) < 0) alpha = std::min(alpha, -u(i) / du(i));
  int off = dims.l;
  for (int k : dims.q) {
    auto ub = u.segment(off, k), db = du.segment(off, k);
    // q(a) = (u0 + a d0)^2 - |u1 + a d1|^2 = aa a^2 + 2 bb a + cc, q(0) > 0.
    double aa = db(0) * db(0) - db.tail(k - 1).squaredNorm();
    double bb = ub(0) * db(0) - ub.tail(k - 1).dot(db.tail(k - 1));
    double cc = ub(0) * ub(0) - ub.tail(k - 1).squaredNorm();
    double bound = kInfStep;
    double disc = bb * bb - aa * cc;
    if (std::abs(aa) < 1e-14) {
      if (bb < 0) bound = -cc / (2.0 * bb);
    } else if (disc >= 0) {
      double sq = std::sqrt(disc);
      double r1 = (-bb - sq) / aa, r2 = (-bb + sq) / aa;
      if (r1 > r2) std::swap(r1, r2);
      if (r1 > 0)
        bound = r1;
      else if (r2 > 0 && (aa < 0 || bb < 0))
        bound = r2;
    }
    // The first coordinate must stay nonnegative as well.
    if (db(0) < 0) bound = std::min(bound, -ub(0) / db(0));
    alpha = std::min(alpha, bound);
    off += k;
  }
  return alpha;
}

}  // namespace

IpmResult solve_ipm(const StandardForm& sf, const IpmOptions& opt) {
  const auto& A = sf.A;
  const auto& G = sf.G;
  const auto& b = sf.b;
  const auto& h = sf.h;
  const auto& c = sf.c;
  const ConeDims& dims = sf.dims;
  const int n = static_cast<int>(G.cols());
  const int p = static_cast<int>(A.rows());
  const int m = static_cast<int>(G.rows());

  IpmResult res;
  res.x = Eigen::VectorXd::Zero(n);
  res.s = h;

  KktSolver kkt;
  kkt.setup(A, G, dims, opt.reg);

  Eigen::VectorXd e = cone_identity(dims);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), y = Eigen::VectorXd::Zero(p), s = e, z = e;
  double tau = 1.0, kappa = 1.0;
  const double nu = dims.degree() + 1;

  const double bnorm = std::max(1.0, b.norm());
  const double hnorm = std::max(1.0, h.norm());
  const double cnorm = std::max(1.0, c.norm());

  NTScaling W;
  auto finish_point = [&](IpmStatus st) {
    res.status = st;
    res.x = x / tau;
    res.s = s / tau;
    res.pobj = c.dot(res.x);
  };

  // Track the best de-homogenized iterate so a late-stage stall can still
  // hand back a usable point at slightly relaxed tolerances.
  struct {
    double metric = kInfStep;
    double pres = kInfStep, dres = kInfStep, relgap = kInfStep;
    Eigen::VectorXd x, s;
  } best;
  auto finish_best = [&](IpmStatus st) {
    constexpr double kLoose = 1e-6;
    if (best.pres <= kLoose && best.dres <= kLoose && best.relgap <= kLoose) {
      res.status = IpmStatus::Optimal;
      res.x = best.x;
      res.s = best.s;
      res.pobj = c.dot(res.x);
      return;
    }
    finish_point(st);
  };

  for (int iter = 0; iter <= opt.max_iter; ++iter) {
    res.iterations = iter;

    // --- convergence / certificate tests on the de-homogenized iterate ---
    Eigen::VectorXd rpe = A * x - b * tau;          // primal equality residual * tau
    Eigen::VectorXd rpc = G * x + s - h * tau;      // primal cone residual * tau
    Eigen::VectorXd rd = A.transpose() * y + G.transpose() * z + c * tau;
    double cx = c.dot(x), by = b.dot(y), hz = h.dot(z);

    double pres = std::max(rpe.norm() / bnorm, rpc.norm() / hnorm) / tau;
    double dres = rd.norm() / (cnorm * tau);
    double gap = s.dot(z) / (tau * tau);
    double pcost = cx / tau;
    double relgap = gap / std::max(1.0, std::abs(pcost));

    static const bool trace = std::getenv("EWH_IPM_TRACE") != nullptr;
    if (trace)
      std::fprintf(stderr, "it=%3d pres=%9.2e dres=%9.2e gap=%9.2e relgap=%9.2e tau=%8.2e kap=%8.2e pobj=%12.5e\n",
                   iter, pres, dres, gap, relgap, tau, kappa, pcost);

    if (pres <= opt.eps_feas && dres <= opt.eps_feas &&
        (gap <= opt.eps_abs || relgap <= opt.eps_rel)) {
      finish_point(IpmStatus::Optimal);
      return res;
    }
    double metric = std::max({pres, dres, relgap});
    if (metric < best.metric) {
      best.metric = metric;
      best.pres = pres;
      best.dres = dres;
      best.relgap = relgap;
      best.x = x / tau;
      best.s = s / tau;
    }
    double bhz = by + hz;
    if (bhz < 0) {
      double pinf = (A.transpose() * y + G.transpose() * z).norm() / cnorm / (-bhz);
      if (pinf <= opt.eps_feas) {
        finish_point(IpmStatus::PrimalInfeasible);
        return res;
      }
    }
    if (cx < 0) {
      double dinf =
          std::max((A * x).norm() / bnorm, (G * x + s).norm() / hnorm) / (-cx);
      if (dinf <= opt.eps_feas) {
        finish_point(IpmStatus::DualInfeasible);
        return res;
      }
    }
    if (iter == opt.max_iter) break;

    // --- scaling and factorization ---
    W.compute(s, z, dims);
    bool ok = kkt.factorize(W);
    for (double bump = opt.reg * 100; !ok && bump <= 1e-2; bump *= 100) {
      kkt.setup(A, G, dims, bump);
      ok = kkt.factorize(W);
    }
    if (!ok) {
      finish_best(IpmStatus::NumericalError);
      return res;
    }

    double mu = (s.dot(z) + tau * kappa) / nu;

    // Static solve shared by both direction solves of this iteration.
    Eigen::VectorXd u1(n + p + m);
    u1 << -c, b, h;
    kkt.solve(u1);
    Eigen::VectorXd x1 = u1.head(n), y1 = u1.segment(n, p), z1 = u1.tail(m);
    // c'x1 + b'y1 + h'z1 = -|W z1|^2 exactly (multiply the three KKT block
    // rows by x1/y1/z1 and add); the explicit form avoids the cancellation
    // that otherwise lets the dtau denominator cross zero late in the solve.
    double cbh1 = -W.apply_W(z1).squaredNorm();
    if (trace)
      std::fprintf(stderr, "      solve1 |x1|=%8.2e |z1|=%8.2e |Wz1|^2=%8.2e kap/tau=%8.2e\n",
                   x1.norm(), z1.norm(), -cbh1, kappa / tau);

    double rk = -cx - by - hz - kappa;

    // One Newton direction for a given residual weight rho and
    // complementarity right-hand sides (dsr in "o" form, dkr scalar).
    auto direction = [&](double rho, const Eigen::VectorXd& dsr, double dkr, Eigen::VectorXd& dx,
                         Eigen::VectorXd& dy, Eigen::VectorXd& dz, Eigen::VectorXd& ds,
                         double& dtau, double& dkap) {
      Eigen::VectorXd dst = jordan_div(W.lambda, dsr, dims);  // lambda \ dsr
      Eigen::VectorXd wdst = W.apply_W(dst);
      Eigen::VectorXd u2(n + p + m);
      u2.head(n) = -rho * rd;
      u2.segment(n, p) = rho * (-rpe);          // rho * (b tau - A x)
      u2.tail(m) = rho * (-rpc) - wdst;         // rho * (h tau - G x - s) - W dst
      kkt.solve(u2);
      Eigen::VectorXd x2 = u2.head(n), y2 = u2.segment(n, p), z2 = u2.tail(m);
      double cbh2 = c.dot(x2) + b.dot(y2) + h.dot(z2);
      dtau = (-rho * rk + dkr / tau + cbh2) / (kappa / tau - cbh1);
      dx = x2 + dtau * x1;
      dy = y2 + dtau * y1;
      dz = z2 + dtau * z1;
      // Form ds in the scaled space first: the subtraction happens at the
      // iterate's natural magnitude, and W is applied only once afterwards.
      ds = W.apply_W(dst - W.apply_W(dz));
      dkap = (dkr - kappa * dtau) / tau;
    };

    Eigen::VectorXd dx, dy, dz, ds;
    double dtau, dkap;

    // Predictor.
    Eigen::VectorXd dsr = -jordan_mul(W.lambda, W.lambda, dims);
    direction(1.0, dsr, -tau * kappa, dx, dy, dz, ds, dtau, dkap);

    double alpha = max_step(s, ds, dims);
    alpha = std::min(alpha, max_step(z, dz, dims));
    if (dtau < 0) alpha = std::min(alpha, -tau / dtau);
    if (dkap < 0) alpha = std::min(alpha, -kappa / dkap);
    double alpha_aff = std::min(1.0, alpha);

    double mu_aff = ((s + alpha_aff * ds).dot(z + alpha_aff * dz) +
                     (tau + alpha_aff * dtau) * (kappa + alpha_aff * dkap)) /
                    nu;
    double sigma = std::pow(std::max(0.0, std::min(1.0, mu_aff / mu)), 3);

    // Corrector: center toward sigma*mu and subtract the second-order term.
    Eigen::VectorXd eta = jordan_mul(W.apply_Winv(ds), W.apply_W(dz), dims);
    dsr = -jordan_mul(W.lambda, W.lambda, dims) - eta + sigma * mu * e;
    double dkr = -tau * kappa - dtau * dkap + sigma * mu;
    direction(1.0 - sigma, dsr, dkr, dx, dy, dz, ds, dtau, dkap);

    if (trace) {
      double rho = 1.0 - sigma;
      double e1 = (A.transpose() * dy + G.transpose() * dz + c * dtau + rho * rd).norm();
      double e2 = (A * dx - b * dtau + rho * rpe).norm();
      double e3 = (G * dx + ds - h * dtau + rho * rpc).norm();
      double e4 = std::abs(-c.dot(dx) - b.dot(dy) - h.dot(dz) - dkap + rho * rk);
      std::fprintf(stderr, "      dir resid e1=%8.2e e2=%8.2e e3=%8.2e e4=%8.2e |dx|=%8.2e |dz|=%8.2e dtau=%10.3e\n",
                   e1, e2, e3, e4, dx.norm(), dz.norm(), dtau);
    }

    alpha = max_step(s, ds, dims);
    alpha = std::min(alpha, max_step(z, dz, dims));
    if (dtau < 0) alpha = std::min(alpha, -tau / dtau);
    if (dkap < 0) alpha = std::min(alpha, -kappa / dkap);
    alpha = std::min(1.0, 0.99 * alpha);
    if (trace) std::fprintf(stderr, "      sigma=%8.2e alpha=%8.2e\n", sigma, alpha);
    if (!(alpha > 1e-12) || !std::isfinite(alpha)) {
      finish_best(IpmStatus::NumericalError);
      return res;
    }

    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkap;

    // The embedding is positively homogeneous; renormalizing tau to 1 keeps
    // the iterate's absolute magnitudes from swamping the linear algebra.
    double inv_tau = 1.0 / tau;
    x *= inv_tau;
    y *= inv_tau;
    z *= inv_tau;
    s *= inv_tau;
    kappa *= inv_tau;
    tau = 1.0;
  }

  finish_best(IpmStatus::IterationLimit);
  return res;
}

}  // namespace ewh
