#include "dff/dispatch/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dff::dispatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFixedTol = 1e-14;

struct Reduced {
  BoxQp qp;                 // free variables only
  std::vector<int> to_full; // reduced index -> full index
  Eigen::VectorXd x_fixed;  // full-sized, fixed entries set, others 0
  std::vector<bool> fixed;
};

Reduced reduce_fixed(const BoxQp& full) {
  const int n = static_cast<int>(full.c.size());
  Reduced r;
  r.fixed.assign(static_cast<std::size_t>(n), false);
  r.x_fixed = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (full.hi[i] - full.lo[i] <= kFixedTol) {
      if (full.hi[i] < full.lo[i])
        throw std::invalid_argument("qp: crossed bounds on variable " + std::to_string(i));
      r.fixed[static_cast<std::size_t>(i)] = true;
      r.x_fixed[i] = full.lo[i];
    } else {
      r.to_full.push_back(i);
    }
  }
  const int nf = static_cast<int>(r.to_full.size());
  const int m = static_cast<int>(full.b.size());
  r.qp.q.resize(nf);
  r.qp.c.resize(nf);
  r.qp.lo.resize(nf);
  r.qp.hi.resize(nf);
  r.qp.a.resize(m, nf);
  for (int j = 0; j < nf; ++j) {
    int fj = r.to_full[static_cast<std::size_t>(j)];
    r.qp.q[j] = full.q[fj];
    r.qp.c[j] = full.c[fj];
    r.qp.lo[j] = full.lo[fj];
    r.qp.hi[j] = full.hi[fj];
    r.qp.a.col(j) = full.a.col(fj);
  }
  r.qp.b = full.b - full.a * r.x_fixed;
  return r;
}

double objective_of(const BoxQp& qp, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(qp.q.cwiseProduct(x)) + qp.c.dot(x);
}

struct Residuals {
  double stat = 0.0, eq = 0.0, comp = 0.0;
};

Residuals compute_residuals(const BoxQp& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& zl, const Eigen::VectorXd& zu) {
  Residuals r;
  Eigen::VectorXd rd = qp.q.cwiseProduct(x) + qp.c + qp.a.transpose() * y - zl + zu;
  r.stat = rd.size() ? rd.lpNorm<Eigen::Infinity>() : 0.0;
  Eigen::VectorXd rp = qp.a * x - qp.b;
  r.eq = rp.size() ? rp.lpNorm<Eigen::Infinity>() : 0.0;
  double comp = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    if (std::isfinite(qp.lo[i])) comp = std::max(comp, std::abs((x[i] - qp.lo[i]) * zl[i]));
    if (std::isfinite(qp.hi[i])) comp = std::max(comp, std::abs((qp.hi[i] - x[i]) * zu[i]));
  }
  r.comp = comp;
  return r;
}

// Equality-constrained solve on the guessed active set. Returns false when the
// KKT system is singular or the result is not a valid KKT point.
bool try_polish(const BoxQp& qp, Eigen::VectorXd& x, Eigen::VectorXd& y,
                Eigen::VectorXd& zl, Eigen::VectorXd& zu) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(qp.b.size());

  enum class Act { free_var, at_lo, at_hi };
  std::vector<Act> act(static_cast<std::size_t>(n), Act::free_var);
  std::vector<int> free_idx;
  for (int i = 0; i < n; ++i) {
    double sl = std::isfinite(qp.lo[i]) ? x[i] - qp.lo[i] : kInf;
    double su = std::isfinite(qp.hi[i]) ? qp.hi[i] - x[i] : kInf;
    if (sl < zl[i])
      act[static_cast<std::size_t>(i)] = Act::at_lo;
    else if (su < zu[i])
      act[static_cast<std::size_t>(i)] = Act::at_hi;
    else
      free_idx.push_back(i);
  }
  const int nf = static_cast<int>(free_idx.size());

  Eigen::VectorXd xa = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (act[static_cast<std::size_t>(i)] == Act::at_lo) xa[i] = qp.lo[i];
    if (act[static_cast<std::size_t>(i)] == Act::at_hi) xa[i] = qp.hi[i];
  }

  // KKT system over free vars and equality duals, with tiny regularization to
  // tolerate rank-deficient corner cases.
  const double reg = 1e-12;
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nf + m, nf + m);
  Eigen::VectorXd rhs(nf + m);
  for (int j = 0; j < nf; ++j) {
    kkt(j, j) = qp.q[free_idx[static_cast<std::size_t>(j)]] + reg;
    rhs[j] = -qp.c[free_idx[static_cast<std::size_t>(j)]];
  }
  for (int r = 0; r < m; ++r) {
    for (int j = 0; j < nf; ++j) {
      double v = qp.a(r, free_idx[static_cast<std::size_t>(j)]);
      kkt(nf + r, j) = v;
      kkt(j, nf + r) = v;
    }
    kkt(nf + r, nf + r) = -reg;
  }
  Eigen::VectorXd req = qp.b - qp.a * xa;
  for (int r = 0; r < m; ++r) rhs[nf + r] = req[r];

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
  Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite()) return false;
  double rerr = (kkt * sol - rhs).lpNorm<Eigen::Infinity>();
  if (!(rerr < 1e-7)) return false;

  Eigen::VectorXd xp = xa;
  for (int j = 0; j < nf; ++j) xp[free_idx[static_cast<std::size_t>(j)]] = sol[j];
  Eigen::VectorXd yp = sol.tail(m);

  // primal feasibility of the free variables
  for (int j = 0; j < nf; ++j) {
    int i = free_idx[static_cast<std::size_t>(j)];
    if (std::isfinite(qp.lo[i]) && xp[i] < qp.lo[i] - 1e-9) return false;
    if (std::isfinite(qp.hi[i]) && xp[i] > qp.hi[i] + 1e-9) return false;
    if (std::isfinite(qp.lo[i])) xp[i] = std::max(xp[i], qp.lo[i]);
    if (std::isfinite(qp.hi[i])) xp[i] = std::min(xp[i], qp.hi[i]);
  }

  // dual feasibility at active bounds
  Eigen::VectorXd g = qp.q.cwiseProduct(xp) + qp.c + qp.a.transpose() * yp;
  Eigen::VectorXd zlp = Eigen::VectorXd::Zero(n), zup = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (act[static_cast<std::size_t>(i)] == Act::at_lo) {
      if (g[i] < -1e-8) return false;
      zlp[i] = std::max(g[i], 0.0);
    } else if (act[static_cast<std::size_t>(i)] == Act::at_hi) {
      if (g[i] > 1e-8) return false;
      zup[i] = std::max(-g[i], 0.0);
    }
  }

  x = xp;
  y = yp;
  zl = zlp;
  zu = zup;
  return true;
}

}  // namespace

BoxQpResult solve_box_qp(const BoxQp& full, const BoxQpOptions& opts) {
  const int n_full = static_cast<int>(full.c.size());
  Reduced red = reduce_fixed(full);
  const BoxQp& qp = red.qp;
  const int n = static_cast<int>(qp.c.size());
  const int m = static_cast<int>(qp.b.size());

  BoxQpResult out;
  if (n == 0) {
    // everything pinned; verify equality consistency
    Eigen::VectorXd res = full.a * red.x_fixed - full.b;
    if (res.size() && res.lpNorm<Eigen::Infinity>() > 1e-8)
      throw std::runtime_error("qp: infeasible, all variables fixed with equality residual");
    out.x = red.x_fixed;
    out.y = Eigen::VectorXd::Zero(m);
    out.objective = objective_of(full, out.x);
    out.converged = true;
    return out;
  }

  Eigen::VectorXd x(n), zl = Eigen::VectorXd::Zero(n), zu = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    bool flo = std::isfinite(qp.lo[i]), fhi = std::isfinite(qp.hi[i]);
    if (flo && fhi)
      x[i] = 0.5 * (qp.lo[i] + qp.hi[i]);
    else if (flo)
      x[i] = qp.lo[i] + 1.0;
    else if (fhi)
      x[i] = qp.hi[i] - 1.0;
    else
      x[i] = 0.0;
    if (flo) zl[i] = 1.0;
    if (fhi) zu[i] = 1.0;
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  int nb = 0;
  for (int i = 0; i < n; ++i)
    nb += static_cast<int>(std::isfinite(qp.lo[i])) + static_cast<int>(std::isfinite(qp.hi[i]));

  const double scale = 1.0 + std::max(qp.c.size() ? qp.c.lpNorm<Eigen::Infinity>() : 0.0,
                                      qp.b.size() ? qp.b.lpNorm<Eigen::Infinity>() : 0.0);

  auto barrier_mu = [&]() {
    if (nb == 0) return 0.0;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(qp.lo[i])) s += (x[i] - qp.lo[i]) * zl[i];
      if (std::isfinite(qp.hi[i])) s += (qp.hi[i] - x[i]) * zu[i];
    }
    return s / nb;
  };

  Eigen::VectorXd dx(n), dzl(n), dzu(n), dy(m);
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    Residuals res = compute_residuals(qp, x, y, zl, zu);
    double mu = barrier_mu();
    if (res.stat <= opts.tol_stat * scale && res.eq <= opts.tol_eq * scale &&
        mu <= opts.tol_comp * scale) {
      out.converged = true;
      break;
    }

    Eigen::VectorXd sl(n), su(n);
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) {
      sl[i] = std::isfinite(qp.lo[i]) ? std::max(x[i] - qp.lo[i], 1e-14) : kInf;
      su[i] = std::isfinite(qp.hi[i]) ? std::max(qp.hi[i] - x[i], 1e-14) : kInf;
      double w = qp.q[i] + 1e-13;
      if (std::isfinite(qp.lo[i])) w += zl[i] / sl[i];
      if (std::isfinite(qp.hi[i])) w += zu[i] / su[i];
      d[i] = w;
    }

    Eigen::MatrixXd adin = qp.a * d.cwiseInverse().asDiagonal();  // A D^-1
    Eigen::MatrixXd s = adin * qp.a.transpose();
    const double diag_scale = std::max(1.0, s.diagonal().maxCoeff());
    for (int r = 0; r < m; ++r) s(r, r) += 1e-13 * diag_scale;
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    bool factored = llt.info() == Eigen::Success && s.allFinite();
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    if (!factored) {
      for (int r = 0; r < m; ++r) s(r, r) += 1e-9 * diag_scale;
      ldlt.compute(s);
      if (ldlt.info() != Eigen::Success || !s.allFinite()) {
        // late-stage breakdown with an already-acceptable iterate: stop here
        Residuals cur = compute_residuals(qp, x, y, zl, zu);
        if (cur.stat <= 1e-7 * scale && cur.eq <= 1e-8 * scale) break;
        throw std::runtime_error("qp: Schur complement factorization failed");
      }
    }

    Eigen::VectorXd rp = qp.a * x - qp.b;
    Eigen::VectorXd grad = qp.q.cwiseProduct(x) + qp.c + qp.a.transpose() * y;

    auto solve_dir = [&](const Eigen::VectorXd& rhs1, const Eigen::VectorXd& rhs2) {
      // [D A'; A 0] [dx; dy] = [rhs1; rhs2]
      Eigen::VectorXd srhs = adin * rhs1 - rhs2;
      if (factored)
        dy = llt.solve(srhs);
      else
        dy = ldlt.solve(srhs);
      dx = d.cwiseInverse().cwiseProduct(rhs1 - qp.a.transpose() * dy);
    };

    // affine-scaling predictor
    solve_dir(-grad, -rp);
    auto step_len = [&](const Eigen::VectorXd& ddx, const Eigen::VectorXd& ddzl,
                        const Eigen::VectorXd& ddzu, double& ap, double& ad) {
      ap = 1.0;
      ad = 1.0;
      for (int i = 0; i < n; ++i) {
        if (std::isfinite(qp.lo[i])) {
          if (ddx[i] < 0.0) ap = std::min(ap, -sl[i] / ddx[i]);
          if (ddzl[i] < 0.0) ad = std::min(ad, -zl[i] / ddzl[i]);
        }
        if (std::isfinite(qp.hi[i])) {
          if (ddx[i] > 0.0) ap = std::min(ap, su[i] / ddx[i]);
          if (ddzu[i] < 0.0) ad = std::min(ad, -zu[i] / ddzu[i]);
        }
      }
    };

    for (int i = 0; i < n; ++i) {
      dzl[i] = std::isfinite(qp.lo[i]) ? -zl[i] - zl[i] / sl[i] * dx[i] : 0.0;
      dzu[i] = std::isfinite(qp.hi[i]) ? -zu[i] + zu[i] / su[i] * dx[i] : 0.0;
    }
    double ap_aff, ad_aff;
    step_len(dx, dzl, dzu, ap_aff, ad_aff);

    double mu_aff = 0.0;
    if (nb > 0) {
      for (int i = 0; i < n; ++i) {
        if (std::isfinite(qp.lo[i])) mu_aff += (sl[i] + ap_aff * dx[i]) * (zl[i] + ad_aff * dzl[i]);
        if (std::isfinite(qp.hi[i])) mu_aff += (su[i] - ap_aff * dx[i]) * (zu[i] + ad_aff * dzu[i]);
      }
      mu_aff /= nb;
    }
    double sigma = (mu > 0.0) ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;

    // corrector
    Eigen::VectorXd cl = Eigen::VectorXd::Zero(n), cu = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd dx_aff = dx, dzl_aff = dzl, dzu_aff = dzu;
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(qp.lo[i])) cl[i] = (sigma * mu - dx_aff[i] * dzl_aff[i]) / sl[i];
      if (std::isfinite(qp.hi[i])) cu[i] = (sigma * mu + dx_aff[i] * dzu_aff[i]) / su[i];
    }
    solve_dir(-grad + cl - cu, -rp);
    for (int i = 0; i < n; ++i) {
      dzl[i] = std::isfinite(qp.lo[i]) ? -zl[i] - zl[i] / sl[i] * dx[i] + cl[i] : 0.0;
      dzu[i] = std::isfinite(qp.hi[i]) ? -zu[i] + zu[i] / su[i] * dx[i] + cu[i] : 0.0;
    }

    double ap, ad;
    step_len(dx, dzl, dzu, ap, ad);
    double tau = (mu * scale < 1e-6) ? 0.9999 : 0.995;
    ap = std::min(1.0, tau * ap);
    ad = std::min(1.0, tau * ad);

    x += ap * dx;
    y += ad * dy;
    zl += ad * dzl;
    zu += ad * dzu;
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(qp.lo[i])) zl[i] = std::max(zl[i], 1e-300);
      if (std::isfinite(qp.hi[i])) zu[i] = std::max(zu[i], 1e-300);
    }
  }
  out.iterations = iter;

  if (!out.converged) {
    Residuals res = compute_residuals(qp, x, y, zl, zu);
    if (res.stat > 1e-6 * scale || res.eq > 1e-7 * scale)
      throw std::runtime_error("qp: no convergence after " + std::to_string(iter) +
                               " iterations (stat " + std::to_string(res.stat) + ", eq " +
                               std::to_string(res.eq) + ")");
  }

  if (opts.polish) {
    Eigen::VectorXd px = x, py = y, pzl = zl, pzu = zu;
    if (try_polish(qp, px, py, pzl, pzu)) {
      Residuals before = compute_residuals(qp, x, y, zl, zu);
      Residuals after = compute_residuals(qp, px, py, pzl, pzu);
      double vb = std::max({before.stat, before.eq, before.comp});
      double va = std::max({after.stat, after.eq, after.comp});
      if (va <= vb * 10.0) {  // polish also zeroes complementarity exactly
        x = px;
        y = py;
        zl = pzl;
        zu = pzu;
        out.polished = true;
      }
    }
  }

  // scatter back to full variable space
  out.x = red.x_fixed;
  for (int j = 0; j < n; ++j) out.x[red.to_full[static_cast<std::size_t>(j)]] = x[j];
  out.y = y;
  Residuals res = compute_residuals(qp, x, y, zl, zu);
  out.stat_residual = res.stat;
  out.eq_residual = res.eq;
  out.comp_residual = res.comp;
  out.objective = objective_of(full, out.x);
  out.converged = out.converged || (res.stat <= 1e-6 && res.eq <= 1e-7);
  (void)n_full;
  return out;
}

}  // namespace dff::dispatch
