#include "gslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "gslab/mesh_ops.hpp"

namespace gslab {

namespace {

double vec_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double vec_norm(const std::vector<double>& a) { return std::sqrt(vec_dot(a, a)); }

void vec_scale(std::vector<double>& a, double c) {
  for (double& x : a) x *= c;
}

struct CgOutcome {
  bool converged = false;
  bool indefinite = false;
  int iterations = 0;
};

// CG on A(coeff) x = b.  Flags indefiniteness when a search direction has
// nonpositive curvature.
CgOutcome conjugate_gradient(const Grid& g, const std::vector<double>& coeff,
                             const std::vector<double>& b, std::vector<double>& x, double tol,
                             int max_iter) {
  const std::size_t n = b.size();
  std::vector<double> r = b;
  std::vector<double> ap(n);
  x.assign(n, 0.0);
  std::vector<double> p = r;
  double rr = vec_dot(r, r);
  const double b_norm = std::sqrt(vec_dot(b, b));
  if (b_norm == 0.0) return {true, false, 0};
  CgOutcome out;
  for (int it = 0; it < max_iter; ++it) {
    apply_operator_raw(g, coeff.data(), p.data(), ap.data());
    const double pap = vec_dot(p, ap);
    if (pap <= 0.0) {
      out.indefinite = true;
      out.iterations = it;
      return out;
    }
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_new = vec_dot(r, r);
    if (std::sqrt(rr_new) <= tol * b_norm) {
      out.converged = true;
      out.iterations = it + 1;
      return out;
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  out.iterations = max_iter;
  return out;
}

// Eigenvalue count of a symmetric tridiagonal matrix below x (Sturm sequence).
int sturm_count(const std::vector<double>& alpha, const std::vector<double>& beta, double x) {
  int count = 0;
  double d = 1.0;
  const double tiny = 1e-300;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double b2 = (i == 0) ? 0.0 : beta[i - 1] * beta[i - 1];
    d = alpha[i] - x - b2 / (std::fabs(d) < tiny ? (d < 0 ? -tiny : tiny) : d);
    if (d < 0.0) ++count;
  }
  return count;
}

double tridiag_min_eig(const std::vector<double>& alpha, const std::vector<double>& beta) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double off = ((i > 0) ? std::fabs(beta[i - 1]) : 0.0) +
                       ((i + 1 < alpha.size()) ? std::fabs(beta[i]) : 0.0);
    lo = std::min(lo, alpha[i] - off);
    hi = std::max(hi, alpha[i] + off);
  }
  const double scale = std::max(1.0, std::max(std::fabs(lo), std::fabs(hi)));
  for (int it = 0; it < 200 && hi - lo > 1e-15 * scale; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count(alpha, beta, mid) >= 1) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Eigenvector of the tridiagonal matrix for an isolated eigenvalue theta, by
// inverse iteration with a Thomas solve on (T - (theta + perturbation) I).
std::vector<double> tridiag_eigvec(const std::vector<double>& alpha,
                                   const std::vector<double>& beta, double theta) {
  const std::size_t k = alpha.size();
  std::vector<double> y(k, 1.0 / std::sqrt(static_cast<double>(k)));
  const double shift = theta + 1e-12 * std::max(1.0, std::fabs(theta));
  for (int pass = 0; pass < 3; ++pass) {
    // Solve (T - shift) z = y by LU without pivoting, with magnitude floors.
    std::vector<double> diag(k), rhs = y;
    for (std::size_t i = 0; i < k; ++i) diag[i] = alpha[i] - shift;
    for (std::size_t i = 1; i < k; ++i) {
      double piv = diag[i - 1];
      if (std::fabs(piv) < 1e-280) piv = (piv < 0 ? -1e-280 : 1e-280);
      const double m = beta[i - 1] / piv;
      diag[i] -= m * beta[i - 1];
      rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> z(k);
    double last = diag[k - 1];
    if (std::fabs(last) < 1e-280) last = (last < 0 ? -1e-280 : 1e-280);
    z[k - 1] = rhs[k - 1] / last;
    for (std::size_t i = k - 1; i-- > 0;) {
      double piv = diag[i];
      if (std::fabs(piv) < 1e-280) piv = (piv < 0 ? -1e-280 : 1e-280);
      z[i] = (rhs[i] - beta[i] * z[i + 1]) / piv;
    }
    const double nz = vec_norm(z);
    if (!(nz > 0.0) || !std::isfinite(nz)) break;
    for (std::size_t i = 0; i < k; ++i) y[i] = z[i] / nz;
  }
  return y;
}

SpectralResult lanczos_smallest(const ScalarField& V, double tol, int max_iter) {
  const Grid& g = *V.grid;
  const std::size_t n = static_cast<std::size_t>(g.node_count());
  // Full reorthogonalization stores the basis; 600 vectors bounds the memory
  // while leaving ample room for the extreme Ritz value to settle.
  const int kmax = std::min<int>(static_cast<int>(n), std::clamp(max_iter, 40, 600));

  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;
  std::vector<double> v(n), w(n);
  for (double& x : v) x = uni(rng);
  vec_scale(v, 1.0 / vec_norm(v));
  basis.push_back(v);

  SpectralResult res;
  res.method = "lanczos";
  double theta = 0.0;
  std::vector<double> ritz_y;
  for (int k = 0; k < kmax; ++k) {
    apply_operator_raw(g, V.values.data(), basis.back().data(), w.data());
    const double a = vec_dot(w, basis.back());
    alpha.push_back(a);
    for (std::size_t i = 0; i < n; ++i) w[i] -= a * basis.back()[i];
    if (k > 0) {
      for (std::size_t i = 0; i < n; ++i) w[i] -= beta.back() * basis[basis.size() - 2][i];
    }
    // Full reorthogonalization keeps the small Krylov bases honest.
    for (const auto& q : basis) {
      const double c = vec_dot(w, q);
      for (std::size_t i = 0; i < n; ++i) w[i] -= c * q[i];
    }
    const double b = vec_norm(w);
    theta = tridiag_min_eig(alpha, beta);
    ritz_y = tridiag_eigvec(alpha, beta, theta);
    const double est = (b > 0.0) ? std::fabs(b * ritz_y.back()) : 0.0;
    res.iterations = k + 1;
    if (est <= tol * std::max(1.0, std::fabs(theta)) || b <= 1e-14 || k + 1 == kmax ||
        basis.size() == n) {
      break;
    }
    beta.push_back(b);
    vec_scale(w, 1.0 / b);
    basis.push_back(w);
  }

  std::vector<double> x(n, 0.0);
  for (std::size_t j = 0; j < basis.size() && j < ritz_y.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) x[i] += ritz_y[j] * basis[j][i];
  }
  const double nx = vec_norm(x);
  if (nx > 0.0) vec_scale(x, 1.0 / nx);
  apply_operator_raw(g, V.values.data(), x.data(), w.data());
  const double rho = vec_dot(w, x);
  for (std::size_t i = 0; i < n; ++i) w[i] -= rho * x[i];
  res.min_eig = rho;
  res.residual = vec_norm(w);
  res.converged = res.residual <= 10.0 * tol * std::max(1.0, std::fabs(rho));
  res.eigvec = ScalarField(V.grid);
  res.eigvec.values = std::move(x);
  return res;
}

}  // namespace

SpectralResult smallest_eigenvalue(const ScalarField& V, double tol, int max_iter) {
  require_finite(V, "smallest_eigenvalue");
  if (!(tol > 0.0)) throw std::invalid_argument("smallest_eigenvalue: tol must be positive");
  const Grid& g = *V.grid;
  const std::size_t n = static_cast<std::size_t>(g.node_count());

  SpectralResult res;
  res.method = "inverse_iteration";
  std::vector<double> x(n, 1.0), y(n), ax(n);
  vec_scale(x, 1.0 / vec_norm(x));
  const int cg_max = static_cast<int>(20 * std::sqrt(static_cast<double>(n))) + 200;
  // Convergence tracks the Rayleigh quotient: the raw eigen-residual has a
  // rounding floor proportional to the stencil scale 4/h^2 and would never
  // clear an absolute threshold on fine grids, while the eigenvalue itself
  // settles to full precision within a few solves.
  double rho_prev = std::numeric_limits<double>::infinity();
  int stable = 0;
  for (int it = 0; it < max_iter; ++it) {
    const CgOutcome cg = conjugate_gradient(g, V.values, x, y, 1e-12, cg_max);
    if (cg.indefinite) {
      return lanczos_smallest(V, tol, 4 * max_iter);
    }
    const double ny = vec_norm(y);
    if (!(ny > 0.0) || !std::isfinite(ny)) break;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ny;
    apply_operator_raw(g, V.values.data(), x.data(), ax.data());
    const double rho = vec_dot(ax, x);
    double rnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ax[i] - rho * x[i];
      rnorm += r * r;
    }
    rnorm = std::sqrt(rnorm);
    res.min_eig = rho;
    res.residual = rnorm;
    res.iterations = it + 1;
    stable = (std::fabs(rho - rho_prev) <= tol * std::max(1.0, std::fabs(rho))) ? stable + 1 : 0;
    rho_prev = rho;
    if (stable >= 2 && it >= 2) {
      res.converged = true;
      break;
    }
  }
  res.eigvec = ScalarField(V.grid);
  res.eigvec.values = std::move(x);
  return res;
}

NormEquivalence norm_equivalence_bounds(const ScalarField& V, const ScalarField& K_n) {
  require_same_grid(V, K_n, "norm_equivalence_bounds");
  const SpectralResult spec = smallest_eigenvalue(V);
  if (!spec.converged || !(spec.min_eig > 0.0)) {
    throw Error("norm_equivalence_bounds: smallest eigenvalue of -Laplace + V is not positive (" +
                std::to_string(spec.min_eig) + "); assumption (A1) violated");
  }
  double k_plus = 0.0, k_minus = 0.0;
  for (double k : K_n.values) {
    k_plus = std::max(k_plus, k);
    k_minus = std::max(k_minus, -k);
  }
  NormEquivalence out;
  out.min_eig = spec.min_eig;
  out.c1 = std::sqrt(std::max(0.0, 1.0 - k_minus / spec.min_eig));
  out.c2 = std::sqrt(1.0 + k_plus / spec.min_eig);
  out.valid = out.c1 > 0.0;
  return out;
}

}  // namespace gslab
