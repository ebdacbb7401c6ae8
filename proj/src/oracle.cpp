#include "gslab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "gslab/mesh_ops.hpp"
#include "gslab/solver.hpp"

namespace gslab {

namespace {

constexpr double kBlowupCap = 1e8;

struct OdeState {
  double u;
  double du;
};

struct TrialResult {
  double mismatch = 0.0;
  bool capped = false;
};

// One classical RK4 step of u'' = V u - Q |u|^{p-2} u.
OdeState rk4_step(const Coefficients1D& c, double x, OdeState s, double h) {
  auto f = [&c](double xx, const OdeState& st) {
    const double rhs = c.V(xx) * st.u - c.Q(xx) * std::pow(std::fabs(st.u), c.p - 2.0) * st.u;
    return OdeState{st.du, rhs};
  };
  const OdeState k1 = f(x, s);
  const OdeState k2 = f(x + 0.5 * h, {s.u + 0.5 * h * k1.u, s.du + 0.5 * h * k1.du});
  const OdeState k3 = f(x + 0.5 * h, {s.u + 0.5 * h * k2.u, s.du + 0.5 * h * k2.du});
  const OdeState k4 = f(x + h, {s.u + h * k3.u, s.du + h * k3.du});
  return {s.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
          s.du + h / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du)};
}

std::vector<double> segment_edges(const Coefficients1D& c) {
  std::vector<double> edges{0.0};
  for (double b : c.breakpoints) {
    if (b > 0.0 && b < c.half_width) edges.push_back(b);
  }
  edges.push_back(c.half_width);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

// Integrates from the center to the wall; optionally records every sample.
TrialResult integrate_half(const Coefficients1D& c, double u0, double rk_step,
                           std::vector<double>* xs, std::vector<double>* us,
                           std::vector<double>* dus) {
  OdeState s{u0, 0.0};
  TrialResult out;
  const std::vector<double> edges = segment_edges(c);
  auto record = [&](double x) {
    if (xs) {
      xs->push_back(x);
      us->push_back(s.u);
      dus->push_back(s.du);
    }
  };
  record(0.0);
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double a = edges[e];
    const double b = edges[e + 1];
    const int steps = std::max(1, static_cast<int>(std::ceil((b - a) / rk_step)));
    const double h = (b - a) / steps;
    // Coefficient evaluations are nudged strictly inside the segment so the
    // piecewise definitions never get sampled exactly on a jump radius.  The
    // nudge is far below the integrator's truncation error.
    const double nudge = 1e-9 * (b - a);
    Coefficients1D clipped = c;
    clipped.V = [&c, a, b, nudge](double x) {
      return c.V(std::min(std::max(x, a + nudge), b - nudge));
    };
    clipped.Q = [&c, a, b, nudge](double x) {
      return c.Q(std::min(std::max(x, a + nudge), b - nudge));
    };
    for (int k = 0; k < steps; ++k) {
      const double x = a + k * h;
      s = rk4_step(clipped, x, s, h);
      if (std::fabs(s.u) > kBlowupCap || !std::isfinite(s.u)) {
        out.capped = true;
        const double sign = (s.u > 0.0 || !std::isfinite(s.u)) ? 1.0 : -1.0;
        out.mismatch = sign * kBlowupCap * (1.0 + (c.half_width - x));
        return out;
      }
      record(a + (k + 1) * h);
    }
  }
  out.mismatch = s.u;
  return out;
}

}  // namespace

std::pair<double, double> find_shooting_bracket(const Coefficients1D& coeffs, double u0_start,
                                                double factor, int max_steps, double rk_step) {
  if (!(u0_start > 0.0) || !(factor > 1.0)) {
    throw std::invalid_argument("find_shooting_bracket: need u0_start > 0 and factor > 1");
  }
  double prev = u0_start;
  TrialResult prev_res = integrate_half(coeffs, prev, rk_step, nullptr, nullptr, nullptr);
  for (int k = 0; k < max_steps; ++k) {
    const double next = prev * factor;
    const TrialResult res = integrate_half(coeffs, next, rk_step, nullptr, nullptr, nullptr);
    if ((prev_res.mismatch > 0.0) != (res.mismatch > 0.0)) {
      return {prev, next};
    }
    prev = next;
    prev_res = res;
  }
  throw Error("find_shooting_bracket: no sign change up to u0 = " + std::to_string(prev) +
              " (only the trivial solution?)");
}

ShootingResult shoot_1d(const Coefficients1D& coeffs, std::pair<double, double> u0_bracket,
                        double rk_step) {
  if (!(rk_step > 0.0)) throw std::invalid_argument("shoot_1d: rk_step must be positive");
  double lo = u0_bracket.first;
  double hi = u0_bracket.second;
  if (!(lo > 0.0) || !(hi > lo)) {
    throw std::invalid_argument("shoot_1d: bracket must satisfy 0 < lo < hi");
  }
  TrialResult flo = integrate_half(coeffs, lo, rk_step, nullptr, nullptr, nullptr);
  TrialResult fhi = integrate_half(coeffs, hi, rk_step, nullptr, nullptr, nullptr);
  ShootingResult out;
  out.capped = flo.capped || fhi.capped;
  if ((flo.mismatch > 0.0) == (fhi.mismatch > 0.0)) {
    throw Error("shoot_1d: bracket contains no sign change of the boundary mismatch (f(" +
                std::to_string(lo) + ") = " + std::to_string(flo.mismatch) + ", f(" +
                std::to_string(hi) + ") = " + std::to_string(fhi.mismatch) + ")");
  }
  double mid = lo;
  TrialResult fmid;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    fmid = integrate_half(coeffs, mid, rk_step, nullptr, nullptr, nullptr);
    out.capped = out.capped || fmid.capped;
    out.bisection_steps = it + 1;
    if (std::fabs(fmid.mismatch) < 1e-10) break;
    if ((fmid.mismatch > 0.0) == (flo.mismatch > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15 * std::max(1.0, mid)) break;
  }
  out.u0 = mid;
  const TrialResult final_run = integrate_half(coeffs, mid, rk_step, &out.xs, &out.us, &out.dus);
  out.match_norm = std::fabs(final_run.mismatch);

  // Rayleigh value of the profile, by trapezoid quadrature on the fine
  // samples (the profile is even, so integrals double the half line).
  // Coefficients are evaluated nudged into each interval, so intervals whose
  // endpoint sits on a jump radius integrate the correct one-sided branch.
  double norm_sq = 0.0;
  double j_val = 0.0;
  for (std::size_t i = 0; i + 1 < out.xs.size(); ++i) {
    const double dx = out.xs[i + 1] - out.xs[i];
    if (!(dx > 0.0)) continue;
    const double xl = out.xs[i] + 1e-9 * dx;
    const double xr = out.xs[i + 1] - 1e-9 * dx;
    const double ul = out.us[i], ur = out.us[i + 1];
    const double gl = out.dus[i] * out.dus[i] + coeffs.V(xl) * ul * ul;
    const double gr = out.dus[i + 1] * out.dus[i + 1] + coeffs.V(xr) * ur * ur;
    norm_sq += 0.5 * (gl + gr) * dx;
    j_val += 0.5 * (coeffs.Q(xl) * std::pow(std::fabs(ul), coeffs.p) +
                    coeffs.Q(xr) * std::pow(std::fabs(ur), coeffs.p)) *
             dx;
  }
  norm_sq *= 2.0;
  j_val *= 2.0;
  if (!(j_val > 0.0)) {
    throw Error("shoot_1d: converged profile has J <= 0; not an admissible direction");
  }
  out.s_value = norm_sq / std::pow(j_val, 2.0 / coeffs.p);
  return out;
}

double eval_profile(const ShootingResult& profile, double x) {
  const double r = std::fabs(x);
  const auto& xs = profile.xs;
  if (xs.empty()) throw Error("eval_profile: empty profile");
  if (r >= xs.back()) return profile.us.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), r);
  std::size_t k = (it == xs.begin()) ? 0 : static_cast<std::size_t>(it - xs.begin() - 1);
  if (k + 1 >= xs.size()) k = xs.size() - 2;
  const double h = xs[k + 1] - xs[k];
  const double t = (r - xs[k]) / h;
  const double u0 = profile.us[k], u1 = profile.us[k + 1];
  // The slope flips sign on the mirrored half, but evaluation at |x| only
  // ever sees the right-half data, where stored derivatives apply directly.
  const double m0 = profile.dus[k] * h, m1 = profile.dus[k + 1] * h;
  const double t2 = t * t, t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * u0 + (t3 - 2.0 * t2 + t) * m0 +
         (-2.0 * t3 + 3.0 * t2) * u1 + (t3 - t2) * m1;
}

ScalarField sample_profile(const ShootingResult& profile, const GridPtr& grid) {
  if (grid->dim != 1) throw std::invalid_argument("sample_profile: 1D grids only");
  ScalarField f(grid);
  for (int i = 0; i < grid->node_count(); ++i) {
    f.values[static_cast<std::size_t>(i)] = eval_profile(profile, grid->node(i)[0]);
  }
  return f;
}

std::vector<double> dense_sym_eigenvalues(std::vector<double> a, int n) {
  if (n <= 0 || a.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw std::invalid_argument("dense_sym_eigenvalues: bad dimensions");
  }
  auto at = [&a, n](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    }
    if (off < 1e-28 * static_cast<double>(n)) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eigs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) eigs[static_cast<std::size_t>(i)] = at(i, i);
  std::sort(eigs.begin(), eigs.end());
  return eigs;
}

std::vector<double> dense_operator_matrix(const ScalarField& V) {
  const Grid& g = *V.grid;
  const int n = g.node_count();
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> unit(static_cast<std::size_t>(n), 0.0);
  std::vector<double> col(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    unit[static_cast<std::size_t>(j)] = 1.0;
    apply_operator_raw(g, V.values.data(), unit.data(), col.data());
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i) * n + j] = col[static_cast<std::size_t>(i)];
    unit[static_cast<std::size_t>(j)] = 0.0;
  }
  return a;
}

double dense_min_eig(const ScalarField& V) {
  const int n = V.grid->node_count();
  if (n > 200) {
    throw std::invalid_argument("dense_min_eig: grid too large (" + std::to_string(n) +
                                " nodes, limit 200)");
  }
  return dense_sym_eigenvalues(dense_operator_matrix(V), n).front();
}

double minimality_probe(const ProblemInstance& inst, const ScalarField& v_star, int trials,
                        double t, std::uint64_t seed) {
  const double j_star = J_n(inst, v_star);
  if (std::fabs(j_star - 1.0) > 1e-6) {
    throw std::invalid_argument("minimality_probe: v_star must be normalized to J_n = 1 (J = " +
                                std::to_string(j_star) + ")");
  }
  if (t == 0.0 || trials <= 0) return 0.0;
  const double base = rayleigh(inst, v_star);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    ScalarField delta(v_star.grid);
    double nrm = 0.0;
    for (double& d : delta.values) {
      d = gauss(rng);
      nrm += d * d;
    }
    nrm = std::sqrt(nrm);
    ScalarField probe = v_star;
    for (std::size_t i = 0; i < probe.values.size(); ++i) {
      probe.values[i] += t * delta.values[i] / nrm;
    }
    if (!(J_n(inst, probe) > 0.0)) continue;  // left the admissible cone
    const double val = base - rayleigh(inst, probe);
    if (val > worst) worst = val;
  }
  return worst;
}

}  // namespace gslab
