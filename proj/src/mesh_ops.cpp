#include "gslab/mesh_ops.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gslab {

void apply_operator_raw(const Grid& g, const double* coeff, const double* v, double* out) {
  if (g.dim == 1) {
    const int n = g.n_nodes[0];
    const double ih2 = 1.0 / (g.h[0] * g.h[0]);
    for (int i = 0; i < n; ++i) {
      const double left = (i > 0) ? v[i - 1] : 0.0;
      const double right = (i + 1 < n) ? v[i + 1] : 0.0;
      out[i] = (2.0 * v[i] - (left + right)) * ih2 + coeff[i] * v[i];
    }
    return;
  }
  const int n0 = g.n_nodes[0];
  const int n1 = g.n_nodes[1];
  const double ih0 = 1.0 / (g.h[0] * g.h[0]);
  const double ih1 = 1.0 / (g.h[1] * g.h[1]);
  for (int i0 = 0; i0 < n0; ++i0) {
    for (int i1 = 0; i1 < n1; ++i1) {
      const int k = i0 * n1 + i1;
      const double c = v[k];
      const double xm = (i0 > 0) ? v[k - n1] : 0.0;
      const double xp = (i0 + 1 < n0) ? v[k + n1] : 0.0;
      const double ym = (i1 > 0) ? v[k - 1] : 0.0;
      const double yp = (i1 + 1 < n1) ? v[k + 1] : 0.0;
      out[k] = (2.0 * c - (xm + xp)) * ih0 + (2.0 * c - (ym + yp)) * ih1 + coeff[k] * c;
    }
  }
}

ScalarField apply_operator(const ScalarField& coeff, const ScalarField& v) {
  require_same_grid(coeff, v, "apply_operator");
  ScalarField out(v.grid);
  apply_operator_raw(*v.grid, coeff.values.data(), v.values.data(), out.values.data());
  return out;
}

double integrate(const ScalarField& f, const RegionMask& region) {
  require_same_grid(f, region, "integrate");
  const double vol = f.grid->cell_volume();
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (region.member[i]) s += f.values[i];
  }
  return s * vol;
}

double integrate(const ScalarField& f) {
  const double vol = f.grid->cell_volume();
  double s = 0.0;
  for (double x : f.values) s += x;
  return s * vol;
}

double norm_n_sq_raw(const Grid& g, const double* coeff, const double* v) {
  double grad = 0.0;
  if (g.dim == 1) {
    const int n = g.n_nodes[0];
    const double w = 1.0 / g.h[0];  // (dv/h)^2 * h = dv^2 / h
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = v[i] - prev;
      grad += d * d * w;
      prev = v[i];
    }
    grad += prev * prev * w;  // edge into the right boundary
  } else {
    const int n0 = g.n_nodes[0];
    const int n1 = g.n_nodes[1];
    const double w0 = g.h[1] / g.h[0];
    const double w1 = g.h[0] / g.h[1];
    for (int i1 = 0; i1 < n1; ++i1) {
      double prev = 0.0;
      for (int i0 = 0; i0 < n0; ++i0) {
        const double cur = v[i0 * n1 + i1];
        const double d = cur - prev;
        grad += d * d * w0;
        prev = cur;
      }
      grad += prev * prev * w0;
    }
    for (int i0 = 0; i0 < n0; ++i0) {
      double prev = 0.0;
      for (int i1 = 0; i1 < n1; ++i1) {
        const double cur = v[i0 * n1 + i1];
        const double d = cur - prev;
        grad += d * d * w1;
        prev = cur;
      }
      grad += prev * prev * w1;
    }
  }
  const double vol = g.cell_volume();
  double pot = 0.0;
  const int n = g.node_count();
  for (int i = 0; i < n; ++i) pot += coeff[i] * v[i] * v[i];
  return grad + pot * vol;
}

double norm_n_sq(const ScalarField& v, const ScalarField& V_n) {
  require_same_grid(v, V_n, "norm_n");
  return norm_n_sq_raw(*v.grid, V_n.values.data(), v.values.data());
}

double norm_n(const ScalarField& v, const ScalarField& V_n) {
  const double s = norm_n_sq(v, V_n);
  return s > 0.0 ? std::sqrt(s) : 0.0;
}

double lq_norm(const ScalarField& v, double q, const RegionMask& region) {
  require_same_grid(v, region, "lq_norm");
  if (std::isinf(q)) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.values.size(); ++i) {
      if (!region.member[i]) continue;
      const double a = std::fabs(v.values[i]);
      if (a > m) m = a;
    }
    return m;
  }
  if (!(q >= 1.0)) {
    throw std::invalid_argument("lq_norm: q must be >= 1 or infinity, got " + std::to_string(q));
  }
  const double vol = v.grid->cell_volume();
  double s = 0.0;
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (region.member[i]) s += std::pow(std::fabs(v.values[i]), q);
  }
  return std::pow(s * vol, 1.0 / q);
}

double lq_norm(const ScalarField& v, double q) {
  return lq_norm(v, q, RegionMask::full(v.grid));
}

ScalarField grad_energy_density(const ScalarField& v) {
  const Grid& g = *v.grid;
  ScalarField e(v.grid, 0.0);
  const double* a = v.values.data();
  double* out = e.values.data();
  if (g.dim == 1) {
    const int n = g.n_nodes[0];
    const double w = 1.0 / g.h[0];
    for (int i = -1; i < n; ++i) {
      const double vl = (i >= 0) ? a[i] : 0.0;
      const double vr = (i + 1 < n) ? a[i + 1] : 0.0;
      const double energy = (vr - vl) * (vr - vl) * w;
      const bool li = i >= 0;
      const bool ri = i + 1 < n;
      if (li && ri) {
        out[i] += 0.5 * energy;
        out[i + 1] += 0.5 * energy;
      } else if (li) {
        out[i] += energy;
      } else if (ri) {
        out[i + 1] += energy;
      }
    }
    return e;
  }
  const int n0 = g.n_nodes[0];
  const int n1 = g.n_nodes[1];
  const double w0 = g.h[1] / g.h[0];
  const double w1 = g.h[0] / g.h[1];
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i0 = -1; i0 < n0; ++i0) {
      const double vl = (i0 >= 0) ? a[i0 * n1 + i1] : 0.0;
      const double vr = (i0 + 1 < n0) ? a[(i0 + 1) * n1 + i1] : 0.0;
      const double energy = (vr - vl) * (vr - vl) * w0;
      const bool li = i0 >= 0;
      const bool ri = i0 + 1 < n0;
      if (li && ri) {
        out[i0 * n1 + i1] += 0.5 * energy;
        out[(i0 + 1) * n1 + i1] += 0.5 * energy;
      } else if (li) {
        out[i0 * n1 + i1] += energy;
      } else if (ri) {
        out[(i0 + 1) * n1 + i1] += energy;
      }
    }
  }
  for (int i0 = 0; i0 < n0; ++i0) {
    for (int i1 = -1; i1 < n1; ++i1) {
      const double vl = (i1 >= 0) ? a[i0 * n1 + i1] : 0.0;
      const double vr = (i1 + 1 < n1) ? a[i0 * n1 + i1 + 1] : 0.0;
      const double energy = (vr - vl) * (vr - vl) * w1;
      const bool li = i1 >= 0;
      const bool ri = i1 + 1 < n1;
      if (li && ri) {
        out[i0 * n1 + i1] += 0.5 * energy;
        out[i0 * n1 + i1 + 1] += 0.5 * energy;
      } else if (li) {
        out[i0 * n1 + i1] += energy;
      } else if (ri) {
        out[i0 * n1 + i1 + 1] += energy;
      }
    }
  }
  return e;
}

double h1_energy(const ScalarField& v, const ScalarField& V_n, const RegionMask& region) {
  require_same_grid(v, V_n, "h1_energy");
  require_same_grid(v, region, "h1_energy");
  const ScalarField e = grad_energy_density(v);
  const double vol = v.grid->cell_volume();
  double s = 0.0;
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (region.member[i]) {
      s += e.values[i] + V_n.values[i] * v.values[i] * v.values[i] * vol;
    }
  }
  return s;
}

double dot(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

}  // namespace gslab
