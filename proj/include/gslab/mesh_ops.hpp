#pragma once

#include "gslab/field.hpp"

namespace gslab {

/// (-Laplace_h + coeff) v with the second-order central stencil (3-point in
/// 1D, 5-point in 2D) and homogeneous Dirichlet ghost values.
ScalarField apply_operator(const ScalarField& coeff, const ScalarField& v);

/// Same stencil on raw node arrays; no grid checks, no allocation.
void apply_operator_raw(const Grid& g, const double* coeff, const double* v, double* out);

/// Rectangle-rule quadrature sum_{i in region} f_i * prod(h).
double integrate(const ScalarField& f, const RegionMask& region);
double integrate(const ScalarField& f);

/// Discrete H^1-type norm: norm_n(v, Vn)^2 sums squared forward differences
/// over all cell edges (Dirichlet boundary edges included) plus the Vn v^2
/// quadrature.  Chosen so that norm_n(v, c)^2 equals <apply_operator(c, v), v>
/// * prod(h) exactly, up to rounding.
double norm_n(const ScalarField& v, const ScalarField& V_n);
double norm_n_sq(const ScalarField& v, const ScalarField& V_n);
double norm_n_sq_raw(const Grid& g, const double* coeff, const double* v);

/// (integral over region of |v|^q)^{1/q}; for q = infinity, max_region |v|.
double lq_norm(const ScalarField& v, double q, const RegionMask& region);
double lq_norm(const ScalarField& v, double q);

/// Per-node share of the gradient part of norm_n_sq(v, 0): each edge's energy
/// goes half to each interior endpoint, boundary edges entirely to their one
/// interior endpoint.  Sums exactly to the gradient energy, so masked energy
/// fractions stay in [0, 1] and disjoint regions never double count.
ScalarField grad_energy_density(const ScalarField& v);

/// integral over region of (|grad v|^2 + Vn v^2), with the edge-assignment
/// convention of grad_energy_density.  The full-region value equals
/// norm_n_sq(v, Vn).
double h1_energy(const ScalarField& v, const ScalarField& V_n, const RegionMask& region);

/// Plain Euclidean dot product of node values (no quadrature weight).
double dot(const ScalarField& a, const ScalarField& b);

}  // namespace gslab
