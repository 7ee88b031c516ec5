#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "topodyn/errors.hpp"
#include "topodyn/shifts.hpp"
#include "topodyn/systems.hpp"

namespace topodyn {

// One application of a (possibly wrapped) shift system at the vector level.
inline ShiftVector view_apply(const ShiftView& view, const ShiftVector& v) {
  ShiftVector out = shift_apply_n(*view.spec, v, view.stride);
  out *= view.lambda;
  return out;
}

struct OrbitSpanBasis {
  std::vector<ShiftVector> basis;  // orthonormal
  std::vector<ShiftVector> seeds;
  long depth = 0;

  std::size_t rank() const { return basis.size(); }
};

// Orthonormal basis of span{T^j s : s in seeds, 0 <= j <= N} by modified
// Gram-Schmidt with two re-orthogonalization passes. A candidate whose
// residual drops below drop_tol * its own norm is dependent and dropped.
inline OrbitSpanBasis orbit_span_basis(const System& sys,
                                       const std::vector<ShiftVector>& seeds,
                                       long depth, double drop_tol = 1e-10) {
  if (depth < 1) throw invalid_input("orbit_span_basis: depth must be >= 1");
  auto view = shift_view(sys);
  if (!view)
    throw invalid_input("orbit_span_basis: shift-family system required");
  OrbitSpanBasis out;
  out.seeds = seeds;
  out.depth = depth;
  for (const ShiftVector& seed : seeds) {
    if (seed.blocks() != view->spec->truncation ||
        seed.block_dim() != view->spec->block_dim)
      throw invalid_input("orbit_span_basis: seed does not match spec");
    ShiftVector orbit = seed;
    for (long j = 0; j <= depth; ++j) {
      double original = orbit.norm();
      if (original > 0.0) {
        ShiftVector r = orbit;
        for (int pass = 0; pass < 2; ++pass)
          for (const ShiftVector& b : out.basis) r -= inner_product(b, r) * b;
        double rn = r.norm();
        if (rn > drop_tol * original) {
          r *= Complex{1.0 / rn, 0.0};
          out.basis.push_back(r);
        }
      }
      if (j < depth) orbit = view_apply(*view, orbit);
    }
  }
  return out;
}

struct CompressedOperator {
  // matrix[i][j] = <b_i, T b_j>
  std::vector<std::vector<Complex>> matrix;
  // column_defects[j] = ||(I - P) T b_j||, P the projector onto the span
  std::vector<double> column_defects;
  double invariance_defect = 0.0;
};

inline CompressedOperator compressed_operator(const System& sys,
                                              const OrbitSpanBasis& basis) {
  auto view = shift_view(sys);
  if (!view)
    throw invalid_input("compressed_operator: shift-family system required");
  for (const ShiftVector& b : basis.basis)
    if (b.blocks() != view->spec->truncation ||
        b.block_dim() != view->spec->block_dim)
      throw invalid_input("compressed_operator: basis does not match spec");
  std::size_t k = basis.basis.size();
  CompressedOperator out;
  out.matrix.assign(k, std::vector<Complex>(k, Complex{0.0, 0.0}));
  out.column_defects.assign(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    ShiftVector tb = view_apply(*view, basis.basis[j]);
    ShiftVector residual = tb;
    for (std::size_t i = 0; i < k; ++i) {
      Complex c = inner_product(basis.basis[i], tb);
      out.matrix[i][j] = c;
      residual -= c * basis.basis[i];
    }
    out.column_defects[j] = residual.norm();
    out.invariance_defect = std::max(out.invariance_defect, out.column_defects[j]);
  }
  return out;
}

}  // namespace topodyn
