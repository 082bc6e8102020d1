#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <iosfwd>

#include "couette/lattice.hpp"
#include "couette/moments.hpp"
#include "couette/params.hpp"

namespace couette::oracle {

/// Hard cap on S: the single-column chain has 3^(S+2) states.
inline constexpr int kMaxS = 8;

/// Column states are encoded base 3, digit k = layer k (0 Hole, 1 Zero, 2 Vee).
using StateIndex = std::int32_t;

/// Rate matrix with row = from-state; row sums are zero.
using Generator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

int num_states(int S);  // 3^(S+2)
Velocity cell_of(StateIndex state, int k);
StateIndex with_cell(StateIndex state, int k, Velocity v);
int hole_count(StateIndex state, int S);

/// Exact generator of the auxiliary single-column chain: vertical exchanges
/// at lambda, boundary flips at beta, 0<->V perturbation at epsilon. There
/// is no horizontal term. Identity exchanges are omitted; coinciding
/// (from, to) arcs merge by summing their rates. No transition changes the
/// hole count, so the hole-count sectors are invariant.
Generator build_generator(const Params& params);

/// Product law with per-cell probabilities (1-rho, (1-vee_share) rho, vee_share rho).
Eigen::VectorXd product_distribution(const Params& params, double vee_share = 0.5);

Eigen::VectorXd point_mass(StateIndex state, int S);

/// pi(t) = pi(0) exp(Q t) by uniformization, truncation error below tol in
/// total variation; the result is renormalized. Throws when pi0 is not a
/// distribution (entries >= 0 summing to 1 within 1e-12).
Eigen::VectorXd evolve(const Eigen::VectorXd& pi0, const Generator& Q, double t,
                       double tol = 1e-10);

/// Stationary distribution of the chain restricted to the hole-count-n
/// sector, returned as a full-length vector supported on that sector.
/// Throws when the sector is not irreducible under the given rates (for
/// example lambda = 0 freezes the hole pattern), describing what decoupled.
Eigen::VectorXd stationary_in_sector(const Generator& Q, int S, int n_holes);

/// Mass of pi0 in each hole-count sector, indexed n = 0..S+2.
Eigen::VectorXd sector_weights(const Eigen::VectorXd& pi0, int S);

/// Limit law of the chain started from pi0: per-sector stationary laws
/// mixed with the initial sector weights (sectors carrying less than
/// 1e-15 mass are skipped).
Eigen::VectorXd stationary_mixture(const Generator& Q, int S, const Eigen::VectorXd& pi0);

/// Layer marginals p_k^e = sum of pi over states whose cell k equals e.
moments::MarginalProfile marginals(const Eigen::VectorXd& pi, int S);

/// Debug dump, one "row,col,rate" line per stored entry.
void dump_csv(const Generator& Q, std::ostream& os);

}  // namespace couette::oracle
