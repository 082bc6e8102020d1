#include "couette/oracle.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace couette::oracle {

namespace {

int pow3(int n) {
  int r = 1;
  for (int i = 0; i < n; ++i) r *= 3;
  return r;
}

void check_cap(int S) {
  if (S < 0) throw std::invalid_argument("oracle: S must be >= 0");
  if (S > kMaxS) {
    std::ostringstream msg;
    msg << "oracle: S = " << S << " exceeds the exact-solver cap S <= " << kMaxS
        << " (3^(S+2) = " << std::pow(3.0, S + 2) << " states)";
    throw std::invalid_argument(msg.str());
  }
}

void check_distribution(const Eigen::VectorXd& pi, int states) {
  if (pi.size() != states)
    throw std::invalid_argument("oracle: distribution has wrong dimension");
  if (pi.minCoeff() < -1e-12)
    throw std::invalid_argument("oracle: distribution has negative entries");
  if (std::abs(pi.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("oracle: distribution does not sum to 1");
}

}  // namespace

int num_states(int S) {
  check_cap(S);
  return pow3(S + 2);
}

Velocity cell_of(StateIndex state, int k) {
  StateIndex s = state;
  for (int i = 0; i < k; ++i) s /= 3;
  return static_cast<Velocity>(s % 3);
}

StateIndex with_cell(StateIndex state, int k, Velocity v) {
  StateIndex base = 1;
  for (int i = 0; i < k; ++i) base *= 3;
  const StateIndex old = (state / base) % 3;
  return state + (static_cast<StateIndex>(v) - old) * base;
}

int hole_count(StateIndex state, int S) {
  int n = 0;
  StateIndex s = state;
  for (int k = 0; k < S + 2; ++k, s /= 3)
    if (s % 3 == static_cast<int>(Velocity::Hole)) ++n;
  return n;
}

Generator build_generator(const Params& params) {
  params.validate();
  check_cap(params.S);
  const int S = params.S;
  const int states = num_states(S);
  const double lam = params.lambda;
  const double beta = params.beta;
  const double eps = params.epsilon;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(states) * (2 * S + 6));
  std::vector<double> outflow(states, 0.0);

  auto add = [&](StateIndex from, StateIndex to, double rate) {
    if (rate <= 0.0 || from == to) return;
    triplets.emplace_back(from, to, rate);
    outflow[from] += rate;
  };

  for (StateIndex s = 0; s < states; ++s) {
    for (int k = 0; k <= S; ++k) {
      const Velocity a = cell_of(s, k);
      const Velocity b = cell_of(s, k + 1);
      if (a != b) add(s, with_cell(with_cell(s, k, b), k + 1, a), lam);
    }
    if (cell_of(s, 0) == Velocity::Vee) add(s, with_cell(s, 0, Velocity::Zero), beta);
    if (cell_of(s, S + 1) == Velocity::Zero) add(s, with_cell(s, S + 1, Velocity::Vee), beta);
    for (int k = 0; k <= S + 1; ++k) {
      const Velocity v = cell_of(s, k);
      if (v == Velocity::Zero) add(s, with_cell(s, k, Velocity::Vee), eps);
      if (v == Velocity::Vee) add(s, with_cell(s, k, Velocity::Zero), eps);
    }
  }
  for (StateIndex s = 0; s < states; ++s)
    if (outflow[s] > 0.0) triplets.emplace_back(s, s, -outflow[s]);

  Generator Q(states, states);
  Q.setFromTriplets(triplets.begin(), triplets.end());
  Q.makeCompressed();
  return Q;
}

Eigen::VectorXd product_distribution(const Params& params, double vee_share) {
  params.validate();
  check_cap(params.S);
  if (!(vee_share >= 0.0 && vee_share <= 1.0))
    throw std::invalid_argument("oracle: vee_share must lie in [0, 1]");
  const int states = num_states(params.S);
  const double p[3] = {1.0 - params.rho, (1.0 - vee_share) * params.rho,
                       vee_share * params.rho};
  Eigen::VectorXd pi(states);
  for (StateIndex s = 0; s < states; ++s) {
    double w = 1.0;
    StateIndex digits = s;
    for (int k = 0; k < params.S + 2; ++k, digits /= 3) w *= p[digits % 3];
    pi(s) = w;
  }
  return pi;
}

Eigen::VectorXd point_mass(StateIndex state, int S) {
  const int states = num_states(S);
  if (state < 0 || state >= states) throw std::invalid_argument("oracle: state out of range");
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(states);
  pi(state) = 1.0;
  return pi;
}

Eigen::VectorXd evolve(const Eigen::VectorXd& pi0, const Generator& Q, double t, double tol) {
  check_distribution(pi0, static_cast<int>(Q.rows()));
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("oracle: t must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("oracle: tol must be > 0");

  Eigen::VectorXd pi = pi0 / pi0.sum();
  const double uniform_rate = Q.rows() > 0 ? Q.diagonal().cwiseAbs().maxCoeff() : 0.0;
  if (t == 0.0 || uniform_rate == 0.0) return pi;

  // Uniformized transition kernel, transposed once so each Poisson term is
  // a plain matrix-vector product.
  Eigen::SparseMatrix<double> Pt(Q.rows(), Q.cols());
  {
    Eigen::SparseMatrix<double> P = (Q / uniform_rate).transpose();
    Eigen::SparseMatrix<double> I(Q.rows(), Q.cols());
    I.setIdentity();
    Pt = P + I;
  }

  // Long horizons are split so the leading Poisson weight e^(-a) stays
  // representable; errors add across chunks.
  const int chunks = std::max(1, static_cast<int>(std::ceil(uniform_rate * t / 50.0)));
  const double tau = t / chunks;
  const double chunk_tol = tol / chunks;

  for (int c = 0; c < chunks; ++c) {
    const double a = uniform_rate * tau;
    double weight = std::exp(-a);
    double cumulative = weight;
    Eigen::VectorXd term = pi;
    Eigen::VectorXd acc = weight * term;
    const long max_terms = static_cast<long>(a + 12.0 * std::sqrt(a + 1.0) + 64.0);
    for (long m = 1; m <= max_terms && cumulative < 1.0 - chunk_tol; ++m) {
      term = Pt * term;
      weight *= a / static_cast<double>(m);
      acc += weight * term;
      cumulative += weight;
    }
    pi = acc / acc.sum();
  }
  return pi;
}

Eigen::VectorXd sector_weights(const Eigen::VectorXd& pi0, int S) {
  check_distribution(pi0, num_states(S));
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(S + 3);
  for (StateIndex s = 0; s < pi0.size(); ++s) weights(hole_count(s, S)) += pi0(s);
  return weights;
}

Eigen::VectorXd stationary_in_sector(const Generator& Q, int S, int n_holes) {
  const int states = num_states(S);
  if (Q.rows() != states)
    throw std::invalid_argument("oracle: generator dimension does not match S");
  if (n_holes < 0 || n_holes > S + 2)
    throw std::invalid_argument("oracle: hole count outside 0..S+2");

  std::vector<StateIndex> sector;
  std::vector<int> local(states, -1);
  for (StateIndex s = 0; s < states; ++s) {
    if (hole_count(s, S) == n_holes) {
      local[s] = static_cast<int>(sector.size());
      sector.push_back(s);
    }
  }
  const int m = static_cast<int>(sector.size());

  // Sector adjacency from the generator rows.
  std::vector<std::vector<int>> fwd(m), bwd(m);
  std::vector<Eigen::Triplet<double>> edges;
  for (int i = 0; i < m; ++i) {
    const StateIndex s = sector[i];
    for (Generator::InnerIterator it(Q, s); it; ++it) {
      if (it.col() == s) continue;
      const int j = local[it.col()];
      if (j < 0)
        throw std::logic_error("oracle: generator leaks across hole-count sectors");
      fwd[i].push_back(j);
      bwd[j].push_back(i);
      edges.emplace_back(j, i, it.value());  // transposed: balance of state j
    }
  }

  if (m == 1) return point_mass(sector[0], S);

  // pi Q = 0 has a unique normalized solution only when the sector is one
  // strongly connected class.
  auto reach_count = [&](const std::vector<std::vector<int>>& adj) {
    std::vector<char> seen(m, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int j : adj[i]) {
        if (!seen[j]) {
          seen[j] = 1;
          ++count;
          stack.push_back(j);
        }
      }
    }
    return count;
  };
  const int nf = reach_count(fwd);
  const int nb = reach_count(bwd);
  if (nf != m || nb != m) {
    std::ostringstream msg;
    msg << "oracle: sector n = " << n_holes << " is not irreducible under these rates ("
        << nf << "/" << m << " states reachable forward, " << nb << "/" << m
        << " backward from state " << sector[0]
        << "); degenerate rates (e.g. lambda = 0 or beta = epsilon = 0) split it into "
        << "closed classes with distinct stationary laws";
    throw std::runtime_error(msg.str());
  }

  // Balance equations transposed, with the balance row of local state 0
  // replaced by the normalization sum.
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size() + 2 * m);
  for (const auto& e : edges)
    if (e.row() != 0) triplets.push_back(e);
  for (int i = 0; i < m; ++i) {
    const double qii = Q.coeff(sector[i], sector[i]);
    if (i != 0 && qii != 0.0) triplets.emplace_back(i, i, qii);
    triplets.emplace_back(0, i, 1.0);
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("oracle: sector stationary solve failed to factorize");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs(0) = 1.0;
  Eigen::VectorXd x = lu.solve(rhs);

  // Clip roundoff negatives and renormalize before the residual check.
  for (int i = 0; i < m; ++i) x(i) = std::max(x(i), 0.0);
  x /= x.sum();

  Eigen::VectorXd full = Eigen::VectorXd::Zero(states);
  for (int i = 0; i < m; ++i) full(sector[i]) = x(i);
  Eigen::VectorXd balance = Q.transpose() * full;
  double scale = 1.0;
  for (int i = 0; i < m; ++i)
    scale = std::max(scale, std::abs(Q.coeff(sector[i], sector[i])));
  if (balance.cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::runtime_error("oracle: sector stationary solve residual above 1e-10");
  return full;
}

Eigen::VectorXd stationary_mixture(const Generator& Q, int S, const Eigen::VectorXd& pi0) {
  const Eigen::VectorXd weights = sector_weights(pi0, S);
  Eigen::VectorXd mixture = Eigen::VectorXd::Zero(num_states(S));
  for (int n = 0; n <= S + 2; ++n) {
    if (weights(n) < 1e-15) continue;
    mixture += weights(n) * stationary_in_sector(Q, S, n);
  }
  return mixture / mixture.sum();
}

moments::MarginalProfile marginals(const Eigen::VectorXd& pi, int S) {
  check_distribution(pi, num_states(S));
  moments::MarginalProfile profile;
  profile.p_hole = Eigen::ArrayXd::Zero(S + 2);
  profile.p_v = Eigen::ArrayXd::Zero(S + 2);
  for (StateIndex s = 0; s < pi.size(); ++s) {
    StateIndex digits = s;
    for (int k = 0; k < S + 2; ++k, digits /= 3) {
      const int v = digits % 3;
      if (v == static_cast<int>(Velocity::Hole))
        profile.p_hole(k) += pi(s);
      else if (v == static_cast<int>(Velocity::Vee))
        profile.p_v(k) += pi(s);
    }
  }
  return profile;
}

void dump_csv(const Generator& Q, std::ostream& os) {
  os << "row,col,rate\n";
  for (int row = 0; row < Q.outerSize(); ++row)
    for (Generator::InnerIterator it(Q, row); it; ++it)
      os << it.row() << ',' << it.col() << ',' << it.value() << '\n';
}

}  // namespace couette::oracle
