#include "couette/params.hpp"

#include <cmath>
#include <stdexcept>

namespace couette {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

bool valid_rate(double r) { return std::isfinite(r) && r >= 0.0; }

}  // namespace

void Params::validate() const {
  require(S >= 0, "params: S must be >= 0");
  require(W >= 1, "params: W must be >= 1");
  require(valid_rate(lambda), "params: lambda must be finite and >= 0");
  require(valid_rate(lambda1), "params: lambda1 must be finite and >= 0");
  require(valid_rate(beta), "params: beta must be finite and >= 0");
  require(valid_rate(epsilon), "params: epsilon must be finite and >= 0");
  require(std::isfinite(rho) && rho >= 0.0 && rho <= 1.0, "params: rho must lie in [0, 1]");
}

std::vector<std::string> Params::regime_warnings() const {
  std::vector<std::string> warnings;
  if (lambda <= 0.0)
    warnings.push_back("lambda = 0: no vertical exchange; the closed-form results assume lambda > 0");
  if (beta <= 0.0)
    warnings.push_back("beta = 0: free boundaries; the linear/explicit profiles assume beta > 0");
  if (lambda1 <= 0.0)
    warnings.push_back("lambda1 = 0: no horizontal flow; layer marginals are unaffected");
  if (lambda1 > 0.0 && W < 2)
    warnings.push_back("W = 1: a site cannot flow into itself, horizontal flow is disabled");
  return warnings;
}

}  // namespace couette
