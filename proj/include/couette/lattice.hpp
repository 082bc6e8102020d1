#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "couette/params.hpp"
#include "couette/rng.hpp"

namespace couette {

/// Per-site state: empty site (Hole), particle at rest (Zero), or particle
/// carried with the moving plate (Vee).
enum class Velocity : std::uint8_t { Hole = 0, Zero = 1, Vee = 2 };

/// Text-format site characters: '.' Hole, '0' Zero, 'V' Vee.
char to_char(Velocity v);
Velocity velocity_from_char(char c);  // throws std::invalid_argument on others

/// Site states on the (S+2) x W strip, periodic in x.
///
/// Plain value type: cheap to copy at desk scale, safe to move between
/// threads. Dimensions are fixed at construction.
class Configuration {
 public:
  using Cells = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

  Configuration(int S, int W, Velocity fill = Velocity::Hole);

  int strip_S() const { return static_cast<int>(cells_.rows()) - 2; }
  int layers() const { return static_cast<int>(cells_.rows()); }
  int width() const { return static_cast<int>(cells_.cols()); }

  Velocity at(int k, int x) const { return static_cast<Velocity>(cells_(k, x)); }
  void set(int k, int x, Velocity v) { cells_(k, x) = static_cast<std::uint8_t>(v); }

  /// Torus neighbours in the flow direction.
  int right_of(int x) const { return x + 1 == width() ? 0 : x + 1; }
  int left_of(int x) const { return x == 0 ? width() - 1 : x - 1; }

  const Cells& cells() const { return cells_; }

  bool operator==(const Configuration& other) const {
    return (cells_ == other.cells_).all();
  }

 private:
  Cells cells_;
};

/// Per-layer site counts; hole + zero + vee == W on every layer.
struct LayerCounts {
  Eigen::ArrayXi hole, zero, vee;
};

/// Translation-invariant product ensemble: each site independently Hole
/// with probability 1-rho, Zero and Vee with probability rho/2 each.
/// Deterministic given (params, seed).
Configuration init_product(const Params& params, std::uint64_t seed);

/// Number of occupied sites (state != Hole). Conserved by the dynamics.
std::int64_t total_particles(const Configuration& config);

LayerCounts layer_histogram(const Configuration& config);

/// Text format: header line "S W", then S+2 lines of W characters from
/// {., 0, V}, bottom layer (k = 0) first, LF-terminated.
void write_text(const Configuration& config, std::ostream& os);
Configuration read_text(std::istream& is);  // throws std::runtime_error on malformed input
void save_text(const Configuration& config, const std::string& path);
Configuration load_text(const std::string& path);

}  // namespace couette
