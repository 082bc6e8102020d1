#include "couette/lattice.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace couette {

char to_char(Velocity v) {
  switch (v) {
    case Velocity::Hole: return '.';
    case Velocity::Zero: return '0';
    case Velocity::Vee: return 'V';
  }
  return '?';
}

Velocity velocity_from_char(char c) {
  switch (c) {
    case '.': return Velocity::Hole;
    case '0': return Velocity::Zero;
    case 'V': return Velocity::Vee;
    default: break;
  }
  throw std::invalid_argument(std::string("lattice: unknown site character '") + c + "'");
}

Configuration::Configuration(int S, int W, Velocity fill) {
  if (S < 0 || W < 1) throw std::invalid_argument("configuration: need S >= 0 and W >= 1");
  cells_ = Cells::Constant(S + 2, W, static_cast<std::uint8_t>(fill));
}

Configuration init_product(const Params& params, std::uint64_t seed) {
  params.validate();
  Configuration config(params.S, params.W);
  Rng rng(seed);
  const double p_hole = 1.0 - params.rho;
  const double p_hole_or_zero = p_hole + 0.5 * params.rho;
  for (int k = 0; k < config.layers(); ++k) {
    for (int x = 0; x < config.width(); ++x) {
      const double u = rng.uniform();
      Velocity v = Velocity::Vee;
      if (u < p_hole)
        v = Velocity::Hole;
      else if (u < p_hole_or_zero)
        v = Velocity::Zero;
      config.set(k, x, v);
    }
  }
  return config;
}

std::int64_t total_particles(const Configuration& config) {
  return (config.cells() != static_cast<std::uint8_t>(Velocity::Hole)).count();
}

LayerCounts layer_histogram(const Configuration& config) {
  LayerCounts counts;
  const int layers = config.layers();
  counts.hole.resize(layers);
  counts.zero.resize(layers);
  counts.vee.resize(layers);
  for (int k = 0; k < layers; ++k) {
    const auto row = config.cells().row(k);
    counts.hole(k) = static_cast<int>((row == static_cast<std::uint8_t>(Velocity::Hole)).count());
    counts.zero(k) = static_cast<int>((row == static_cast<std::uint8_t>(Velocity::Zero)).count());
    counts.vee(k) = static_cast<int>((row == static_cast<std::uint8_t>(Velocity::Vee)).count());
  }
  return counts;
}

void write_text(const Configuration& config, std::ostream& os) {
  os << config.strip_S() << ' ' << config.width() << '\n';
  for (int k = 0; k < config.layers(); ++k) {
    for (int x = 0; x < config.width(); ++x) os << to_char(config.at(k, x));
    os << '\n';
  }
}

Configuration read_text(std::istream& is) {
  int S = 0, W = 0;
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("lattice: missing header line");
  {
    std::istringstream hs(header);
    if (!(hs >> S >> W)) throw std::runtime_error("lattice: header must be \"S W\"");
    std::string rest;
    if (hs >> rest) throw std::runtime_error("lattice: trailing tokens in header");
  }
  if (S < 0 || W < 1) throw std::runtime_error("lattice: header out of range");
  Configuration config(S, W);
  for (int k = 0; k < config.layers(); ++k) {
    std::string line;
    if (!std::getline(is, line))
      throw std::runtime_error("lattice: expected " + std::to_string(config.layers()) +
                               " rows, got " + std::to_string(k));
    if (static_cast<int>(line.size()) != W)
      throw std::runtime_error("lattice: row " + std::to_string(k) + " has length " +
                               std::to_string(line.size()) + ", expected " + std::to_string(W));
    for (int x = 0; x < W; ++x) {
      try {
        config.set(k, x, velocity_from_char(line[x]));
      } catch (const std::invalid_argument& e) {
        throw std::runtime_error("lattice: row " + std::to_string(k) + ": " + e.what());
      }
    }
  }
  return config;
}

void save_text(const Configuration& config, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("lattice: cannot open for writing: " + path);
  write_text(config, os);
  if (!os) throw std::runtime_error("lattice: write failed: " + path);
}

Configuration load_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("lattice: cannot open for reading: " + path);
  return read_text(is);
}

}  // namespace couette
