#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "couette/lattice.hpp"
#include "couette/params.hpp"
#include "couette/rng.hpp"

namespace couette::kmc {

/// One generator event. (k, x) is the affected site, or the lower/left
/// member of the affected pair; flips always act on their boundary layer.
struct Event {
  enum class Kind : std::uint8_t { VerticalSwap, HorizontalFlow, BottomFlip, TopFlip, Perturb };
  Kind kind;
  int k;
  int x;

  bool operator==(const Event&) const = default;
};

inline constexpr int kEventKinds = 5;

struct EventCounts {
  std::uint64_t vertical_swap = 0;
  std::uint64_t horizontal_flow = 0;
  std::uint64_t bottom_flip = 0;
  std::uint64_t top_flip = 0;
  std::uint64_t perturb = 0;

  std::uint64_t total() const {
    return vertical_swap + horizontal_flow + bottom_flip + top_flip + perturb;
  }
};

/// Applies one event to the configuration. No rate bookkeeping; the caller
/// is responsible for only applying enabled events (an equal-value vertical
/// swap is a harmless no-op).
void apply_event(Configuration& config, const Event& event);

/// True when the event would change the configuration.
bool event_enabled(const Configuration& config, const Event& event);

/// Every enabled event of the configuration, in a fixed scan order.
/// Horizontal flow is excluded on a width-1 torus and when lambda1 = 0.
std::vector<Event> enumerate_enabled_events(const Configuration& config, const Params& params);

/// Total jump rate, computed by a full scan:
/// lambda * #(unequal vertical pairs) + lambda1 * #(V,hole horizontal pairs)
/// + beta * (#bottom V + #top 0) + epsilon * #(occupied sites).
/// Equal-value vertical swaps are identities and carry no rate here; on a
/// width-1 torus the right neighbour of x is x itself, so flow is disabled.
double total_rate(const Configuration& config, const Params& params);

struct StepResult {
  Event event;
  double dt;
};

/// Event-driven exact simulator with O(1) expected work per event.
///
/// Enabled events are kept in per-kind index sets updated incrementally
/// after each application; selection draws the waiting time from the total
/// rate, picks the kind from the 5-way aggregate, then picks a member
/// uniformly inside the kind.
///
/// include_noop_swaps reverts the identity-swap elision: every vertical
/// pair carries rate lambda and equal-value picks are applied as no-ops.
/// Both variants realize the same law for the configuration process; the
/// equivalence is covered by tests.
class Simulator {
 public:
  Simulator(Configuration config, const Params& params, Rng rng,
            bool include_noop_swaps = false);

  double time() const { return time_; }
  const Configuration& config() const { return config_; }
  const Params& params() const { return params_; }
  const EventCounts& event_counts() const { return counts_; }
  std::int64_t particles() const { return particles_; }
  bool include_noop_swaps() const { return include_noop_swaps_; }

  /// Current total jump rate from the maintained per-kind counts.
  double total_rate() const;

  /// Samples the next (event, waiting time) without applying it. Only the
  /// generator state advances. Returns nullopt from an absorbing state.
  std::optional<StepResult> propose();

  /// Applies a proposed result: advances the clock and mutates the
  /// configuration and the event tables.
  void commit(const StepResult& result);

  /// propose + commit.
  std::optional<StepResult> step();

  /// Runs until the next event would pass t; the clock ends exactly at t.
  /// Returns false when an absorbing state was reached on the way.
  bool advance_to(double t);

  /// Per-layer site counts, maintained incrementally.
  const std::vector<int>& layer_holes() const { return n_hole_; }
  const std::vector<int>& layer_vees() const { return n_vee_; }

  /// Generator state, exposed so one-shot wrappers can hand it back.
  const Rng& rng_state() const { return rng_; }

 private:
  /// Membership set over a fixed id range with O(1) insert/erase/sample.
  struct IndexSet {
    std::vector<std::int32_t> items;
    std::vector<std::int32_t> pos;  // id -> position in items, or -1

    void reset(int domain) {
      pos.assign(domain, -1);
      items.clear();
    }
    void set(int id, bool on) {
      const bool in = pos[id] >= 0;
      if (on && !in) {
        pos[id] = static_cast<std::int32_t>(items.size());
        items.push_back(id);
      } else if (!on && in) {
        const std::int32_t p = pos[id];
        const std::int32_t last = items.back();
        items[p] = last;
        pos[last] = p;
        items.pop_back();
        pos[id] = -1;
      }
    }
    int size() const { return static_cast<int>(items.size()); }
  };

  void rebuild_tables();
  void refresh_cell(int k, int x);
  void apply(const Event& event);
  std::int64_t vswap_candidates() const;

  Params params_;
  Configuration config_;
  Rng rng_;
  bool include_noop_swaps_ = false;
  double time_ = 0.0;
  std::int64_t particles_ = 0;
  EventCounts counts_;
  IndexSet vswap_, flow_, bottom_, top_, perturb_;
  std::vector<int> n_hole_, n_vee_;
};

/// One exact step on a bare configuration (convenience; rebuilds the event
/// tables each call, so prefer Simulator inside loops).
std::optional<StepResult> step(Configuration& config, const Params& params, Rng& rng);

struct RunOptions {
  int batches = 20;                 ///< batch-means error bars (>= 2)
  bool include_noop_swaps = false;  ///< see Simulator
};

/// Time-averaged layer occupation over the measurement window, with
/// batch-means standard errors (approximate under autocorrelation).
/// Merged ensemble reports replace them with between-replica errors.
struct SimReport {
  Params params;
  double t_burn = 0.0;
  double t_measure = 0.0;
  std::uint64_t seed = 0;
  int replicas = 1;
  double mean_particles = 0.0;  ///< conserved particle count (replica mean)
  EventCounts events;           ///< applied events over burn-in + measurement
  bool measured = false;        ///< false for a zero-duration window

  Eigen::ArrayXd p_hole, p_zero, p_v;  // empty when !measured
  Eigen::ArrayXd se_hole, se_zero, se_v;
};

/// Advances the process to t_burn, then accumulates time-weighted layer
/// histograms until t_burn + t_measure. An absorbing state freezes the
/// histograms over the remaining time (a frozen state is a valid
/// stationary sample). Deterministic given (initial, params, seed).
SimReport run(const Configuration& initial, const Params& params, double t_burn,
              double t_measure, std::uint64_t seed, const RunOptions& options = {});

/// Mean profile over replica reports (which must share params and window),
/// with between-replica standard errors when two or more replicas are
/// present. The vector order is the fixed reduction order.
SimReport merge_reports(const std::vector<SimReport>& reports, std::uint64_t base_seed);

}  // namespace couette::kmc
