#include "couette/kmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace couette::kmc {

namespace {

constexpr auto kHole = Velocity::Hole;
constexpr auto kZero = Velocity::Zero;
constexpr auto kVee = Velocity::Vee;

Velocity flipped(Velocity v) { return v == kZero ? kVee : kZero; }

}  // namespace

void apply_event(Configuration& config, const Event& event) {
  switch (event.kind) {
    case Event::Kind::VerticalSwap: {
      const Velocity a = config.at(event.k, event.x);
      const Velocity b = config.at(event.k + 1, event.x);
      config.set(event.k, event.x, b);
      config.set(event.k + 1, event.x, a);
      return;
    }
    case Event::Kind::HorizontalFlow: {
      const int xr = config.right_of(event.x);
      config.set(event.k, event.x, kHole);
      config.set(event.k, xr, kVee);
      return;
    }
    case Event::Kind::BottomFlip:
      config.set(0, event.x, kZero);
      return;
    case Event::Kind::TopFlip:
      config.set(config.layers() - 1, event.x, kVee);
      return;
    case Event::Kind::Perturb:
      config.set(event.k, event.x, flipped(config.at(event.k, event.x)));
      return;
  }
}

bool event_enabled(const Configuration& config, const Event& event) {
  switch (event.kind) {
    case Event::Kind::VerticalSwap:
      return config.at(event.k, event.x) != config.at(event.k + 1, event.x);
    case Event::Kind::HorizontalFlow:
      return config.width() >= 2 && config.at(event.k, event.x) == kVee &&
             config.at(event.k, config.right_of(event.x)) == kHole;
    case Event::Kind::BottomFlip:
      return config.at(0, event.x) == kVee;
    case Event::Kind::TopFlip:
      return config.at(config.layers() - 1, event.x) == kZero;
    case Event::Kind::Perturb:
      return config.at(event.k, event.x) != kHole;
  }
  return false;
}

std::vector<Event> enumerate_enabled_events(const Configuration& config, const Params& params) {
  std::vector<Event> events;
  const int S = config.strip_S();
  const int W = config.width();
  if (params.lambda > 0.0)
    for (int k = 0; k <= S; ++k)
      for (int x = 0; x < W; ++x)
        if (config.at(k, x) != config.at(k + 1, x))
          events.push_back({Event::Kind::VerticalSwap, k, x});
  if (params.lambda1 > 0.0 && W >= 2)
    for (int k = 0; k <= S + 1; ++k)
      for (int x = 0; x < W; ++x)
        if (config.at(k, x) == kVee && config.at(k, config.right_of(x)) == kHole)
          events.push_back({Event::Kind::HorizontalFlow, k, x});
  if (params.beta > 0.0) {
    for (int x = 0; x < W; ++x)
      if (config.at(0, x) == kVee) events.push_back({Event::Kind::BottomFlip, 0, x});
    for (int x = 0; x < W; ++x)
      if (config.at(S + 1, x) == kZero) events.push_back({Event::Kind::TopFlip, S + 1, x});
  }
  if (params.epsilon > 0.0)
    for (int k = 0; k <= S + 1; ++k)
      for (int x = 0; x < W; ++x)
        if (config.at(k, x) != kHole) events.push_back({Event::Kind::Perturb, k, x});
  return events;
}

double total_rate(const Configuration& config, const Params& params) {
  const int S = config.strip_S();
  const int W = config.width();
  std::int64_t n_vswap = 0, n_flow = 0, n_bottom = 0, n_top = 0, n_perturb = 0;
  for (int k = 0; k <= S; ++k)
    for (int x = 0; x < W; ++x)
      if (config.at(k, x) != config.at(k + 1, x)) ++n_vswap;
  if (W >= 2)
    for (int k = 0; k <= S + 1; ++k)
      for (int x = 0; x < W; ++x)
        if (config.at(k, x) == kVee && config.at(k, config.right_of(x)) == kHole) ++n_flow;
  for (int x = 0; x < W; ++x) {
    if (config.at(0, x) == kVee) ++n_bottom;
    if (config.at(S + 1, x) == kZero) ++n_top;
  }
  n_perturb = total_particles(config);
  return params.lambda * static_cast<double>(n_vswap) +
         params.lambda1 * static_cast<double>(n_flow) +
         params.beta * static_cast<double>(n_bottom + n_top) +
         params.epsilon * static_cast<double>(n_perturb);
}

Simulator::Simulator(Configuration config, const Params& params, Rng rng,
                     bool include_noop_swaps)
    : params_(params),
      config_(std::move(config)),
      rng_(rng),
      include_noop_swaps_(include_noop_swaps) {
  params_.validate();
  if (config_.strip_S() != params_.S || config_.width() != params_.W)
    throw std::invalid_argument("kmc: configuration dimensions do not match params");
  rebuild_tables();
}

void Simulator::rebuild_tables() {
  const int S = params_.S;
  const int W = params_.W;
  vswap_.reset((S + 1) * W);
  flow_.reset((S + 2) * W);
  bottom_.reset(W);
  top_.reset(W);
  perturb_.reset((S + 2) * W);
  n_hole_.assign(S + 2, 0);
  n_vee_.assign(S + 2, 0);

  for (int k = 0; k <= S + 1; ++k) {
    for (int x = 0; x < W; ++x) {
      const Velocity v = config_.at(k, x);
      if (v == kHole) ++n_hole_[k];
      if (v == kVee) ++n_vee_[k];
      if (k <= S) vswap_.set(k * W + x, config_.at(k, x) != config_.at(k + 1, x));
      if (W >= 2)
        flow_.set(k * W + x, v == kVee && config_.at(k, config_.right_of(x)) == kHole);
      perturb_.set(k * W + x, v != kHole);
    }
  }
  for (int x = 0; x < W; ++x) {
    bottom_.set(x, config_.at(0, x) == kVee);
    top_.set(x, config_.at(S + 1, x) == kZero);
  }
  particles_ = total_particles(config_);
}

void Simulator::refresh_cell(int k, int x) {
  const int S = params_.S;
  const int W = params_.W;
  const Velocity v = config_.at(k, x);
  if (k >= 1) vswap_.set((k - 1) * W + x, config_.at(k - 1, x) != v);
  if (k <= S) vswap_.set(k * W + x, v != config_.at(k + 1, x));
  if (W >= 2) {
    const int xl = config_.left_of(x);
    flow_.set(k * W + xl, config_.at(k, xl) == kVee && v == kHole);
    flow_.set(k * W + x, v == kVee && config_.at(k, config_.right_of(x)) == kHole);
  }
  if (k == 0) bottom_.set(x, v == kVee);
  if (k == S + 1) top_.set(x, v == kZero);
  perturb_.set(k * W + x, v != kHole);
}

std::int64_t Simulator::vswap_candidates() const {
  if (include_noop_swaps_)
    return static_cast<std::int64_t>(params_.S + 1) * params_.W;
  return vswap_.size();
}

double Simulator::total_rate() const {
  return params_.lambda * static_cast<double>(vswap_candidates()) +
         params_.lambda1 * static_cast<double>(flow_.size()) +
         params_.beta * static_cast<double>(bottom_.size() + top_.size()) +
         params_.epsilon * static_cast<double>(perturb_.size());
}

std::optional<StepResult> Simulator::propose() {
  const double rates[kEventKinds] = {
      params_.lambda * static_cast<double>(vswap_candidates()),
      params_.lambda1 * static_cast<double>(flow_.size()),
      params_.beta * static_cast<double>(bottom_.size()),
      params_.beta * static_cast<double>(top_.size()),
      params_.epsilon * static_cast<double>(perturb_.size())};
  double total = 0.0;
  for (double r : rates) total += r;
  if (total <= 0.0) return std::nullopt;

  const double dt = rng_.exponential(total);
  double pick = rng_.uniform() * total;
  int kind = -1;
  for (int i = 0; i < kEventKinds; ++i) {
    if (rates[i] <= 0.0) continue;
    kind = i;
    if (pick < rates[i]) break;
    pick -= rates[i];
  }
  // rounding may push `pick` past the final bucket; `kind` already holds
  // the last kind with positive rate.

  const int W = params_.W;
  Event event{};
  switch (kind) {
    case 0: {
      const std::int64_t candidates = vswap_candidates();
      const std::int64_t id = include_noop_swaps_
                                  ? static_cast<std::int64_t>(rng_.below(candidates))
                                  : vswap_.items[rng_.below(vswap_.size())];
      event = {Event::Kind::VerticalSwap, static_cast<int>(id / W), static_cast<int>(id % W)};
      break;
    }
    case 1: {
      const std::int32_t id = flow_.items[rng_.below(flow_.size())];
      event = {Event::Kind::HorizontalFlow, id / W, id % W};
      break;
    }
    case 2:
      event = {Event::Kind::BottomFlip, 0, bottom_.items[rng_.below(bottom_.size())]};
      break;
    case 3:
      event = {Event::Kind::TopFlip, params_.S + 1, top_.items[rng_.below(top_.size())]};
      break;
    case 4: {
      const std::int32_t id = perturb_.items[rng_.below(perturb_.size())];
      event = {Event::Kind::Perturb, id / W, id % W};
      break;
    }
    default:
      return std::nullopt;  // unreachable: total > 0 implies a positive bucket
  }
  return StepResult{event, dt};
}

void Simulator::apply(const Event& event) {
  switch (event.kind) {
    case Event::Kind::VerticalSwap: {
      ++counts_.vertical_swap;
      const Velocity a = config_.at(event.k, event.x);
      const Velocity b = config_.at(event.k + 1, event.x);
      if (a == b) return;  // no-op variant only
      config_.set(event.k, event.x, b);
      config_.set(event.k + 1, event.x, a);
      const int da_hole = (b == kHole) - (a == kHole);
      const int da_vee = (b == kVee) - (a == kVee);
      n_hole_[event.k] += da_hole;
      n_hole_[event.k + 1] -= da_hole;
      n_vee_[event.k] += da_vee;
      n_vee_[event.k + 1] -= da_vee;
      refresh_cell(event.k, event.x);
      refresh_cell(event.k + 1, event.x);
      return;
    }
    case Event::Kind::HorizontalFlow: {
      ++counts_.horizontal_flow;
      const int xr = config_.right_of(event.x);
      config_.set(event.k, event.x, kHole);
      config_.set(event.k, xr, kVee);
      refresh_cell(event.k, event.x);
      refresh_cell(event.k, xr);
      return;  // same-layer move: layer counts unchanged
    }
    case Event::Kind::BottomFlip:
      ++counts_.bottom_flip;
      config_.set(0, event.x, kZero);
      --n_vee_[0];
      refresh_cell(0, event.x);
      return;
    case Event::Kind::TopFlip:
      ++counts_.top_flip;
      config_.set(params_.S + 1, event.x, kVee);
      ++n_vee_[params_.S + 1];
      refresh_cell(params_.S + 1, event.x);
      return;
    case Event::Kind::Perturb: {
      ++counts_.perturb;
      const Velocity v = flipped(config_.at(event.k, event.x));
      config_.set(event.k, event.x, v);
      n_vee_[event.k] += (v == kVee) ? 1 : -1;
      refresh_cell(event.k, event.x);
      return;
    }
  }
}

void Simulator::commit(const StepResult& result) {
  time_ += result.dt;
  apply(result.event);
}

std::optional<StepResult> Simulator::step() {
  auto proposal = propose();
  if (proposal) commit(*proposal);
  return proposal;
}

bool Simulator::advance_to(double t) {
  while (true) {
    auto proposal = propose();
    if (!proposal) {
      time_ = std::max(time_, t);
      return false;
    }
    if (time_ + proposal->dt > t) {
      // next event falls past t; by memorylessness the discarded waiting
      // time does not bias later steps
      time_ = t;
      return true;
    }
    commit(*proposal);
  }
}

std::optional<StepResult> step(Configuration& config, const Params& params, Rng& rng) {
  Simulator sim(config, params, rng);
  auto result = sim.step();
  if (result) config = sim.config();
  rng = sim.rng_state();
  return result;
}

SimReport run(const Configuration& initial, const Params& params, double t_burn,
              double t_measure, std::uint64_t seed, const RunOptions& options) {
  params.validate();
  if (!(t_burn >= 0.0) || !(t_measure >= 0.0))
    throw std::invalid_argument("kmc: t_burn and t_measure must be >= 0");
  if (options.batches < 2) throw std::invalid_argument("kmc: need at least 2 batches");

  Simulator sim(initial, params, Rng(seed), options.include_noop_swaps);

  SimReport report;
  report.params = params;
  report.t_burn = t_burn;
  report.t_measure = t_measure;
  report.seed = seed;
  report.replicas = 1;
  report.mean_particles = static_cast<double>(sim.particles());

  sim.advance_to(t_burn);

  if (t_measure <= 0.0) {
    report.events = sim.event_counts();
    report.measured = false;
    return report;
  }

  const int layers = params.layers();
  const int batches = options.batches;
  const double batch_dt = t_measure / batches;
  const double W = static_cast<double>(params.W);

  // Lazy time-weighted accumulation: each layer is integrated only when
  // its counts change or at a batch boundary.
  std::vector<double> acc_hole(layers, 0.0), acc_vee(layers, 0.0), stamp(layers, t_burn);
  Eigen::ArrayXXd batch_hole(batches, layers), batch_vee(batches, layers);

  auto flush_layer = [&](int k, double now) {
    acc_hole[k] += sim.layer_holes()[k] * (now - stamp[k]);
    acc_vee[k] += sim.layer_vees()[k] * (now - stamp[k]);
    stamp[k] = now;
  };

  int batch = 0;
  double boundary = t_burn + batch_dt;
  while (batch < batches) {
    auto proposal = sim.propose();
    const double event_time =
        proposal ? sim.time() + proposal->dt : std::numeric_limits<double>::infinity();
    while (batch < batches && event_time > boundary) {
      for (int k = 0; k < layers; ++k) flush_layer(k, boundary);
      for (int k = 0; k < layers; ++k) {
        batch_hole(batch, k) = acc_hole[k] / (batch_dt * W);
        batch_vee(batch, k) = acc_vee[k] / (batch_dt * W);
        acc_hole[k] = 0.0;
        acc_vee[k] = 0.0;
      }
      ++batch;
      boundary = t_burn + (batch + 1) * batch_dt;
    }
    // an absorbing state freezes the counts, so the loop above has already
    // recorded every remaining batch in that case
    if (batch >= batches || !proposal) break;
    switch (proposal->event.kind) {
      case Event::Kind::VerticalSwap:
        flush_layer(proposal->event.k, event_time);
        flush_layer(proposal->event.k + 1, event_time);
        break;
      case Event::Kind::HorizontalFlow:
        break;  // layer counts unchanged
      case Event::Kind::BottomFlip:
        flush_layer(0, event_time);
        break;
      case Event::Kind::TopFlip:
        flush_layer(layers - 1, event_time);
        break;
      case Event::Kind::Perturb:
        flush_layer(proposal->event.k, event_time);
        break;
    }
    sim.commit(*proposal);
  }

  report.events = sim.event_counts();
  report.measured = true;
  report.p_hole.resize(layers);
  report.p_zero.resize(layers);
  report.p_v.resize(layers);
  report.se_hole.resize(layers);
  report.se_zero.resize(layers);
  report.se_v.resize(layers);

  const double B = static_cast<double>(batches);
  for (int k = 0; k < layers; ++k) {
    const auto hole = batch_hole.col(k);
    const auto vee = batch_vee.col(k);
    const Eigen::ArrayXd zero = 1.0 - hole - vee;
    const double mh = hole.mean();
    const double mv = vee.mean();
    const double mz = zero.mean();
    report.p_hole(k) = mh;
    report.p_v(k) = mv;
    report.p_zero(k) = mz;
    report.se_hole(k) = std::sqrt((hole - mh).square().sum() / (B - 1.0) / B);
    report.se_v(k) = std::sqrt((vee - mv).square().sum() / (B - 1.0) / B);
    report.se_zero(k) = std::sqrt((zero - mz).square().sum() / (B - 1.0) / B);
  }
  return report;
}

SimReport merge_reports(const std::vector<SimReport>& reports, std::uint64_t base_seed) {
  if (reports.empty()) throw std::invalid_argument("kmc: cannot merge zero reports");
  const SimReport& first = reports.front();
  for (const SimReport& r : reports) {
    if (!(r.params == first.params) || r.t_burn != first.t_burn ||
        r.t_measure != first.t_measure || r.measured != first.measured)
      throw std::invalid_argument("kmc: merged reports must share params and window");
  }

  SimReport merged;
  merged.params = first.params;
  merged.t_burn = first.t_burn;
  merged.t_measure = first.t_measure;
  merged.seed = base_seed;
  merged.measured = first.measured;
  merged.replicas = 0;
  for (const SimReport& r : reports) {
    merged.replicas += r.replicas;
    merged.mean_particles += r.mean_particles * r.replicas;
    merged.events.vertical_swap += r.events.vertical_swap;
    merged.events.horizontal_flow += r.events.horizontal_flow;
    merged.events.bottom_flip += r.events.bottom_flip;
    merged.events.top_flip += r.events.top_flip;
    merged.events.perturb += r.events.perturb;
  }
  merged.mean_particles /= merged.replicas;
  if (!merged.measured) return merged;

  const int layers = first.params.layers();
  const auto R = static_cast<double>(reports.size());
  merged.p_hole = Eigen::ArrayXd::Zero(layers);
  merged.p_zero = Eigen::ArrayXd::Zero(layers);
  merged.p_v = Eigen::ArrayXd::Zero(layers);
  for (const SimReport& r : reports) {
    merged.p_hole += r.p_hole;
    merged.p_zero += r.p_zero;
    merged.p_v += r.p_v;
  }
  merged.p_hole /= R;
  merged.p_zero /= R;
  merged.p_v /= R;

  if (reports.size() >= 2) {
    // between-replica scatter of the replica means
    Eigen::ArrayXd vh = Eigen::ArrayXd::Zero(layers), vz = vh, vv = vh;
    for (const SimReport& r : reports) {
      vh += (r.p_hole - merged.p_hole).square();
      vz += (r.p_zero - merged.p_zero).square();
      vv += (r.p_v - merged.p_v).square();
    }
    merged.se_hole = (vh / (R - 1.0) / R).sqrt();
    merged.se_zero = (vz / (R - 1.0) / R).sqrt();
    merged.se_v = (vv / (R - 1.0) / R).sqrt();
  } else {
    merged.se_hole = first.se_hole;
    merged.se_zero = first.se_zero;
    merged.se_v = first.se_v;
  }
  return merged;
}

}  // namespace couette::kmc
