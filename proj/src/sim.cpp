#include "gpcov/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace gpcov {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t kInitStream = 0x1717;
constexpr std::uint64_t kHyperStream = 0x4242;
constexpr std::uint64_t kAgentStreamBase = 0x10000;

} // namespace

void SimConfig::validate() const {
  if (domain.width < 1 || domain.height < 1 || !(domain.cell_size > 0.0))
    throw ConfigError("invalid domain");
  if (n_agents < 1)
    throw ConfigError("n_agents must be at least 1");
  if (rounds < 0)
    throw ConfigError("rounds must be non-negative");
  if (update_period < 1)
    throw ConfigError("update_period (T) must be at least 1");
  if (capacity < 1)
    throw ConfigError("capacity (M) must be at least 1");
  quadrature.validate();
  optimizer.validate();
  if (!(consensus.alpha > 0.0))
    throw ConfigError("consensus alpha must be positive");
  if (!(lloyd_gain > 0.0 && lloyd_gain <= 1.0))
    throw ConfigError("lloyd_gain must lie in (0, 1]");
  if (gp.refit_steps < 0)
    throw ConfigError("refit_steps must be non-negative");
  if (!(gp.spread >= 0.0))
    throw ConfigError("gp spread must be non-negative");
  if (init.kind == InitKind::Explicit && static_cast<int>(init.points.size()) != n_agents)
    throw ConfigError("explicit initial positions must list one point per agent");
  if (init.kind == InitKind::Cluster && (init.corner < 0 || init.corner > 3))
    throw ConfigError("cluster corner must be 0..3");
  if (init.kind == InitKind::Cluster && !(init.fraction > 0.0 && init.fraction <= 1.0))
    throw ConfigError("cluster fraction must lie in (0, 1]");
}

// ---------------------------------------------------------------------------
// Access tracking

bool AccessLog::sanctioned(const Access &access, int owner, Field field) {
  if (access.reader == owner || access.reader == kObserver)
    return true;
  switch (access.channel) {
  case Channel::Geometry:
    return field == Field::Position;
  case Channel::HyperparamMessage:
    return field == Field::Hyperparams;
  case Channel::InducingMessage:
    return field == Field::Inducing;
  default:
    return false;
  }
}

void AccessLog::record(const Access &access, int owner, Field field) {
  ++total_;
  if (access.reader != owner && access.reader != kObserver)
    ++cross_agent_;
  if (!sanctioned(access, owner, field))
    violations_.push_back({access.reader, owner, access.channel, field});
}

// ---------------------------------------------------------------------------
// Agent

Agent::Agent(int id, Point position, const Hyperparams<double> &hyper, const OptimizerSettings<double> &opt,
             std::uint64_t rng_seed, AccessLog *log)
    : id_(id), pos_(std::move(position)), hyper_(hyper), gp_(hyper, {}), rng_(rng_seed), log_(log) {
  opt_.settings = opt;
}

void Agent::touch(const Access &a, Field f) const {
  if (log_)
    log_->record(a, id_, f);
}

const Point &Agent::position(const Access &a) const {
  touch(a, Field::Position);
  return pos_;
}

const Hyperparams<double> &Agent::hyper(const Access &a) const {
  touch(a, Field::Hyperparams);
  return hyper_;
}

const SampleList<double> &Agent::inducing(const Access &a) const {
  touch(a, Field::Inducing);
  return gp_.inducing();
}

const SampleBuffer<double> &Agent::buffer(const Access &a) const {
  touch(a, Field::Buffer);
  return buffer_;
}

const OptimizerState<double> &Agent::optimizer(const Access &a) const {
  touch(a, Field::Optimizer);
  return opt_;
}

const SparseGP<double> &Agent::model(const Access &a) const {
  touch(a, Field::Model);
  return gp_;
}

void Agent::rebuild_model() { gp_ = SparseGP<double>(hyper_, gp_.inducing()); }

void Agent::set_hyper(const Hyperparams<double> &h) {
  hyper_ = h;
  rebuild_model();
}

void Agent::observe(const DensityField &field, double noise_sigma) {
  buffer_.append(pos_, sample_density(field, pos_, noise_sigma, rng_));
}

void Agent::refresh(std::span<const SampleList<double>> received, std::size_t capacity, int refit_steps) {
  const SampleList<double> merged =
      merge_inducing<double>(gp_.inducing(), buffer_.entries, received);
  gp_ = SparseGP<double>(hyper_, greedy_select<double>(merged, capacity, hyper_));
  if (refit_steps > 0) {
    hyper_ = refit_hyperparams(gp_, refit_steps);
    rebuild_model();
  }
  buffer_.clear();
}

void Agent::replace_inducing(SampleList<double> inducing) {
  gp_ = SparseGP<double>(hyper_, std::move(inducing));
}

CellCostReport<double> Agent::move(std::span<const int> cell, const QuadratureSpec &quad,
                                   const Domain &domain) {
  const CellCostReport<double> report = cell_cost_report<double>(cell, pos_, gp_, quad, domain);
  opt_ = observe_sigma(opt_, report.std);
  StepResult<double> r = step<double>(pos_, report.gradient(quad.beta), opt_, domain.bounds());
  pos_ = r.position;
  opt_ = std::move(r.state);
  return report;
}

// ---------------------------------------------------------------------------
// Initialization

std::vector<Point> initial_positions(const SimConfig &config) {
  const Domain &d = config.domain;
  std::mt19937_64 rng(derive_seed(config.seed, kInitStream));
  std::vector<Point> pts;
  switch (config.init.kind) {
  case InitKind::UniformRandom: {
    std::uniform_real_distribution<double> ux(0.0, d.world_width());
    std::uniform_real_distribution<double> uy(0.0, d.world_height());
    for (int i = 0; i < config.n_agents; ++i) {
      const double x = ux(rng);
      pts.emplace_back(x, uy(rng));
    }
    break;
  }
  case InitKind::Cluster: {
    const double bw = config.init.fraction * d.world_width();
    const double bh = config.init.fraction * d.world_height();
    const double x0 = (config.init.corner & 1) ? d.world_width() - bw : 0.0;
    const double y0 = (config.init.corner & 2) ? d.world_height() - bh : 0.0;
    std::uniform_real_distribution<double> ux(x0, x0 + bw);
    std::uniform_real_distribution<double> uy(y0, y0 + bh);
    for (int i = 0; i < config.n_agents; ++i) {
      const double x = ux(rng);
      pts.emplace_back(x, uy(rng));
    }
    break;
  }
  case InitKind::Explicit:
    pts = config.init.points;
    break;
  }
  for (const auto &p : pts) {
    if (!d.contains(p))
      throw DomainError("initial position outside domain");
  }
  return pts;
}

std::vector<Hyperparams<double>> initial_hyperparams(const SimConfig &config, const DensityField &density) {
  const Domain &d = config.domain;
  const double phi_max = density.max();
  const double lengthscale =
      config.gp.lengthscale > 0.0 ? config.gp.lengthscale : 0.25 * std::min(d.world_width(), d.world_height());
  const double signal =
      config.gp.signal_variance > 0.0 ? config.gp.signal_variance : std::max(phi_max * phi_max, 1e-12);
  const double noise_sigma = config.noise_sigma >= 0.0 ? config.noise_sigma : 0.05 * phi_max;
  const double noise = std::max(noise_sigma * noise_sigma, 1e-6 * signal);

  std::mt19937_64 rng(derive_seed(config.seed, kHyperStream));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Hyperparams<double>> out;
  for (int i = 0; i < config.n_agents; ++i) {
    Hyperparams<double> h;
    h.lengthscale = lengthscale * std::exp(config.gp.spread * u(rng));
    h.signal_variance = signal * std::exp(config.gp.spread * u(rng));
    h.noise_variance = noise * std::exp(config.gp.spread * u(rng));
    h.prior_mean = config.gp.prior_mean;
    h.validate();
    out.push_back(h);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulator

Simulator::Simulator(SimConfig config) : config_(std::move(config)) {
  config_.validate();
  density_ = build_scenario(config_.scenario, config_.domain);
  noise_sigma_ = config_.noise_sigma >= 0.0 ? config_.noise_sigma : 0.05 * density_.max();

  const std::vector<Point> start = initial_positions(config_);
  const std::vector<Hyperparams<double>> hypers = initial_hyperparams(config_, density_);
  agents_.reserve(config_.n_agents);
  for (int i = 0; i < config_.n_agents; ++i)
    agents_.emplace_back(i, start[i], hypers[i], config_.optimizer,
                         derive_seed(config_.seed, kAgentStreamBase + static_cast<std::uint64_t>(i)), &log_);
  partition_ = compute_partition(positions_for_geometry(), config_.domain);

  const Domain &d = config_.domain;
  int stride = config_.metric_stride;
  if (stride <= 0)
    stride = std::max(1, static_cast<int>(std::ceil(std::sqrt(d.pixel_count() / 1024.0))));
  std::vector<int> idx;
  for (int y = stride / 2; y < d.height; y += stride)
    for (int x = stride / 2; x < d.width; x += stride)
      idx.push_back(y * d.width + x);
  metric_points_.resize(2, static_cast<Eigen::Index>(idx.size()));
  metric_truth_.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    metric_points_.col(static_cast<Eigen::Index>(k)) = d.center(idx[k]);
    metric_truth_(static_cast<Eigen::Index>(k)) = density_.values()[idx[k]];
  }
  trace_.n_agents = config_.n_agents;
}

std::vector<Point> Simulator::positions_for_geometry() const {
  std::vector<Point> pts;
  pts.reserve(agents_.size());
  for (const auto &a : agents_)
    pts.push_back(a.position({kEngine, Channel::Geometry}));
  return pts;
}

void Simulator::seed_inducing(int agent, SampleList<double> inducing) {
  agents_.at(agent).replace_inducing(std::move(inducing));
}

double Simulator::rmse() const {
  double sum = 0.0;
  for (const auto &a : agents_) {
    const Vector<double> mu = a.model(observer()).mean(metric_points_);
    sum += std::sqrt((mu - metric_truth_).squaredNorm() / std::max<Eigen::Index>(1, mu.size()));
  }
  return sum / static_cast<double>(agents_.size());
}

void Simulator::step() {
  const int t = round_;
  const int n = config_.n_agents;
  const VoronoiPartition &part = partition_;
  graphs_.push_back(part.neighbors);
  long sent = 0;

  // Hyperparameter consensus over the current neighbor graph.
  if (n > 1 && part.edge_count() > 0) {
    ConsensusConfig cc = config_.consensus;
    if (!(cc.alpha < consensus_gain_bound(part.laplacian)))
      cc.alpha = 1.0 / (part.laplacian.diagonal().maxCoeff() + 1);
    std::vector<std::vector<Hyperparams<double>>> inbox(n);
    for (int i = 0; i < n; ++i) {
      for (int j : part.neighbors[i]) {
        inbox[i].push_back(agents_[j].hyper({i, Channel::HyperparamMessage}));
        messages_.push_back({t, j, i, MessageKind::Hyperparams, kHyperChannels});
        ++sent;
      }
    }
    std::vector<Hyperparams<double>> next;
    next.reserve(n);
    for (int i = 0; i < n; ++i) {
      const Hyperparams<double> &own = agents_[i].hyper({i, Channel::Own});
      bool log_noise = own.noise_variance > 0.0;
      for (const auto &h : inbox[i])
        log_noise = log_noise && h.noise_variance > 0.0;
      next.push_back(local_consensus_update<double>(own, inbox[i], cc, log_noise));
    }
    for (int i = 0; i < n; ++i)
      agents_[i].set_hyper(next[i]);
  }

  for (auto &a : agents_)
    a.observe(density_, noise_sigma_);

  double refresh_time = 0.0;
  if (t % config_.update_period == 0) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::vector<SampleList<double>>> inbox(n);
    for (int i = 0; i < n; ++i) {
      for (int j : part.neighbors[i]) {
        inbox[i].push_back(agents_[j].inducing({i, Channel::InducingMessage}));
        messages_.push_back({t, j, i, MessageKind::Inducing, static_cast<int>(inbox[i].back().size())});
        ++sent;
      }
    }
    for (int i = 0; i < n; ++i)
      agents_[i].refresh(inbox[i], static_cast<std::size_t>(config_.capacity), config_.gp.refit_steps);
    refresh_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  refresh_seconds_.push_back(refresh_time);

  for (int i = 0; i < n; ++i)
    agents_[i].move(part.cells[i], config_.quadrature, config_.domain);

  partition_ = compute_partition(positions_for_geometry(), config_.domain);

  TraceRow row;
  row.step = t;
  row.positions.reserve(n);
  for (const auto &a : agents_) {
    row.positions.push_back(a.position(observer()));
    row.inducing_counts.push_back(static_cast<int>(a.inducing(observer()).size()));
  }
  row.true_cost = true_locational_cost(row.positions, partition_, density_.values(), config_.domain);
  row.rmse = rmse();
  row.messages = sent;
  trace_.rows.push_back(std::move(row));
  ++round_;
}

const SimTrace &Simulator::run() {
  while (round_ < config_.rounds)
    step();
  return trace_;
}

SimTrace run(const SimConfig &config) {
  Simulator sim(config);
  return sim.run();
}

SimTrace run_lloyd_baseline(const SimConfig &config) {
  config.validate();
  const DensityField density = build_scenario(config.scenario, config.domain);
  const Domain &d = config.domain;
  std::vector<Point> pos = initial_positions(config);
  const double v_max = config.optimizer.v_max;

  SimTrace trace;
  trace.n_agents = config.n_agents;
  VoronoiPartition part = compute_partition(pos, d);
  for (int t = 0; t < config.rounds; ++t) {
    for (int i = 0; i < config.n_agents; ++i) {
      const MassCentroid<double> mc = mass_centroid(part.cells[i], density.values(), d);
      Vector2<double> delta = config.lloyd_gain * (mc.centroid - pos[i]);
      const double len = delta.norm();
      if (len > v_max)
        delta *= v_max / len;
      pos[i] = d.bounds().clamp(pos[i] + delta);
    }
    part = compute_partition(pos, d);
    TraceRow row;
    row.step = t;
    row.positions = pos;
    row.inducing_counts.assign(config.n_agents, 0);
    row.true_cost = true_locational_cost(pos, part, density.values(), d);
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

} // namespace gpcov
