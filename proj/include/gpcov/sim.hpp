#ifndef GPCOV_SIM_HPP
#define GPCOV_SIM_HPP

// Round-based simulation of decentralized GP-UCB coverage. Each round runs
// as a sequence of barriers: partition, hyperparameter consensus, sampling,
// periodic inducing-set refresh, motion. Agents exchange data only through
// two message types sent along edges of the current neighbor graph.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gpcov/common.hpp"
#include "gpcov/consensus.hpp"
#include "gpcov/control.hpp"
#include "gpcov/cost.hpp"
#include "gpcov/density.hpp"
#include "gpcov/geometry.hpp"
#include "gpcov/gp.hpp"
#include "gpcov/scenario.hpp"

namespace gpcov {

enum class InitKind { UniformRandom, Cluster, Explicit };

struct InitialPositions {
  InitKind kind = InitKind::UniformRandom;
  /// Cluster corner: 0 = (0, 0), 1 = (W, 0), 2 = (0, H), 3 = (W, H).
  int corner = 0;
  /// Cluster box side as a fraction of the domain sides.
  double fraction = 0.15;
  std::vector<Point> points;
};

struct GpPrior {
  /// World units; <= 0 selects 0.25 * min(world width, world height).
  double lengthscale = 0.0;
  /// <= 0 selects (max phi)^2.
  double signal_variance = 0.0;
  double prior_mean = 0.0;
  /// Agent i starts with each positive hyperparameter multiplied by
  /// exp(spread * u_i), u_i uniform in [-1, 1].
  double spread = 0.25;
  /// Likelihood-ascent iterations after each refresh; 0 disables fitting.
  int refit_steps = 0;
};

struct SimConfig {
  Domain domain{960, 540};
  int n_agents = 4;
  ScenarioSpec scenario;
  std::uint64_t seed = 1;
  int rounds = 500;
  /// Inducing-set refresh period T.
  int update_period = 5;
  /// Inducing-set capacity M.
  int capacity = 60;
  QuadratureSpec quadrature;
  OptimizerSettings<double> optimizer;
  ConsensusConfig consensus;
  /// Measurement noise std; < 0 selects 0.05 * max phi.
  double noise_sigma = -1.0;
  InitialPositions init;
  GpPrior gp;
  /// Also run the ground-truth Lloyd baseline (batch runs).
  bool baseline = false;
  /// Lloyd step fraction toward the centroid, in (0, 1].
  double lloyd_gain = 0.5;
  /// Pixel stride of the RMSE metric grid; <= 0 picks one giving ~1024 points.
  int metric_stride = 0;

  void validate() const;
};

struct TraceRow {
  int step = 0;
  double true_cost = 0.0;
  double rmse = 0.0;
  long messages = 0;
  std::vector<Point> positions;
  std::vector<int> inducing_counts;
};

struct SimTrace {
  int n_agents = 0;
  std::vector<TraceRow> rows;
};

enum class MessageKind { Hyperparams, Inducing };

struct MessageRecord {
  int round;
  int from;
  int to;
  MessageKind kind;
  /// Number of scalars (hyperparameters) or samples carried.
  int payload;
};

/// Who reads agent state, and through what path.
enum class Channel { Own, Geometry, HyperparamMessage, InducingMessage, Observer };
enum class Field { Position, Hyperparams, Inducing, Buffer, Optimizer, Model };

inline constexpr int kObserver = -1;
inline constexpr int kEngine = -2;

struct Access {
  int reader;
  Channel channel;
};

struct AccessRecord {
  int reader;
  int owner;
  Channel channel;
  Field field;
};

/// Tracks reads of agent state. A read is sanctioned when it is the agent's
/// own, made by the metrics observer, or made through the partition geometry
/// (positions), a hyperparameter message or an inducing-set message.
class AccessLog {
public:
  void record(const Access &access, int owner, Field field);
  static bool sanctioned(const Access &access, int owner, Field field);

  const std::vector<AccessRecord> &violations() const { return violations_; }
  long total() const { return total_; }
  long cross_agent() const { return cross_agent_; }

private:
  std::vector<AccessRecord> violations_;
  long total_ = 0;
  long cross_agent_ = 0;
};

/// One agent's private state. Every read goes through an Access tag.
class Agent {
public:
  Agent(int id, Point position, const Hyperparams<double> &hyper, const OptimizerSettings<double> &opt,
        std::uint64_t rng_seed, AccessLog *log);

  int id() const { return id_; }

  const Point &position(const Access &a) const;
  const Hyperparams<double> &hyper(const Access &a) const;
  const SampleList<double> &inducing(const Access &a) const;
  const SampleBuffer<double> &buffer(const Access &a) const;
  const OptimizerState<double> &optimizer(const Access &a) const;
  const SparseGP<double> &model(const Access &a) const;

  // Mutators are invoked only on the agent's own behalf.
  void set_hyper(const Hyperparams<double> &h);
  void observe(const DensityField &field, double noise_sigma);
  void refresh(std::span<const SampleList<double>> received, std::size_t capacity, int refit_steps);
  void replace_inducing(SampleList<double> inducing);
  /// Cost report on the given cell and motion update. Returns the report.
  CellCostReport<double> move(std::span<const int> cell, const QuadratureSpec &quad, const Domain &domain);

private:
  void touch(const Access &a, Field f) const;
  void rebuild_model();

  int id_;
  Point pos_;
  Hyperparams<double> hyper_;
  SparseGP<double> gp_;
  SampleBuffer<double> buffer_;
  OptimizerState<double> opt_;
  std::mt19937_64 rng_;
  AccessLog *log_;
  bool model_stale_ = false;
};

class Simulator {
public:
  explicit Simulator(SimConfig config);

  /// Executes one full round and appends a trace row.
  void step();
  /// Runs the remaining rounds and returns the trace.
  const SimTrace &run();

  int round() const { return round_; }
  const SimConfig &config() const { return config_; }
  const DensityField &density() const { return density_; }
  const SimTrace &trace() const { return trace_; }
  const std::vector<MessageRecord> &messages() const { return messages_; }
  const AccessLog &access_log() const { return log_; }
  /// Neighbor sets in effect during each completed round.
  const std::vector<NeighborSets> &round_graphs() const { return graphs_; }
  /// Wall time of the refresh phase per completed round (0 on other rounds).
  const std::vector<double> &refresh_seconds() const { return refresh_seconds_; }
  double noise_sigma() const { return noise_sigma_; }

  /// Observer (metrics/test) view of agent state; logged as observer reads.
  const Agent &agent(int i) const { return agents_.at(i); }
  Access observer() const { return {kObserver, Channel::Observer}; }

  /// Test hook: replaces an agent's inducing set before a run.
  void seed_inducing(int agent, SampleList<double> inducing);

  /// Arbitrary access path, used by the audit tests to provoke violations.
  AccessLog &mutable_access_log() { return log_; }

private:
  std::vector<Point> positions_for_geometry() const;
  double rmse() const;

  SimConfig config_;
  DensityField density_;
  double noise_sigma_ = 0.0;
  AccessLog log_;
  std::vector<Agent> agents_;
  VoronoiPartition partition_;
  Points2<double> metric_points_;
  Vector<double> metric_truth_;
  int round_ = 0;
  SimTrace trace_;
  std::vector<MessageRecord> messages_;
  std::vector<NeighborSets> graphs_;
  std::vector<double> refresh_seconds_;
};

/// Initial agent positions for a config (shared by the GP method and the
/// Lloyd baseline so both start from the same configuration).
std::vector<Point> initial_positions(const SimConfig &config);

/// Per-agent initial hyperparameters.
std::vector<Hyperparams<double>> initial_hyperparams(const SimConfig &config, const DensityField &density);

SimTrace run(const SimConfig &config);

/// Ground-truth Lloyd descent: p <- p + gain * (C - p), capped at v_max and
/// projected onto the domain.
SimTrace run_lloyd_baseline(const SimConfig &config);

/// Deterministic seed for an independent stream (agent id or purpose tag).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

} // namespace gpcov

#endif // GPCOV_SIM_HPP
