#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nnpde/losses.hpp"
#include "nnpde/metrics.hpp"
#include "nnpde/model.hpp"
#include "nnpde/net.hpp"
#include "nnpde/optim.hpp"
#include "nnpde/problems.hpp"

namespace nnpde {

enum class Method { pinn, drm, vpinn, wan };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct EarlyStop {
  enum class Kind { none, fixed, patience };
  Kind kind = Kind::none;
  long at = 0;            // fixed: stop once this (outer) iteration is logged
  long patience = 0;      // patience: logged rows without improvement
  double min_delta = 0.0; // improvement must exceed this

  static EarlyStop fixed_at(long iteration) { return {Kind::fixed, iteration, 0, 0.0}; }
  static EarlyStop with_patience(long k, double min_delta = 0.0) { return {Kind::patience, 0, k, min_delta}; }
};

struct WanSettings {
  NetworkArch phi_arch;
  int u_steps = 3;
  int phi_steps = 1;
  bool phi_first = true;
  LRSchedule phi_lr{0.04, {}};
  OptimizerConfig phi_optimizer{OptimizerKind::adagrad};
};

struct VpinnSettings {
  int mesh_nodes = 1264;
  int mc_per_triangle = 16;
  NetworkArch aux_arch;           // lift and cutoff networks
  Eigen::Index aux_points = 2000; // fitting points for each auxiliary network
  PretrainOptions pretrain;
};

struct TrainConfig {
  Method method = Method::pinn;
  BenchmarkId problem = BenchmarkId::ex2d;
  NetworkArch arch;
  Eigen::Index n = 4000;  // interior samples
  Eigen::Index m = 1000;  // boundary samples
  double alpha = 1000.0;
  long iterations = 5000;  // outer iterations for WAN
  LRSchedule lr{1e-4, {}};
  OptimizerConfig optimizer;
  Precision precision = Precision::float32;
  std::uint64_t seed = 0;
  long val_every = 10;
  Eigen::Index val_size = kValidationSize;
  std::uint64_t val_seed = kValidationSeed;
  EarlyStop stop;
  bool wall_time = true;  // false writes 0 seconds, making records bit-reproducible
  std::optional<WanSettings> wan;
  std::optional<VpinnSettings> vpinn;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct TrainRow {
  long iter = 0;
  double loss = 0.0;
  double loss_interior = 0.0;
  double loss_boundary = 0.0;
  double val_rel_l2 = 0.0;
  double seconds = 0.0;
};

struct TrainRecord {
  std::vector<TrainRow> rows;

  /// Row with the smallest validation error (first one on ties).
  const TrainRow& best() const;
  void write_csv(std::ostream& os) const;
  static TrainRecord read_csv(std::istream& is);
};

inline constexpr const char* kRecordHeader = "iter,loss,loss_interior,loss_boundary,val_rel_l2,seconds";
void write_csv_row(std::ostream& os, const TrainRow& row);

enum class StopDecision { go, stop };

/// Decision after the last row of `record` was appended.
StopDecision early_stop_rule(const TrainRecord& record, const EarlyStop& rule);

struct TrainSinks {
  std::function<void(const TrainRow&)> on_row;
  std::function<void(const std::string&)> on_note;
};

struct TrainResult {
  NetworkParams<double> params;
  std::optional<NetworkParams<double>> phi_params;
  TrainRecord record;
  /// The trained field with its boundary construction, on a frozen parameter copy.
  std::shared_ptr<Model> solution;
  bool aborted = false;
  std::string abort_reason;
  long iterations_run = 0;
};

/// Fitting target for the L-shape VPINN cutoff network: (1 - x^2)(1 - y^2) rho with
/// rho = y, r, -x on the first, second and third quadrants. Zero on the boundary.
double l_shape_cutoff_target(double x, double y);

TrainResult train(const TrainConfig& config, const PDEProblem& problem, const TrainSinks& sinks = {});

}  // namespace nnpde
