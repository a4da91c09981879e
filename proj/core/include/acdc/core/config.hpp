#pragma once

#include "acdc/core/schedule.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace acdc {

enum class OperatorKind {
  Identity,
  RandomMask,
  BoxMask,
  Convolution,
  Decimation,
  GaussianProjection,
  Hdr,
  PhaseRetrieval,
};

enum class KernelType { Gaussian, Motion, Inline };
enum class SolverMethod { Admm, DiffPir, Snore };
enum class DenoiserBackend { Tweedie, Ode };
enum class OdeIntegrator { Euler, Heun };

struct KernelSpec {
  KernelType type = KernelType::Gaussian;
  int taps = 9;
  /// 61-tap / std-3 blur of the image-scale setup shrunk to 9 taps.
  double std = 3.0 * 9.0 / 61.0;
  std::vector<double> values;  ///< row-major, used when type == Inline
  int rows = 1;                ///< > 1 only for inline 2-D kernels
};

/// Forward model and measurement noise.
struct ProblemSpec {
  OperatorKind kind = OperatorKind::Identity;
  int dim = 16;     ///< d
  int height = 1;   ///< > 1 treats the signal as a height x (dim / height) image
  int measurements = 8;        ///< rows of the dense projection
  double keep_fraction = 0.3;  ///< random mask
  int box_start = 0;
  int box_length = 0;
  KernelSpec kernel;
  int factor = 2;          ///< decimation factor
  double hdr_scale = 2.0;  ///< HDR gain before clipping
  int oversampling = 2;    ///< phase retrieval zero-padding factor
  double noise_std = 0.05;  ///< sigma_n
};

/// Isotropic Gaussian mixture in the JSON layout {weights, means, stds}.
struct PriorSpec {
  std::vector<double> weights{1.0};
  std::vector<std::vector<double>> means;
  std::vector<double> stds{1.0};
};

struct InnerSolverSpec {
  int max_iters = 1000;
  double learning_rate = 0.1;
  double delta_tol = 0.1;  ///< Adam stops after `patience` consecutive loss increases > delta_tol
  int patience = 3;
  double grad_tol = 0.0;   ///< optional early exit on small gradients, 0 disables
  double cg_tol = 1e-8;
};

struct SolverSpec {
  SolverMethod method = SolverMethod::Admm;
  double rho0 = 100.0;
  bool adaptive_rho = false;
  double gamma_rho = 1.2;
  double eta_beta = 0.9;
  DenoiserBackend backend = DenoiserBackend::Tweedie;
  int ode_steps = 10;
  OdeIntegrator ode_integrator = OdeIntegrator::Euler;
  bool zero_noise = false;
  InnerSolverSpec inner;
  double zeta = 0.3;          ///< DiffPIR noise mixing
  double mu_hqs = 0.0;        ///< DiffPIR coupling weight, 0 means rho0
  double snore_step = 1e-3;   ///< delta of the SNORE update
  double snore_reg = 1.0;     ///< eta of the SNORE update
  bool record_iterates = false;
};

struct DiagnosticsSpec {
  bool bounds = true;
  bool smoothness = true;
  bool coercivity = true;
  bool nonexpansiveness = true;
  bool boundedness = true;
  int n_pairs = 500;
  std::optional<double> sigma;  ///< smoothing level for the smoothness check
  std::vector<int> points;      ///< schedule indices for the Monte-Carlo checks
  std::vector<double> coercivity_scales{1.0, 1.5, 2.0, 3.0};
  double domain_diameter = 0.0;  ///< D of L = M D + S; 0 derives it from the prior
};

struct OutputSpec {
  std::string dir = "acdc_out";
  bool record_timing = false;  ///< fill the ms column; off keeps CSVs byte-reproducible
  DiagnosticsSpec diagnostics;
};

struct ExperimentConfig {
  ProblemSpec problem;
  PriorSpec prior;
  NoiseSchedule schedule;
  SolverSpec solver;
  std::uint64_t seed = 0;
  OutputSpec output;

  /// Cross-field checks; throws ConfigError.
  void validate() const;
};

/// Parses the JSON document. Unknown keys are rejected at every level.
ExperimentConfig parse_config(std::string_view json_text);
/// Canonical pretty-printed JSON; parse_config(dump_config(c)) == c.
std::string dump_config(const ExperimentConfig& config);

/// 64-bit FNV-1a of the canonical dump.
std::uint64_t config_hash(const ExperimentConfig& config);

std::string to_string(OperatorKind kind);
std::string to_string(SolverMethod method);
std::string to_string(DenoiserBackend backend);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace acdc
