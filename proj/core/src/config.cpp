#include "acdc/core/config.hpp"

#include "acdc/core/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace acdc {

using nlohmann::json;

namespace {

template <class Enum>
struct EnumTable {
  std::vector<std::pair<Enum, const char*>> entries;

  const char* name(Enum e) const {
    for (const auto& [v, n] : entries)
      if (v == e) return n;
    return "?";
  }
  Enum parse(const std::string& s, const std::string& path) const {
    for (const auto& [v, n] : entries)
      if (s == n) return v;
    std::string allowed;
    for (const auto& [v, n] : entries) allowed += std::string(allowed.empty() ? "" : ", ") + n;
    throw ConfigError(path + ": unknown value '" + s + "' (expected one of: " + allowed + ")");
  }
};

const EnumTable<OperatorKind> kOperatorKinds{{
    {OperatorKind::Identity, "identity"},
    {OperatorKind::RandomMask, "random_mask"},
    {OperatorKind::BoxMask, "box_mask"},
    {OperatorKind::Convolution, "convolution"},
    {OperatorKind::Decimation, "decimation"},
    {OperatorKind::GaussianProjection, "gaussian_projection"},
    {OperatorKind::Hdr, "hdr"},
    {OperatorKind::PhaseRetrieval, "phase_retrieval"},
}};
const EnumTable<KernelType> kKernelTypes{{
    {KernelType::Gaussian, "gaussian"},
    {KernelType::Motion, "motion"},
    {KernelType::Inline, "inline"},
}};
const EnumTable<SolverMethod> kMethods{{
    {SolverMethod::Admm, "admm"},
    {SolverMethod::DiffPir, "diffpir"},
    {SolverMethod::Snore, "snore"},
}};
const EnumTable<DenoiserBackend> kBackends{{
    {DenoiserBackend::Tweedie, "tweedie"},
    {DenoiserBackend::Ode, "ode"},
}};
const EnumTable<OdeIntegrator> kIntegrators{{
    {OdeIntegrator::Euler, "euler"},
    {OdeIntegrator::Heun, "heun"},
}};
const EnumTable<ScheduleKind> kScheduleKinds{{
    {ScheduleKind::Linear, "linear"},
    {ScheduleKind::Constant, "constant"},
}};
const EnumTable<SigmaSRule> kSigmaSRules{{
    {SigmaSRule::InvSqrt, "inv_sqrt"},
    {SigmaSRule::Proportional, "proportional"},
}};

/// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(sub(key) + ": " + e.what());
    }
  }

  template <class Enum>
  void read_enum(const char* key, Enum& out, const EnumTable<Enum>& table) {
    std::string s;
    bool present = j_.contains(key);
    read(key, s);
    if (present) out = table.parse(s, sub(key));
  }

  void read_optional(const char* key, std::optional<double>& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    double v = 0.0;
    read(key, v);
    out = v;
  }

  bool has(const char* key) const { return j_.contains(key); }

  ObjectReader child(const char* key) {
    seen_.insert(key);
    return ObjectReader(j_.at(key), sub(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(sub(it.key()) + ": unknown key");
  }

private:
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_kernel(ObjectReader r, KernelSpec& k) {
  r.read_enum("type", k.type, kKernelTypes);
  r.read("taps", k.taps);
  r.read("std", k.std);
  r.read("values", k.values);
  r.read("rows", k.rows);
  r.finish();
}

void read_problem(ObjectReader r, ProblemSpec& p) {
  r.read_enum("kind", p.kind, kOperatorKinds);
  r.read("dim", p.dim);
  r.read("height", p.height);
  r.read("measurements", p.measurements);
  r.read("keep_fraction", p.keep_fraction);
  r.read("box_start", p.box_start);
  r.read("box_length", p.box_length);
  if (r.has("kernel")) read_kernel(r.child("kernel"), p.kernel);
  r.read("factor", p.factor);
  r.read("hdr_scale", p.hdr_scale);
  r.read("oversampling", p.oversampling);
  r.read("noise_std", p.noise_std);
  r.finish();
}

void read_prior(ObjectReader r, PriorSpec& p) {
  r.read("weights", p.weights);
  r.read("means", p.means);
  r.read("stds", p.stds);
  r.finish();
}

void read_schedule(ObjectReader r, NoiseSchedule& s) {
  r.read_enum("kind", s.kind, kScheduleKinds);
  r.read("sigma_max", s.sigma_max);
  r.read("sigma_min", s.sigma_min);
  r.read("W", s.window);
  r.read("tail", s.tail);
  r.read("J", s.dc_steps);
  r.read("eta_coeff", s.eta_coeff);
  r.read_enum("sigma_s_rule", s.sigma_s_rule, kSigmaSRules);
  r.read("sigma_s_coeff", s.sigma_s_coeff);
  r.read("eta_prob", s.eta_prob);
  r.finish();
}

void read_inner(ObjectReader r, InnerSolverSpec& s) {
  r.read("max_iters", s.max_iters);
  r.read("learning_rate", s.learning_rate);
  r.read("delta_tol", s.delta_tol);
  r.read("patience", s.patience);
  r.read("grad_tol", s.grad_tol);
  r.read("cg_tol", s.cg_tol);
  r.finish();
}

void read_solver(ObjectReader r, SolverSpec& s) {
  r.read_enum("method", s.method, kMethods);
  r.read("rho0", s.rho0);
  r.read("adaptive_rho", s.adaptive_rho);
  r.read("gamma_rho", s.gamma_rho);
  r.read("eta_beta", s.eta_beta);
  r.read_enum("backend", s.backend, kBackends);
  r.read("ode_steps", s.ode_steps);
  r.read_enum("ode_integrator", s.ode_integrator, kIntegrators);
  r.read("zero_noise", s.zero_noise);
  if (r.has("inner")) read_inner(r.child("inner"), s.inner);
  r.read("zeta", s.zeta);
  r.read("mu_hqs", s.mu_hqs);
  r.read("snore_step", s.snore_step);
  r.read("snore_reg", s.snore_reg);
  r.read("record_iterates", s.record_iterates);
  r.finish();
}

void read_diagnostics(ObjectReader r, DiagnosticsSpec& d) {
  r.read("bounds", d.bounds);
  r.read("smoothness", d.smoothness);
  r.read("coercivity", d.coercivity);
  r.read("nonexpansiveness", d.nonexpansiveness);
  r.read("boundedness", d.boundedness);
  r.read("n_pairs", d.n_pairs);
  r.read_optional("sigma", d.sigma);
  r.read("points", d.points);
  r.read("coercivity_scales", d.coercivity_scales);
  r.read("domain_diameter", d.domain_diameter);
  r.finish();
}

void read_output(ObjectReader r, OutputSpec& o) {
  r.read("dir", o.dir);
  r.read("record_timing", o.record_timing);
  if (r.has("diagnostics")) read_diagnostics(r.child("diagnostics"), o.diagnostics);
  r.finish();
}

json to_json(const ExperimentConfig& c) {
  const auto& p = c.problem;
  json kernel = {{"type", kKernelTypes.name(p.kernel.type)},
                 {"taps", p.kernel.taps},
                 {"std", p.kernel.std},
                 {"values", p.kernel.values},
                 {"rows", p.kernel.rows}};
  json problem = {{"kind", kOperatorKinds.name(p.kind)},
                  {"dim", p.dim},
                  {"height", p.height},
                  {"measurements", p.measurements},
                  {"keep_fraction", p.keep_fraction},
                  {"box_start", p.box_start},
                  {"box_length", p.box_length},
                  {"kernel", kernel},
                  {"factor", p.factor},
                  {"hdr_scale", p.hdr_scale},
                  {"oversampling", p.oversampling},
                  {"noise_std", p.noise_std}};
  json prior = {{"weights", c.prior.weights}, {"means", c.prior.means}, {"stds", c.prior.stds}};
  const auto& s = c.schedule;
  json schedule = {{"kind", kScheduleKinds.name(s.kind)},
                   {"sigma_max", s.sigma_max},
                   {"sigma_min", s.sigma_min},
                   {"W", s.window},
                   {"tail", s.tail},
                   {"J", s.dc_steps},
                   {"eta_coeff", s.eta_coeff},
                   {"sigma_s_rule", kSigmaSRules.name(s.sigma_s_rule)},
                   {"sigma_s_coeff", s.sigma_s_coeff},
                   {"eta_prob", s.eta_prob}};
  const auto& v = c.solver;
  json inner = {{"max_iters", v.inner.max_iters},
                {"learning_rate", v.inner.learning_rate},
                {"delta_tol", v.inner.delta_tol},
                {"patience", v.inner.patience},
                {"grad_tol", v.inner.grad_tol},
                {"cg_tol", v.inner.cg_tol}};
  json solver = {{"method", kMethods.name(v.method)},
                 {"rho0", v.rho0},
                 {"adaptive_rho", v.adaptive_rho},
                 {"gamma_rho", v.gamma_rho},
                 {"eta_beta", v.eta_beta},
                 {"backend", kBackends.name(v.backend)},
                 {"ode_steps", v.ode_steps},
                 {"ode_integrator", kIntegrators.name(v.ode_integrator)},
                 {"zero_noise", v.zero_noise},
                 {"inner", inner},
                 {"zeta", v.zeta},
                 {"mu_hqs", v.mu_hqs},
                 {"snore_step", v.snore_step},
                 {"snore_reg", v.snore_reg},
                 {"record_iterates", v.record_iterates}};
  const auto& d = c.output.diagnostics;
  json diagnostics = {{"bounds", d.bounds},
                      {"smoothness", d.smoothness},
                      {"coercivity", d.coercivity},
                      {"nonexpansiveness", d.nonexpansiveness},
                      {"boundedness", d.boundedness},
                      {"n_pairs", d.n_pairs},
                      {"sigma", d.sigma ? json(*d.sigma) : json(nullptr)},
                      {"points", d.points},
                      {"coercivity_scales", d.coercivity_scales},
                      {"domain_diameter", d.domain_diameter}};
  json output = {{"dir", c.output.dir},
                 {"record_timing", c.output.record_timing},
                 {"diagnostics", diagnostics}};
  return json{{"problem", problem}, {"prior", prior},   {"schedule", schedule},
              {"solver", solver},   {"seed", c.seed},   {"output", output}};
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte just past the offending token.
    const auto [line, col] = line_column(json_text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError("malformed JSON at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what(),
                      line, col);
  }

  ExperimentConfig c;
  ObjectReader root(j, "");
  if (root.has("problem")) read_problem(root.child("problem"), c.problem);
  if (root.has("prior")) read_prior(root.child("prior"), c.prior);
  if (root.has("schedule")) read_schedule(root.child("schedule"), c.schedule);
  if (root.has("solver")) read_solver(root.child("solver"), c.solver);
  root.read("seed", c.seed);
  if (root.has("output")) read_output(root.child("output"), c.output);
  root.finish();
  c.validate();
  return c;
}

std::string dump_config(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

std::uint64_t config_hash(const ExperimentConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return to_json(a) == to_json(b);
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  const auto& p = problem;
  if (p.dim < 1) fail("problem.dim must be >= 1");
  if (p.height < 1 || p.dim % p.height != 0) fail("problem.height must divide problem.dim");
  if (!(p.noise_std > 0.0)) fail("problem.noise_std must be positive");
  switch (p.kind) {
    case OperatorKind::RandomMask:
      if (!(p.keep_fraction > 0.0) || p.keep_fraction > 1.0)
        fail("problem.keep_fraction must lie in (0, 1]");
      break;
    case OperatorKind::BoxMask:
      if (p.box_start < 0 || p.box_length < 0 || p.box_start + p.box_length > p.dim)
        fail("problem.box_start/box_length must describe a block inside the signal");
      break;
    case OperatorKind::Convolution:
      if (p.kernel.type == KernelType::Inline) {
        if (p.kernel.values.empty()) fail("problem.kernel.values must be non-empty");
        if (p.kernel.rows < 1 || p.kernel.values.size() % static_cast<std::size_t>(p.kernel.rows))
          fail("problem.kernel.rows must divide the number of kernel values");
      } else if (p.kernel.taps < 1) {
        fail("problem.kernel.taps must be >= 1");
      }
      if (p.kernel.type == KernelType::Gaussian && !(p.kernel.std > 0.0))
        fail("problem.kernel.std must be positive");
      break;
    case OperatorKind::Decimation:
      if (p.factor < 1 || p.dim % p.factor != 0) fail("problem.factor must divide problem.dim");
      break;
    case OperatorKind::GaussianProjection:
      if (p.measurements < 1) fail("problem.measurements must be >= 1");
      break;
    case OperatorKind::Hdr:
      if (!(p.hdr_scale > 0.0)) fail("problem.hdr_scale must be positive");
      break;
    case OperatorKind::PhaseRetrieval:
      if (p.oversampling < 1) fail("problem.oversampling must be >= 1");
      break;
    case OperatorKind::Identity:
      break;
  }

  const auto& g = prior;
  const std::size_t m = g.weights.size();
  if (m == 0) fail("prior.weights must be non-empty");
  if (g.stds.size() != m) fail("prior.stds must have one entry per component");
  if (!g.means.empty() && g.means.size() != m) fail("prior.means must have one row per component");
  for (const auto& mu : g.means)
    if (mu.size() != static_cast<std::size_t>(p.dim)) fail("prior.means rows must have length problem.dim");
  for (double w : g.weights)
    if (!(w > 0.0)) fail("prior.weights must be positive");
  for (double s : g.stds)
    if (!(s > 0.0)) fail("prior.stds must be positive");
  const double total = std::accumulate(g.weights.begin(), g.weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) fail("prior.weights must sum to 1");

  try {
    schedule.validate();
  } catch (const InvalidArgument& e) {
    fail(e.what());
  }

  const auto& v = solver;
  if (!(v.rho0 > 0.0)) fail("solver.rho0 must be positive");
  if (v.adaptive_rho) {
    if (!(v.gamma_rho > 1.0)) fail("solver.gamma_rho must exceed 1");
    if (!(v.eta_beta >= 0.0 && v.eta_beta < 1.0)) fail("solver.eta_beta must lie in [0, 1)");
  }
  if (v.ode_steps < 1) fail("solver.ode_steps must be >= 1");
  if (v.inner.max_iters < 1) fail("solver.inner.max_iters must be >= 1");
  if (!(v.inner.learning_rate > 0.0)) fail("solver.inner.learning_rate must be positive");
  if (v.inner.patience < 1) fail("solver.inner.patience must be >= 1");
  if (!(v.inner.cg_tol > 0.0)) fail("solver.inner.cg_tol must be positive");
  if (!(v.zeta >= 0.0 && v.zeta <= 1.0)) fail("solver.zeta must lie in [0, 1]");
  if (v.mu_hqs < 0.0) fail("solver.mu_hqs must be >= 0");
  if (!(v.snore_step > 0.0) || !(v.snore_reg > 0.0)) fail("solver.snore_step and snore_reg must be positive");

  const auto& d = output.diagnostics;
  if (d.n_pairs < 100) fail("output.diagnostics.n_pairs must be >= 100");
  if (d.sigma && !(*d.sigma >= 0.0)) fail("output.diagnostics.sigma must be >= 0");
  for (int k : d.points)
    if (k < 0 || k > schedule.max_iters()) fail("output.diagnostics.points must lie in [0, K]");
  if (d.coercivity_scales.empty()) fail("output.diagnostics.coercivity_scales must be non-empty");
  if (d.domain_diameter < 0.0) fail("output.diagnostics.domain_diameter must be >= 0");
  if (output.dir.empty()) fail("output.dir must be non-empty");
}

std::string to_string(OperatorKind kind) { return kOperatorKinds.name(kind); }
std::string to_string(SolverMethod method) { return kMethods.name(method); }
std::string to_string(DenoiserBackend backend) { return kBackends.name(backend); }

}  // namespace acdc
