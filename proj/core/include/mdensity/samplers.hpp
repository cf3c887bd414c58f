#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "mdensity/estimators.hpp"
#include "mdensity/noise.hpp"
#include "mdensity/rng.hpp"

namespace mdensity {

/// Step size delta, friction gamma, inverse mass u, number of steps K.
struct SamplerParams {
  double delta = 0.1;
  double gamma = 1.0;
  double u = 1.0;
  long K = 1000;

  /// Throws std::invalid_argument unless every field is positive and finite.
  void validate() const;
};

/// Phase-space state (y, v) of a Langevin chain after k steps.
struct ChainState {
  MultiY y;
  Vec v;
  long k = 0;
};

enum class InitScheme { uniform, uniform_plus_noise };
enum class Integrator { sachs, cheng, overdamped };

InitScheme parse_init_scheme(std::string_view name);
Integrator parse_integrator(std::string_view name);
std::string_view to_string(InitScheme scheme);
std::string_view to_string(Integrator integrator);

/// y ~ Unif([0,1]^{Md}) (optionally plus channel noise N(0, sigma_m^2 I)), v = 0.
ChainState init_chain(const NoiseModel& noise, InitScheme scheme, Rng& rng);

/// y <- y + (delta^2 / 2) score(y) + delta * eps. Velocity is left alone.
ChainState overdamped_step(ChainState state, const ScoreFn& score, const SamplerParams& params, Rng& rng);

/// One step of the symmetric splitting integrator: half drift, kick, OU
/// velocity refresh with a second kick, half drift. One score call.
ChainState sachs_step(ChainState state, const ScoreFn& score, const SamplerParams& params, Rng& rng);

/// Conditional covariance of (y_t, v_t) per coordinate for the underdamped
/// diffusion with the gradient frozen at the start of the step.
struct LangevinCovariance {
  double yy = 0.0;
  double yv = 0.0;
  double vv = 0.0;
};

/// Lower-triangular factor [[yy, 0], [vy, vv]] of LangevinCovariance.
struct CovCholesky {
  double yy = 0.0;
  double vy = 0.0;
  double vv = 0.0;
};

/// Below this value of gamma * delta the covariance entries are evaluated by
/// their Taylor series instead of the closed forms.
inline constexpr double kCovarianceSeriesCrossover = 0.5;

LangevinCovariance langevin_covariance(double delta, double gamma, double u);
/// delta == 0 gives the zero factor. Throws std::domain_error when the
/// evaluated covariance is not positive definite.
CovCholesky cheng_cov_chol(double delta, double gamma, double u);
CovCholesky cheng_cov_chol(const SamplerParams& params);

/// One step of the exact-in-frozen-gradient integrator: closed-form
/// conditional means plus correlated Gaussian noise from cheng_cov_chol.
ChainState cheng_step(ChainState state, const ScoreFn& score, const SamplerParams& params, Rng& rng);

ChainState integrator_step(Integrator integrator, ChainState state, const ScoreFn& score,
                           const SamplerParams& params, Rng& rng);

/// Clean-sample extraction at one step of the walk.
struct WJSRecord {
  long k = 0;
  Vec xhat;
  double consistency_gap = 0.0;
};

using JumpEstimator = std::function<EstimateReport(const MultiY&)>;

struct WalkJumpOptions {
  Integrator integrator = Integrator::sachs;
  InitScheme init = InitScheme::uniform;
  long jump_every = 1;
  /// Defaults to bayes_estimate_mean on the walk's score source.
  JumpEstimator estimator;
  /// Start from this state instead of init_chain.
  std::optional<ChainState> initial;
  /// Called with every state, including the initial one.
  std::function<void(const ChainState&)> on_step;
  /// Called with every jump record as it is produced.
  std::function<void(const WJSRecord&)> on_jump;
  bool keep_records = true;
};

struct WalkJumpResult {
  ChainState final_state;
  std::vector<WJSRecord> records;
};

/// Runs K walk steps and jumps at every k divisible by jump_every and at k = K.
/// Jumps never touch the chain. A non-finite coordinate throws DivergenceError
/// naming the step.
WalkJumpResult walk_jump(const ScoreSource& src, const NoiseModel& noise, const SamplerParams& params,
                         const WalkJumpOptions& options, Rng& rng);

}  // namespace mdensity
