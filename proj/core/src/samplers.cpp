#include "mdensity/samplers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mdensity/errors.hpp"

namespace mdensity {

void SamplerParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(delta)) throw std::invalid_argument("SamplerParams: delta must be positive and finite");
  if (!positive(gamma)) throw std::invalid_argument("SamplerParams: gamma must be positive and finite");
  if (!positive(u)) throw std::invalid_argument("SamplerParams: u must be positive and finite");
  if (K < 1) throw std::invalid_argument("SamplerParams: K must be >= 1");
}

InitScheme parse_init_scheme(std::string_view name) {
  if (name == "uniform") return InitScheme::uniform;
  if (name == "uniform_plus_noise") return InitScheme::uniform_plus_noise;
  throw std::invalid_argument("unknown init scheme '" + std::string(name) + "'");
}

Integrator parse_integrator(std::string_view name) {
  if (name == "sachs") return Integrator::sachs;
  if (name == "cheng") return Integrator::cheng;
  if (name == "overdamped") return Integrator::overdamped;
  throw std::invalid_argument("unknown integrator '" + std::string(name) + "'");
}

std::string_view to_string(InitScheme scheme) {
  switch (scheme) {
    case InitScheme::uniform: return "uniform";
    case InitScheme::uniform_plus_noise: return "uniform_plus_noise";
  }
  return "?";
}

std::string_view to_string(Integrator integrator) {
  switch (integrator) {
    case Integrator::sachs: return "sachs";
    case Integrator::cheng: return "cheng";
    case Integrator::overdamped: return "overdamped";
  }
  return "?";
}

ChainState init_chain(const NoiseModel& noise, InitScheme scheme, Rng& rng) {
  ChainState state{MultiY(rng.uniform_vector(noise.dim()), noise), Vec::Zero(noise.dim()), 0};
  switch (scheme) {
    case InitScheme::uniform:
      break;
    case InitScheme::uniform_plus_noise:
      for (int m = 0; m < noise.M(); ++m) {
        auto block = state.y.channel(m);
        for (Eigen::Index i = 0; i < block.size(); ++i) block[i] += noise.sigma(m) * rng.normal();
      }
      break;
    default:
      throw std::invalid_argument("init_chain: unknown scheme");
  }
  return state;
}

namespace {

Vec checked_score(const ScoreFn& score, const MultiY& y) {
  Vec s = score(y);
  if (s.size() != y.data().size()) throw DimensionError("score has the wrong length");
  if (!s.allFinite()) throw NonFiniteError("score returned a non-finite value");
  return s;
}

void require_finite(const ChainState& state) {
  if (!state.y.data().allFinite() || !state.v.allFinite())
    throw NonFiniteError("chain state became non-finite");
}

// 2a - 4(1 - e^-a) + (1 - e^-2a) = sum_{n>=3} (-1)^n (4 - 2^n) a^n / n!
double yy_shape(double a) {
  if (a < kCovarianceSeriesCrossover) {
    double term = 1.0;  // a^n / n!
    double acc = 0.0;
    for (int n = 1; n <= 30; ++n) {
      term *= a / n;
      if (n >= 3) acc += ((n % 2 == 0) ? 1.0 : -1.0) * (4.0 - std::ldexp(1.0, n)) * term;
    }
    return acc;
  }
  return 2.0 * a + 4.0 * std::expm1(-a) - std::expm1(-2.0 * a);
}

// a - (1 - e^-a) = sum_{n>=2} (-1)^n a^n / n!
double drift_shape(double a) {
  if (a < kCovarianceSeriesCrossover) {
    double term = 1.0;
    double acc = 0.0;
    for (int n = 1; n <= 30; ++n) {
      term *= a / n;
      if (n >= 2) acc += ((n % 2 == 0) ? 1.0 : -1.0) * term;
    }
    return acc;
  }
  return a + std::expm1(-a);
}

}  // namespace

ChainState overdamped_step(ChainState state, const ScoreFn& score, const SamplerParams& params, Rng& rng) {
  const Vec s = checked_score(score, state.y);
  Vec& y = state.y.data();
  y += 0.5 * params.delta * params.delta * s;
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += params.delta * rng.normal();
  ++state.k;
  require_finite(state);
  return state;
}

ChainState sachs_step(ChainState state, const ScoreFn& score, const SamplerParams& params, Rng& rng) {
  const double delta = params.delta;
  const double u = params.u;
  const double decay = std::exp(-params.gamma * delta);
  const double noise_scale = std::sqrt(-u * std::expm1(-2.0 * params.gamma * delta));

  Vec& y = state.y.data();
  Vec& v = state.v;
  y += 0.5 * delta * v;
  const Vec psi = checked_score(score, state.y);
  v += 0.5 * u * delta * psi;
  v = decay * v + 0.5 * u * delta * psi;
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += noise_scale * rng.normal();
  y += 0.5 * delta * v;
  ++state.k;
  require_finite(state);
  return state;
}

LangevinCovariance langevin_covariance(double delta, double gamma, double u) {
  if (!(delta >= 0.0) || !(gamma > 0.0) || !(u > 0.0))
    throw std::invalid_argument("langevin_covariance: need delta >= 0, gamma > 0, u > 0");
  const double a = gamma * delta;
  const double one_minus_decay = -std::expm1(-a);
  LangevinCovariance cov;
  cov.yy = u / (gamma * gamma) * yy_shape(a);
  cov.vv = -u * std::expm1(-2.0 * a);
  cov.yv = u / gamma * one_minus_decay * one_minus_decay;
  return cov;
}

CovCholesky cheng_cov_chol(double delta, double gamma, double u) {
  const LangevinCovariance cov = langevin_covariance(delta, gamma, u);
  if (delta == 0.0) return {};
  if (!(cov.yy > 0.0)) throw std::domain_error("cheng_cov_chol: Sigma_yy is not positive");
  CovCholesky chol;
  chol.yy = std::sqrt(cov.yy);
  chol.vy = cov.yv / chol.yy;
  const double schur = cov.vv - cov.yv * cov.yv / cov.yy;
  if (!(schur > 0.0)) throw std::domain_error("cheng_cov_chol: Schur complement is not positive");
  chol.vv = std::sqrt(schur);
  return chol;
}

CovCholesky cheng_cov_chol(const SamplerParams& params) {
  return cheng_cov_chol(params.delta, params.gamma, params.u);
}

ChainState cheng_step(ChainState state, const ScoreFn& score, const SamplerParams& params, Rng& rng) {
  const double gamma = params.gamma;
  const double u = params.u;
  const double a = gamma * params.delta;
  const double decay = std::exp(-a);
  const double velocity_gain = -std::expm1(-a) / gamma;           // (1 - e^-a) / gamma
  const double position_gain = u / (gamma * gamma) * drift_shape(a);  // (u/gamma)(delta - (1 - e^-a)/gamma)
  const CovCholesky chol = cheng_cov_chol(params);

  const Vec psi = checked_score(score, state.y);
  Vec& y = state.y.data();
  Vec& v = state.v;
  y += velocity_gain * v + position_gain * psi;
  v = decay * v + u * velocity_gain * psi;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double b1 = rng.normal();
    const double b2 = rng.normal();
    y[i] += chol.yy * b1;
    v[i] += chol.vy * b1 + chol.vv * b2;
  }
  ++state.k;
  require_finite(state);
  return state;
}

ChainState integrator_step(Integrator integrator, ChainState state, const ScoreFn& score,
                           const SamplerParams& params, Rng& rng) {
  switch (integrator) {
    case Integrator::sachs: return sachs_step(std::move(state), score, params, rng);
    case Integrator::cheng: return cheng_step(std::move(state), score, params, rng);
    case Integrator::overdamped: return overdamped_step(std::move(state), score, params, rng);
  }
  throw std::invalid_argument("integrator_step: unknown integrator");
}

WalkJumpResult walk_jump(const ScoreSource& src, const NoiseModel& noise, const SamplerParams& params,
                         const WalkJumpOptions& options, Rng& rng) {
  params.validate();
  if (options.jump_every < 1) throw std::invalid_argument("walk_jump: jump_every must be >= 1");
  if (!src.score) throw std::invalid_argument("walk_jump: score source has no score");

  JumpEstimator estimator = options.estimator;
  if (!estimator) {
    estimator = [&src, &noise](const MultiY& y) { return bayes_estimate_mean(src, noise, y); };
  }

  WalkJumpResult result{options.initial ? *options.initial : init_chain(noise, options.init, rng), {}};
  ChainState& state = result.final_state;
  require_conforms(state.y, noise);
  if (state.v.size() != state.y.data().size()) throw DimensionError("walk_jump: velocity has the wrong length");

  const long k0 = state.k;
  auto jump = [&](long k) {
    EstimateReport est = estimator(state.y);
    WJSRecord record{k, std::move(est.estimate), est.consistency_gap};
    if (options.on_jump) options.on_jump(record);
    if (options.keep_records) result.records.push_back(std::move(record));
  };

  if (options.on_step) options.on_step(state);
  jump(k0);
  for (long step = 1; step <= params.K; ++step) {
    try {
      state = integrator_step(options.integrator, std::move(state), src.score, params, rng);
    } catch (const NonFiniteError& e) {
      throw DivergenceError(k0 + step, std::string("walk_jump: chain diverged: ") + e.what());
    }
    if (options.on_step) options.on_step(state);
    if (step % options.jump_every == 0 || step == params.K) jump(k0 + step);
  }
  return result;
}

}  // namespace mdensity
