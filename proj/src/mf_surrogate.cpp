// Copyright 2026 The mfac Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "mfac/mf_surrogate.hpp"

#include <Eigen/QR>
#include <cmath>
#include <string>

#include "mfac/error.hpp"
#include "mfac/optim.hpp"

namespace mfac {

namespace {

struct LsFit {
  Polynomial rho;
  Polynomial delta;
  bool full_rank = false;
};

LsFit least_squares(const std::vector<double>& lower, std::span<const TrainingPoint> hf, int degree, std::size_t dim) {
  const std::size_t k = Polynomial::term_count(dim, degree);
  const auto n = static_cast<Eigen::Index>(hf.size());
  Eigen::MatrixXd A(n, static_cast<Eigen::Index>(2 * k));
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto phi = Polynomial::basis(hf[i].x, degree);
    for (std::size_t c = 0; c < k; ++c) {
      A(i, static_cast<Eigen::Index>(c)) = phi[c] * lower[i];
      A(i, static_cast<Eigen::Index>(k + c)) = phi[c];
    }
    b(i) = hf[i].y;
  }
  LsFit out;
  if (n < A.cols()) return out;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < A.cols()) return out;
  const Eigen::VectorXd coef = qr.solve(b);
  std::vector<double> r(k), d(k);
  for (std::size_t c = 0; c < k; ++c) {
    r[c] = coef(static_cast<Eigen::Index>(c));
    d[c] = coef(static_cast<Eigen::Index>(k + c));
  }
  out.rho = Polynomial(dim, degree, std::move(r));
  out.delta = Polynomial(dim, degree, std::move(d));
  out.full_rank = true;
  return out;
}

std::vector<double> lower_means(const LowerMean& lower_mean, std::span<const TrainingPoint> hf) {
  std::vector<double> out;
  out.reserve(hf.size());
  for (const auto& p : hf) out.push_back(lower_mean(p.x));
  return out;
}

struct Residuals {
  Eigen::MatrixXd X;
  std::vector<double> r;
  std::vector<double> noise;
};

Residuals residuals_of(const std::vector<double>& lower, std::span<const TrainingPoint> hf, const Polynomial& rho,
                       const Polynomial& delta) {
  const std::size_t d = hf.front().x.size();
  Residuals out;
  out.X.resize(static_cast<Eigen::Index>(hf.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < hf.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) out.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = hf[i].x[j];
    out.r.push_back(hf[i].y - (rho(hf[i].x) * lower[i] + delta(hf[i].x)));
    out.noise.push_back(hf[i].noise_var);
  }
  return out;
}

double sample_variance(const std::vector<double>& r) {
  if (r.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : r) mean += v;
  mean /= static_cast<double>(r.size());
  double ss = 0.0;
  for (double v : r) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(r.size() - 1);
}

}  // namespace

double residual_sum_of_squares(const LowerMean& lower_mean, std::span<const TrainingPoint> hf, const Polynomial& rho,
                               const Polynomial& delta) {
  double rss = 0.0;
  for (const auto& p : hf) {
    const double e = p.y - (rho(p.x) * lower_mean(p.x) + delta(p.x));
    rss += e * e;
  }
  return rss;
}

Bridge fit_bridge(const LowerMean& lower_mean, std::span<const TrainingPoint> hf, const BridgeFitOptions& opts) {
  if (hf.empty()) throw MissingData("bridge fit needs at least one feasible high-fidelity observation");
  if (opts.degree < 0 || opts.degree > 2) {
    throw InvalidArgument("bridge degree must be 0, 1 or 2, got " + std::to_string(opts.degree));
  }
  const std::size_t dim = hf.front().x.size();
  const auto lower = lower_means(lower_mean, hf);

  Bridge b;
  b.degree = opts.degree;
  auto fit = least_squares(lower, hf, opts.degree, dim);
  if (!fit.full_rank && opts.degree > 0) {
    b.status = BridgeStatus::reduced_degree;
    b.degree = 0;
    fit = least_squares(lower, hf, 0, dim);
  }
  if (fit.full_rank) {
    b.rho = std::move(fit.rho);
    b.delta = std::move(fit.delta);
  } else {
    // Scale is not identifiable; keep rho = 1 and fit the shift alone.
    b.status = BridgeStatus::shift_only;
    b.degree = 0;
    double shift = 0.0;
    for (std::size_t i = 0; i < hf.size(); ++i) shift += hf[i].y - lower[i];
    shift /= static_cast<double>(hf.size());
    b.rho = Polynomial::constant(dim, 1.0);
    b.delta = Polynomial::constant(dim, shift);
  }

  auto res = residuals_of(lower, hf, b.rho, b.delta);
  b.rss = 0.0;
  for (double e : res.r) b.rss += e * e;
  if (opts.fit_residual_gp && hf.size() >= 3) {
    GpFitOptions go;
    go.noise_floor = opts.noise_floor;
    go.seed = opts.seed;
    go.policy = opts.policy;
    b.residual_gp = fit_gp(res.X, res.r, go, res.noise);
  } else {
    b.residual_var = sample_variance(res.r);
  }
  return b;
}

Bridge condition_bridge(const LowerMean& lower_mean, std::span<const TrainingPoint> hf, const BridgeHyper& frozen) {
  Bridge b;
  b.rho = frozen.rho;
  b.delta = frozen.delta;
  b.degree = frozen.degree;
  b.status = frozen.status;
  b.residual_var = frozen.residual_var;
  if (hf.empty()) {
    if (frozen.residual) throw MissingData("frozen bridge has a residual GP but no high-fidelity data");
    return b;
  }
  const auto lower = lower_means(lower_mean, hf);
  auto res = residuals_of(lower, hf, b.rho, b.delta);
  for (double e : res.r) b.rss += e * e;
  if (frozen.residual) b.residual_gp = condition_gp(res.X, res.r, res.noise, *frozen.residual);
  return b;
}

MfSurrogate::MfSurrogate(Domain domain, GpModel base, std::vector<Bridge> bridges, std::vector<TrustPrior> trust)
    : domain_(std::move(domain)), base_(std::move(base)), bridges_(std::move(bridges)), trust_(std::move(trust)) {
  if (trust_.size() != bridges_.size() + 1) {
    throw InvalidArgument("surrogate needs one trust prior per level (" + std::to_string(bridges_.size() + 1) +
                          "), got " + std::to_string(trust_.size()));
  }
}

void MfSurrogate::check_level(int level) const {
  if (level < 0 || static_cast<std::size_t>(level) >= levels()) {
    throw InvalidArgument("fidelity level " + std::to_string(level) + " out of range [0, " +
                          std::to_string(levels()) + ")");
  }
}

Prediction MfSurrogate::predict_model(std::span<const double> u, int level) const {
  check_level(level);
  Prediction p = base_.predict(u);
  for (int l = 1; l <= level; ++l) {
    const Bridge& b = bridges_[static_cast<std::size_t>(l - 1)];
    const double r = b.rho(u);
    p.mean = r * p.mean + b.delta(u);
    p.variance = r * r * p.variance;
    if (b.residual_gp) {
      const auto rp = b.residual_gp->predict(u);
      p.mean += rp.mean;
      p.variance += rp.variance;
    } else {
      p.variance += b.residual_var;
    }
  }
  return p;
}

Prediction MfSurrogate::predict_unit(std::span<const double> u, int level) const {
  Prediction p = predict_model(u, level);
  const auto& prior = trust_[static_cast<std::size_t>(level)];
  if (!prior.is_zero()) {
    const DesignPoint raw = domain_.denormalize(DesignPoint{std::vector<double>(u.begin(), u.end())});
    p.variance += trust_variance(prior, raw, domain_);
  }
  return p;
}

void MfSurrogate::add_placeholder(std::span<const double> u, int level) {
  check_level(level);
  if (level == 0) {
    base_ = base_.with_observation(u, base_.predict(u).mean);
    return;
  }
  Bridge& b = bridges_[static_cast<std::size_t>(level - 1)];
  if (b.residual_gp) b.residual_gp = b.residual_gp->with_observation(u, b.residual_gp->predict(u).mean);
}

SurrogateHyper MfSurrogate::hyper() const {
  SurrogateHyper h;
  h.base = base_.hyper();
  for (const auto& b : bridges_) {
    BridgeHyper bh;
    bh.rho = b.rho;
    bh.delta = b.delta;
    bh.degree = b.degree;
    bh.status = b.status;
    bh.residual_var = b.residual_var;
    if (b.residual_gp) bh.residual = b.residual_gp->hyper();
    h.bridges.push_back(std::move(bh));
  }
  return h;
}

Prediction mf_predict(const MfSurrogate& s, const DesignPoint& x, int level) {
  const DesignPoint u = s.domain().normalize(x);
  return s.predict_unit(u.coords, level);
}

int auto_bridge_degree(std::size_t n_points, std::size_t dim) { return n_points >= 2 * (dim + 1) ? 1 : 0; }

MfSurrogate fit_mf_surrogate(const Domain& domain, const std::vector<std::vector<TrainingPoint>>& per_level,
                             const std::vector<TrustPrior>& trust, const SurrogateFitOptions& opts) {
  if (per_level.empty()) throw InvalidArgument("surrogate needs at least one level");
  if (trust.size() != per_level.size()) throw InvalidArgument("one trust prior per level required");
  const std::size_t d = domain.dim();
  const auto& lvl0 = per_level[0];
  if (lvl0.empty()) throw MissingData("no feasible observations on fidelity level 0");
  if (opts.frozen != nullptr && opts.frozen->bridges.size() + 1 != per_level.size()) {
    throw InvalidArgument("frozen surrogate state has the wrong number of bridges");
  }

  std::vector<std::vector<double>> xs;
  std::vector<double> ys, noise;
  for (const auto& p : lvl0) {
    xs.push_back(p.x);
    ys.push_back(p.y);
    noise.push_back(p.noise_var);
  }
  const Eigen::MatrixXd X = to_matrix(xs, d);
  GpModel base;
  if (opts.frozen != nullptr) {
    base = condition_gp(X, ys, noise, opts.frozen->base);
  } else {
    GpFitOptions go;
    go.noise_floor = opts.noise_floor;
    go.seed = mix_seed(opts.seed, 0);
    go.policy = opts.policy;
    base = fit_gp(X, ys, go, noise);
  }

  MfSurrogate s(domain, std::move(base), {}, std::vector<TrustPrior>{trust.front()});
  std::vector<Bridge> bridges;
  for (std::size_t l = 1; l < per_level.size(); ++l) {
    // Bridges are fitted against the partially built surrogate one level down.
    const MfSurrogate lower(domain, s.base(), bridges, std::vector<TrustPrior>(l, TrustPrior{}));
    const LowerMean lower_mean = [&lower, l](std::span<const double> u) {
      return lower.predict_model(u, static_cast<int>(l - 1)).mean;
    };
    if (per_level[l].empty() && opts.empty_level_variance) {
      Bridge identity;
      identity.rho = Polynomial::constant(d, 1.0);
      identity.delta = Polynomial::constant(d, 0.0);
      identity.status = BridgeStatus::shift_only;
      identity.residual_var = *opts.empty_level_variance;
      bridges.push_back(std::move(identity));
      continue;
    }
    if (opts.frozen != nullptr) {
      bridges.push_back(condition_bridge(lower_mean, per_level[l], opts.frozen->bridges[l - 1]));
      continue;
    }
    BridgeFitOptions bo;
    const int requested = l - 1 < opts.bridge_degrees.size() ? opts.bridge_degrees[l - 1] : -1;
    bo.degree = requested < 0 ? auto_bridge_degree(per_level[l].size(), d) : requested;
    bo.noise_floor = opts.noise_floor;
    bo.seed = mix_seed(opts.seed, l);
    bo.policy = opts.policy;
    if (per_level[l].empty()) {
      throw MissingData("no feasible observations on fidelity level " + std::to_string(l) + " for its bridge");
    }
    bridges.push_back(fit_bridge(lower_mean, per_level[l], bo));
  }
  return MfSurrogate(domain, s.base(), std::move(bridges), trust);
}

}  // namespace mfac
