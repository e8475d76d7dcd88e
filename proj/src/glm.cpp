#include "sface/glm.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace sface {

namespace {

std::atomic<std::uint64_t> g_logistic_fits{0};
std::atomic<std::uint64_t> g_multinomial_fits{0};

double sigmoid(double eta) {
  if (eta >= 0.0) {
    const double z = std::exp(-eta);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(eta);
  return z / (1.0 + z);
}

// log(1 + exp(eta1) + exp(eta2)), stable for large linear predictors
double log1pexp2(double eta1, double eta2) {
  const double m = std::max(0.0, std::max(eta1, eta2));
  return m + std::log(std::exp(-m) + std::exp(eta1 - m) + std::exp(eta2 - m));
}

void check_rank(const Eigen::LDLT<Eigen::MatrixXd>& ldlt, Eigen::Index p,
                const char* what) {
  const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
  const double dmax = d.maxCoeff();
  if (!(dmax > 0.0) || d.minCoeff() < 1e-10 * dmax)
    throw FitError(std::string(what) + ": design matrix is rank deficient (" +
                   std::to_string(p) + " columns)");
}

// Kahan-compensated X^T r; the score's rounding floor must sit well below the
// 1e-9 convergence tolerance even at n in the tens of thousands.
Eigen::VectorXd xtr_compensated(const Eigen::MatrixXd& X, const Eigen::VectorXd& r) {
  const Eigen::Index n = X.rows(), p = X.cols();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(p), carry = Eigen::VectorXd::Zero(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const double term = X(i, j) * r(i) - carry(j);
      const double t = sum(j) + term;
      carry(j) = (t - sum(j)) - term;
      sum(j) = t;
    }
  }
  return sum;
}

}  // namespace

FitCounters fit_counters() {
  return {g_logistic_fits.load(), g_multinomial_fits.load()};
}

double logistic_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& w, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double e = eta(i);
    // y*eta - log(1+exp(eta)) with the softplus computed stably
    const double sp = e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += w(i) * (y(i) * e - sp);
  }
  return ll;
}

Eigen::VectorXd logistic_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& w, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd r(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) r(i) = w(i) * (y(i) - sigmoid(eta(i)));
  return xtr_compensated(X, r);
}

ExposureModelFit fit_logistic_design(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& w, const FitOptions& opt,
                                     const Eigen::VectorXd* warm_start) {
  g_logistic_fits.fetch_add(1, std::memory_order_relaxed);
  const Eigen::Index n = X.rows(), p = X.cols();
  if (y.size() != n || w.size() != n) throw DataError("fit_logistic: size mismatch");
  const double wsum = w.sum();
  const double wy = w.dot(y);
  if (!(wy > 0.0) || !(wy < wsum))
    throw FitError("fit_logistic: response is constant on the weighted sample");

  ExposureModelFit fit;
  fit.coef = warm_start ? *warm_start : Eigen::VectorXd::Zero(p);
  double ll = logistic_loglik(X, y, w, fit.coef);
  fit.loglik_trace.push_back(ll);

  Eigen::VectorXd mu(n), hw(n);
  for (int it = 0; it < opt.max_iter; ++it) {
    const Eigen::VectorXd eta = X * fit.coef;
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = sigmoid(eta(i));
      hw(i) = w(i) * mu(i) * (1.0 - mu(i));
    }
    const Eigen::VectorXd grad = xtr_compensated(X, w.cwiseProduct(y - mu));
    fit.score_norm = grad.lpNorm<Eigen::Infinity>();
    fit.iterations = it;
    if (fit.score_norm < opt.tol) {
      fit.converged = true;
      break;
    }
    const Eigen::MatrixXd H = X.transpose() * hw.asDiagonal() * X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (it == 0) check_rank(ldlt, p, "fit_logistic");
    const Eigen::VectorXd dir = ldlt.solve(grad);

    // once the Newton decrement drops below what the log-likelihood can
    // resolve in double precision, line-search comparisons read only rounding
    // noise; the full step is the correct move in that regime
    const double resolution =
        64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(ll));
    Eigen::VectorXd cand;
    double ll_new;
    if (0.5 * grad.dot(dir) <= resolution) {
      cand = fit.coef + dir;
      ll_new = logistic_loglik(X, y, w, cand);
    } else {
      double step = 1.0;
      ll_new = -std::numeric_limits<double>::infinity();
      for (int h = 0; h < 40; ++h) {
        cand = fit.coef + step * dir;
        ll_new = logistic_loglik(X, y, w, cand);
        if (ll_new >= ll - resolution) break;
        step *= 0.5;
      }
      if (ll_new < ll - resolution)
        throw FitError("fit_logistic: step-halving failed to improve");
    }
    fit.coef = cand;
    ll = ll_new;
    fit.loglik_trace.push_back(ll);
    if (fit.coef.lpNorm<Eigen::Infinity>() > opt.separation_bound)
      throw FitError("fit_logistic: separation detected (coefficient magnitude exceeds " +
                     std::to_string(opt.separation_bound) + ")");
  }
  if (!fit.converged) {
    // the loop may exit with the final gradient unevaluated
    fit.score_norm =
        logistic_score(X, y, w, fit.coef).lpNorm<Eigen::Infinity>();
    if (fit.score_norm < opt.tol)
      fit.converged = true;
    else
      throw FitError("fit_logistic: no convergence after " +
                     std::to_string(opt.max_iter) + " iterations (score norm " +
                     std::to_string(fit.score_norm) + ")");
  }
  fit.loglik = ll;
  Eigen::VectorXd hv(n);
  const Eigen::VectorXd eta = X * fit.coef;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = sigmoid(eta(i));
    hv(i) = w(i) * m * (1.0 - m);
  }
  fit.info = X.transpose() * hv.asDiagonal() * X;
  return fit;
}

ExposureModelFit fit_logistic(const Dataset& data, const FitOptions& opt,
                              const Eigen::VectorXd* warm_start) {
  const Eigen::Index n = data.n();
  Eigen::MatrixXd X(n, 1 + data.n_covariates());
  X.col(0).setOnes();
  X.rightCols(data.n_covariates()) = data.covariates();
  return fit_logistic_design(X, data.exposure(), data.weight(), opt, warm_start);
}

double multinomial_loglik(const Eigen::MatrixXd& Z, const Eigen::VectorXi& y,
                          const Eigen::VectorXd& w, const Eigen::MatrixXd& theta) {
  const Eigen::VectorXd eta1 = Z * theta.row(0).transpose();
  const Eigen::VectorXd eta2 = Z * theta.row(1).transpose();
  double ll = 0.0;
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    double num = 0.0;
    if (y(i) == 1) num = eta1(i);
    else if (y(i) == 2) num = eta2(i);
    ll += w(i) * (num - log1pexp2(eta1(i), eta2(i)));
  }
  return ll;
}

Eigen::VectorXd multinomial_score(const Eigen::MatrixXd& Z, const Eigen::VectorXi& y,
                                  const Eigen::VectorXd& w, const Eigen::MatrixXd& theta) {
  const Eigen::Index n = Z.rows(), d = Z.cols();
  const Eigen::VectorXd eta1 = Z * theta.row(0).transpose();
  const Eigen::VectorXd eta2 = Z * theta.row(1).transpose();
  Eigen::VectorXd r1(n), r2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = std::max(0.0, std::max(eta1(i), eta2(i)));
    const double den = std::exp(-m) + std::exp(eta1(i) - m) + std::exp(eta2(i) - m);
    const double p1 = std::exp(eta1(i) - m) / den;
    const double p2 = std::exp(eta2(i) - m) / den;
    r1(i) = w(i) * ((y(i) == 1 ? 1.0 : 0.0) - p1);
    r2(i) = w(i) * ((y(i) == 2 ? 1.0 : 0.0) - p2);
  }
  Eigen::VectorXd g(2 * d);
  g.head(d) = xtr_compensated(Z, r1);
  g.tail(d) = xtr_compensated(Z, r2);
  return g;
}

OutcomeModelFit fit_multinomial(const Dataset& data, const FitOptions& opt,
                                const Eigen::MatrixXd* warm_start) {
  g_multinomial_fits.fetch_add(1, std::memory_order_relaxed);
  const Eigen::Index n = data.n();
  const Eigen::Index d = 2 + data.n_covariates();
  const Eigen::VectorXi& y = data.outcome();
  const Eigen::VectorXd& w = data.weight();

  double w0 = 0.0, w1 = 0.0, w2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y(i) == kOutcomeUnknown)
      throw DataError("fit_multinomial: outcome code 9 present; apply missingness "
                      "weighting first");
    if (y(i) == 0) w0 += w(i);
    else if (y(i) == 1) w1 += w(i);
    else w2 += w(i);
  }
  if (!(w0 > 0.0) || !(w1 > 0.0) || !(w2 > 0.0))
    throw FitError("fit_multinomial: an outcome category is absent from the weighted sample");

  Eigen::MatrixXd Z(n, d);
  Z.col(0).setOnes();
  Z.col(1) = data.exposure();
  Z.rightCols(data.n_covariates()) = data.covariates();

  OutcomeModelFit fit;
  fit.coef = warm_start ? *warm_start : Eigen::MatrixXd::Zero(2, d);
  double ll = multinomial_loglik(Z, y, w, fit.coef);
  fit.loglik_trace.push_back(ll);

  Eigen::VectorXd p1(n), p2(n);
  const auto probs_at = [&](const Eigen::MatrixXd& th) {
    const Eigen::VectorXd eta1 = Z * th.row(0).transpose();
    const Eigen::VectorXd eta2 = Z * th.row(1).transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = std::max(0.0, std::max(eta1(i), eta2(i)));
      const double den = std::exp(-m) + std::exp(eta1(i) - m) + std::exp(eta2(i) - m);
      p1(i) = std::exp(eta1(i) - m) / den;
      p2(i) = std::exp(eta2(i) - m) / den;
    }
  };

  Eigen::MatrixXd H(2 * d, 2 * d);
  for (int it = 0; it < opt.max_iter; ++it) {
    probs_at(fit.coef);
    Eigen::VectorXd g(2 * d);
    {
      Eigen::VectorXd r1(n), r2(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        r1(i) = w(i) * ((y(i) == 1 ? 1.0 : 0.0) - p1(i));
        r2(i) = w(i) * ((y(i) == 2 ? 1.0 : 0.0) - p2(i));
      }
      g.head(d) = xtr_compensated(Z, r1);
      g.tail(d) = xtr_compensated(Z, r2);
    }
    fit.score_norm = g.lpNorm<Eigen::Infinity>();
    fit.iterations = it;
    if (fit.score_norm < opt.tol) {
      fit.converged = true;
      break;
    }
    Eigen::VectorXd w11(n), w22(n), w12(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      w11(i) = w(i) * p1(i) * (1.0 - p1(i));
      w22(i) = w(i) * p2(i) * (1.0 - p2(i));
      w12(i) = -w(i) * p1(i) * p2(i);
    }
    H.topLeftCorner(d, d) = Z.transpose() * w11.asDiagonal() * Z;
    H.bottomRightCorner(d, d) = Z.transpose() * w22.asDiagonal() * Z;
    H.topRightCorner(d, d) = Z.transpose() * w12.asDiagonal() * Z;
    H.bottomLeftCorner(d, d) = H.topRightCorner(d, d).transpose();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (it == 0) check_rank(ldlt, d, "fit_multinomial");
    const Eigen::VectorXd dir = ldlt.solve(g);

    const auto at_step = [&](double step) {
      Eigen::MatrixXd cand = fit.coef;
      cand.row(0) += step * dir.head(d).transpose();
      cand.row(1) += step * dir.tail(d).transpose();
      return cand;
    };
    const double resolution =
        64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(ll));
    Eigen::MatrixXd cand;
    double ll_new;
    if (0.5 * g.dot(dir) <= resolution) {
      cand = at_step(1.0);
      ll_new = multinomial_loglik(Z, y, w, cand);
    } else {
      double step = 1.0;
      ll_new = -std::numeric_limits<double>::infinity();
      for (int h = 0; h < 40; ++h) {
        cand = at_step(step);
        ll_new = multinomial_loglik(Z, y, w, cand);
        if (ll_new >= ll - resolution) break;
        step *= 0.5;
      }
      if (ll_new < ll - resolution)
        throw FitError("fit_multinomial: step-halving failed to improve");
    }
    fit.coef = cand;
    ll = ll_new;
    fit.loglik_trace.push_back(ll);
    if (fit.coef.lpNorm<Eigen::Infinity>() > opt.separation_bound)
      throw FitError("fit_multinomial: separation detected (coefficient magnitude exceeds " +
                     std::to_string(opt.separation_bound) + ")");
  }
  if (!fit.converged) {
    fit.score_norm = multinomial_score(Z, y, w, fit.coef).lpNorm<Eigen::Infinity>();
    if (fit.score_norm < opt.tol)
      fit.converged = true;
    else
      throw FitError("fit_multinomial: no convergence after " +
                     std::to_string(opt.max_iter) + " iterations (score norm " +
                     std::to_string(fit.score_norm) + ")");
  }
  fit.loglik = ll;
  probs_at(fit.coef);
  Eigen::VectorXd w11(n), w22(n), w12(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w11(i) = w(i) * p1(i) * (1.0 - p1(i));
    w22(i) = w(i) * p2(i) * (1.0 - p2(i));
    w12(i) = -w(i) * p1(i) * p2(i);
  }
  fit.info.resize(2 * d, 2 * d);
  fit.info.topLeftCorner(d, d) = Z.transpose() * w11.asDiagonal() * Z;
  fit.info.bottomRightCorner(d, d) = Z.transpose() * w22.asDiagonal() * Z;
  fit.info.topRightCorner(d, d) = Z.transpose() * w12.asDiagonal() * Z;
  fit.info.bottomLeftCorner(d, d) = fit.info.topRightCorner(d, d).transpose();
  return fit;
}

std::array<double, 3> predict_pi(const OutcomeModelFit& fit, int a,
                                 const Eigen::VectorXd& x) {
  if (x.size() != fit.n_covariates())
    throw DataError("predict_pi: covariate dimension mismatch");
  double eta1 = fit.coef(0, 0) + fit.coef(0, 1) * a;
  double eta2 = fit.coef(1, 0) + fit.coef(1, 1) * a;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    eta1 += fit.coef(0, 2 + j) * x(j);
    eta2 += fit.coef(1, 2 + j) * x(j);
  }
  const double m = std::max(0.0, std::max(eta1, eta2));
  const double den = std::exp(-m) + std::exp(eta1 - m) + std::exp(eta2 - m);
  const double p1 = std::exp(eta1 - m) / den;
  const double p2 = std::exp(eta2 - m) / den;
  return {std::exp(-m) / den, p1, p2};
}

Eigen::MatrixX3d predict_pi_all(const OutcomeModelFit& fit, int a, const Dataset& data) {
  if (data.n_covariates() != fit.n_covariates())
    throw DataError("predict_pi_all: covariate dimension mismatch");
  const Eigen::Index n = data.n();
  Eigen::VectorXd eta1 = data.covariates() * fit.coef.row(0).tail(fit.n_covariates()).transpose();
  Eigen::VectorXd eta2 = data.covariates() * fit.coef.row(1).tail(fit.n_covariates()).transpose();
  eta1.array() += fit.coef(0, 0) + fit.coef(0, 1) * a;
  eta2.array() += fit.coef(1, 0) + fit.coef(1, 1) * a;
  Eigen::MatrixX3d out(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = std::max(0.0, std::max(eta1(i), eta2(i)));
    const double den = std::exp(-m) + std::exp(eta1(i) - m) + std::exp(eta2(i) - m);
    out(i, 0) = std::exp(-m) / den;
    out(i, 1) = std::exp(eta1(i) - m) / den;
    out(i, 2) = std::exp(eta2(i) - m) / den;
  }
  return out;
}

double predict_e(const ExposureModelFit& fit, const Eigen::VectorXd& x) {
  if (x.size() + 1 != fit.coef.size())
    throw DataError("predict_e: covariate dimension mismatch");
  double eta = fit.coef(0);
  for (Eigen::Index j = 0; j < x.size(); ++j) eta += fit.coef(1 + j) * x(j);
  return sigmoid(eta);
}

Eigen::VectorXd predict_e_all(const ExposureModelFit& fit, const Dataset& data) {
  if (data.n_covariates() + 1 != fit.coef.size())
    throw DataError("predict_e_all: covariate dimension mismatch");
  Eigen::VectorXd eta = data.covariates() * fit.coef.tail(data.n_covariates());
  eta.array() += fit.coef(0);
  for (Eigen::Index i = 0; i < eta.size(); ++i) eta(i) = sigmoid(eta(i));
  return eta;
}

std::string to_json(const ExposureModelFit& fit, const std::vector<std::string>& names) {
  nlohmann::json j;
  j["model"] = "logistic";
  j["intercept"] = fit.coef(0);
  nlohmann::json co = nlohmann::json::object();
  for (Eigen::Index k = 1; k < fit.coef.size(); ++k) {
    const std::string nm = (static_cast<size_t>(k - 1) < names.size())
                               ? names[k - 1]
                               : "x" + std::to_string(k);
    co[nm] = fit.coef(k);
  }
  j["coefficients"] = co;
  j["converged"] = fit.converged;
  j["score_norm"] = fit.score_norm;
  j["iterations"] = fit.iterations;
  return j.dump();
}

std::string to_json(const OutcomeModelFit& fit, const std::vector<std::string>& names) {
  nlohmann::json j;
  j["model"] = "multinomial";
  for (int k = 0; k < 2; ++k) {
    nlohmann::json sub;
    sub["intercept"] = fit.coef(k, 0);
    sub["exposure"] = fit.coef(k, 1);
    nlohmann::json co = nlohmann::json::object();
    for (Eigen::Index c = 2; c < fit.coef.cols(); ++c) {
      const std::string nm = (static_cast<size_t>(c - 2) < names.size())
                                 ? names[c - 2]
                                 : "x" + std::to_string(c - 1);
      co[nm] = fit.coef(k, c);
    }
    sub["coefficients"] = co;
    j["subtype" + std::to_string(k + 1)] = sub;
  }
  j["converged"] = fit.converged;
  j["score_norm"] = fit.score_norm;
  j["iterations"] = fit.iterations;
  return j.dump();
}

}  // namespace sface
