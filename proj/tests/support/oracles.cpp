#include "oracles.hpp"

#include <gmp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace forgeline::testing {

double exact_voltage(double v_old, double p_old, double p_new) {
  if (!(p_old > 0.0)) throw std::invalid_argument("p_old must be positive");
  mpq_t v, po, pn, q, s2;
  mpz_t floor_q, s;
  mpq_inits(v, po, pn, q, s2, nullptr);
  mpz_inits(floor_q, s, nullptr);
  mpq_set_d(v, v_old);
  mpq_set_d(po, p_old);
  mpq_set_d(pn, p_new);
  // q = v^2 * pn / po
  mpq_mul(q, v, v);
  mpq_mul(q, q, pn);
  mpq_div(q, q, po);
  mpz_fdiv_q(floor_q, mpq_numref(q), mpq_denref(q));
  mpz_sqrt(s, floor_q);
  mpq_set_z(s2, s);
  mpq_mul(s2, s2, s2);
  if (mpq_cmp(s2, q) < 0) mpz_add_ui(s, s, 1);
  const double out = mpz_get_d(s);
  mpq_clears(v, po, pn, q, s2, nullptr);
  mpz_clears(floor_q, s, nullptr);
  return out;
}

std::vector<double> brute_force_gae(std::span<const double> rewards, std::span<const double> values,
                                    std::span<const double> masks, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t) delta[t] = rewards[t] + gamma * values[t + 1] * masks[t] - values[t];
  std::vector<double> out(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double coef = 1.0;
    double sum = 0.0;
    for (std::size_t k = t; k < n; ++k) {
      sum += coef * delta[k];
      coef *= gamma * lambda * masks[k];
      if (coef == 0.0) break;
    }
    out[t] = sum;
  }
  return out;
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> params, double h) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = f(params);
    params[i] = keep - h;
    const double down = f(params);
    params[i] = keep;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

double reference_interpolate(std::span<const double> xs, std::span<const double> ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (x >= xs[i] && x < xs[i + 1]) {
      const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
      return ys[i] + w * (ys[i + 1] - ys[i]);
    }
  }
  return ys.back();
}

double reference_pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

double chi_squared_p_value(double statistic, double dof) {
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

double chi_squared_uniform(std::span<const double> counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  return stat;
}

}  // namespace forgeline::testing
