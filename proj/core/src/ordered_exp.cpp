#include "kmsperturb/ordered_exp.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "kmsperturb/errors.hpp"

namespace kmsperturb::ordered_exp {

namespace {

/// Generator values keyed by the grid position numerator/denominator, so the
/// nodes of a halved grid hit the cache exactly.
class CachedGenerator {
 public:
  CachedGenerator(const Generator& g, double length) : g_(g), length_(length) {}

  /// G(length * k / n) for n a power of two.
  const CMatrix& at(long k, long n) {
    // Reduce k/n so the same point has one key across grids.
    while (n > 1 && k % 2 == 0) {
      k /= 2;
      n /= 2;
    }
    auto key = std::make_pair(n, k);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const double r = length_ * static_cast<double>(k) / static_cast<double>(n);
    CMatrix value = g_(r);
    linalg::require_finite(value, "ordered_exp generator");
    return cache_.emplace(key, std::move(value)).first->second;
  }

 private:
  const Generator& g_;
  double length_;
  std::map<std::pair<long, long>, CMatrix> cache_;
};

CMatrix apply(Side side, const CMatrix& g, const CMatrix& y) {
  return side == Side::left ? CMatrix(g * y) : CMatrix(y * g);
}

/// One RK4 sweep of the truncated Dyson hierarchy y_n' = G y_{n-1} (or
/// y_{n-1} G) with y_0 = I, on `steps` uniform steps.  order < 0 means the
/// full flow y' = G y, stored in slot 0.
std::vector<CMatrix> rk4_sweep(CachedGenerator& gen, linalg::Index dim, double length,
                               long steps, int order, Side side) {
  const double h = length / static_cast<double>(steps);
  const long n2 = 2 * steps;  // midpoints live on the doubled grid
  const CMatrix id = CMatrix::Identity(dim, dim);

  if (order < 0) {
    CMatrix y = id;
    for (long s = 0; s < steps; ++s) {
      const CMatrix& g0 = gen.at(2 * s, n2);
      const CMatrix& gm = gen.at(2 * s + 1, n2);
      const CMatrix& g1 = gen.at(2 * s + 2, n2);
      const CMatrix k1 = apply(side, g0, y);
      const CMatrix k2 = apply(side, gm, y + 0.5 * h * k1);
      const CMatrix k3 = apply(side, gm, y + 0.5 * h * k2);
      const CMatrix k4 = apply(side, g1, y + h * k3);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return {y};
  }

  std::vector<CMatrix> y(static_cast<std::size_t>(order) + 1, CMatrix::Zero(dim, dim));
  y[0] = id;
  std::vector<CMatrix> k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size());
  for (long s = 0; s < steps; ++s) {
    const CMatrix& g0 = gen.at(2 * s, n2);
    const CMatrix& gm = gen.at(2 * s + 1, n2);
    const CMatrix& g1 = gen.at(2 * s + 2, n2);
    // Stage derivatives; order 0 is constant.
    for (std::size_t n = 1; n < y.size(); ++n) k1[n] = apply(side, g0, y[n - 1]);
    for (std::size_t n = 1; n < y.size(); ++n) {
      const CMatrix prev = n == 1 ? y[0] : CMatrix(y[n - 1] + 0.5 * h * k1[n - 1]);
      k2[n] = apply(side, gm, prev);
    }
    for (std::size_t n = 1; n < y.size(); ++n) {
      const CMatrix prev = n == 1 ? y[0] : CMatrix(y[n - 1] + 0.5 * h * k2[n - 1]);
      k3[n] = apply(side, gm, prev);
    }
    for (std::size_t n = 1; n < y.size(); ++n) {
      const CMatrix prev = n == 1 ? y[0] : CMatrix(y[n - 1] + h * k3[n - 1]);
      k4[n] = apply(side, g1, prev);
    }
    for (std::size_t n = 1; n < y.size(); ++n)
      y[n] += (h / 6.0) * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
  }
  return y;
}

double distance(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]).norm();
  return d;
}

std::vector<CMatrix> integrate(const Generator& g, linalg::Index dim, double length, int order,
                               Side side, const OdeSettings& settings, double& estimate,
                               long& steps_used) {
  if (!(settings.tolerance > 0.0)) throw InvalidArgument("ordered_exp: tolerance must be > 0");
  if (!(settings.max_step > 0.0)) throw InvalidArgument("ordered_exp: max_step must be > 0");
  const CMatrix id = CMatrix::Identity(dim, dim);
  if (length == 0.0) {
    std::vector<CMatrix> out(order < 0 ? 1 : static_cast<std::size_t>(order) + 1,
                             CMatrix::Zero(dim, dim));
    out[0] = id;
    estimate = 0.0;
    steps_used = 0;
    return out;
  }

  CachedGenerator gen(g, length);
  long steps = 1;
  while (std::abs(length) / static_cast<double>(steps) > settings.max_step) steps *= 2;

  std::vector<CMatrix> coarse = rk4_sweep(gen, dim, length, steps, order, side);
  double last = std::numeric_limits<double>::infinity();
  for (int halving = 0; halving < settings.max_halvings; ++halving) {
    steps *= 2;
    std::vector<CMatrix> fine = rk4_sweep(gen, dim, length, steps, order, side);
    last = distance(fine, coarse);
    if (last < settings.tolerance) {
      for (std::size_t i = 0; i < fine.size(); ++i) fine[i] += (fine[i] - coarse[i]) / 15.0;
      estimate = last;
      steps_used = steps;
      return fine;
    }
    coarse = std::move(fine);
  }
  std::ostringstream os;
  os << "ordered_exp: step halving did not reach tolerance " << settings.tolerance
     << " after " << settings.max_halvings << " halvings (last distance " << last << ")";
  throw IntegratorError(os.str(), last);
}

}  // namespace

CMatrix DysonResult::sum() const {
  CMatrix acc = CMatrix::Zero(terms.front().rows(), terms.front().cols());
  for (const CMatrix& t : terms) acc += t;
  return acc;
}

FlowResult solve_flow(const Generator& g, linalg::Index dim, double length, Side side,
                      const OdeSettings& settings) {
  FlowResult r;
  auto y = integrate(g, dim, length, -1, side, settings, r.error_estimate, r.steps);
  r.value = std::move(y.front());
  return r;
}

DysonResult dyson_terms(const Generator& g, linalg::Index dim, double length, int order,
                        Side side, const OdeSettings& settings) {
  if (order < 0) throw InvalidArgument("dyson_terms: order must be non-negative");
  DysonResult r;
  r.terms = integrate(g, dim, length, order, side, settings, r.error_estimate, r.steps);
  return r;
}

double exp_tail(double x, int order) {
  x = std::abs(x);
  // Sum forward from the first omitted term until the terms stop mattering.
  double term = 1.0;
  for (int n = 1; n <= order + 1; ++n) term *= x / n;
  double acc = 0.0;
  for (int n = order + 1; n < order + 400; ++n) {
    acc += term;
    term *= x / (n + 1);
    if (term <= acc * 1e-17) break;
  }
  return acc;
}

}  // namespace kmsperturb::ordered_exp
