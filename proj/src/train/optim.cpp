#include "apinn/train/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "apinn/errors.hpp"

namespace apinn::train {

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
  if (!(lr > 0)) throw ConfigError("Adam learning rate must be positive");
}

void Adam::step(std::span<double> theta, std::span<const double> grad) {
  if (m_.empty()) {
    m_.assign(theta.size(), 0.0);
    v_.assign(theta.size(), 0.0);
  }
  if (theta.size() != m_.size() || grad.size() != m_.size()) {
    throw ConfigError("Adam: parameter size changed between steps");
  }
  ++t_;
  b1t_ *= b1_;
  b2t_ *= b2_;
  const double c1 = 1.0 - b1t_;
  const double c2 = 1.0 - b2t_;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m_[i] = b1_ * m_[i] + (1.0 - b1_) * grad[i];
    v_[i] = b2_ * v_[i] + (1.0 - b2_) * grad[i] * grad[i];
    theta[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

std::string to_string(LbfgsStop s) {
  switch (s) {
    case LbfgsStop::GradTol: return "grad_tol";
    case LbfgsStop::RelTol: return "rel_tol";
    case LbfgsStop::MaxIters: return "max_iters";
    case LbfgsStop::LineSearchFailed: return "line_search_failed";
  }
  return "?";
}

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Minimizer of the cubic through (a, fa, ga) and (b, fb, gb), clamped into
// the interval; falls back to bisection when the cubic is degenerate.
double cubic_min(double a, double fa, double ga, double b, double fb, double gb) {
  const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - ga * gb;
  const double lo = std::min(a, b), hi = std::max(a, b);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double x = b - (b - a) * (gb + d2 - d1) / (gb - ga + 2.0 * d2);
    if (std::isfinite(x)) {
      // Keep away from the ends so the bracket shrinks.
      const double margin = 0.1 * (hi - lo);
      return std::clamp(x, lo + margin, hi - margin);
    }
  }
  return 0.5 * (lo + hi);
}

struct Probe {
  double step, f, g;  // g: directional derivative
  Vec x, grad;
};

class LineSearch {
 public:
  LineSearch(const Objective& f, const LbfgsConfig& cfg, const Vec& x0, double f0, double g0,
             const Vec& dir)
      : f_(f), cfg_(cfg), x0_(x0), f0_(f0), g0_(g0), d_(dir) {}

  // Returns true with `out` holding a point satisfying the strong Wolfe
  // conditions; false on failure, with `best` the lowest point evaluated.
  bool run(double step, Probe& out, Probe& best) {
    best.f = std::numeric_limits<double>::infinity();
    Probe prev{0.0, f0_, g0_, x0_, {}};
    for (int i = 0; i < cfg_.max_evals_per_search; ++i) {
      Probe cur = eval(step);
      track(cur, best);
      if (!std::isfinite(cur.f) || cur.f > f0_ + cfg_.c1 * step * g0_ ||
          (i > 0 && cur.f >= prev.f)) {
        return zoom(prev, cur, out, best);
      }
      if (std::abs(cur.g) <= -cfg_.c2 * g0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.g >= 0.0) return zoom(cur, prev, out, best);
      prev = std::move(cur);
      step *= 2.0;
    }
    return false;
  }

  int evals() const { return evals_; }

 private:
  Probe eval(double step) {
    Probe p;
    p.step = step;
    p.x.resize(x0_.size());
    for (std::size_t i = 0; i < x0_.size(); ++i) p.x[i] = x0_[i] + step * d_[i];
    p.grad.assign(x0_.size(), 0.0);
    p.f = f_(p.x, p.grad);
    p.g = std::isfinite(p.f) ? dot(p.grad, d_) : std::numeric_limits<double>::quiet_NaN();
    ++evals_;
    return p;
  }

  static void track(const Probe& p, Probe& best) {
    if (std::isfinite(p.f) && p.f < best.f) best = p;
  }

  bool zoom(Probe lo, Probe hi, Probe& out, Probe& best) {
    while (evals_ < 2 * cfg_.max_evals_per_search) {
      double step;
      if (std::isfinite(hi.f) && std::isfinite(hi.g)) {
        step = cubic_min(lo.step, lo.f, lo.g, hi.step, hi.f, hi.g);
      } else {
        step = 0.5 * (lo.step + hi.step);
      }
      if (std::abs(hi.step - lo.step) < 1e-16 * std::max(1.0, lo.step)) return false;
      Probe cur = eval(step);
      track(cur, best);
      if (!std::isfinite(cur.f) || cur.f > f0_ + cfg_.c1 * step * g0_ || cur.f >= lo.f) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.g) <= -cfg_.c2 * g0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.g * (hi.step - lo.step) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    return false;
  }

  const Objective& f_;
  const LbfgsConfig& cfg_;
  const Vec& x0_;
  double f0_, g0_;
  const Vec& d_;
  int evals_ = 0;
};

}  // namespace

LbfgsResult lbfgs(const Objective& f, std::vector<double> theta, const LbfgsConfig& cfg,
                  const LbfgsCallback& cb) {
  if (cfg.memory < 1) throw ConfigError("L-BFGS memory must be positive");
  LbfgsResult res;
  Vec g(theta.size(), 0.0);
  double fx = f(theta, g);
  res.evals = 1;
  res.theta = theta;
  res.loss = fx;
  if (!std::isfinite(fx)) {
    res.stop = LbfgsStop::LineSearchFailed;
    return res;
  }
  std::deque<Vec> S, Y;
  std::deque<double> rho;
  const std::size_t n = theta.size();
  for (int k = 0; k < cfg.max_iters; ++k) {
    if (inf_norm(g) < cfg.grad_tol) {
      res.stop = LbfgsStop::GradTol;
      return res;
    }
    // Two-loop recursion for d = -H g.
    Vec q = g;
    std::vector<double> alpha(S.size());
    for (std::size_t i = S.size(); i-- > 0;) {
      alpha[i] = rho[i] * dot(S[i], q);
      for (std::size_t j = 0; j < n; ++j) q[j] -= alpha[i] * Y[i][j];
    }
    double gamma = 1.0;
    if (!S.empty()) gamma = dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
    for (double& v : q) v *= gamma;
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double beta = rho[i] * dot(Y[i], q);
      for (std::size_t j = 0; j < n; ++j) q[j] += (alpha[i] - beta) * S[i][j];
    }
    Vec d(n);
    for (std::size_t j = 0; j < n; ++j) d[j] = -q[j];
    double gd = dot(g, d);
    if (!(gd < 0.0)) {
      // Not a descent direction; restart from steepest descent.
      S.clear();
      Y.clear();
      rho.clear();
      for (std::size_t j = 0; j < n; ++j) d[j] = -g[j];
      gd = dot(g, d);
    }
    double step = 1.0;
    if (S.empty()) {
      double l1 = 0.0;
      for (double v : g) l1 += std::abs(v);
      step = std::min(1.0, 1.0 / l1);
    }
    LineSearch ls(f, cfg, theta, fx, gd, d);
    Probe next, best;
    const bool ok = ls.run(step, next, best);
    res.evals += ls.evals();
    if (!ok) {
      if (best.f < res.loss) {
        res.theta = best.x;
        res.loss = best.f;
      }
      res.iters = k;
      res.stop = LbfgsStop::LineSearchFailed;
      return res;
    }
    Vec s(n), y(n);
    for (std::size_t j = 0; j < n; ++j) {
      s[j] = next.x[j] - theta[j];
      y[j] = next.grad[j] - g[j];
    }
    const double sy = dot(s, y);
    if (sy > 1e-10 * std::sqrt(dot(s, s) * dot(y, y))) {
      if (static_cast<int>(S.size()) == cfg.memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
    }
    const double fprev = fx;
    theta = std::move(next.x);
    g = std::move(next.grad);
    fx = next.f;
    res.iters = k + 1;
    if (fx < res.loss) {
      res.loss = fx;
      res.theta = theta;
    }
    if (cb) cb(k + 1, fx, theta);
    if (std::abs(fprev - fx) <= cfg.rel_tol * std::max(std::abs(fprev), std::abs(fx))) {
      res.stop = inf_norm(g) < cfg.grad_tol ? LbfgsStop::GradTol : LbfgsStop::RelTol;
      return res;
    }
  }
  res.stop = LbfgsStop::MaxIters;
  return res;
}

}  // namespace apinn::train
