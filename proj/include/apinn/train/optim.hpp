#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace apinn::train {

/// Adam with bias-corrected moments.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// theta -= lr * mhat / (sqrt(vhat) + eps).
  void step(std::span<double> theta, std::span<const double> grad);
  [[nodiscard]] long steps() const { return t_; }
  [[nodiscard]] double lr() const { return lr_; }

 private:
  double lr_, b1_, b2_, eps_;
  double b1t_ = 1.0, b2t_ = 1.0;
  std::vector<double> m_, v_;
  long t_ = 0;
};

/// Loss and gradient at theta; grad has the size of theta and is overwritten.
using Objective = std::function<double(std::span<const double> theta, std::span<double> grad)>;

struct LbfgsConfig {
  int memory = 50;
  int max_iters = 50000;
  double grad_tol = 1e-9;   // stop when the gradient infinity norm falls below
  double rel_tol = 1e-12;   // stop when |f_k - f_{k+1}| <= rel_tol * max(|f_k|, |f_{k+1}|)
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_evals_per_search = 25;
};

enum class LbfgsStop { GradTol, RelTol, MaxIters, LineSearchFailed };
std::string to_string(LbfgsStop s);

struct LbfgsResult {
  std::vector<double> theta;  // best iterate seen
  double loss = 0.0;
  int iters = 0;
  int evals = 0;
  LbfgsStop stop = LbfgsStop::MaxIters;
};

/// Called after each accepted iteration with (iteration, loss, theta).
using LbfgsCallback = std::function<void(int, double, std::span<const double>)>;

/// L-BFGS with a strong-Wolfe line search (bracketing plus cubic zoom).
LbfgsResult lbfgs(const Objective& f, std::vector<double> theta, const LbfgsConfig& cfg,
                  const LbfgsCallback& cb = {});

}  // namespace apinn::train
