#pragma once

#include <span>

#include "apinn/models/model.hpp"
#include "apinn/problems/problem.hpp"
#include "apinn/problems/sampling.hpp"

namespace apinn::train {

/// Weights of boundary, residual and the three interface penalties
/// (average continuity, residual continuity, first-derivative continuity).
struct LossWeights {
  double boundary = 20.0;
  double residual = 1.0;
  double iface_avg = 0.0;
  double iface_res = 0.0;
  double iface_deriv = 0.0;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

/// Unweighted components; total is their weighted sum. For XPINN each
/// component is summed over subnets.
struct LossParts {
  double total = 0.0;
  double boundary = 0.0;
  double residual = 0.0;
  double iface_avg = 0.0;
  double iface_res = 0.0;
  double iface_deriv = 0.0;
};

/// PerSubnet differentiates each XPINN subnet's loss with respect to its own
/// parameters only (neighbour values on interfaces are held fixed), as in
/// separately optimized subnets. Joint differentiates the summed loss. The two
/// agree for PINN and APINN.
enum class GradMode { PerSubnet, Joint };

/// Composite training loss of a model over a fixed point set. PINN and APINN
/// use the single global region; XPINN uses one region per subnet plus the
/// interfaces between neighbours.
class Loss {
 public:
  Loss(const problems::Problem& problem, const problems::PointSet& points, LossWeights weights,
       diff::Exec exec = diff::Exec::Parallel);

  /// Loss at the model's current parameters. When grad is non-empty it is
  /// overwritten with the gradient (size model.parameter_count()).
  LossParts operator()(const models::Model& model, std::span<double> grad,
                       GradMode mode = GradMode::PerSubnet) const;

  [[nodiscard]] const LossWeights& weights() const { return w_; }

 private:
  const problems::Problem* problem_;
  const problems::PointSet* points_;
  LossWeights w_;
  diff::Exec exec_;
};

}  // namespace apinn::train
