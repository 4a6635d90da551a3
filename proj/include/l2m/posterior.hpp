#pragma once

#include "l2m/random.hpp"
#include "l2m/types.hpp"

#include <cmath>
#include <cstdint>

namespace l2m {

// Diagonal Gaussian over a parameter vector. Shared by the L2M and SWAG
// posteriors; `weight_decay` and `eps` are only meaningful for L2M.
template <typename Scalar>
struct DiagonalGaussian {
  Vector<Scalar> mean;
  Vector<Scalar> std;
  Scalar weight_decay = Scalar(0);
  Scalar eps = Scalar(0);

  Eigen::Index size() const { return mean.size(); }
};

using L2MPosterior = DiagonalGaussian<double>;

// L2M posterior: N(theta_map, diag(1 / (v_hat + 1/weight_decay + eps))).
//
// The prior enters the precision as 1/weight_decay, matching the reference
// procedure, not as weight_decay. `second_moment` is the optimizer's
// bias-corrected gradient second moment.
template <typename DerivedM, typename DerivedV>
DiagonalGaussian<typename DerivedM::Scalar> build_l2m(const Eigen::MatrixBase<DerivedM>& theta_map,
                                                      const Eigen::MatrixBase<DerivedV>& second_moment,
                                                      typename DerivedM::Scalar weight_decay,
                                                      typename DerivedM::Scalar eps) {
  using Scalar = typename DerivedM::Scalar;
  if (theta_map.size() != second_moment.size()) throw UsageError("build_l2m: shape mismatch");
  if (!(weight_decay > Scalar(0))) throw UsageError("build_l2m: weight_decay must be > 0");
  if (!(eps >= Scalar(0))) throw UsageError("build_l2m: eps must be >= 0");
  if ((second_moment.array() < Scalar(0)).any()) {
    throw DataError("build_l2m: negative second-moment entry");
  }
  if (!second_moment.allFinite()) throw DataError("build_l2m: non-finite second moment");

  DiagonalGaussian<Scalar> post;
  post.mean = theta_map;
  const Scalar floor = Scalar(1) / weight_decay + eps;
  post.std = (second_moment.array() + floor).inverse().sqrt().matrix();
  post.weight_decay = weight_decay;
  post.eps = eps;
  return post;
}

// Diagonal precision 1 / std^2.
template <typename Scalar>
Vector<Scalar> posterior_precision(const DiagonalGaussian<Scalar>& post) {
  return post.std.array().square().inverse().matrix();
}

// mean + std * z, z ~ N(0, I) drawn from Rng(seed).
template <typename Scalar>
Vector<Scalar> sample(const DiagonalGaussian<Scalar>& post, std::uint64_t seed) {
  Rng rng(seed);
  Vector<Scalar> out(post.size());
  for (Eigen::Index i = 0; i < post.size(); ++i) {
    out[i] = post.mean[i] + post.std[i] * static_cast<Scalar>(rng.normal());
  }
  return out;
}

}  // namespace l2m
