#pragma once

#include <Eigen/Dense>

#include "tunnelwatch/geometry.hpp"

namespace tw {

using StateVector = Eigen::Matrix<double, 7, 1>;
using StateMatrix = Eigen::Matrix<double, 7, 7>;
using Observation = Eigen::Matrix<double, 4, 1>;
using ObservationMatrix = Eigen::Matrix<double, 4, 4>;

/// Noise configuration for the box filter. Diagonals follow the SORT
/// convention: generous initial velocity uncertainty, slow process drift.
struct KalmanParams {
  StateVector p0_diag = (StateVector() << 10, 10, 10, 10, 1e4, 1e4, 1e4).finished();
  StateVector q_diag = (StateVector() << 1, 1, 1, 1e-2, 1e-2, 1e-2, 1e-4).finished();
  Observation r_diag = (Observation() << 1, 1, 10, 10).finished();
};

/// Constant-velocity box state: mean [u, v, s, r, du, dv, ds] where (u,v) is
/// the box center, s its area and r its aspect ratio (w/h, no velocity).
struct KalmanBoxState {
  StateVector mean = StateVector::Zero();
  StateMatrix covariance = StateMatrix::Zero();
};

/// Box -> observation [u, v, s, r]. Throws DegenerateBox for zero width or height.
Observation bbox_to_observation(const BBox& b);

/// Observation [u, v, s, r] -> box with w = sqrt(s*r), h = s/w.
/// Throws NonPositiveShape when s <= 0 or r <= 0.
BBox observation_to_bbox(const Observation& obs);

/// New state centered on an initial detection, covariance from params.
KalmanBoxState kalman_init(const Observation& z, const KalmanParams& params = {});

/// Advances the mean by the constant-velocity transition over dt sampled
/// steps (dt >= 1) and grows the covariance by F P F^T + dt*Q.
KalmanBoxState kalman_predict(const KalmanBoxState& st, int dt = 1,
                              const KalmanParams& params = {});

/// Standard linear correction on the four observed components. The posterior
/// covariance is re-symmetrized. Throws SingularInnovation when the
/// innovation covariance cannot be inverted.
KalmanBoxState kalman_update(const KalmanBoxState& st, const Observation& z,
                             const KalmanParams& params = {});

/// Box implied by the current state mean. Throws NonPositiveShape when the
/// state has non-positive area or aspect.
BBox state_bbox(const KalmanBoxState& st);

}  // namespace tw
