#include "tunnelwatch/kalman.hpp"

#include <cmath>

#include "tunnelwatch/errors.hpp"

namespace tw {

namespace {

StateMatrix transition(int dt) {
  StateMatrix f = StateMatrix::Identity();
  f(0, 4) = dt;
  f(1, 5) = dt;
  f(2, 6) = dt;
  return f;
}

using ObservationModel = Eigen::Matrix<double, 4, 7>;

ObservationModel observation_model() {
  ObservationModel h = ObservationModel::Zero();
  h(0, 0) = 1;
  h(1, 1) = 1;
  h(2, 2) = 1;
  h(3, 3) = 1;
  return h;
}

}  // namespace

Observation bbox_to_observation(const BBox& b) {
  const double w = b.width();
  const double h = b.height();
  if (w <= 0.0 || h <= 0.0) {
    throw DegenerateBox("box must have positive width and height");
  }
  Observation z;
  z << b.center_x(), b.center_y(), w * h, w / h;
  return z;
}

BBox observation_to_bbox(const Observation& obs) {
  const double s = obs(2);
  const double r = obs(3);
  if (s <= 0.0 || r <= 0.0) {
    throw NonPositiveShape("area and aspect ratio must be positive");
  }
  const double w = std::sqrt(s * r);
  const double h = s / w;
  return BBox{obs(0) - 0.5 * w, obs(1) - 0.5 * h, obs(0) + 0.5 * w, obs(1) + 0.5 * h};
}

KalmanBoxState kalman_init(const Observation& z, const KalmanParams& params) {
  KalmanBoxState st;
  st.mean.head<4>() = z;
  st.covariance = params.p0_diag.asDiagonal();
  return st;
}

KalmanBoxState kalman_predict(const KalmanBoxState& st, int dt, const KalmanParams& params) {
  const StateMatrix f = transition(dt);
  KalmanBoxState out;
  out.mean = f * st.mean;
  out.covariance = f * st.covariance * f.transpose();
  out.covariance += (dt * params.q_diag).asDiagonal().toDenseMatrix();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

KalmanBoxState kalman_update(const KalmanBoxState& st, const Observation& z,
                             const KalmanParams& params) {
  const ObservationModel h = observation_model();
  const Observation innovation = z - h * st.mean;
  ObservationMatrix s = h * st.covariance * h.transpose();
  s += params.r_diag.asDiagonal().toDenseMatrix();

  const Eigen::FullPivLU<ObservationMatrix> lu(s);
  if (!lu.isInvertible()) {
    throw SingularInnovation("innovation covariance is numerically singular");
  }
  const Eigen::Matrix<double, 7, 4> gain = st.covariance * h.transpose() * lu.inverse();

  KalmanBoxState out;
  out.mean = st.mean + gain * innovation;
  out.covariance = (StateMatrix::Identity() - gain * h) * st.covariance;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

BBox state_bbox(const KalmanBoxState& st) {
  Observation z = st.mean.head<4>();
  return observation_to_bbox(z);
}

}  // namespace tw
