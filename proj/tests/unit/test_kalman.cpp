#include <doctest.h>

#include <cmath>
#include <random>

#include "tunnelwatch/errors.hpp"
#include "tunnelwatch/kalman.hpp"

using tw::BBox;
using tw::KalmanBoxState;
using tw::KalmanParams;
using tw::Observation;

TEST_CASE("bbox_to_observation arithmetic") {
  Observation z = tw::bbox_to_observation(BBox{0, 0, 10, 10});
  CHECK(z(0) == 5.0);
  CHECK(z(1) == 5.0);
  CHECK(z(2) == 100.0);
  CHECK(z(3) == 1.0);

  z = tw::bbox_to_observation(BBox{0, 0, 20, 10});
  CHECK(z(0) == 10.0);
  CHECK(z(1) == 5.0);
  CHECK(z(2) == 200.0);
  CHECK(z(3) == 2.0);

  CHECK_THROWS_AS(tw::bbox_to_observation(BBox{0, 0, 0, 10}), tw::DegenerateBox);
  CHECK_THROWS_AS(tw::bbox_to_observation(BBox{0, 0, 10, 0}), tw::DegenerateBox);
}

TEST_CASE("observation_to_bbox arithmetic") {
  CHECK(tw::observation_to_bbox((Observation() << 5, 5, 100, 1).finished()) ==
        BBox{0, 0, 10, 10});

  // s=4, r=4: w = sqrt(16) = 4, h = 1.
  CHECK(tw::observation_to_bbox((Observation() << 0, 0, 4, 4).finished()) ==
        BBox{-2, -0.5, 2, 0.5});

  CHECK_THROWS_AS(tw::observation_to_bbox((Observation() << 0, 0, -1, 1).finished()),
                  tw::NonPositiveShape);
  CHECK_THROWS_AS(tw::observation_to_bbox((Observation() << 0, 0, 4, 0).finished()),
                  tw::NonPositiveShape);
}

TEST_CASE("box/observation round-trip") {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> coord(0.0, 300.0);
  std::uniform_real_distribution<double> side(0.5, 80.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = coord(rng), y = coord(rng), w = side(rng), h = side(rng);
    const BBox b{x, y, x + w, y + h};
    const BBox back = tw::observation_to_bbox(tw::bbox_to_observation(b));
    CHECK(std::abs(back.x_min - b.x_min) <= 1e-9);
    CHECK(std::abs(back.y_min - b.y_min) <= 1e-9);
    CHECK(std::abs(back.x_max - b.x_max) <= 1e-9);
    CHECK(std::abs(back.y_max - b.y_max) <= 1e-9);
  }
}

TEST_CASE("kalman_predict follows the constant-velocity recurrence") {
  KalmanBoxState st = tw::kalman_init(tw::bbox_to_observation(BBox{10, 20, 40, 50}));

  SUBCASE("zero velocity keeps the position") {
    const KalmanBoxState next = tw::kalman_predict(st);
    CHECK(next.mean(0) == st.mean(0));
    CHECK(next.mean(1) == st.mean(1));
    CHECK(next.mean(2) == st.mean(2));
    CHECK(next.mean(3) == st.mean(3));
  }

  SUBCASE("velocity advances the mean") {
    st.mean(4) = 2.0;
    const KalmanBoxState next = tw::kalman_predict(st, 1);
    CHECK(next.mean(0) == st.mean(0) + 2.0);
  }

  SUBCASE("covariance trace grows") {
    const KalmanBoxState next = tw::kalman_predict(st);
    CHECK(next.covariance.trace() >= st.covariance.trace());
  }

  SUBCASE("100 chained steps match the closed form to 1e-9") {
    st.mean(4) = 1.5;   // du
    st.mean(5) = -2.25; // dv
    st.mean(6) = 0.5;   // ds
    const tw::StateVector x0 = st.mean;
    KalmanBoxState cur = st;
    for (int k = 1; k <= 100; ++k) {
      cur = tw::kalman_predict(cur, 1);
      CHECK(std::abs(cur.mean(0) - (x0(0) + k * x0(4))) <= 1e-9);
      CHECK(std::abs(cur.mean(1) - (x0(1) + k * x0(5))) <= 1e-9);
      CHECK(std::abs(cur.mean(2) - (x0(2) + k * x0(6))) <= 1e-9);
      CHECK(cur.mean(3) == x0(3));  // aspect has no velocity
      CHECK(cur.mean(4) == x0(4));
      CHECK((cur.covariance - cur.covariance.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("kalman_update") {
  const Observation z0 = tw::bbox_to_observation(BBox{10, 20, 40, 50});
  KalmanBoxState st = tw::kalman_init(z0);

  SUBCASE("zero innovation leaves the mean unchanged") {
    const KalmanBoxState post = tw::kalman_update(st, z0);
    CHECK((post.mean - st.mean).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("posterior lies between prior and measurement componentwise") {
    Observation z = z0;
    z(0) += 8.0;
    z(1) -= 3.0;
    z(2) += 40.0;
    z(3) += 0.2;
    const KalmanBoxState post = tw::kalman_update(st, z);
    for (int i = 0; i < 4; ++i) {
      const double lo = std::min(st.mean(i), z(i));
      const double hi = std::max(st.mean(i), z(i));
      CHECK(post.mean(i) >= lo - 1e-12);
      CHECK(post.mean(i) <= hi + 1e-12);
    }
    CHECK((post.covariance - post.covariance.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  }

  SUBCASE("diagonal case matches the scalar gain formula") {
    KalmanParams params;
    params.p0_diag << 4, 9, 16, 25, 1, 1, 1;
    params.r_diag << 1, 3, 4, 100;
    KalmanBoxState diag_state = tw::kalman_init(z0, params);

    Observation z = z0;
    const Observation innovation = (Observation() << 10, 8, -4, 1).finished();
    z += innovation;
    const KalmanBoxState post = tw::kalman_update(diag_state, z, params);

    // K_i = p_i / (p_i + r_i) for independent components.
    const double gains[4] = {4.0 / 5.0, 9.0 / 12.0, 16.0 / 20.0, 25.0 / 125.0};
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(post.mean(i) - (diag_state.mean(i) + gains[i] * innovation(i))) <= 1e-12);
    }
  }

  SUBCASE("singular innovation covariance throws") {
    KalmanParams params;
    params.p0_diag.setZero();
    params.r_diag.setZero();
    const KalmanBoxState flat = tw::kalman_init(z0, params);
    CHECK_THROWS_AS(tw::kalman_update(flat, z0, params), tw::SingularInnovation);
  }
}

TEST_CASE("state_bbox reflects the mean") {
  const BBox b{10, 20, 40, 50};
  const KalmanBoxState st = tw::kalman_init(tw::bbox_to_observation(b));
  const BBox out = tw::state_bbox(st);
  CHECK(std::abs(out.x_min - b.x_min) <= 1e-9);
  CHECK(std::abs(out.y_max - b.y_max) <= 1e-9);
}
