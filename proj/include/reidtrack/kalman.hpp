// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "reidtrack/geometry.hpp"

namespace reidtrack {

/**
 * Constant-velocity Kalman filter over the box state
 * [cx, cy, s, r, vcx, vcy, vs], where s is the box area and r the aspect
 * ratio (w/h). r carries no velocity; everything else advances one frame
 * per predict. Units are pixels and pixels/frame.
 */
struct KalmanState {
    Eigen::Matrix<double, 7, 1> mean;
    Eigen::Matrix<double, 7, 7> cov;
};

/**
 * Noise configuration. Defaults keep a slow-moving pedestrian box stable:
 * measurement std of 1 px on center, 10 on area, 0.01 on aspect; process
 * noise at 1e-2 of each component's characteristic scale per frame. All
 * overridable through the pipeline config.
 */
struct KalmanConfig {
    // measurement standard deviations on [cx, cy, s, r]
    double meas_std_center = 1.0;
    double meas_std_area = 10.0;
    double meas_std_aspect = 0.01;
    // initial standard deviations at track birth
    double init_std_center = 2.0;
    double init_std_area = 20.0;
    double init_std_aspect = 0.1;
    double init_std_vel_center = 10.0;
    double init_std_vel_area = 100.0;
    // process noise as a fraction of component scale per frame
    double process_scale = 1e-2;
};

// Throws Errc::degenerate_box when b.w * b.h == 0.
KalmanState kf_init(const BBox& b, const KalmanConfig& cfg = {});

KalmanState kf_predict(const KalmanState& s, const KalmanConfig& cfg = {});

KalmanState kf_update(const KalmanState& s, const BBox& z,
                      const KalmanConfig& cfg = {});

// Back-conversion of the filtered mean to a box; degenerate states
// (non-positive area or aspect) collapse to a zero-size box at the center.
BBox state_bbox(const KalmanState& s);

} // namespace reidtrack
