// SPDX-License-Identifier: Apache-2.0
#include "reidtrack/kalman.hpp"

#include <cmath>

namespace reidtrack {

namespace {

using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat7 = Eigen::Matrix<double, 7, 7>;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat47 = Eigen::Matrix<double, 4, 7>;

Mat7 transition() {
    Mat7 f = Mat7::Identity();
    f(0, 4) = 1.0; // cx += vcx
    f(1, 5) = 1.0; // cy += vcy
    f(2, 6) = 1.0; // s  += vs
    return f;
}

Mat47 observation() {
    Mat47 h = Mat47::Zero();
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    h(2, 2) = 1.0;
    h(3, 3) = 1.0;
    return h;
}

// Characteristic scale per state component; process noise std is
// cfg.process_scale times this.
Vec7 component_scale(const KalmanConfig& cfg) {
    Vec7 s;
    s << cfg.meas_std_center, cfg.meas_std_center, cfg.meas_std_area,
        cfg.meas_std_aspect, cfg.meas_std_center, cfg.meas_std_center,
        cfg.meas_std_area;
    return s;
}

void symmetrize(Mat7& m) { m = ((m + m.transpose()) * 0.5).eval(); }

Vec4 box_measurement(const BBox& b) {
    Vec4 z;
    const Point c = b.center();
    z << c.x, c.y, b.w * b.h, (b.h > 0.0 ? b.w / b.h : 0.0);
    return z;
}

} // namespace

KalmanState kf_init(const BBox& b, const KalmanConfig& cfg) {
    if (b.w * b.h <= 0.0) {
        throw Error(Errc::degenerate_box, "kf_init: box has zero area");
    }
    KalmanState s;
    s.mean.setZero();
    s.mean.head<4>() = box_measurement(b);
    Vec7 std0;
    std0 << cfg.init_std_center, cfg.init_std_center, cfg.init_std_area,
        cfg.init_std_aspect, cfg.init_std_vel_center, cfg.init_std_vel_center,
        cfg.init_std_vel_area;
    s.cov = std0.array().square().matrix().asDiagonal();
    return s;
}

KalmanState kf_predict(const KalmanState& s, const KalmanConfig& cfg) {
    const Mat7 f = transition();
    const Vec7 q_std = component_scale(cfg) * cfg.process_scale;
    const Mat7 q = q_std.array().square().matrix().asDiagonal();

    KalmanState out;
    out.mean = f * s.mean;
    out.cov = f * s.cov * f.transpose() + q;
    symmetrize(out.cov);
    return out;
}

KalmanState kf_update(const KalmanState& s, const BBox& z,
                      const KalmanConfig& cfg) {
    const Mat47 h = observation();
    Vec4 r_std;
    r_std << cfg.meas_std_center, cfg.meas_std_center, cfg.meas_std_area,
        cfg.meas_std_aspect;
    const Mat4 r = r_std.array().square().matrix().asDiagonal();

    const Vec4 innovation = box_measurement(z) - h * s.mean;
    const Mat4 innov_cov = h * s.cov * h.transpose() + r;
    const Eigen::Matrix<double, 7, 4> gain =
        s.cov * h.transpose() * innov_cov.llt().solve(Mat4::Identity());

    KalmanState out;
    out.mean = s.mean + gain * innovation;
    // Joseph form keeps the covariance PSD under rounding.
    const Mat7 ikh = Mat7::Identity() - gain * h;
    out.cov = ikh * s.cov * ikh.transpose() + gain * r * gain.transpose();
    symmetrize(out.cov);
    return out;
}

BBox state_bbox(const KalmanState& s) {
    const double cx = s.mean(0);
    const double cy = s.mean(1);
    const double area = s.mean(2);
    const double aspect = s.mean(3);
    if (area <= 0.0 || aspect <= 0.0) {
        return BBox{cx, cy, 0.0, 0.0};
    }
    const double w = std::sqrt(area * aspect);
    const double h = area / w;
    return BBox{cx - w / 2.0, cy - h / 2.0, w, h};
}

} // namespace reidtrack
