#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "mpmp/types.hpp"

namespace mpmp {

// Base Lissajous curve r(t) = (A_x sin(2 pi m_x t + phi_x), A_y sin(2 pi m_y t + phi_y)).
// Time is measured in scan periods.
struct LissajousParams {
  Vec2 amplitude{1.0, 1.0};
  int freq_x = 16;
  int freq_y = 17;
  double phase_x = std::numbers::pi / 2;
  double phase_y = std::numbers::pi / 2;
  int samples_per_period = 1632;

  void validate() const;
};

struct TrajectoryPoint {
  Vec2 position;
  Vec2 velocity;
};

TrajectoryPoint lissajous(const LissajousParams &p, double t);

Mat2 rotation(double angle);
// d/dt Q(alpha(t)) for angular rate alpha'.
Mat2 rotation_rate(double angle, double angle_rate);

// x' = offset + Q(angle) x, with optional time derivatives of both parts.
struct RigidMotion {
  Vec2 offset;
  double angle = 0.0;
  Vec2 offset_rate;
  double angle_rate = 0.0;

  Mat2 rotation() const { return mpmp::rotation(angle); }
  Mat2 rotation_rate() const { return mpmp::rotation_rate(angle, angle_rate); }
  friend bool operator==(const RigidMotion &, const RigidMotion &) = default;
};

// a after b: x -> a(b(x)), rates by the product rule.
RigidMotion compose(const RigidMotion &a, const RigidMotion &b);
RigidMotion inverse(const RigidMotion &m);

enum class MotionLaw { ConstantPerPatch, LinearSweep };

struct ScanPlan {
  LissajousParams base;
  MotionLaw law = MotionLaw::ConstantPerPatch;

  // ConstantPerPatch: offset/angle of each patch (rates are ignored).
  std::vector<RigidMotion> patches;
  double patch_duration = 1.0;
  double move_time = 1.0;

  // LinearSweep: b(t) moves uniformly from sweep_start to sweep_end over
  // sweep_periods scan periods while the angle stays at sweep_angle.
  Vec2 sweep_start;
  Vec2 sweep_end;
  double sweep_angle = 0.0;
  int sweep_periods = 0;

  std::size_t patch_count() const;
  double total_time() const;
  void validate() const;
};

// Offset and angle of the FoV at time t (with derivatives). Between patches the
// motion follows a C^1 smoothstep so the plan is constant on scanning intervals.
RigidMotion motion_at(const ScanPlan &plan, double t);

// Lambda(t) = b(t) + Q(t) r(t) and its exact derivative.
TrajectoryPoint generalized_trajectory(const ScanPlan &plan, double t);

struct ScanSample {
  double t = 0.0;
  int patch = 0;
  Vec2 s;
  Vec2 r;
  Vec2 v;
  friend bool operator==(const ScanSample &, const ScanSample &) = default;
};

struct SampleTime {
  double t;
  int patch;
};

// Sample instants of the plan: t_k = start + T k / L for k = 1..L on every
// scanning interval; nothing is sampled while moving between patches.
std::vector<SampleTime> sample_times(const ScanPlan &plan);

// Positions and velocities along the plan with zero signal; samples outside
// omega are dropped.
std::vector<ScanSample> sample_plan(const ScanPlan &plan, const Rect &omega);

ScanPlan make_grid_plan(const Rect &domain, const LissajousParams &base, int nx_patches,
                        int ny_patches);
ScanPlan make_random_plan(const Rect &domain, const LissajousParams &base, int count,
                          std::uint64_t seed);
ScanPlan make_sweep_plan(const Rect &domain, const LissajousParams &base, int periods);
ScanPlan perturb_plan(const ScanPlan &plan, double pos_frac, double angle_max,
                      std::uint64_t seed);

// Frame changes of phase-space samples. apply_motion maps a sample written in
// frame X into frame Y where x_Y = b + Q x_X; invert_motion is the inverse.
// Positions transform affinely, velocities pick up b' + Q' x, signals rotate.
ScanSample apply_motion(const RigidMotion &m, const ScanSample &in);
ScanSample invert_motion(const RigidMotion &m, const ScanSample &in);

// Frames move relative to the room as x_k = b_k + Q_k x_room. Returns the
// motion taking Omega coordinates to scanner coordinates
// (b_* = b_S - Q_S Q_O^T b_O, Q_* = Q_S Q_O^T).
RigidMotion relative_motion(const RigidMotion &scanner, const RigidMotion &omega);

// Trajectory of the FoV curve r (written in the FoV frame) seen from the scanner:
// b_S + Q_S Q_F^T (r - b_F), with its velocity.
TrajectoryPoint fov_trajectory_in_scanner(const TrajectoryPoint &r, const RigidMotion &scanner,
                                          const RigidMotion &fov);

std::vector<ScanSample> transform_to_omega_frame(std::span<const ScanSample> scanner_samples,
                                                 std::span<const RigidMotion> scanner_motion,
                                                 std::span<const RigidMotion> omega_motion);
std::vector<ScanSample> transform_to_scanner_frame(std::span<const ScanSample> omega_samples,
                                                   std::span<const RigidMotion> scanner_motion,
                                                   std::span<const RigidMotion> omega_motion);

std::vector<ScanSample> drop_outside(std::span<const ScanSample> samples, const Rect &omega);

}  // namespace mpmp
