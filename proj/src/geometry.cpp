#include "mpmp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mpmp/rng.hpp"

namespace mpmp {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void LissajousParams::validate() const {
  if (!(amplitude.x > 0.0) || !(amplitude.y > 0.0))
    throw std::invalid_argument("Lissajous amplitudes must be positive");
  if (freq_x <= 0 || freq_y <= 0)
    throw std::invalid_argument("Lissajous frequencies must be positive integers");
  if (freq_x == freq_y)
    throw std::invalid_argument("Lissajous frequencies must differ");
  if (samples_per_period < 2)
    throw std::invalid_argument("need at least two samples per period");
}

TrajectoryPoint lissajous(const LissajousParams &p, double t) {
  const double wx = kTwoPi * p.freq_x;
  const double wy = kTwoPi * p.freq_y;
  const double ax = wx * t + p.phase_x;
  const double ay = wy * t + p.phase_y;
  return {{p.amplitude.x * std::sin(ax), p.amplitude.y * std::sin(ay)},
          {wx * p.amplitude.x * std::cos(ax), wy * p.amplitude.y * std::cos(ay)}};
}

Mat2 rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c, -s, s, c};
}

Mat2 rotation_rate(double angle, double angle_rate) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {-angle_rate * s, -angle_rate * c, angle_rate * c, -angle_rate * s};
}

RigidMotion compose(const RigidMotion &a, const RigidMotion &b) {
  const Mat2 qa = a.rotation();
  RigidMotion out;
  out.offset = a.offset + qa * b.offset;
  out.angle = a.angle + b.angle;
  out.offset_rate = a.offset_rate + a.rotation_rate() * b.offset + qa * b.offset_rate;
  out.angle_rate = a.angle_rate + b.angle_rate;
  return out;
}

RigidMotion inverse(const RigidMotion &m) {
  // x = Q^T (y - b)
  const Mat2 qt = m.rotation().transposed();
  const Mat2 qt_rate = m.rotation_rate().transposed();
  RigidMotion out;
  out.offset = -(qt * m.offset);
  out.angle = -m.angle;
  out.offset_rate = -(qt_rate * m.offset + qt * m.offset_rate);
  out.angle_rate = -m.angle_rate;
  return out;
}

std::size_t ScanPlan::patch_count() const {
  if (law == MotionLaw::LinearSweep) return static_cast<std::size_t>(std::max(sweep_periods, 0));
  return patches.size();
}

double ScanPlan::total_time() const {
  if (law == MotionLaw::LinearSweep) return sweep_periods * patch_duration;
  if (patches.empty()) return 0.0;
  const double n = static_cast<double>(patches.size());
  return n * patch_duration + (n - 1.0) * move_time;
}

void ScanPlan::validate() const {
  base.validate();
  if (!(patch_duration > 0.0)) throw std::invalid_argument("patch duration must be positive");
  if (law == MotionLaw::ConstantPerPatch) {
    if (patches.size() > 1 && !(move_time > 0.0))
      throw std::invalid_argument("inter-patch move time must be positive");
  } else if (sweep_periods < 1) {
    throw std::invalid_argument("sweep plan needs at least one period");
  }
}

RigidMotion motion_at(const ScanPlan &plan, double t) {
  const double total = plan.total_time();
  const double slack = 1e-12 * std::max(total, 1.0);
  if (!(t >= -slack && t <= total + slack))
    throw std::out_of_range("time " + std::to_string(t) + " outside plan [0, " +
                            std::to_string(total) + "]");
  t = std::clamp(t, 0.0, total);

  if (plan.law == MotionLaw::LinearSweep) {
    const double frac = t / total;
    RigidMotion m;
    m.offset = (1.0 - frac) * plan.sweep_start + frac * plan.sweep_end;
    m.offset_rate = (1.0 / total) * (plan.sweep_end - plan.sweep_start);
    m.angle = plan.sweep_angle;
    return m;
  }

  const double period = plan.patch_duration + plan.move_time;
  const auto last = static_cast<double>(plan.patches.size() - 1);
  const double xi = std::min(std::floor(t / period), last);
  const auto idx = static_cast<std::size_t>(xi);
  const double local = t - xi * period;
  const RigidMotion &here = plan.patches[idx];
  if (local <= plan.patch_duration || idx + 1 >= plan.patches.size())
    return {here.offset, here.angle, {}, 0.0};

  // Smoothstep 3s^2 - 2s^3 has zero slope at both ends, keeping b and alpha C^1.
  const RigidMotion &next = plan.patches[idx + 1];
  const double s = (local - plan.patch_duration) / plan.move_time;
  const double w = s * s * (3.0 - 2.0 * s);
  const double dw = 6.0 * s * (1.0 - s) / plan.move_time;
  RigidMotion m;
  m.offset = here.offset + w * (next.offset - here.offset);
  m.offset_rate = dw * (next.offset - here.offset);
  m.angle = here.angle + w * (next.angle - here.angle);
  m.angle_rate = dw * (next.angle - here.angle);
  return m;
}

TrajectoryPoint generalized_trajectory(const ScanPlan &plan, double t) {
  const RigidMotion m = motion_at(plan, t);
  const TrajectoryPoint r = lissajous(plan.base, t);
  const Mat2 q = m.rotation();
  return {m.offset + q * r.position,
          m.offset_rate + m.rotation_rate() * r.position + q * r.velocity};
}

std::vector<SampleTime> sample_times(const ScanPlan &plan) {
  std::vector<SampleTime> out;
  const int per = plan.base.samples_per_period;
  if (plan.law == MotionLaw::LinearSweep) {
    const long total = static_cast<long>(per) * plan.sweep_periods;
    const double span = plan.total_time();
    out.reserve(static_cast<std::size_t>(std::max(total, 0L)));
    for (long k = 1; k <= total; ++k)
      out.push_back({span * static_cast<double>(k) / static_cast<double>(total),
                     static_cast<int>((k - 1) / per)});
    return out;
  }
  out.reserve(plan.patches.size() * static_cast<std::size_t>(per));
  const double period = plan.patch_duration + plan.move_time;
  for (std::size_t xi = 0; xi < plan.patches.size(); ++xi) {
    const double start = static_cast<double>(xi) * period;
    for (int k = 1; k <= per; ++k)
      out.push_back({start + plan.patch_duration * k / per, static_cast<int>(xi)});
  }
  return out;
}

std::vector<ScanSample> sample_plan(const ScanPlan &plan, const Rect &omega) {
  plan.validate();
  std::vector<ScanSample> out;
  for (const SampleTime &st : sample_times(plan)) {
    const TrajectoryPoint p = generalized_trajectory(plan, st.t);
    if (!omega.contains(p.position)) continue;
    out.push_back({st.t, st.patch, {}, p.position, p.velocity});
  }
  return out;
}

ScanPlan make_grid_plan(const Rect &domain, const LissajousParams &base, int nx_patches,
                        int ny_patches) {
  if (!domain.valid()) throw std::invalid_argument("degenerate scan domain");
  if (nx_patches < 1 || ny_patches < 1)
    throw std::invalid_argument("grid plan needs at least one patch per axis");
  base.validate();
  const double ax = base.amplitude.x;
  const double ay = base.amplitude.y;
  if (nx_patches > 1 && !(domain.width() > 2.0 * ax))
    throw std::invalid_argument("domain too narrow for several patches along x");
  if (ny_patches > 1 && !(domain.height() > 2.0 * ay))
    throw std::invalid_argument("domain too narrow for several patches along y");

  auto centers = [](double lo, double hi, double amp, int n) {
    std::vector<double> c(static_cast<std::size_t>(n));
    if (n == 1) {
      c[0] = lo + 0.5 * (hi - lo);
      return c;
    }
    const double step = (hi - lo - 2.0 * amp) / (n - 1);
    for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = lo + amp + i * step;
    return c;
  };
  const auto cx = centers(domain.xmin, domain.xmax, ax, nx_patches);
  const auto cy = centers(domain.ymin, domain.ymax, ay, ny_patches);

  ScanPlan plan;
  plan.base = base;
  for (double x : cx)
    for (double y : cy) plan.patches.push_back({{x, y}, 0.0, {}, 0.0});
  return plan;
}

ScanPlan make_random_plan(const Rect &domain, const LissajousParams &base, int count,
                          std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("random plan needs at least one patch");
  if (!domain.valid()) throw std::invalid_argument("degenerate scan domain");
  base.validate();
  CounterRng rng(seed, 1);
  ScanPlan plan;
  plan.base = base;
  for (int k = 0; k < count; ++k) {
    const double x = rng.uniform(domain.xmin, domain.xmax);
    const double y = rng.uniform(domain.ymin, domain.ymax);
    const double a = rng.uniform(0.0, kTwoPi);
    plan.patches.push_back({{x, y}, a, {}, 0.0});
  }
  return plan;
}

ScanPlan make_sweep_plan(const Rect &domain, const LissajousParams &base, int periods) {
  if (!domain.valid()) throw std::invalid_argument("degenerate scan domain");
  base.validate();
  ScanPlan plan;
  plan.base = base;
  plan.law = MotionLaw::LinearSweep;
  const double yc = domain.center().y;
  plan.sweep_start = {domain.xmin - base.amplitude.x, yc};
  plan.sweep_end = {domain.xmax + base.amplitude.x, yc};
  plan.sweep_periods = periods;
  plan.validate();
  return plan;
}

ScanPlan perturb_plan(const ScanPlan &plan, double pos_frac, double angle_max,
                      std::uint64_t seed) {
  if (pos_frac < 0.0 || angle_max < 0.0)
    throw std::invalid_argument("perturbation magnitudes must be non-negative");
  ScanPlan out = plan;
  if (pos_frac == 0.0 && angle_max == 0.0) return out;
  CounterRng rng(seed, 2);
  const double dx = pos_frac * plan.base.amplitude.x;
  const double dy = pos_frac * plan.base.amplitude.y;
  for (RigidMotion &p : out.patches) {
    p.offset.x += rng.uniform(-dx, dx);
    p.offset.y += rng.uniform(-dy, dy);
    p.angle += rng.uniform(-angle_max, angle_max);
  }
  return out;
}

ScanSample apply_motion(const RigidMotion &m, const ScanSample &in) {
  const Mat2 q = m.rotation();
  ScanSample out = in;
  out.r = m.offset + q * in.r;
  out.v = m.offset_rate + m.rotation_rate() * in.r + q * in.v;
  out.s = q * in.s;
  return out;
}

ScanSample invert_motion(const RigidMotion &m, const ScanSample &in) {
  // Closed-form inverse of the block-triangular map [Q 0; Q' Q].
  const Mat2 qt = m.rotation().transposed();
  ScanSample out = in;
  out.r = qt * (in.r - m.offset);
  out.v = qt * (in.v - m.offset_rate - m.rotation_rate() * out.r);
  out.s = qt * in.s;
  return out;
}

RigidMotion relative_motion(const RigidMotion &scanner, const RigidMotion &omega) {
  return compose(scanner, inverse(omega));
}

TrajectoryPoint fov_trajectory_in_scanner(const TrajectoryPoint &r, const RigidMotion &scanner,
                                          const RigidMotion &fov) {
  const RigidMotion m = compose(scanner, inverse(fov));
  const Mat2 q = m.rotation();
  return {m.offset + q * r.position, m.offset_rate + m.rotation_rate() * r.position + q * r.velocity};
}

namespace {
void check_series(std::size_t n, std::size_t a, std::size_t b) {
  if (a != n || b != n)
    throw std::invalid_argument("motion series length does not match sample count");
}
}  // namespace

std::vector<ScanSample> transform_to_omega_frame(std::span<const ScanSample> scanner_samples,
                                                 std::span<const RigidMotion> scanner_motion,
                                                 std::span<const RigidMotion> omega_motion) {
  check_series(scanner_samples.size(), scanner_motion.size(), omega_motion.size());
  std::vector<ScanSample> out(scanner_samples.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = invert_motion(relative_motion(scanner_motion[k], omega_motion[k]), scanner_samples[k]);
  return out;
}

std::vector<ScanSample> transform_to_scanner_frame(std::span<const ScanSample> omega_samples,
                                                   std::span<const RigidMotion> scanner_motion,
                                                   std::span<const RigidMotion> omega_motion) {
  check_series(omega_samples.size(), scanner_motion.size(), omega_motion.size());
  std::vector<ScanSample> out(omega_samples.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = apply_motion(relative_motion(scanner_motion[k], omega_motion[k]), omega_samples[k]);
  return out;
}

std::vector<ScanSample> drop_outside(std::span<const ScanSample> samples, const Rect &omega) {
  std::vector<ScanSample> out;
  out.reserve(samples.size());
  for (const ScanSample &s : samples)
    if (omega.contains(s.r)) out.push_back(s);
  return out;
}

}  // namespace mpmp
