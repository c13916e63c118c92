#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "mpmp/geometry.hpp"
#include "mpmp/rng.hpp"

using namespace mpmp;
using std::numbers::pi;

namespace {

LissajousParams params(Vec2 amp, int mx, int my, double px, double py) {
  LissajousParams p;
  p.amplitude = amp;
  p.freq_x = mx;
  p.freq_y = my;
  p.phase_x = px;
  p.phase_y = py;
  return p;
}

RigidMotion random_motion(CounterRng &rng) {
  return {{rng.uniform(-3, 3), rng.uniform(-3, 3)}, rng.uniform(-pi, pi),
          {rng.uniform(-2, 2), rng.uniform(-2, 2)}, rng.uniform(-5, 5)};
}

ScanSample random_sample(CounterRng &rng) {
  return {rng.uniform(), 0, {rng.uniform(-1, 1), rng.uniform(-1, 1)},
          {rng.uniform(-2, 2), rng.uniform(-2, 2)}, {rng.uniform(-50, 50), rng.uniform(-50, 50)}};
}

void check_close(const ScanSample &a, const ScanSample &b, double tol) {
  CHECK(std::abs(a.r.x - b.r.x) <= tol);
  CHECK(std::abs(a.r.y - b.r.y) <= tol);
  CHECK(std::abs(a.v.x - b.v.x) <= tol);
  CHECK(std::abs(a.v.y - b.v.y) <= tol);
  CHECK(std::abs(a.s.x - b.s.x) <= tol);
  CHECK(std::abs(a.s.y - b.s.y) <= tol);
}

}  // namespace

TEST_CASE("lissajous closed form") {
  auto a = lissajous(params({1, 1}, 16, 17, 0, 0), 0.0);
  CHECK(a.position.x == 0.0);
  CHECK(a.position.y == 0.0);
  CHECK(a.velocity.x == doctest::Approx(32 * pi).epsilon(1e-15));
  CHECK(a.velocity.y == doctest::Approx(34 * pi).epsilon(1e-15));

  auto b = lissajous(params({1, 1}, 16, 17, pi / 2, pi / 2), 0.0);
  CHECK(b.position.x == 1.0);
  CHECK(b.position.y == 1.0);
  CHECK(std::abs(b.velocity.x) < 1e-13);
  CHECK(std::abs(b.velocity.y) < 1e-13);

  auto c = lissajous(params({2, 1}, 3, 2, 0, 0), 0.25);
  CHECK(c.position.x == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(std::abs(c.position.y) < 1e-14);
}

TEST_CASE("lissajous stays inside its amplitudes and velocity is the derivative") {
  auto p = params({0.7, 1.3}, 16, 17, pi / 2, pi / 2);
  for (int k = 0; k < 500; ++k) {
    const double t = k / 499.0;
    auto q = lissajous(p, t);
    CHECK(std::abs(q.position.x) <= 0.7);
    CHECK(std::abs(q.position.y) <= 1.3);
    const double e = 1e-6;
    auto fp = lissajous(p, t + e), fm = lissajous(p, t - e);
    CHECK((fp.position.x - fm.position.x) / (2 * e) ==
          doctest::Approx(q.velocity.x).epsilon(1e-6).scale(100));
    CHECK((fp.position.y - fm.position.y) / (2 * e) ==
          doctest::Approx(q.velocity.y).epsilon(1e-6).scale(100));
  }
}

TEST_CASE("lissajous parameter validation") {
  LissajousParams p;
  p.freq_y = p.freq_x;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = LissajousParams{};
  p.amplitude.x = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = LissajousParams{};
  p.samples_per_period = 1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("rotation matrices are orthogonal with unit determinant") {
  CounterRng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const Mat2 q = rotation(rng.uniform(-10, 10));
    const Mat2 qtq = q.transposed() * q;
    CHECK(std::abs(qtq.a11 - 1) <= 1e-14);
    CHECK(std::abs(qtq.a22 - 1) <= 1e-14);
    CHECK(std::abs(qtq.a12) <= 1e-14);
    CHECK(std::abs(qtq.a21) <= 1e-14);
    CHECK(std::abs(q.det() - 1) <= 1e-14);
  }
}

TEST_CASE("rotation rate is the time derivative of the rotation") {
  const double a = 0.7, rate = 2.5, e = 1e-6;
  const Mat2 fd = (1.0 / (2 * e)) * (rotation(a + rate * e) - rotation(a - rate * e));
  const Mat2 exact = rotation_rate(a, rate);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) CHECK(fd(p, q) == doctest::Approx(exact(p, q)).epsilon(1e-8));
}

TEST_CASE("generalized trajectory with identity motion is the base curve") {
  ScanPlan plan;
  plan.patches = {RigidMotion{}};
  for (double t : {0.0, 0.13, 0.5, 0.99}) {
    auto g = generalized_trajectory(plan, t);
    auto r = lissajous(plan.base, t);
    CHECK(g.position == r.position);
    CHECK(g.velocity == r.velocity);
  }
}

TEST_CASE("generalized trajectory with a quarter turn and shift") {
  ScanPlan plan;
  plan.patches = {RigidMotion{{1, 0}, pi / 2, {}, 0}};
  for (double t : {0.0, 0.21, 0.77}) {
    auto g = generalized_trajectory(plan, t);
    auto r = lissajous(plan.base, t);
    CHECK(g.position.x == doctest::Approx(1 - r.position.y).epsilon(1e-14));
    CHECK(g.position.y == doctest::Approx(r.position.x).epsilon(1e-14));
  }
}

TEST_CASE("generalized trajectory rejects times outside the plan") {
  ScanPlan plan;
  plan.patches = {RigidMotion{}, RigidMotion{{1, 0}, 0, {}, 0}};
  CHECK_THROWS_AS(generalized_trajectory(plan, -0.1), std::out_of_range);
  CHECK_THROWS_AS(generalized_trajectory(plan, plan.total_time() + 0.1), std::out_of_range);
}

TEST_CASE("sweep plan velocity carries the constant drift") {
  const Rect omega{-1, 1, -1, 1};
  LissajousParams base;
  base.amplitude = {0.25, 1.0};
  ScanPlan plan = make_sweep_plan(omega, base, 40);
  const double T = plan.total_time();
  const double drift = (omega.xmax - omega.xmin + 2 * base.amplitude.x) / T;
  for (double t : {0.3, 7.1, 22.45}) {
    auto g = generalized_trajectory(plan, t);
    auto r = lissajous(base, t);
    CHECK(g.velocity.x == doctest::Approx(drift + r.velocity.x).epsilon(1e-12));
    CHECK(g.velocity.y == doctest::Approx(r.velocity.y).epsilon(1e-12));
  }
  CHECK(motion_at(plan, 0).offset.x == doctest::Approx(omega.xmin - 0.25));
  CHECK(motion_at(plan, T).offset.x == doctest::Approx(omega.xmax + 0.25));
}

TEST_CASE("velocity matches central differences along plans") {
  const Rect omega{-2, 2, -2, 2};
  LissajousParams base;
  std::vector<ScanPlan> plans = {make_grid_plan(omega, base, 2, 2),
                                 make_random_plan(omega, base, 5, 11),
                                 make_sweep_plan(omega, base, 3)};
  const double e = 1e-5;
  for (const ScanPlan &plan : plans) {
    CounterRng rng(8);
    for (int k = 0; k < 200; ++k) {
      const double t = rng.uniform(e, plan.total_time() - e);
      auto g = generalized_trajectory(plan, t);
      auto fp = generalized_trajectory(plan, t + e);
      auto fm = generalized_trajectory(plan, t - e);
      const Vec2 fd = (1.0 / (2 * e)) * (fp.position - fm.position);
      CHECK(norm(fd - g.velocity) <= 1e-6 * std::max(1.0, norm(g.velocity)));
    }
  }
}

TEST_CASE("constant-per-patch plans are constant on scanning intervals") {
  ScanPlan plan = make_grid_plan({-2, 2, -2, 2}, LissajousParams{}, 3, 3);
  const double period = plan.patch_duration + plan.move_time;
  for (std::size_t xi = 0; xi < plan.patches.size(); ++xi)
    for (double f : {0.0, 0.3, 1.0}) {
      const RigidMotion m = motion_at(plan, xi * period + f * plan.patch_duration);
      CHECK(m.offset == plan.patches[xi].offset);
      CHECK(m.angle == plan.patches[xi].angle);
      CHECK(m.offset_rate == Vec2{});
      CHECK(m.angle_rate == 0.0);
    }
}

TEST_CASE("grid plan offsets") {
  LissajousParams base;
  SUBCASE("2x2 tiles the domain") {
    ScanPlan plan = make_grid_plan({-2, 2, -2, 2}, base, 2, 2);
    REQUIRE(plan.patches.size() == 4);
    std::set<std::pair<double, double>> got;
    for (auto &p : plan.patches) {
      got.insert({p.offset.x, p.offset.y});
      CHECK(p.angle == 0.0);
    }
    CHECK(got == std::set<std::pair<double, double>>{{-1, -1}, {-1, 1}, {1, -1}, {1, 1}});
    // FoV boxes b + [-1,1]^2 cover [-2,2]^2 with disjoint interiors.
    CounterRng rng(5);
    for (int k = 0; k < 2000; ++k) {
      Vec2 x{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      int inside = 0;
      for (auto &p : plan.patches)
        if (std::abs(x.x - p.offset.x) < 1 && std::abs(x.y - p.offset.y) < 1) ++inside;
      CHECK(inside == 1);
    }
  }
  SUBCASE("10x10 spacing") {
    ScanPlan plan = make_grid_plan({-2, 2, -2, 2}, base, 10, 10);
    REQUIRE(plan.patches.size() == 100);
    CHECK(plan.patches[1].offset.y - plan.patches[0].offset.y == doctest::Approx(2.0 / 9.0));
    CHECK(plan.patches[10].offset.x - plan.patches[0].offset.x == doctest::Approx(2.0 / 9.0));
    CHECK(plan.patches.front().offset.x == doctest::Approx(-1.0));
    CHECK(plan.patches.back().offset.x == doctest::Approx(1.0));
  }
  SUBCASE("single patch is centered") {
    ScanPlan plan = make_grid_plan({-1, 1, -1, 1}, base, 1, 1);
    REQUIRE(plan.patches.size() == 1);
    CHECK(plan.patches[0].offset == Vec2{0, 0});
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(make_grid_plan({1, -1, -1, 1}, base, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid_plan({-1, 1, -1, 1}, base, 2, 2), std::invalid_argument);
  }
}

TEST_CASE("random plan is deterministic and uniform") {
  const Rect omega{-2, 2, -2, 2};
  LissajousParams base;
  auto a = make_random_plan(omega, base, 1, 77);
  auto b = make_random_plan(omega, base, 1, 77);
  CHECK(a.patches == b.patches);
  CHECK(make_random_plan(omega, base, 143, 1).patches.size() == 143);

  auto big = make_random_plan(omega, base, 1000, 77);
  Vec2 mean;
  for (auto &p : big.patches) {
    mean += p.offset;
    CHECK(omega.contains(p.offset));
    CHECK(p.angle >= 0.0);
    CHECK(p.angle < 2 * pi);
  }
  mean = (1.0 / 1000) * mean;
  const double sigma = 4.0 / std::sqrt(12.0) / std::sqrt(1000.0);
  CHECK(std::abs(mean.x) <= 3 * sigma);
  CHECK(std::abs(mean.y) <= 3 * sigma);
}

TEST_CASE("perturbation") {
  LissajousParams base;
  auto plan = make_grid_plan({-2, 2, -2, 2}, base, 4, 4);
  CHECK(perturb_plan(plan, 0, 0, 9).patches == plan.patches);

  for (double frac : {0.01, 0.1}) {
    const double amax = frac * 2 * pi;
    auto p = perturb_plan(plan, frac, amax, 9);
    CHECK(p.patches == perturb_plan(plan, frac, amax, 9).patches);
    CHECK(p.patches != plan.patches);
    for (std::size_t k = 0; k < p.patches.size(); ++k) {
      CHECK(std::abs(p.patches[k].offset.x - plan.patches[k].offset.x) <= frac * base.amplitude.x);
      CHECK(std::abs(p.patches[k].offset.y - plan.patches[k].offset.y) <= frac * base.amplitude.y);
      CHECK(std::abs(p.patches[k].angle - plan.patches[k].angle) <= amax);
    }
  }
  CHECK_THROWS_AS(perturb_plan(plan, -1, 0, 1), std::invalid_argument);
}

TEST_CASE("sampling drops points outside omega and never samples while moving") {
  LissajousParams base;
  base.samples_per_period = 100;
  const Rect omega{-2, 2, -2, 2};
  auto plan = make_random_plan(omega, base, 20, 3);
  auto times = sample_times(plan);
  CHECK(times.size() == 2000);
  const double period = plan.patch_duration + plan.move_time;
  for (auto &st : times) {
    const double local = st.t - st.patch * period;
    CHECK(local > 0.0);
    CHECK(local <= plan.patch_duration + 1e-12);
  }
  auto samples = sample_plan(plan, omega);
  CHECK(samples.size() < times.size());
  for (auto &s : samples) CHECK(omega.contains(s.r));
}

TEST_CASE("composition and inverse of rigid motions") {
  CounterRng rng(21);
  for (int k = 0; k < 200; ++k) {
    const RigidMotion a = random_motion(rng), b = random_motion(rng);
    const ScanSample x = random_sample(rng);
    check_close(apply_motion(compose(a, b), x), apply_motion(a, apply_motion(b, x)), 1e-10);
    check_close(apply_motion(inverse(a), apply_motion(a, x)), x, 1e-11);
  }
}

TEST_CASE("frame transforms") {
  CounterRng rng(4);
  SUBCASE("identity frames leave samples unchanged") {
    std::vector<ScanSample> in{random_sample(rng), random_sample(rng)};
    std::vector<RigidMotion> id(2);
    auto out = transform_to_omega_frame(in, id, id);
    CHECK(out == in);
  }
  SUBCASE("round trip over random motions") {
    const int n = 1000;
    std::vector<ScanSample> in;
    std::vector<RigidMotion> scanner, omega;
    for (int k = 0; k < n; ++k) {
      in.push_back(random_sample(rng));
      scanner.push_back(random_motion(rng));
      omega.push_back(random_motion(rng));
    }
    auto there = transform_to_scanner_frame(in, scanner, omega);
    auto back = transform_to_omega_frame(there, scanner, omega);
    for (int k = 0; k < n; ++k) check_close(back[k], in[k], 1e-12);
  }
  SUBCASE("specimen translation shifts positions") {
    ScanSample s{0, 0, {0.3, 0.1}, {0.5, -0.25}, {2, 3}};
    std::vector<ScanSample> in{s};
    std::vector<RigidMotion> scanner(1), omega{RigidMotion{{1, 0}, 0, {}, 0}};
    auto out = transform_to_omega_frame(in, scanner, omega);
    CHECK(out[0].r == Vec2{1.5, -0.25});
    CHECK(out[0].v == s.v);
    CHECK(out[0].s == s.s);
  }
  SUBCASE("mismatched series") {
    std::vector<ScanSample> in(3);
    std::vector<RigidMotion> two(2), three(3);
    CHECK_THROWS_AS(transform_to_omega_frame(in, two, three), std::invalid_argument);
  }
}

TEST_CASE("fov trajectory seen from a moving scanner") {
  // Scanner and FoV frames both identity: the curve is unchanged.
  TrajectoryPoint r{{0.2, 0.4}, {1, -1}};
  auto same = fov_trajectory_in_scanner(r, RigidMotion{}, RigidMotion{});
  CHECK(same.position == r.position);
  CHECK(same.velocity == r.velocity);
  // FoV offset by b_F: positions are shifted back by b_F.
  auto shifted = fov_trajectory_in_scanner(r, RigidMotion{}, RigidMotion{{1, 2}, 0, {}, 0});
  CHECK(shifted.position.x == doctest::Approx(-0.8));
  CHECK(shifted.position.y == doctest::Approx(-1.6));
}
