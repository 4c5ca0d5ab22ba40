#include "robust_gait/errors.hpp"
#include "robust_gait/footstep.hpp"

#include <doctest.h>

#include <cmath>

using namespace robust_gait;
using footstep::Side;

namespace
{

const footstep::HorizonTiming kLong{32, 8, 8};

void check_tiling(const footstep::FootstepPlanTemplate & t)
{
  REQUIRE(!t.steps.empty());
  CHECK(t.steps.front().start_index == 0);
  CHECK(t.steps.back().end_index == t.n_samples);
  for(std::size_t i = 1; i < t.steps.size(); ++i)
  {
    CHECK(t.steps[i].start_index == t.steps[i - 1].end_index);
    CHECK(t.steps[i].side != t.steps[i - 1].side);
    CHECK(t.steps[i].end_index > t.steps[i].start_index);
  }
}

} // namespace

TEST_SUITE("footstep")
{
  TEST_CASE("zero velocity steps in place")
  {
    const footstep::FootGeometry geom;
    const footstep::Support sup{{0.0, -0.1}, Side::right};
    const auto t = footstep::nominal_footsteps({0.0, 0.0}, geom, sup, 3, kLong);
    REQUIRE(t.steps.size() == 4);
    check_tiling(t);
    for(std::size_t i = 0; i < t.steps.size(); ++i)
    {
      CHECK(t.steps[i].nominal_pos.x() == 0.0);
      CHECK(t.steps[i].nominal_pos.y() == doctest::Approx(t.steps[i].side == Side::left ? 0.1 : -0.1));
    }
    CHECK(std::abs(t.steps[1].nominal_pos.y() - t.steps[0].nominal_pos.y()) == doctest::Approx(geom.step_width));
  }

  TEST_CASE("walking at 0.5 m/s")
  {
    const footstep::FootGeometry geom;
    const footstep::Support sup{{0.0, 0.1}, Side::left};
    const auto t = footstep::nominal_footsteps({0.5, 0.0}, geom, sup, 3, kLong);
    REQUIRE(t.steps.size() == 4);
    for(std::size_t i = 1; i < t.steps.size(); ++i)
      CHECK(t.steps[i].nominal_pos.x() - t.steps[i - 1].nominal_pos.x() == doctest::Approx(0.4));
    for(std::size_t i = 2; i < t.steps.size(); ++i)
      CHECK(t.steps[i].nominal_pos.x() - t.steps[i - 2].nominal_pos.x() == doctest::Approx(0.8));
  }

  TEST_CASE("tiling across timings")
  {
    const footstep::FootGeometry geom;
    for(int current = 0; current <= 16; ++current)
    {
      for(int n_steps = 1; n_steps <= 4; ++n_steps)
      {
        const footstep::HorizonTiming timing{16, current, 8};
        const auto t = footstep::nominal_footsteps({0.3, 0.05}, geom, {{0.2, -0.1}, Side::right}, n_steps, timing);
        CHECK(t.n_samples == 16);
        check_tiling(t);
        CHECK(t.n_free() <= n_steps);
      }
    }
  }

  TEST_CASE("mirror symmetry")
  {
    const footstep::FootGeometry geom;
    const Eigen::Vector2d v(0.3, 0.07);
    const footstep::Support sup{{0.1, 0.1}, Side::left};
    const footstep::Support mirrored{{0.1, -0.1}, Side::right};
    const auto a = footstep::nominal_footsteps(v, geom, sup, 3, kLong);
    const auto b = footstep::nominal_footsteps({v.x(), -v.y()}, geom, mirrored, 3, kLong);
    REQUIRE(a.steps.size() == b.steps.size());
    for(std::size_t i = 0; i < a.steps.size(); ++i)
    {
      CHECK(a.steps[i].side == footstep::other(b.steps[i].side));
      CHECK(a.steps[i].nominal_pos.x() == doctest::Approx(b.steps[i].nominal_pos.x()));
      CHECK(a.steps[i].nominal_pos.y() == doctest::Approx(-b.steps[i].nominal_pos.y()));
    }
    const auto ra = footstep::reachable_bounds({0.2, 0.3}, Side::left, geom);
    const auto rb = footstep::reachable_bounds({0.2, -0.3}, Side::right, geom);
    CHECK(ra.center.x() == rb.center.x());
    CHECK(ra.center.y() == doctest::Approx(-rb.center.y()));
  }

  TEST_CASE("support timeline")
  {
    const footstep::FootGeometry geom;
    const auto t = footstep::nominal_footsteps({0.3, 0.0}, geom, {{0.0, -0.1}, Side::right}, 2, {16, 5, 8});
    const auto tl = footstep::support_timeline(t, geom);
    REQUIRE(tl.size() == 16);
    for(int i = 0; i < 16; ++i)
    {
      const auto & step = t.steps[static_cast<std::size_t>(tl[static_cast<std::size_t>(i)].step)];
      CHECK(i >= step.start_index);
      CHECK(i < step.end_index);
      CHECK(tl[static_cast<std::size_t>(i)].polygon.center == step.nominal_pos);
      CHECK(tl[static_cast<std::size_t>(i)].polygon.half_extent == Eigen::Vector2d(geom.half_length, geom.half_width));
      CHECK(tl[static_cast<std::size_t>(i)].polygon.contains(step.nominal_pos));
    }
  }

  TEST_CASE("reachable box")
  {
    footstep::FootGeometry geom;
    geom.step_width = 0.2;
    const auto box = footstep::reachable_bounds({0.0, 0.0}, Side::left, geom);
    CHECK(box.center == Eigen::Vector2d(0.0, 0.2));
    CHECK(box.half_extent == Eigen::Vector2d(0.4, 0.15));

    // the nominal next step stays reachable for |v| up to half_extent / step_time
    const double vx_max = geom.reach_half_x / geom.step_time;
    const double vy_max = geom.reach_half_y / geom.step_time;
    for(int i = 0; i <= 10; ++i)
    {
      for(int j = 0; j <= 10; ++j)
      {
        const Eigen::Vector2d v(-vx_max + 2 * vx_max * i / 10.0, -vy_max + 2 * vy_max * j / 10.0);
        for(Side side : {Side::left, Side::right})
        {
          const footstep::Support sup{{0.3, 0.1}, side};
          const auto t = footstep::nominal_footsteps(v, geom, sup, 1, kLong);
          const auto b = footstep::reachable_bounds(sup.pos, t.steps[1].side, geom);
          CHECK(b.contains(t.steps[1].nominal_pos, 1e-12));
        }
      }
    }
  }

  TEST_CASE("zmp reference")
  {
    const footstep::FootGeometry geom;
    const auto t = footstep::nominal_footsteps({0.3, 0.0}, geom, {{0.0, -0.1}, Side::right}, 2, {16, 3, 8});
    const Eigen::MatrixX2d z = footstep::nominal_zmp_reference(t);
    REQUIRE(z.rows() == 16);
    for(const auto & s : t.steps)
      for(int i = s.start_index; i < s.end_index; ++i) CHECK(z.row(i).transpose() == s.nominal_pos);

    // a single support step gives a constant reference
    const auto single = footstep::nominal_footsteps({0.3, 0.0}, geom, {{0.5, 0.1}, Side::left}, 1, {16, 16, 8});
    CHECK(single.n_free() == 0);
    const Eigen::MatrixX2d zs = footstep::nominal_zmp_reference(single);
    for(int i = 0; i < 16; ++i) CHECK(zs.row(i) == Eigen::RowVector2d(0.5, 0.1));

    // the linear map is a selection: exactly one unit entry per row
    const auto map = footstep::zmp_reference(t);
    for(int i = 0; i < 16; ++i) CHECK(map.fixed_column[i] + map.selection.row(i).sum() == 1.0);
  }

  TEST_CASE("invalid inputs")
  {
    footstep::FootGeometry geom;
    CHECK_THROWS_AS(footstep::nominal_footsteps({0, 0}, geom, {}, 0, kLong), InvalidParameter);
    geom.step_time = 0.75;
    CHECK_THROWS_AS(geom.validate(0.1), InvalidParameter);
  }
}
