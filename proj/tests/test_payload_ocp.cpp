#include <cmath>

#include "cablelift/errors.hpp"
#include "cablelift/payload_ocp.hpp"
#include "cablelift/scenario_config.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cablelift;
using namespace testing_util;

namespace {

PayloadModel model() { return PayloadModel::from(default_system()); }

ReferencePoint hover_ref(const PayloadModel& m, const Vec3& p = Vec3(0, 0, 0.5)) {
  ReferencePoint r;
  r.p_des = p;
  r.wrench_des.force = -m.mass * m.gravity_vector();
  return r;
}

OcpState random_state() {
  OcpState x;
  x.position = random_vec(0.5);
  x.velocity = random_vec(0.5);
  x.attitude = quat_exp(random_vec(0.4));
  x.omega = random_vec(0.5);
  return x;
}

ReferencePoint random_ref() {
  ReferencePoint r;
  r.p_des = random_vec(0.5);
  r.v_des = random_vec(0.5);
  r.attitude_des = quat_exp(random_vec(0.4));
  r.omega_des = random_vec(0.5);
  r.wrench_des.force = random_vec(2.0);
  r.wrench_des.moment = random_vec(0.05);
  return r;
}

Matrix12d random_psd12() {
  Eigen::Matrix<double, 12, 12> A;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) A(i, j) = uniform(-1, 1);
  return A * A.transpose() + 0.1 * Matrix12d::Identity();
}

Matrix6d random_psd6() {
  Matrix6d A;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) A(i, j) = uniform(-1, 1);
  return A * A.transpose();
}

OcpProblem random_problem(int N, bool funnel) {
  OcpProblem p;
  p.N = N;
  p.dt = 0.05;
  p.model = model();
  p.x0 = random_state();
  for (int i = 0; i <= N; ++i) p.references.push_back(random_ref());
  p.weights.Q_X = random_psd12();
  p.weights.Q_U = random_psd6();
  p.weights.Q_XN = random_psd12();
  if (funnel) {
    Funnel f;
    f.weight = 50.0;
    for (int i = 0; i <= N; ++i) f.bound.push_back(uniform(0.05, 0.4));
    p.funnel = f;
  }
  return p;
}

}  // namespace

TEST_CASE("state_error") {
  const PayloadModel m = model();
  const ReferencePoint ref = hover_ref(m);
  OcpState x;
  x.position = ref.p_des;
  CHECK(state_error(x, ref) == Vector12d::Zero());

  x.position += Vec3(0.1, 0, 0);
  Vector12d expected = Vector12d::Zero();
  expected(0) = -0.1;
  CHECK((state_error(x, ref) - expected).norm() < 1e-15);

  x.position = ref.p_des;
  x.attitude = UnitQuaternion(Eigen::AngleAxisd(0.2, Vec3::UnitZ()));
  CHECK((state_error(x, ref).segment<3>(6) - Vec3(0, 0, 0.2)).norm() < 1e-12);
  CHECK(state_error(x, ref).head<6>().norm() == 0.0);
}

TEST_CASE("wrench_error") {
  const PayloadModel m = model();
  const ReferencePoint ref = hover_ref(m);
  CHECK(wrench_error(ref.wrench_des, ref) == Vector6d::Zero());
  Vector6d expected;
  expected << 0, 0, m.mass * m.gravity, 0, 0, 0;
  CHECK((wrench_error(Wrench{}, ref) - expected).norm() < 1e-15);
  for (int i = 0; i < 20; ++i) {
    const ReferencePoint r = random_ref();
    const Wrench u{random_vec(2), random_vec(0.1)};
    const Vector6d e = wrench_error(u, r);
    for (int c = 0; c < 3; ++c) {
      CHECK(e(c) == r.wrench_des.force(c) - u.force(c));
      CHECK(e(3 + c) == r.wrench_des.moment(c) - u.moment(c));
    }
  }
}

TEST_CASE("payload_dynamics") {
  const PayloadModel m = model();
  OcpState x;
  const Wrench hover{-m.mass * m.gravity_vector(), Vec3::Zero()};
  CHECK(payload_dynamics(x, hover, m).velocity.norm() < 1e-15);
  CHECK(payload_dynamics(x, Wrench{}, m).velocity == m.gravity_vector());
  const Wrench roll{Vec3::Zero(), Vec3(0.01, 0, 0)};
  const BodyDerivative d = payload_dynamics(x, roll, m);
  CHECK((d.omega - Vec3(0.01 / m.inertia(0, 0), 0, 0)).norm() < 1e-12);
}

TEST_CASE("discretize") {
  const PayloadModel m = model();
  const Wrench hover{-m.mass * m.gravity_vector(), Vec3::Zero()};
  OcpState x;
  x.position = Vec3(1, 2, 3);
  const OcpState y = discretize(x, hover, 0.1, m);
  CHECK((y.position - x.position).norm() < 1e-12);
  CHECK(y.velocity.norm() < 1e-12);

  const Wrench push{Vec3(m.mass, 0, 0) - m.mass * m.gravity_vector(), Vec3::Zero()};
  const OcpState z = discretize(x, push, 0.1, m);
  CHECK((z.velocity - Vec3(0.1, 0, 0)).norm() < 1e-9);
  CHECK((z.position - x.position - Vec3(0.005, 0, 0)).norm() < 1e-9);

  for (int i = 0; i < 50; ++i) {
    const OcpState s = discretize(random_state(), Wrench{random_vec(3), random_vec(0.05)}, 0.05, m);
    CHECK(std::abs(s.attitude.norm() - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(discretize(x, hover, 0.0, m), DomainError);
}

TEST_CASE("retract and difference are inverse") {
  for (int i = 0; i < 50; ++i) {
    const OcpState a = random_state(), b = random_state();
    const Vector12d d = difference(a, b);
    const OcpState c = retract(a, d);
    CHECK(difference(b, c).norm() < 1e-12);
  }
}

TEST_CASE("total_cost") {
  const PayloadModel m = model();
  SUBCASE("trajectory on the reference costs nothing") {
    OcpProblem p;
    p.N = 3;
    p.model = m;
    std::vector<OcpState> xs;
    std::vector<Wrench> us;
    for (int i = 0; i <= 3; ++i) {
      p.references.push_back(hover_ref(m, Vec3(0.1 * i, 0, 0.5)));
      OcpState s;
      s.position = p.references.back().p_des;
      xs.push_back(s);
      if (i < 3) us.push_back(p.references.back().wrench_des);
    }
    Funnel f;
    f.bound.assign(4, 0.2);
    p.funnel = f;
    CHECK(total_cost(xs, us, p) == 0.0);
    CHECK_THROWS_AS(total_cost(xs, std::vector<Wrench>(2), p), DimensionMismatch);
  }
  SUBCASE("single stage with identity weight is the squared norm") {
    OcpProblem p;
    p.N = 1;
    p.model = m;
    p.weights.Q_U.setZero();
    p.weights.Q_XN = 1e-300 * Matrix12d::Identity();
    p.references = {hover_ref(m), hover_ref(m)};
    OcpState x0;
    x0.position = Vec3(0.3, -0.1, 0.5);
    x0.velocity = Vec3(0.2, 0, 0);
    OcpState x1;
    x1.position = Vec3(0, 0, 0.5);
    const double expected = 0.3 * 0.3 + 0.1 * 0.1 + 0.2 * 0.2;
    CHECK(total_cost({x0, x1}, {Wrench{}}, p) == doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("summation oracle") {
    for (int trial = 0; trial < 10; ++trial) {
      const OcpProblem p = random_problem(4, true);
      std::vector<OcpState> xs;
      std::vector<Wrench> us;
      for (int i = 0; i <= 4; ++i) xs.push_back(random_state());
      for (int i = 0; i < 4; ++i) us.push_back({random_vec(3), random_vec(0.05)});
      double oracle = 0.0;
      for (int i = 0; i <= 4; ++i) {
        const auto& r = p.references[static_cast<std::size_t>(i)];
        const auto& x = xs[static_cast<std::size_t>(i)];
        Vector12d e;
        e << r.p_des - x.position, r.v_des - x.velocity,
            quat_log(x.attitude * r.attitude_des.conjugate()), r.omega_des - x.omega;
        oracle += e.transpose() * (i < 4 ? p.weights.Q_X : p.weights.Q_XN) * e;
        if (i < 4) {
          const auto& u = us[static_cast<std::size_t>(i)];
          Vector6d eu;
          eu << r.wrench_des.force - u.force, r.wrench_des.moment - u.moment;
          oracle += eu.transpose() * p.weights.Q_U * eu;
        }
        const double h = (x.position - r.p_des).norm() - p.funnel->bound[static_cast<std::size_t>(i)];
        if (h > 0) oracle += p.funnel->weight * h * h;
      }
      CHECK(total_cost(xs, us, p) == doctest::Approx(oracle).epsilon(1e-12));
      CHECK(total_cost(xs, us, p) >= 0.0);
    }
  }
}

TEST_CASE("cost gradient matches central finite differences") {
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const int N = 3;
    const OcpProblem p = random_problem(N, trial % 2 == 0);
    std::vector<OcpState> xs;
    std::vector<Wrench> us;
    for (int i = 0; i <= N; ++i) xs.push_back(random_state());
    for (int i = 0; i < N; ++i) us.push_back({random_vec(3), random_vec(0.05)});
    const Eigen::VectorXd g = cost_gradient(xs, us, p);
    Eigen::VectorXd fd = Eigen::VectorXd::Zero(g.size());
    for (int i = 0; i <= N; ++i) {
      for (int j = 0; j < kNx; ++j) {
        Vector12d d = Vector12d::Zero();
        d(j) = h;
        auto xp = xs, xm = xs;
        xp[static_cast<std::size_t>(i)] = retract(xs[static_cast<std::size_t>(i)], d);
        xm[static_cast<std::size_t>(i)] = retract(xs[static_cast<std::size_t>(i)], -d);
        fd(state_offset(i) + j) = (total_cost(xp, us, p) - total_cost(xm, us, p)) / (2 * h);
      }
      if (i == N) continue;
      for (int j = 0; j < kNu; ++j) {
        Vector6d d = Vector6d::Zero();
        d(j) = h;
        auto up = us, um = us;
        up[static_cast<std::size_t>(i)] = Wrench::from_vector(us[static_cast<std::size_t>(i)].vector() + d);
        um[static_cast<std::size_t>(i)] = Wrench::from_vector(us[static_cast<std::size_t>(i)].vector() - d);
        fd(input_offset(i) + j) = (total_cost(xs, up, p) - total_cost(xs, um, p)) / (2 * h);
      }
    }
    CHECK((g - fd).norm() <= 1e-4 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("build_ocp") {
  const PayloadModel m = model();
  OcpConfig cfg;
  cfg.N = 3;
  cfg.dt = 0.05;
  cfg.model = m;
  std::vector<ReferencePoint> window(4, hover_ref(m));
  OcpState x0;
  SUBCASE("shapes") {
    const OcpProblem p = build_ocp(x0, window, cfg);
    CHECK(p.references.size() == 4);
    CHECK(initial_guess(p).inputs.size() == 3);
    CHECK(initial_guess(p).states.size() == 4);
    CHECK_FALSE(p.obstacle.has_value());
    CHECK(obstacle_row(p, x0) == 0.0);
    CHECK_THROWS_AS(build_ocp(x0, std::vector<ReferencePoint>(3), cfg), ConfigError);
  }
  SUBCASE("hover tension margin") {
    const SystemParams sys = default_system();
    cfg.tension = TensionBound::from(build_allocation(sys.attachments), 1.5);
    const OcpProblem p = build_ocp(x0, window, cfg);
    const auto margins = tension_margins(p, 0, window[0].wrench_des);
    REQUIRE(margins.size() == 4);
    for (double mg : margins) CHECK(mg == doctest::Approx(1.5 - m.mass * m.gravity / 4).epsilon(1e-12));
    for (double r : tension_rows(p, 0, window[0].wrench_des)) CHECK(r < 0.0);
  }
  SUBCASE("funnel bounds sample the profile") {
    cfg.funnel = PiecewiseLinear({{0.0, 0.4}, {1.0, 0.2}});
    const OcpProblem p = build_ocp(x0, window, cfg, 0.5);
    REQUIRE(p.funnel.has_value());
    CHECK(p.funnel->bound[0] == doctest::Approx(0.3));
    CHECK(p.funnel->bound[2] == doctest::Approx(0.28));
  }
  SUBCASE("obstacle row equals the closed-form distance") {
    cfg.obstacle = Obstacle{Vec3(1, 0, 0.5), 0.3};
    const OcpProblem p = build_ocp(x0, window, cfg);
    for (int i = 0; i < 20; ++i) {
      OcpState x = random_state();
      const Vec3 d = x.position - Vec3(1, 0, 0.5);
      const double dist = std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z());
      CHECK(std::abs(obstacle_row(p, x) - (0.3 - dist)) < 1e-12);
    }
  }
}

TEST_CASE("CostWeights validation") {
  CostWeights w;
  CHECK_NOTHROW(w.validate());
  w.Q_XN(0, 0) = 0.0;
  CHECK_THROWS_AS(w.validate(), ConfigError);
  w = CostWeights{};
  w.Q_X(0, 1) = 0.5;
  CHECK_THROWS_AS(w.validate(), ConfigError);
  CHECK_NOTHROW(default_weights().validate());
}
