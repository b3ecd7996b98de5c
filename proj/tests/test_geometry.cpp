#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "entgeo/geometry.hpp"
#include "entgeo/rng.hpp"

using namespace entgeo;

TEST_CASE("hyperbolic rate endpoints") {
  const CriticalParams crit;
  REQUIRE(rho_ads(0.0, 8.0, crit) == 0.0);
  REQUIRE(rho_ads(-1e9, 8.0, crit) == Catch::Approx(crit.rho_c).margin(1e-4));
  // frozen from an independent 40-digit evaluation of
  // rho_c (1 - 2^(-1/1.3)) at l = 8, t = -8
  REQUIRE(rho_ads(-8.0, 8.0, crit) ==
          Catch::Approx(0.0847203028495257949).epsilon(1e-14));
  // monotone toward the past
  double prev = rho_ads(0.0, 4.0, crit);
  for (double t = -1; t > -100; t -= 1) {
    const double r = rho_ads(t, 4.0, crit);
    REQUIRE(r >= prev);
    prev = r;
  }
  // l = 0 degenerates to the uniform critical circuit
  REQUIRE(rho_ads(-3.0, 0.0, crit) == crit.rho_c);
  REQUIRE(rho_ads(0.0, 0.0, crit) == 0.0);
}

TEST_CASE("BTZ depth from the aspect ratio") {
  REQUIRE(btz_depth(512, 0.5, 0.5) == 128);
  REQUIRE(btz_depth(128, 0.7, 0.7) == 32);
  REQUIRE(btz_depth(100, 2.0, 1.0) == 50);
  REQUIRE_THROWS_AS(btz_depth(2, 0.1, 100.0), std::invalid_argument);
}

TEST_CASE("time-radius maps invert each other") {
  REQUIRE(btz_time_of_radius(0.5, 64.0, 0.5) == Catch::Approx(-64.0));
  REQUIRE(btz_radius_of_time(-64.0, 64.0, 0.5) == Catch::Approx(0.5));
  Rng rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const double r_h = 0.1 + 2.0 * uniform01(rng);
    const double T = 8.0 + 120.0 * uniform01(rng);
    const double t = -T + (T - 1e-3) * uniform01(rng);
    const double r = btz_radius_of_time(t, T, r_h);
    REQUIRE(std::fabs(btz_time_of_radius(r, T, r_h) - t) <
            1e-10 * std::max(1.0, std::fabs(t)));
  }
  REQUIRE_THROWS_AS(btz_radius_of_time(0.0, 10.0, 0.5), std::domain_error);
  REQUIRE_THROWS_AS(btz_radius_of_time(-11.0, 10.0, 0.5), std::domain_error);
  REQUIRE_THROWS_AS(btz_time_of_radius(0.4, 10.0, 0.5), std::domain_error);
}

TEST_CASE("entropy density of the black-hole slice") {
  const double l = 0.5, T = 64.0;
  REQUIRE(entropy_density_btz(-T, l, T) ==
          Catch::Approx(M_PI * l / (2 * T)).epsilon(1e-12));
  REQUIRE(entropy_density_btz(-T / 3.0, l, T) ==
          Catch::Approx(M_PI * l / T).epsilon(1e-12));
  REQUIRE_THROWS_AS(entropy_density_btz(0.0, l, T), std::domain_error);
  // near-boundary form l/|t| within 1% for |t| < T/20
  for (double t = -T / 20.0; t < -0.05; t += 0.1) {
    const double s = entropy_density_btz(t, l, T);
    const double approx = l / std::fabs(t);
    REQUIRE(std::fabs(s - approx) / approx < 0.01);
  }
}

TEST_CASE("rate from density clamps at the transition") {
  const CriticalParams crit;
  REQUIRE(rho_from_density(0.0, crit) == crit.rho_c);
  const double boundary = std::pow(crit.rho_c, crit.nu);
  REQUIRE(rho_from_density(boundary, crit) == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(rho_from_density(boundary * 10, crit) == 0.0);
  REQUIRE_THROWS_AS(rho_from_density(-0.1, crit), std::domain_error);
}

TEST_CASE("schedule construction") {
  const CriticalParams crit;
  SECTION("uniform fills the grid with the constant") {
    const auto s = build_schedule(MetricSpec::uniform(0.16), 16, crit, 8);
    REQUIRE(s.T == 8);
    for (std::size_t k = 0; k < s.T; ++k)
      for (std::size_t x = 0; x < 16; ++x) REQUIRE(s.rate(x, k) == 0.16);
    REQUIRE_THROWS_AS(build_schedule(MetricSpec::uniform(0.2), 16, crit),
                      std::invalid_argument);
  }
  SECTION("hyperbolic schedule spans critical to zero") {
    const std::size_t L = 64;
    const auto s = build_schedule(MetricSpec::ads(4.0), L, crit);
    REQUIRE(s.T == 4 * L);
    REQUIRE(s.rate(0, s.T - 1) < 0.05);            // t close to 0
    REQUIRE(std::fabs(s.rate(0, 0) - crit.rho_c) < 0.005);  // deep past
    for (std::size_t k = 1; k < s.T; ++k)
      REQUIRE(s.layer_rate[k] <= s.layer_rate[k - 1]);
  }
  SECTION("BTZ schedule composes the audited pieces") {
    const std::size_t L = 512;
    const auto s = build_schedule(MetricSpec::btz(0.5, 0.5), L, crit);
    REQUIRE(s.T == 128);
    const double horizon =
        rho_from_density(entropy_density_btz(s.layer_time(0), 0.5, 128.0),
                         crit);
    REQUIRE(s.rate(0, 0) == Catch::Approx(horizon).epsilon(1e-12));
    // maximal on the horizon slice, non-increasing toward the boundary
    for (std::size_t k = 1; k < s.T; ++k)
      REQUIRE(s.layer_rate[k] <= s.layer_rate[k - 1] + 1e-15);
  }
  SECTION("layer midpoints stay strictly inside (-T, 0)") {
    const auto s = build_schedule(MetricSpec::ads(1.0), 8, crit, 16);
    REQUIRE(s.layer_time(0) == Catch::Approx(-15.5));
    REQUIRE(s.layer_time(15) == Catch::Approx(-0.5));
  }
}

TEST_CASE("schedule serializes to CSV") {
  const auto s = build_schedule(MetricSpec::uniform(0.25), 2, {}, 2);
  std::ostringstream os;
  s.write_csv(os);
  REQUIRE(os.str() ==
          "t_layer,x_site,rho\n0,0,0.25\n0,1,0.25\n1,0,0.25\n1,1,0.25\n");
}

TEST_CASE("BTZ geodesic distance") {
  const GeodesicModel m = GeodesicModel::btz(1.0, 1.0, 0.5);
  REQUIRE(geodesic_distance_btz(0.3, 0.3, m) == 0.0);
  // frozen from a 40-digit wide-window winding minimization at
  // r = 2 r_h, r_h = 0.5, dphi = pi
  REQUIRE(geodesic_distance_btz(0.0, M_PI, m) ==
          Catch::Approx(2.6392008556692742).epsilon(1e-13));
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const double p1 = 2 * M_PI * uniform01(rng);
    const double p2 = 2 * M_PI * uniform01(rng);
    const double d12 = geodesic_distance_btz(p1, p2, m);
    REQUIRE(d12 == Catch::Approx(geodesic_distance_btz(p2, p1, m)));
    REQUIRE(geodesic_distance_btz(0.0, p1, m) ==
            Catch::Approx(geodesic_distance_btz(0.0, 2 * M_PI - p1, m))
                .margin(1e-9));
    // triangle inequality on boundary triples
    const double p3 = 2 * M_PI * uniform01(rng);
    const double d13 = geodesic_distance_btz(p1, p3, m);
    const double d23 = geodesic_distance_btz(p2, p3, m);
    REQUIRE(d12 <= d13 + d23 + 1e-9);
  }
  // reducing the angle plus the three-way winding minimum equals a wide scan
  for (int trial = 0; trial < 200; ++trial) {
    const double dphi = 40.0 * (uniform01(rng) - 0.5);
    double wide = HUGE_VAL;
    for (int n = -10; n <= 10; ++n) {
      const double arg =
          4.0 * (std::cosh(0.5 * (dphi + 2 * M_PI * n)) - 1.0) + 1.0;
      wide = std::min(wide, std::acosh(std::max(1.0, arg)));
    }
    REQUIRE(geodesic_distance_btz(dphi, 0.0, m) ==
            Catch::Approx(wide).margin(1e-11));
  }
  REQUIRE_THROWS_AS(GeodesicModel::btz(1.0, 0.4, 0.5), std::invalid_argument);
}

TEST_CASE("interval entropy predictions") {
  SECTION("log model mirrors across the half cut") {
    const GeodesicModel m = GeodesicModel::ads_log(1.5, 0.3);
    REQUIRE(predict_interval_entropy(m, 0, 64) == 0.0);
    REQUIRE(predict_interval_entropy(m, 64, 64) == 0.0);
    for (std::size_t k = 1; k < 64; ++k)
      REQUIRE(predict_interval_entropy(m, k, 64) ==
              Catch::Approx(predict_interval_entropy(m, 64 - k, 64)));
    // concavity on [1, L/2]
    for (std::size_t k = 2; k < 32; ++k) {
      const double d2 = predict_interval_entropy(m, k + 1, 64) -
                        2 * predict_interval_entropy(m, k, 64) +
                        predict_interval_entropy(m, k - 1, 64);
      REQUIRE(d2 <= 1e-12);
    }
  }
  SECTION("qubit-count cap engages") {
    const GeodesicModel m = GeodesicModel::btz(50.0, 1.0, 0.5);
    REQUIRE(predict_interval_entropy(m, 5, 64) == 5.0);
    GeodesicModel uncapped = m;
    uncapped.cap = false;
    REQUIRE(predict_interval_entropy(uncapped, 5, 64) > 5.0);
  }
}

TEST_CASE("two-saddle joint entropy") {
  const GeodesicModel m = GeodesicModel::ads_log(2.0, 0.0);
  SECTION("equal saddles lose exactly one bit") {
    REQUIRE(soft_min_bits(7.0, 7.0) == Catch::Approx(6.0));
  }
  SECTION("dominant saddle wins to within 2^-44") {
    REQUIRE(std::fabs(soft_min_bits(5.0, 50.0) - 5.0) < std::exp2(-44));
  }
  SECTION("saddles combine predictions of the audited pieces") {
    const auto s =
        joint_entropy_two_intervals(m, 0, 8, 12, 8, 64);
    const double disc = 2.0 * predict_interval_entropy(m, 8, 64);
    const double conn = predict_interval_entropy(m, 4, 64) +
                        predict_interval_entropy(m, 20, 64);
    REQUIRE(s.disconnected == Catch::Approx(disc));
    REQUIRE(s.connected == Catch::Approx(conn));
    REQUIRE(s.joint <= std::min(disc, conn) + 1e-12);
    REQUIRE(s.joint >= std::min(disc, conn) - 1.0);
  }
  SECTION("overlap rejected") {
    REQUIRE_THROWS_AS(joint_entropy_two_intervals(m, 0, 8, 4, 8, 64),
                      std::invalid_argument);
  }
}

TEST_CASE("critical parameter validation") {
  CriticalParams bad;
  bad.rho_c = 1.5;
  REQUIRE_THROWS_AS(bad.check(), std::invalid_argument);
  bad.rho_c = 0.2;
  bad.nu = -1;
  REQUIRE_THROWS_AS(bad.check(), std::invalid_argument);
}
