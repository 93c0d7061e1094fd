#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <filesystem>
#include <random>

#include "quadcatch/gmm.hpp"

using namespace quadcatch;

namespace {

DemoDataset two_clusters(int per_cluster, std::uint64_t seed) {
  const DemoDataset a =
      generate_demo_dataset(per_cluster, Vec3(0.0, 0.0, 0.0), Vec3(0.05, 0.05, 0.05), seed);
  const DemoDataset b = generate_demo_dataset(per_cluster, Vec3(1.0, 1.0, 0.5),
                                              Vec3(0.05, 0.05, 0.05), seed + 1);
  DemoDataset out = a;
  out.points.insert(out.points.end(), b.points.begin(), b.points.end());
  return out;
}

}  // namespace

TEST_CASE("single-component fit recovers sample moments") {
  const DemoDataset data =
      generate_demo_dataset(80, Vec3(0.3, -0.1, 0.2), Vec3(0.08, 0.05, 0.1), 42);

  Vec3 mean = Vec3::Zero();
  for (const auto& p : data.points) {
    mean += p;
  }
  mean /= static_cast<double>(data.points.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : data.points) {
    cov += (p - mean) * (p - mean).transpose();
  }
  cov /= static_cast<double>(data.points.size());  // biased, 1/N

  const EmResult result = fit_em(data, 1);
  REQUIRE(result.mixture.k() == 1);
  const GaussianComponent& c = result.mixture.components().front();
  CHECK(c.weight == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((c.mean - mean).norm() < 1e-9);
  CHECK((c.covariance - cov).norm() < 1e-9);
}

TEST_CASE("two separated clusters are recovered") {
  const DemoDataset data = two_clusters(60, 7);
  const EmResult result = fit_em(data, 2, {.tol = 1e-8, .max_iter = 300, .seed = 3});
  REQUIRE(result.mixture.k() == 2);

  double best_a = 1e9;
  double best_b = 1e9;
  for (const auto& c : result.mixture.components()) {
    best_a = std::min(best_a, (c.mean - Vec3(0.0, 0.0, 0.0)).norm());
    best_b = std::min(best_b, (c.mean - Vec3(1.0, 1.0, 0.5)).norm());
  }
  CHECK(best_a < 0.05);
  CHECK(best_b < 0.05);
}

TEST_CASE("log-likelihood never decreases across iterations") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const DemoDataset data = two_clusters(40, rng());
    for (int k = 1; k <= 3; ++k) {
      const EmResult result =
          fit_em(data, k, {.tol = 1e-9, .max_iter = 150, .seed = rng()});
      for (std::size_t i = 1; i < result.log_likelihood.size(); ++i) {
        CHECK(result.log_likelihood[i] >=
              result.log_likelihood[i - 1] -
                  1e-9 * (1.0 + std::abs(result.log_likelihood[i])));
      }
    }
  }
}

TEST_CASE("bic parameter count and duplicate-component penalty") {
  const DemoDataset data =
      generate_demo_dataset(100, Vec3(0.3, 0.0, -0.2), Vec3(0.06, 0.05, 0.07), 5);

  const EmResult single = fit_em(data, 1);
  double ll = 0.0;
  for (const auto& p : data.points) {
    ll += single.mixture.log_density(p);
  }
  // p = 9 free parameters for one 3-D Gaussian.
  CHECK(bic(single.mixture, data) ==
        doctest::Approx(9.0 * std::log(100.0) - 2.0 * ll).epsilon(1e-12));

  // Splitting the weight over a duplicated component leaves the density
  // unchanged but pays the parameter penalty.
  const GaussianComponent& c = single.mixture.components().front();
  GaussianComponent half = c;
  half.weight = 0.5;
  const GaussianMixture duplicated(std::vector<GaussianComponent>{half, half});
  for (const auto& p : data.points) {
    CHECK(duplicated.log_density(p) ==
          doctest::Approx(single.mixture.log_density(p)).epsilon(1e-12));
  }
  CHECK(bic(duplicated, data) > bic(single.mixture, data));
}

TEST_CASE("bic prefers one component on single-Gaussian data") {
  int chose_one = 0;
  const int trials = 20;
  for (int seed = 0; seed < trials; ++seed) {
    const DemoDataset data = generate_demo_dataset(
        100, Vec3(0.25, 0.0, -0.25), Vec3(0.07, 0.05, 0.06), 100 + seed);
    const GaussianMixture mix =
        select_k(data, 1, 4, {.seed = static_cast<std::uint64_t>(seed)});
    if (mix.k() == 1) {
      ++chose_one;
    }
  }
  CHECK(chose_one >= 19);
}

TEST_CASE("select_k with a singleton range equals fit_em") {
  const DemoDataset data =
      generate_demo_dataset(50, Vec3(0.2, 0.0, 0.0), Vec3(0.05, 0.05, 0.05), 9);
  const EmOptions opts{.tol = 1e-7, .max_iter = 100, .seed = 4};
  const GaussianMixture selected = select_k(data, {1}, opts);
  const GaussianMixture direct = fit_em(data, 1, opts).mixture;
  REQUIRE(selected.k() == 1);
  CHECK((selected.components()[0].mean - direct.components()[0].mean).norm() == 0.0);
  CHECK((selected.components()[0].covariance - direct.components()[0].covariance)
            .norm() == 0.0);
}

TEST_CASE("select_k finds both far clusters") {
  const DemoDataset data = two_clusters(60, 21);
  const GaussianMixture mix = select_k(data, 1, 3, {.seed = 2});
  CHECK(mix.k() == 2);
}

TEST_CASE("log density of a standard Gaussian at its mean") {
  GaussianComponent c;
  c.weight = 1.0;
  c.mean = Vec3(0.4, -0.2, 1.0);
  c.covariance = Mat3::Identity();
  const GaussianMixture mix(std::vector<GaussianComponent>{c});
  CHECK(mix.log_density(c.mean) ==
        doctest::Approx(-1.5 * std::log(2.0 * M_PI)).epsilon(1e-12));
  CHECK(log_density(mix, c.mean) == mix.log_density(c.mean));
}

TEST_CASE("mixture density integrates to one") {
  GaussianComponent a;
  a.weight = 0.6;
  a.mean = Vec3(0.0, 0.0, 0.0);
  a.covariance = Mat3::Identity() * 0.04;
  GaussianComponent b;
  b.weight = 0.4;
  b.mean = Vec3(0.3, 0.1, -0.2);
  b.covariance = Mat3::Identity() * 0.09;
  const GaussianMixture mix(std::vector<GaussianComponent>{a, b});

  // Monte-Carlo integral over a box reaching > 4 sigma past both means.
  const Vec3 lo(-1.4, -1.4, -1.4);
  const Vec3 hi(1.7, 1.5, 1.2);
  const double volume = (hi - lo).prod();
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 2'000'000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec3 x(lo.x() + (hi.x() - lo.x()) * u(rng),
                 lo.y() + (hi.y() - lo.y()) * u(rng),
                 lo.z() + (hi.z() - lo.z()) * u(rng));
    sum += std::exp(mix.log_density(x));
  }
  const double integral = volume * sum / n;
  CHECK(integral == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("translation equivariance of the density") {
  const DemoDataset data = two_clusters(50, 3);
  const GaussianMixture mix = fit_em(data, 2, {.seed = 8}).mixture;
  const Vec3 shift(0.7, -1.1, 0.4);

  std::vector<GaussianComponent> moved = mix.components();
  for (auto& c : moved) {
    c.mean += shift;
  }
  const GaussianMixture shifted(moved);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Vec3 x(u(rng), u(rng), u(rng));
    CHECK(shifted.log_density(x + shift) ==
          doctest::Approx(mix.log_density(x)).epsilon(1e-12));
  }
}

TEST_CASE("covariances stay positive definite under flooring") {
  // Nearly coplanar data stresses the covariance floor.
  DemoDataset data;
  std::mt19937_64 rng(14);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    data.points.emplace_back(0.1 * gauss(rng), 0.1 * gauss(rng), 1e-9 * gauss(rng));
  }
  const EmResult result = fit_em(data, 2, {.seed = 1});
  for (const auto& c : result.mixture.components()) {
    Eigen::LLT<Mat3> llt(c.covariance);
    CHECK(llt.info() == Eigen::Success);
    Eigen::SelfAdjointEigenSolver<Mat3> eig(c.covariance);
    CHECK(eig.eigenvalues().minCoeff() >= 1e-6 - 1e-12);
  }
}

TEST_CASE("degenerate demonstration data is rejected") {
  DemoDataset data;
  for (int i = 0; i < 20; ++i) {
    data.points.emplace_back(0.25, 0.0, -0.3);
  }
  CHECK_THROWS_AS(fit_em(data, 1), DegenerateFitError);

  DemoDataset tiny;
  tiny.points.emplace_back(0.0, 0.0, 0.0);
  CHECK_THROWS_AS(fit_em(tiny, 1), InsufficientDataError);
  CHECK_THROWS_AS(fit_em(two_clusters(10, 1), 0), InvalidInputError);
}

TEST_CASE("demo datasets round trip through files") {
  const DemoDataset data =
      generate_demo_dataset(25, Vec3(0.3, 0.0, -0.3), Vec3(0.08, 0.04, 0.05), 77);
  const auto path = std::filesystem::temp_directory_path() / "quadcatch_demos_test.txt";
  save_demo_dataset(data, path);
  const DemoDataset loaded = load_demo_dataset(path);
  std::filesystem::remove(path);

  REQUIRE(loaded.points.size() == data.points.size());
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    CHECK(loaded.points[i] == data.points[i]);
  }
}

TEST_CASE("mixture validation") {
  GaussianComponent c;
  c.weight = 0.5;
  CHECK_THROWS_AS(GaussianMixture(std::vector<GaussianComponent>{c}), InvalidInputError);

  GaussianComponent bad_cov;
  bad_cov.weight = 1.0;
  bad_cov.covariance = -Mat3::Identity();
  CHECK_THROWS_AS(GaussianMixture(std::vector<GaussianComponent>{bad_cov}),
                  InvalidInputError);

  CHECK_THROWS_AS(GaussianMixture(std::vector<GaussianComponent>{}), InvalidInputError);
}
