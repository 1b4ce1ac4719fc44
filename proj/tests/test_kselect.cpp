#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "knnorder/kselect.hpp"
#include "knnorder/rng.hpp"

using namespace knnorder;
using Catch::Approx;

namespace {

PointCloud cluster(int n, double center, std::uint64_t seed, std::uint64_t idx) {
  RngStream rng(seed, idx);
  PointCloud c(1);
  for (int i = 0; i < n; ++i) {
    const double z[] = {center + rng.next_normal()};
    c.push_back(z);
  }
  return c;
}

}  // namespace

TEST_CASE("poisson resample sizes follow the integer-part rule") {
  RngStream rng(8, 0);
  double m_sum = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const ResampleSizes s = resample_sizes_poisson(100, 200, 0.5, rng);
    REQUIRE(s.m1_star == static_cast<int>(std::floor(0.5 * s.m_star)));
    REQUIRE(s.n1_star == static_cast<int>(std::floor(0.5 * s.n_star)));
    REQUIRE(s.test_size() == (s.m_star - s.m1_star) + (s.n_star - s.n1_star));
    REQUIRE(s.m1_star >= 1);
    REQUIRE(s.n1_star >= 1);
    REQUIRE(s.test_size() >= 1);
    m_sum += s.m_star;
  }
  CHECK(std::abs(m_sum / draws - 100.0) < 0.3);  // 3 sigma of the mean estimator

  // The worked examples of the integer-part rule.
  CHECK(static_cast<int>(std::floor(0.5 * 101)) == 50);
  CHECK(static_cast<int>(std::floor((1.0 / 3.0) * 3)) == 1);
}

TEST_CASE("binomial resample sizes preserve the total") {
  RngStream rng(9, 0);
  double m_sum = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const ResampleSizes s = resample_sizes_binomial(100, 200, 1.0 / 3.0, rng);
    REQUIRE(s.m_star + s.n_star == 300);
    m_sum += s.m_star;
  }
  // var(M*) = 300 * (1/3) * (2/3) = 200/3.
  CHECK(std::abs(m_sum / draws - 100.0) < 3.0 * std::sqrt(200.0 / 3.0 / draws));

  RngStream sym(10, 0);
  double sym_sum = 0.0;
  for (int i = 0; i < draws; ++i)
    sym_sum += resample_sizes_binomial(150, 150, 0.5, sym).m_star;
  CHECK(std::abs(sym_sum / draws - 150.0) < 3.0 * std::sqrt(75.0 / draws));
}

TEST_CASE("degenerate size draws are redrawn until usable") {
  RngStream rng(11, 0);
  for (int i = 0; i < 200; ++i) {
    const ResampleSizes s = resample_sizes_poisson(1, 1, 0.4, rng);
    CHECK(s.m1_star >= 1);
    CHECK(s.n1_star >= 1);
    CHECK(s.test_size() >= 1);
  }
  CHECK_THROWS_AS(resample_sizes_poisson(0, 5, 0.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(resample_sizes_poisson(5, 5, 1.0, rng), std::invalid_argument);
}

TEST_CASE("resample label proportions mimic the drawn sampling fraction") {
  RngStream rng(12, 0);
  for (int i = 0; i < 1000; ++i) {
    const ResampleSizes s = resample_sizes_poisson(100, 200, 1.0 / 3.0, rng);
    const double resample_prop =
        static_cast<double>(s.m1_star) / s.training_size();
    const double drawn_prop =
        static_cast<double>(s.m_star) / (s.m_star + s.n_star);
    CHECK(std::abs(resample_prop - drawn_prop) <= 2.0 / s.training_size());
  }
}

TEST_CASE("bootstrap curve on perfectly separated clusters is zero") {
  const PointCloud xs = cluster(40, -10.0, 21, 0);
  const PointCloud ys = cluster(40, 10.0, 21, 1);
  BootstrapPlan plan;
  plan.r = 0.5;
  plan.B = 50;
  plan.k_grid = {1, 3, 5, 7};
  const auto curve = bootstrap_error_curve(xs, ys, plan, SampleModel::Poisson, 2023);
  REQUIRE(curve.size() == 4);
  for (const auto& pt : curve) CHECK(pt.mean_error == 0.0);
}

TEST_CASE("coincident single points split the error by the tie rule") {
  PointCloud xs(1), ys(1);
  const double origin[] = {0.0};
  xs.push_back(origin);
  ys.push_back(origin);
  BootstrapPlan plan;
  plan.r = 0.5;
  plan.B = 400;
  plan.k_grid = {1};
  const auto curve = bootstrap_error_curve(xs, ys, plan, SampleModel::Poisson, 99);
  // Every test point sits at distance zero; the index tie rule always answers
  // X, so the mean error is the mean Y fraction of the test pools.
  CHECK(curve[0].mean_error == Approx(0.5).margin(0.05));
}

TEST_CASE("bootstrap curve is a deterministic function of its inputs") {
  const PointCloud xs = cluster(30, -0.5, 33, 0);
  const PointCloud ys = cluster(60, 0.5, 33, 1);
  BootstrapPlan plan;
  plan.r = 1.0 / 3.0;
  plan.B = 1;
  const auto a = bootstrap_error_curve(xs, ys, plan, SampleModel::Poisson, 5);
  const auto b = bootstrap_error_curve(xs, ys, plan, SampleModel::Poisson, 5);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].k == b[i].k);
    CHECK(a[i].mean_error == b[i].mean_error);
  }
  for (const auto& pt : a) {
    CHECK(pt.mean_error >= 0.0);
    CHECK(pt.mean_error <= 1.0);
  }

  plan.B = 100;
  const auto full_a = select_neighbor_order(xs, ys, plan, SampleModel::Binomial, 17, 2);
  const auto full_b = select_neighbor_order(xs, ys, plan, SampleModel::Binomial, 17, 1);
  CHECK(full_a.k_hat == full_b.k_hat);
  CHECK(full_a.k_tilde == full_b.k_tilde);
  CHECK(full_a.k_tilde ==
        rescale_k(full_a.k_hat, plan.r, xs.dim, static_cast<int>(xs.size() + ys.size())));

  const auto other_seed = select_neighbor_order(xs, ys, plan, SampleModel::Binomial, 18, 2);
  double max_gap = 0.0;
  for (std::size_t i = 0; i < std::min(full_a.curve.size(), other_seed.curve.size()); ++i)
    max_gap = std::max(max_gap,
                       std::abs(full_a.curve[i].mean_error - other_seed.curve[i].mean_error));
  CHECK(max_gap < 0.2);  // O(B^{-1/2}) noise between disjoint seeds
}

TEST_CASE("select_k minimizes with the smallest-k tie rule") {
  CHECK(select_k(std::vector<CurvePoint>{{1, 0.3}, {3, 0.2}, {5, 0.25}}) == 3);
  CHECK(select_k(std::vector<CurvePoint>{{1, 0.2}, {3, 0.2}}) == 1);
  CHECK(select_k(std::vector<CurvePoint>{{2, 0.4}, {4, 0.4}, {8, 0.4}}) == 2);
  CHECK_THROWS_AS(select_k({}), std::invalid_argument);
}

TEST_CASE("rescale_k applies the r^{-4/(d+4)} law") {
  // 2^{2/3} * 20 = 31.75 -> 32.
  CHECK(rescale_k(20, 0.5, 2, 1000) == 32);
  // 3^{4/5} * 40 = 96.33 -> 96.
  CHECK(rescale_k(40, 1.0 / 3.0, 1, 1000) == 96);
  CHECK(rescale_k(25, 1.0, 3, 1000) == 25);  // r at the boundary leaves k unchanged
  CHECK(rescale_k(25, 1.0 - 1e-12, 3, 1000) == 25);
  CHECK(rescale_k(500, 1.0 / 3.0, 1, 300) == 299);  // clamped to T - 1
  CHECK_THROWS_AS(rescale_k(0, 0.5, 1, 100), std::invalid_argument);
  CHECK_THROWS_AS(rescale_k(5, 0.0, 1, 100), std::invalid_argument);
}

TEST_CASE("default k grid covers 0.8 of the smallest training resample") {
  const PointCloud xs = cluster(100, -0.5, 44, 0);
  const PointCloud ys = cluster(100, 0.5, 44, 1);
  BootstrapPlan plan;
  plan.r = 1.0 / 3.0;
  plan.B = 40;
  const auto curve = bootstrap_error_curve(xs, ys, plan, SampleModel::Poisson, 3);
  REQUIRE(!curve.empty());
  CHECK(curve.front().k == 1);
  // Training resamples hover near 66; the cap sits near 0.8 of the smallest.
  CHECK(curve.back().k > 30);
  CHECK(curve.back().k < 70);
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].k == curve[i - 1].k + 1);
}

TEST_CASE("overlap switch keeps both resampling modes available") {
  // Separated herds: both modes must report zero error.
  const PointCloud xs = cluster(50, -10.0, 70, 0);
  const PointCloud ys = cluster(50, 10.0, 70, 1);
  BootstrapPlan plan;
  plan.r = 0.5;
  plan.B = 20;
  plan.k_grid = {1, 5};
  plan.disjoint_test = false;
  const auto curve = bootstrap_error_curve(xs, ys, plan, SampleModel::Poisson, 8);
  for (const auto& pt : curve) CHECK(pt.mean_error == 0.0);
}

TEST_CASE("overlapping test draws deflate the error at k = 1") {
  // Overlapping populations: with-replacement test draws duplicate training
  // points, so the overlap mode scores k = 1 far better than out-of-bag does.
  const PointCloud xs = cluster(100, -0.5, 71, 0);
  const PointCloud ys = cluster(100, 0.5, 71, 1);
  BootstrapPlan plan;
  plan.r = 1.0 / 3.0;
  plan.B = 60;
  plan.k_grid = {1};
  const auto oob = bootstrap_error_curve(xs, ys, plan, SampleModel::Poisson, 9);
  plan.disjoint_test = false;
  const auto overlap = bootstrap_error_curve(xs, ys, plan, SampleModel::Poisson, 9);
  CHECK(overlap[0].mean_error < oob[0].mean_error - 0.05);
}
