#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "helpers.hpp"
#include "hwfl/error.hpp"
#include "hwfl/scheduler.hpp"

using namespace hwfl;

namespace {

Fleet reference_equal_time() {
  auto fleet = reference_fleet();
  for (auto& p : fleet) p.epoch_time_s = 1.0;
  return fleet;
}

std::vector<int> exhaustive_top_k(std::vector<HardwareScore> scores, std::size_t k) {
  std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.client_id < b.client_id;
  });
  std::vector<int> ids;
  for (std::size_t i = 0; i < k; ++i) ids.push_back(scores[i].client_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

RoundPlan plan_of(std::vector<int> ids, std::vector<int> epochs) {
  RoundPlan p;
  p.selected = ids;
  for (std::size_t i = 0; i < ids.size(); ++i) p.epochs[ids[i]] = epochs[i];
  return p;
}

}  // namespace

TEST_SUITE("scheduler") {
  TEST_CASE("top-k examples") {
    const auto eq = score_fleet(reference_equal_time(), {});
    CHECK(select_top_k(eq, 5) == std::vector<int>{0, 1, 2, 3, 4});
    const auto top3 = select_top_k(eq, 3);
    CHECK(top3 == std::vector<int>{0, 1, 4});
    CHECK(std::find(top3.begin(), top3.end(), 3) == top3.end());

    std::vector<HardwareScore> tied{{5, 0.3}, {2, 0.3}, {9, 0.3}, {4, 0.3}};
    CHECK(select_top_k(tied, 2) == std::vector<int>{2, 4});
    CHECK_THROWS(select_top_k(tied, 0));
    CHECK_THROWS(select_top_k(tied, 5));
  }

  TEST_CASE("top-k matches the exhaustive sort") {
    Rng rng(5);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto fleet = testutil::random_fleet(2 + seed % 9, seed);
      auto scores = score_fleet(fleet, {});
      // Inject ties.
      if (scores.size() > 2) scores[1].score = scores[0].score;
      for (std::size_t k = 1; k <= scores.size(); ++k)
        CHECK(select_top_k(scores, k) == exhaustive_top_k(scores, k));
    }
  }

  TEST_CASE("random-k") {
    const std::vector<int> ids{4, 0, 3, 1, 2};
    Rng rng(1);
    CHECK(select_random_k(ids, 5, rng) == std::vector<int>{0, 1, 2, 3, 4});

    std::map<int, int> freq;
    Rng draws(2024);
    for (int t = 0; t < 10000; ++t) {
      const auto s = select_random_k(ids, 3, draws);
      REQUIRE(s.size() == 3);
      CHECK(std::is_sorted(s.begin(), s.end()));
      for (int id : s) ++freq[id];
    }
    for (const auto& [id, n] : freq) CHECK(std::abs(n / 10000.0 - 0.6) <= 0.02);

    Rng a(77), b(77);
    CHECK(select_random_k(ids, 2, a) == select_random_k(ids, 2, b));
  }

  TEST_CASE("select all") {
    const std::vector<int> ids{3, 1, 2, 0, 4};
    CHECK(select_all(ids) == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(select_all(std::vector<int>{6}) == std::vector<int>{6});
  }

  TEST_CASE("adaptive epochs") {
    CHECK(adaptive_epochs(0.7, 0.7, 4) == 4);
    CHECK(adaptive_epochs(0.35, 0.7, 4) == 2);
    CHECK(adaptive_epochs(0.07, 0.7, 4) == 1);
    CHECK(round_half_even(2.5) == 2.0);
    CHECK(round_half_even(3.5) == 4.0);
    CHECK(round_half_even(-0.5) == 0.0);
    CHECK_THROWS_AS(adaptive_epochs(0.1, 0.0, 4), ConfigError);
    CHECK_THROWS_AS(adaptive_epochs(-0.1, -0.05, 4), ConfigError);
    for (int e = 1; e <= 20; ++e) CHECK(adaptive_epochs(0.31, 0.31, e) == e);
    int prev = 0;
    for (int i = 0; i <= 100; ++i) {
      const int e = adaptive_epochs(i / 100.0, 1.0, 6);
      CHECK(e >= prev);
      prev = e;
    }
  }

  TEST_CASE("jain index") {
    const std::vector<int> ids{0, 1, 2, 3, 4};
    FairnessTracker t(ids);
    for (int r = 0; r < 3; ++r) t.record(ids);
    CHECK(jain_index(t) == doctest::Approx(1.0).epsilon(1e-12));

    FairnessTracker single(ids);
    single.record(std::vector<int>{2});
    CHECK(std::abs(jain_index(single) - 0.2) <= 1e-12);

    auto c = FairnessTracker::from_counts({{0, 2}, {1, 1}, {2, 1}, {3, 0}, {4, 0}});
    CHECK(std::abs(jain_index(c) - 16.0 / 30.0) <= 1e-12);
    auto c7 = FairnessTracker::from_counts({{0, 14}, {1, 7}, {2, 7}, {3, 0}, {4, 0}});
    CHECK(std::abs(jain_index(c7) - jain_index(c)) <= 1e-12);
    CHECK(c.n_clients() == 5);

    FairnessTracker empty(ids);
    try {
      jain_index(empty);
      FAIL("expected an error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("no participation recorded") != std::string::npos);
    }
    CHECK_THROWS(single.record(std::vector<int>{42}));
  }

  TEST_CASE("plan validation") {
    CHECK_NOTHROW(plan_of({0, 2}, {1, 3}).validate());
    CHECK_THROWS(plan_of({}, {}).validate());
    CHECK_THROWS(plan_of({2, 0}, {1, 1}).validate());
    CHECK_THROWS(plan_of({0}, {0}).validate());
    RoundPlan extra = plan_of({0}, {1});
    extra.epochs[5] = 1;
    CHECK_THROWS(extra.validate());
  }

  TEST_CASE("objective of a plan") {
    Fleet f{{0, "", 4, 8, 2.0, 100}, {1, "", 4, 8, 3.0, 200}};
    auto single = objective_of_plan(plan_of({0}, {3}), f, 0.0, CommMode::kSymmetric);
    CHECK(single.objective == doctest::Approx(6.1));
    auto two = objective_of_plan(plan_of({0, 1}, {2, 2}), f, 1.0, CommMode::kSymmetric);
    CHECK(two.makespan_s == doctest::Approx(6.2).epsilon(1e-12));
    CHECK(two.comm_load == 4.0);
    CHECK(two.objective == doctest::Approx(10.2).epsilon(1e-12));
  }

  TEST_CASE("brute force on small cases") {
    Fleet one{{3, "", 2, 4, 1.5, 40}};
    auto opt = brute_force_schedule(one, {1, 1, {4, 2, 8}, 0.1});
    CHECK(opt.plan.selected == std::vector<int>{3});
    CHECK(opt.plan.epochs.at(3) == 2);

    // Clients 1 and 3 are the (tied) fastest.
    Fleet f{{0, "", 4, 8, 2.0, 100}, {1, "", 4, 8, 1.0, 100},
            {2, "", 4, 8, 3.0, 100}, {3, "", 4, 8, 1.0, 100}};
    auto fast = brute_force_schedule(f, {1, 4, {1}, 0.0});
    CHECK(fast.plan.selected == std::vector<int>{1});

    CHECK_THROWS(brute_force_schedule(testutil::random_fleet(13, 1), {1, 2, {1}, 0.1}));
    try {
      brute_force_schedule(testutil::random_fleet(13, 1), {1, 2, {1}, 0.1});
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("oracle limit") != std::string::npos);
    }
    CHECK_THROWS(brute_force_schedule(f, {1, 2, {}, 0.1}));
  }

  TEST_CASE("brute force on the reference fleet") {
    const auto fleet = reference_fleet();
    auto opt = brute_force_schedule(fleet, {3, 3, {1, 2, 4}, 0.1});
    CHECK(opt.plans_evaluated == 270);
    CHECK(opt.plan.selected == std::vector<int>{0, 1, 4});
    for (const auto& [id, e] : opt.plan.epochs) CHECK(e == 1);
    CHECK(opt.report.objective == doctest::Approx(2.783).epsilon(1e-12));

    auto heuristic = plan_of({0, 1, 4}, {4, 1, 2});
    const auto rep = objective_of_plan(heuristic, fleet, 0.1, CommMode::kSymmetric);
    CHECK(rep.objective == doctest::Approx(4.732).epsilon(1e-12));
    CHECK(opt.report.objective <= rep.objective);
  }

  TEST_CASE("brute force is optimal against random plans") {
    Rng rng(11);
    const std::vector<int> grid{1, 2, 3};
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto fleet = testutil::random_fleet(2 + seed % 5, seed);
      const std::size_t k_max = fleet.size();
      const auto mode = seed % 2 ? CommMode::kSymmetric : CommMode::kBroadcastPlusUploads;
      auto opt = brute_force_schedule(fleet, {1, k_max, grid, 0.3, mode});
      for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> ids;
        for (const auto& p : fleet)
          if (rng.uniform() < 0.5) ids.push_back(p.client_id);
        if (ids.empty()) ids.push_back(fleet[rng.uniform_index(fleet.size())].client_id);
        std::vector<int> epochs;
        for (std::size_t i = 0; i < ids.size(); ++i)
          epochs.push_back(grid[rng.uniform_index(grid.size())]);
        const auto rep = objective_of_plan(plan_of(ids, epochs), fleet, 0.3, mode);
        CHECK(opt.report.objective <= rep.objective);
      }
    }
  }
}
