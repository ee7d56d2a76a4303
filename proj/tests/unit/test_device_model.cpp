#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "hwfl/device_model.hpp"
#include "hwfl/error.hpp"

using namespace hwfl;

namespace {

Fleet reference_equal_time() {
  auto fleet = reference_fleet();
  for (auto& p : fleet) p.epoch_time_s = 1.0;
  return fleet;
}

std::vector<int> ranking(const std::vector<HardwareScore>& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[a].score > scores[b].score;
  });
  return order;
}

std::string error_of(const Fleet& fleet) {
  try {
    validate_fleet(fleet);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("device_model") {
  TEST_CASE("normalization of the laptop row") {
    const auto norm = normalize_fleet(reference_fleet());
    CHECK(norm[0].cpu_hat == 1.0);
    CHECK(norm[0].ram_hat == 1.0);
    CHECK(norm[0].lat_hat == doctest::Approx(170.0 / 261.0).epsilon(1e-12));
    CHECK(norm[0].lat_hat == doctest::Approx(0.6513).epsilon(1e-4));
    CHECK(norm[3].lat_hat == 1.0);
    CHECK(norm[2].ram_hat == 0.5);
  }

  TEST_CASE("single client normalizes to ones") {
    DeviceProfile p{7, "x", 3, 2.5, 0.7, 44.0};
    const auto n = normalize_fleet(Fleet{p});
    CHECK(n[0].client_id == 7);
    CHECK(n[0].cpu_hat == 1.0);
    CHECK(n[0].ram_hat == 1.0);
    CHECK(n[0].eff_hat == 1.0);
    CHECK(n[0].lat_hat == 1.0);
  }

  TEST_CASE("equal epoch times give unit efficiency") {
    for (const auto& n : normalize_fleet(reference_equal_time())) CHECK(n.eff_hat == 1.0);
  }

  TEST_CASE("hardware score examples") {
    NormalizedProfile ones;
    CHECK(hardware_score(ones, {}).score == doctest::Approx(0.8).epsilon(1e-15));

    const auto eq = score_fleet(reference_equal_time(), {});
    const double expected_eq[] = {0.834866, 0.529885, 0.423372, 0.45, 0.549425};
    for (int i = 0; i < 5; ++i) CHECK(eq[i].score == doctest::Approx(expected_eq[i]).epsilon(1e-6));
    CHECK(eq[0].score == doctest::Approx(0.8349).epsilon(1e-4));

    const auto inv = score_fleet(reference_fleet(), {});
    const double expected_inv[] = {0.834866, 0.304885, 0.198372, 0.1875, 0.324425};
    for (int i = 0; i < 5; ++i) CHECK(inv[i].score == doctest::Approx(expected_inv[i]).epsilon(1e-6));
  }

  TEST_CASE("raw inverse efficiency uses seconds directly") {
    Fleet f{{0, "", 4, 8, 0.5, 100}, {1, "", 4, 8, 2.0, 100}};
    ScoreWeights w{0, 0, 1, 0};
    const auto s = score_fleet(f, w, EfficiencyMode::kRawInverse);
    CHECK(s[0].score == doctest::Approx(2.0));
    CHECK(s[1].score == doctest::Approx(0.5));
  }

  TEST_CASE("symmetric fleet without latency penalty scores equally") {
    Fleet f{{0, "", 4, 8, 1, 10}, {1, "", 4, 8, 1, 90}, {2, "", 4, 8, 1, 300}};
    const auto s = score_fleet(f, {0.4, 0.2, 0.3, 0.0});
    CHECK(s[0].score == s[1].score);
    CHECK(s[1].score == s[2].score);
  }

  TEST_CASE("energy proxy") {
    DeviceProfile p{0, "", 16, 8, 2.0, 10};
    CHECK(energy_proxy(p, 1) == 32.0);
    CHECK(energy_proxy(p, 2) == 2 * energy_proxy(p, 1));
    DeviceProfile a{0, "", 4, 8, 8.0, 10}, b{1, "", 8, 8, 4.0, 10};
    CHECK(energy_proxy(a, 3) == energy_proxy(b, 3));
    CHECK_THROWS_AS(energy_proxy(p, 0), ValidationError);
  }

  TEST_CASE("validation errors name client and field") {
    CHECK(error_of({}).find("empty fleet") != std::string::npos);
    auto f = reference_fleet();
    f[2].ram_gb = 0.0;
    const auto msg = error_of(f);
    CHECK(msg.find("ram_gb") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
    f = reference_fleet();
    f[1].latency_ms = -1;
    CHECK(error_of(f).find("latency_ms") != std::string::npos);
    f = reference_fleet();
    f[4].client_id = 0;
    CHECK_FALSE(error_of(f).empty());
    CHECK_THROWS_AS(normalize_fleet(Fleet{}), ValidationError);
    CHECK_THROWS_AS(ScoreWeights({0, 0, 0, 0}).validate(), ValidationError);
    CHECK_THROWS_AS(ScoreWeights({-0.1, 0.2, 0.3, 0.1}).validate(), ValidationError);
  }

  TEST_CASE("normalization idempotence") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto fleet = testutil::random_fleet(6, seed);
      const auto n1 = normalize_fleet(fleet);
      // Hats as raw values, efficiency inverted back into a time. cpu_cores
      // is integral and is covered by the scaling test instead.
      Fleet again;
      for (const auto& n : n1) {
        again.push_back({n.client_id, "", 1, n.ram_hat, 1.0 / n.eff_hat, n.lat_hat});
      }
      const auto n2 = normalize_fleet(again);
      for (std::size_t i = 0; i < n1.size(); ++i) {
        CHECK(n2[i].ram_hat == doctest::Approx(n1[i].ram_hat).epsilon(1e-12));
        CHECK(n2[i].eff_hat == doctest::Approx(n1[i].eff_hat).epsilon(1e-12));
        CHECK(n2[i].lat_hat == doctest::Approx(n1[i].lat_hat).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("score ranking is invariant to per-field scaling") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto fleet = testutil::random_fleet(7, seed);
      const auto base = ranking(score_fleet(fleet, {}));
      auto scaled = fleet;
      for (auto& p : scaled) p.cpu_cores *= 3;
      CHECK(ranking(score_fleet(scaled, {})) == base);
      for (double factor : {0.37, 5.0}) {
        for (int field = 0; field < 3; ++field) {
          scaled = fleet;
          for (auto& p : scaled) {
            if (field == 0) p.ram_gb *= factor;
            if (field == 1) p.latency_ms *= factor;
            if (field == 2) p.epoch_time_s *= factor;
          }
          CHECK(ranking(score_fleet(scaled, {})) == base);
        }
      }
    }
  }

  TEST_CASE("score bounds and monotonicity") {
    Rng rng(77);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto fleet = testutil::random_fleet(1 + seed % 8, seed);
      ScoreWeights w{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
      for (const auto& s : score_fleet(fleet, w)) {
        CHECK(s.score > -w.delta);
        CHECK(s.score <= w.alpha + w.beta + w.gamma + 1e-15);
      }
      const std::size_t i = seed % fleet.size();
      auto slower = fleet;
      slower[i].latency_ms *= 1.5;
      CHECK(score_fleet(slower, w)[i].score <= score_fleet(fleet, w)[i].score);
      auto faster = fleet;
      faster[i].epoch_time_s *= 0.5;
      CHECK(score_fleet(faster, w)[i].score >= score_fleet(fleet, w)[i].score);
    }
  }

  TEST_CASE("find_profile") {
    const auto f = reference_fleet();
    CHECK(find_profile(f, 3).cpu_cores == 2);
    CHECK_THROWS_AS(find_profile(f, 99), ValidationError);
  }
}
