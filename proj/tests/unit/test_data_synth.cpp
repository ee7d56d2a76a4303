#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "helpers.hpp"
#include "hwfl/data_synth.hpp"
#include "hwfl/error.hpp"

using namespace hwfl;

namespace {

std::vector<double> class_shares(const LocalDataset& d) {
  std::vector<double> share(d.n_classes, 0.0);
  for (int y : d.labels) share[static_cast<std::size_t>(y)] += 1.0;
  for (auto& s : share) s /= static_cast<double>(d.size());
  return share;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("data_synth") {
  TEST_CASE("dirichlet concentration limit") {
    DataSpec spec;
    spec.mode = DataMode::kDirichlet;
    spec.dirichlet_alpha = 1e6;
    spec.samples_per_client = 10000;
    spec.input_dim = 2;
    const auto data = synthesize_noniid(spec, 3);
    for (const auto& c : data.clients)
      for (double s : class_shares(c)) CHECK(std::abs(s - 0.25) <= 0.02);
  }

  TEST_CASE("small dirichlet alpha skews clients") {
    DataSpec spec;
    spec.mode = DataMode::kDirichlet;
    spec.dirichlet_alpha = 0.1;
    spec.input_dim = 2;
    int skewed = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      for (const auto& c : synthesize_noniid(spec, seed).clients) {
        const auto sh = class_shares(c);
        skewed += *std::max_element(sh.begin(), sh.end()) > 0.5;
        ++total;
      }
    }
    CHECK(skewed * 2 > total);
  }

  TEST_CASE("session split dominant class") {
    DataSpec spec;
    spec.samples_per_client = 10000;
    spec.input_dim = 2;
    const auto data = synthesize_noniid(spec, 1);
    for (std::size_t i = 0; i < data.clients.size(); ++i) {
      const auto sh = class_shares(data.clients[i]);
      CHECK(std::abs(sh[i % 4] - 0.6) <= 0.02);
      for (std::size_t c = 0; c < 4; ++c)
        if (c != i % 4) CHECK(std::abs(sh[c] - 0.4 / 3.0) <= 0.02);
    }
    const auto small = synthesize_noniid(DataSpec{}, 1);
    CHECK(std::abs(class_shares(small.clients[0])[0] - 0.6) <= 0.1);
  }

  TEST_CASE("session split rejects too few samples") {
    DataSpec spec;
    spec.samples_per_client = 3;
    CHECK_THROWS_AS(synthesize_noniid(spec, 1), ValidationError);
  }

  TEST_CASE("partition completeness and validation share") {
    DataSpec spec;
    spec.samples_per_client = 203;
    spec.input_dim = 5;
    const auto data = synthesize_noniid(spec, 8);
    std::size_t total = data.validation.size();
    std::set<std::vector<double>> rows;
    for (const auto& c : data.clients) {
      CHECK(c.size() == 203 - 40);
      total += c.size();
      for (std::size_t i = 0; i < c.size(); ++i) {
        auto r = c.row(i);
        rows.insert({r.begin(), r.end()});
      }
    }
    for (std::size_t i = 0; i < data.validation.size(); ++i) {
      auto r = data.validation.row(i);
      rows.insert({r.begin(), r.end()});
    }
    CHECK(data.validation.size() == 5 * 40);
    CHECK(data.validation.client_id == -1);
    CHECK(total == 5 * 203);
    CHECK(rows.size() == total);
  }

  TEST_CASE("determinism and seed isolation") {
    DataSpec spec;
    spec.input_dim = 3;
    const auto a = synthesize_noniid(spec, 11), b = synthesize_noniid(spec, 11),
               c = synthesize_noniid(spec, 12);
    CHECK(a.clients == b.clients);
    CHECK(a.validation == b.validation);
    CHECK_FALSE(a.clients == c.clients);

    const std::vector<int> ids{10, 20, 30, 40, 50};
    const auto named = synthesize_noniid(spec, 11, ids);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      CHECK(named.clients[i].client_id == ids[i]);
      CHECK(named.clients[i].features == a.clients[i].features);
    }
    CHECK_THROWS(synthesize_noniid(spec, 11, std::vector<int>{1, 2}));
  }

  TEST_CASE("feature csv round trip") {
    const auto dir = testutil::temp_dir("features");
    DataSpec spec;
    spec.input_dim = 4;
    spec.samples_per_client = 30;
    const auto data = synthesize_noniid(spec, 2);
    write_feature_csv(dir / "f.csv", data.clients, data.label_names);
    const auto back = load_feature_csv(dir / "f.csv", 1, 0.0);
    REQUIRE(back.clients.size() == data.clients.size());
    for (std::size_t i = 0; i < back.clients.size(); ++i)
      CHECK(back.clients[i] == data.clients[i]);
    CHECK(back.label_names == data.label_names);
    CHECK(back.validation.size() == 0);

    const auto split = load_feature_csv(dir / "f.csv", 1);
    CHECK(split.validation.size() == 5 * 4);
    CHECK(split.clients[0].size() == 20);
  }

  TEST_CASE("feature csv loader edge cases") {
    const auto dir = testutil::temp_dir("features_edge");
    testutil::write_text(dir / "two.csv", "client_id,label,f_0\n0,cat,1.5\n1,dog,-2\n");
    const auto two = load_feature_csv(dir / "two.csv", 1);
    REQUIRE(two.clients.size() == 2);
    CHECK(two.clients[0].size() == 1);
    CHECK(two.clients[1].size() == 1);
    CHECK(two.label_names == std::vector<std::string>{"cat", "dog"});
    CHECK(two.validation.size() == 0);
    CHECK_FALSE(two.warnings.empty());

    testutil::write_text(dir / "bad.csv", "client_id,label,f_0\n0,a,1\n0,a,x\n");
    const auto msg = error_of([&] { load_feature_csv(dir / "bad.csv", 1); });
    CHECK(msg.find(":3") != std::string::npos);

    testutil::write_text(dir / "ragged.csv", "client_id,label,f_0,f_1\n0,a,1\n");
    CHECK_THROWS_AS(load_feature_csv(dir / "ragged.csv", 1), ValidationError);
    testutil::write_text(dir / "header.csv", "id,label,f_0\n0,a,1\n");
    CHECK_THROWS_AS(load_feature_csv(dir / "header.csv", 1), ValidationError);
    CHECK_THROWS_AS(load_feature_csv(dir / "missing.csv", 1), ValidationError);
  }

  TEST_CASE("latency perturbation") {
    DeviceProfile p{2, "phone", 4, 16, 2.0, 200};
    const LatencyPerturbation on{true, 0.3};
    const auto a = perturb_latency(p, on, 7, 5), b = perturb_latency(p, on, 7, 5);
    CHECK(a == b);
    CHECK(a.latency_ms != p.latency_ms);
    CHECK(a.cpu_cores == p.cpu_cores);
    CHECK(a.ram_gb == p.ram_gb);
    CHECK(a.epoch_time_s == p.epoch_time_s);
    CHECK(a.name == p.name);
    CHECK(perturb_latency(p, {false, 0.3}, 7, 5) == p);
    CHECK(perturb_latency(p, {true, 0.0}, 7, 5) == p);
    CHECK_FALSE(perturb_latency(p, on, 8, 5) == a);

    double sum = 0.0;
    const int n = 200000;
    for (int r = 0; r < n; ++r) sum += perturb_latency(p, on, r, 5).latency_ms;
    CHECK(sum / n == doctest::Approx(200.0).epsilon(0.005));
    CHECK_THROWS(perturb_latency(p, {true, -1.0}, 1, 1));
  }

  TEST_CASE("fleet csv") {
    const auto dir = testutil::temp_dir("fleet");
    const auto fleet = reference_fleet();
    write_fleet_csv(dir / "fleet.csv", fleet);
    CHECK(load_fleet_csv(dir / "fleet.csv") == fleet);
    CHECK(load_fleet_csv(std::filesystem::path(HWFL_SOURCE_DIR) / "configs/reference_fleet.csv") ==
          fleet);

    testutil::write_text(dir / "neg.csv",
                         "client_id,cpu_cores,ram_gb,epoch_time_s,latency_ms\n0,4,8,1,-5\n");
    CHECK(error_of([&] { load_fleet_csv(dir / "neg.csv"); }).find("latency_ms") !=
          std::string::npos);
    testutil::write_text(dir / "empty.csv",
                         "client_id,cpu_cores,ram_gb,epoch_time_s,latency_ms\n");
    CHECK(error_of([&] { load_fleet_csv(dir / "empty.csv"); }).find("empty fleet") !=
          std::string::npos);
  }
}
