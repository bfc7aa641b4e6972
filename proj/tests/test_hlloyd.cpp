#include "test_support.hpp"

#include "tbm/baselines.hpp"
#include "tbm/errors.hpp"
#include "tbm/hlloyd.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace tbm;

namespace {

Labels L(std::vector<int> one_based, int r) { return Labels::from_one_based(one_based, r); }

}  // namespace

TEST_SUITE("hlloyd") {
  TEST_CASE("default iteration count") {
    CHECK(default_hlloyd_iterations(Shape{80, 80, 80}) == 9);
    CHECK(default_hlloyd_iterations(Shape{3, 200}) == 11);
    CHECK(default_hlloyd_iterations(Shape{2, 2}) == 2);
  }

  TEST_CASE("aggregation by hand") {
    const DenseTensor y(Shape{2, 3}, {1, 2, 4, 3, 5, 8});
    const auto agg = aggregate_mode(y, {L({1, 2}, 2), L({1, 1, 2}, 2)}, 0);
    CHECK(agg == DenseTensor(Shape{2, 2}, {1.5, 4, 4, 8}));
    const auto col = aggregate_mode(y, {L({1, 1}, 1), L({1, 1, 2}, 2)}, 1);
    CHECK(col == DenseTensor(Shape{1, 3}, {2, 3.5, 6}));
    CHECK_THROWS_AS(aggregate_mode(y, {L({1, 2}, 2), L({1, 1, 1}, 2)}, 0), EmptyClusterError);
  }

  TEST_CASE("assignment picks the nearest core row, ties to the lowest") {
    const CoreTensor core(Shape{2, 1}, {0, 2});
    const DenseTensor agg(Shape{4, 1}, {-1, 1, 1.9, 5});
    CHECK(assign_mode(agg, core, 0).values() == std::vector<int>{0, 0, 1, 1});
  }

  TEST_CASE("exact signal from the truth is a fixed point") {
    const auto m = random_instance(InstanceSpec{{9, 8, 7}, {3, 2, 2}, 0.0, 1.0, std::nullopt}, 1);
    const auto x = synthesize_signal(m);
    const auto out = hlloyd(x, m.labels);
    CHECK(out.labels == m.labels);
    CHECK(out.trace.iterations() == 1);
    CHECK(out.trace.objectives[0] <= 1e-20);
  }

  TEST_CASE("valid and deterministic output in both orders") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto m = random_instance(InstanceSpec{{15, 15, 15}, {3, 3, 3}, 1.0, 1.0, std::nullopt}, seed);
      const auto y = sample(m, seed + 100);
      Random rng(seed);
      std::vector<Labels> init;
      for (const auto& z : m.labels) {
        Labels c = contaminate(z, 0.4, rng);
        while (!c.all_nonempty()) c = contaminate(z, 0.4, rng);
        init.push_back(c);
      }
      for (auto order : {UpdateOrder::simultaneous, UpdateOrder::sequential}) {
        HLloydConfig config;
        config.order = order;
        config.max_iters = 20;
        const auto out = hlloyd(y, init, config);
        CHECK(hlloyd(y, init, config).labels == out.labels);
        CHECK(out.trace.changes.size() == out.trace.iterations());
        for (std::size_t k = 0; k < 3; ++k) {
          CHECK(out.labels[k].all_nonempty());
          CHECK(out.labels[k].clusters() == 3);
          CHECK(out.labels[k].size() == 15);
        }
      }
    }
  }

  TEST_CASE("refinement repairs contaminated labels at high SNR") {
    for (auto order : {UpdateOrder::simultaneous, UpdateOrder::sequential}) {
      auto m = random_instance(InstanceSpec{{30, 30, 30}, {3, 3, 3}, 1.0, 4.0, std::nullopt}, 7);
      const auto y = sample(m, 8);
      Random rng(9);
      std::vector<Labels> init;
      for (const auto& z : m.labels) init.push_back(contaminate(z, 0.3, rng));
      HLloydConfig config;
      config.order = order;
      const auto out = hlloyd(y, init, config);
      for (std::size_t k = 0; k < 3; ++k) CHECK(misclassification_rate(out.labels[k], m.labels[k]).rate == 0.0);
    }
  }

  TEST_CASE("early stop and iteration cap") {
    auto m = random_instance(InstanceSpec{{12, 12}, {2, 2}, 1.0, 3.0, std::nullopt}, 3);
    const auto y = sample(m, 4);
    HLloydConfig config;
    config.max_iters = 5;
    config.early_stop = false;
    CHECK(hlloyd(y, m.labels, config).trace.iterations() == 5);
    config.max_iters = 0;
    CHECK_THROWS(hlloyd(y, m.labels, config));
    CHECK_THROWS(hlloyd(y, {m.labels[0]}));
    CHECK_THROWS_AS(hlloyd(y, {L(std::vector<int>(12, 1), 2), m.labels[1]}), EmptyClusterError);
  }

  TEST_CASE("trace CSV") {
    HLloydTrace trace;
    trace.objectives = {2.5, 1.0};
    trace.changes = {{3, 1}, {0, 0}};
    trace.repairs = {{0, 0}, {0, 0}};
    std::ostringstream out;
    write_trace_csv(out, trace);
    CHECK(out.str() == "iter,objective,changes_mode_1,changes_mode_2\n1,2.5,3,1\n2,1,0,0\n");
  }
}
