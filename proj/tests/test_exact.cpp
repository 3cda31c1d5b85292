#include <catch2/catch_amalgamated.hpp>

#include "sgin/exact.hpp"
#include "sgin/validate.hpp"
#include "support/brute_force.hpp"
#include "support/toys.hpp"

using namespace sgin;

TEST_CASE("plan enumeration matches the hand count on the compression toy") {
  const toys::Instance v = toys::compute_vignette();
  const MdrTeg g = v.graph();
  // unrouted, store-and-forward, compress-at-ingest, compress-after-store
  const auto plans = enumerate_plans(g, v.flows[0], 1000);
  CHECK(plans.size() == 4);

  int empty = 0, compressed = 0;
  for (const auto& p : plans) {
    if (!p.routed()) {
      ++empty;
      continue;
    }
    if (p.compress_node >= 0) ++compressed;
    // every emitted routing is semantically feasible on a pristine graph
    Assignment a(v.flows.size());
    a.plans[0] = p;
    const auto rep = validate(g, v.flows, a);
    CAPTURE(rep.to_json().dump());
    CHECK(rep.ok());
  }
  CHECK(empty == 1);
  CHECK(compressed == 2);

  // theta = 1 offers no strict reduction, so compression branches vanish
  Flow whole = v.flows[0];
  whole.theta = 1.0;
  CHECK(enumerate_plans(g, whole, 1000).size() == 2);
}

TEST_CASE("plan enumeration does not loop on same-slot relay cycles") {
  toys::Instance v;
  v.slots = toys::toy_slots(1, {{1, "o1", "s1", 100},
                                {1, "s1", "s2", 100},
                                {1, "s2", "s1", 100},
                                {1, "s2", "g1", 100}});
  v.params = toys::toy_params(100, 100);
  v.flows = {toys::toy_flow("f", "o1", 100, 1, 1, 0.5)};
  const MdrTeg g = v.graph();
  // unrouted, relay, compress at either hop
  const auto plans = enumerate_plans(g, v.flows[0], 1000);
  CHECK(plans.size() == 4);
}

TEST_CASE("enumeration rejects invalid flows and reports truncation") {
  const toys::Instance v = toys::compute_vignette();
  const MdrTeg g = v.graph();
  Flow bad = v.flows[0];
  bad.theta = 0.0;
  CHECK_THROWS_AS(enumerate_plans(g, bad, 1000), config_error);

  bool truncated = false;
  const auto plans = enumerate_plans(g, v.flows[0], 2, &truncated);
  CHECK(plans.size() == 2);
  CHECK(truncated);
}

TEST_CASE("the reference solver finds the compression optimum") {
  const toys::Instance v = toys::compute_vignette();
  const MdrTeg g = v.graph();
  const ExactResult res = exact_solve(g, v.flows);
  CHECK(res.certified);
  CHECK(res.objective == -2.0);
  CHECK(res.assignment.success_count() == 2);
  CHECK(res.plan_counts == std::vector<std::size_t>{4, 4});
  CHECK(validate(g, v.flows, res.assignment).ok());
  int compressed = 0;
  for (const auto& p : res.assignment.plans) compressed += p.compress_node >= 0 ? 1 : 0;
  CHECK(compressed == 1);  // store fits one full flow, the other must shrink
}

TEST_CASE("without the compute stage only one flow fits") {
  const toys::Instance v = toys::compute_vignette();
  const MdrTeg plain = v.graph(false);
  const ExactResult res = exact_solve(plain, v.flows);
  CHECK(res.certified);
  CHECK(res.objective == -1.0);
  CHECK(validate(plain, v.flows, res.assignment).ok());
}

TEST_CASE("the branch-and-bound respects custom plan costs") {
  const toys::Instance v = toys::compute_vignette();
  const MdrTeg g = v.graph();
  ExactOptions opt;
  opt.cost = [](std::size_t, const FlowPlan& p) { return p.routed() ? 1.0 : 0.0; };
  const ExactResult res = exact_solve(g, v.flows, opt);
  CHECK(res.certified);
  CHECK(res.objective == 0.0);
  for (const auto& p : res.assignment.plans) CHECK_FALSE(p.routed());
}

TEST_CASE("exhausting the node budget drops the certificate") {
  const toys::Instance v = toys::compute_vignette();
  const MdrTeg g = v.graph();
  ExactOptions opt;
  opt.max_bb_nodes = 1;
  CHECK_FALSE(exact_solve(g, v.flows, opt).certified);

  opt = ExactOptions{};
  opt.max_plans_per_flow = 2;
  const ExactResult res = exact_solve(g, v.flows, opt);
  CHECK_FALSE(res.certified);
  CHECK(res.plan_counts == std::vector<std::size_t>{2, 2});
}

TEST_CASE("the reference solver is deterministic") {
  const toys::Instance v = toys::starvation_vignette();
  const MdrTeg g = v.graph();
  const ExactResult a = exact_solve(g, v.flows);
  const ExactResult b = exact_solve(g, v.flows);
  CHECK(a.objective == b.objective);
  REQUIRE(a.assignment.plans.size() == b.assignment.plans.size());
  for (std::size_t i = 0; i < a.assignment.plans.size(); ++i)
    CHECK(a.assignment.plans[i].x == b.assignment.plans[i].x);
}

TEST_CASE("optimal success counts agree with joint path enumeration") {
  toys::DeskSpec spec;
  spec.max_flows = 3;
  spec.max_slots = 3;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const toys::Instance v = toys::random_desk(seed, spec);
    const MdrTeg g = v.graph();
    const ExactResult res = exact_solve(g, v.flows);
    REQUIRE(res.certified);
    const int ref = bf::max_deliveries(g, v.flows);
    CAPTURE(seed, ref, res.objective);
    CHECK(res.objective == -static_cast<double>(ref));
    CHECK(validate(g, v.flows, res.assignment).ok());
    CHECK(res.assignment.success_count() == ref);
  }
}
