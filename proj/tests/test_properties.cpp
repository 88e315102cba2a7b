#include <gtest/gtest.h>

#include "property_checks.hpp"

namespace {

constexpr int kInstances = 200;

}  // namespace

TEST(Property, FlowConservation) {
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 1; seed <= kInstances; ++seed) EXPECT_EQ(checks::flow_conservation(seed, rng), "");
}

TEST(Property, LossMonotoneInArrival) {
  std::mt19937_64 rng(2);
  for (std::uint64_t seed = 1; seed <= kInstances; ++seed) EXPECT_EQ(checks::loss_monotone(seed, rng), "");
}

TEST(Property, PathRoundTrip) {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 1; seed <= kInstances; ++seed) EXPECT_EQ(checks::path_round_trip(seed, rng), "");
}

TEST(Property, ReachableFlowMonotoneInAdversaries) {
  for (std::uint64_t seed = 1; seed <= kInstances; ++seed) EXPECT_EQ(checks::reach_monotone(seed), "");
}
