#include <gtest/gtest.h>

#include "gradcheck.hpp"

using radgest::testing::GradCase;
using radgest::testing::gradient_cases;

namespace {

const std::vector<GradCase>& cases() {
  static const std::vector<GradCase> all = gradient_cases();
  return all;
}

std::vector<std::size_t> case_indices() {
  std::vector<std::size_t> idx(cases().size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

}  // namespace

class FiniteDifference : public ::testing::TestWithParam<std::size_t> {};

TEST_P(FiniteDifference, RelativeErrorBelow1e4ForSeeds0To4) {
  const GradCase& c = cases()[GetParam()];
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const double err = c.run(seed);
    EXPECT_LT(err, 1e-4) << c.name << " seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(Ops, FiniteDifference, ::testing::ValuesIn(case_indices()),
                         [](const ::testing::TestParamInfo<std::size_t>& info) {
                           return cases()[info.param].name;
                         });
