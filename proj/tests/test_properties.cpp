#include <gtest/gtest.h>

#include "invariance.hpp"

using namespace mrp::testkit;

namespace {

void expect_pass(const InvarianceResult& r) {
  EXPECT_GE(r.cases, 100u);
  EXPECT_TRUE(r.decisions_agree) << r.name;
  EXPECT_LE(r.worst, r.tolerance) << r.name;
}

}  // namespace

TEST(Invariance, Translation) { expect_pass(check_translation(1001, 150)); }
TEST(Invariance, DimensionPermutation) { expect_pass(check_dimension_permutation(1002, 150)); }
TEST(Invariance, SampleOrder) { expect_pass(check_sample_order(1003, 150)); }
TEST(Invariance, KernelScale) { expect_pass(check_kernel_scale(1004, 150)); }
