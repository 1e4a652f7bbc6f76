#include <gtest/gtest.h>

#include "radgest/error.hpp"
#include "radgest/ops.hpp"
#include "radgest/param_store.hpp"
#include "radgest/tensor.hpp"

using namespace radgest;

TEST(Tensor, ShapeAndFill) {
  Tensor t(Shape{2, 3}, 1.5);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.numel(), 6u);
  EXPECT_EQ(t.dim(1), 3u);
  for (double v : t.data()) EXPECT_EQ(v, 1.5);
  EXPECT_EQ(shape_to_string(t.shape()), "(2, 3)");
}

TEST(Tensor, RejectsZeroSizedAxisAndBadData) {
  EXPECT_THROW(Tensor(Shape{2, 0}), ArgumentError);
  EXPECT_THROW(Tensor(Shape{2, 2}, std::vector<double>(3)), ArgumentError);
}

TEST(Tensor, CopiesShareStorageDetachDoesNot) {
  Tensor a(Shape{2}, 1.0);
  Tensor b = a;
  b.mutable_data()[0] = 7.0;
  EXPECT_EQ(a.data()[0], 7.0);
  Tensor c = a.detach();
  c.mutable_data()[0] = 3.0;
  EXPECT_EQ(a.data()[0], 7.0);
}

TEST(Tensor, ItemRequiresSingleElement) {
  EXPECT_EQ(Tensor::scalar(4.0).item(), 4.0);
  EXPECT_THROW(Tensor(Shape{2}).item(), ArgumentError);
}

TEST(GradTape, AccumulatesThroughSharedUse) {
  Tensor x(Shape{1}, 3.0);
  x.set_requires_grad(true);
  GradTape tape;
  // y = x*x + x  ->  dy/dx = 2x + 1 = 7
  Tensor y = add(mul(x, x), x);
  tape.backward(y);
  EXPECT_DOUBLE_EQ(x.grad()[0], 7.0);
}

TEST(GradTape, NonScalarLossIsRejected) {
  Tensor x(Shape{2}, 1.0);
  x.set_requires_grad(true);
  GradTape tape;
  Tensor y = scale(x, 2.0);
  EXPECT_THROW(tape.backward(y), ArgumentError);
}

TEST(GradTape, SecondBackwardIsAStateError) {
  Tensor x(Shape{1}, 1.0);
  x.set_requires_grad(true);
  GradTape tape;
  Tensor y = square(x);
  tape.backward(y);
  EXPECT_TRUE(tape.consumed());
  EXPECT_THROW(tape.backward(y), StateError);
}

TEST(GradTape, NoGradScopeRecordsNothing) {
  Tensor x(Shape{1}, 2.0);
  x.set_requires_grad(true);
  GradTape tape;
  {
    NoGradScope no_grad;
    Tensor y = square(x);
    EXPECT_FALSE(y.requires_grad());
  }
  EXPECT_EQ(tape.size(), 0u);
}

TEST(GradTape, InputsWithoutGradAreNotRecorded) {
  GradTape tape;
  Tensor y = square(Tensor(Shape{3}, 2.0));
  EXPECT_EQ(tape.size(), 0u);
  EXPECT_FALSE(y.requires_grad());
}

TEST(ParamStore, RegistersInOrderAndRejectsDuplicates) {
  ParamStore p;
  p.add("b", Tensor(Shape{2}));
  p.add("a", Tensor(Shape{3}));
  EXPECT_EQ(p.names(), (std::vector<std::string>{"b", "a"}));
  EXPECT_EQ(p.parameter_count(), 5u);
  EXPECT_TRUE(p.get("a").requires_grad());
  EXPECT_THROW(p.add("a", Tensor(Shape{1})), ArgumentError);
  EXPECT_THROW(p.get("zzz"), ArgumentError);
}

TEST(ParamStore, CloneIsDeepAndBitwiseEqual) {
  ParamStore p;
  p.add("w", Tensor(Shape{2}, std::vector<double>{0.1, -2.0}));
  ParamStore q = p.clone();
  EXPECT_TRUE(p.bitwise_equal(q));
  q.get("w").mutable_data()[0] = 0.2;
  EXPECT_FALSE(p.bitwise_equal(q));
  EXPECT_EQ(p.get("w").data()[0], 0.1);
}

TEST(ParamStore, RoundToFloat) {
  ParamStore p;
  p.add("w", Tensor(Shape{1}, 0.1));
  p.round_to_float();
  EXPECT_EQ(p.get("w").data()[0], static_cast<double>(0.1f));
}
