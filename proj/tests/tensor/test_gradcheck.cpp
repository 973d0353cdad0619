#include <doctest.h>

#include "gpr/tensor/errors.hpp"
#include "gpr/tensor/gradcheck.hpp"
#include "gpr/tensor/ops.hpp"
#include "test_util.hpp"

using namespace gpr;
using gpr::testing::random_matrix;

namespace {

// tanh with a deliberately wrong derivative (1 - y instead of 1 - y^2).
Tensor broken_tanh(const Tensor& x) {
  Matrix out = x.value().array().tanh().matrix();
  return Tensor::from_op(std::move(out), {x}, [](detail::Node& self) {
    Matrix local = (1.0 - self.value.array()).matrix();
    self.parents[0]->accumulate(self.grad.cwiseProduct(local));
  });
}

}  // namespace

TEST_CASE("grad_check") {
  Rng rng(1);
  SUBCASE("linear scalar function is exact") {
    Tensor w = Tensor::parameter(random_matrix(3, 3, rng), "w");
    Tensor c(random_matrix(3, 3, rng));
    auto report = grad_check([&] { return sum(mul(w, c)); }, {w});
    CHECK(report.max_relative_error < 1e-8);
    CHECK(report.elements_checked == 9);
  }
  SUBCASE("corrupted backward rule is detected") {
    Tensor w = Tensor::parameter(random_matrix(3, 3, rng), "w");
    auto report = grad_check([&] { return sum(broken_tanh(w)); }, {w});
    CHECK(report.max_relative_error > 1e-2);
    CHECK(report.worst_parameter == "w");
  }
  SUBCASE("non-scalar output is rejected") {
    Tensor w = Tensor::parameter(random_matrix(2, 2, rng), "w");
    CHECK_THROWS_AS(grad_check([&] { return tanh(w); }, {w}), DimensionError);
  }
  SUBCASE("large parameters are subsampled") {
    Tensor w = Tensor::parameter(random_matrix(60, 60, rng), "w");
    Tensor b = Tensor::parameter(random_matrix(1, 60, rng), "b");
    GradCheckOptions opt;
    opt.max_elements = 200;
    auto report = grad_check([&] { return sum(tanh(add_row(w, b))); }, {w, b}, opt);
    CHECK(report.elements_checked < 300);
    CHECK(report.max_relative_error < 1e-4);
  }
}
