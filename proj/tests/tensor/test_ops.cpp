#include <doctest.h>

#include <cmath>

#include "gpr/tensor/errors.hpp"
#include "gpr/tensor/gradcheck.hpp"
#include "gpr/tensor/ops.hpp"
#include "test_util.hpp"

using namespace gpr;
using gpr::testing::max_abs_diff;
using gpr::testing::random_matrix;

namespace {

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c = Matrix::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j)
      for (Index k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

Matrix row(std::initializer_list<double> values) {
  Matrix m(1, static_cast<Index>(values.size()));
  Index i = 0;
  for (double v : values) m(0, i++) = v;
  return m;
}

}  // namespace

TEST_CASE("matmul") {
  Rng rng(7);
  SUBCASE("identity") {
    Matrix a = random_matrix(4, 4, rng);
    CHECK(max_abs_diff(matmul(Tensor(a), Tensor(Matrix::Identity(4, 4))).value(), a) == 0.0);
  }
  SUBCASE("hand sum") {
    Matrix a(2, 2);
    a << 1, 2, 3, 4;
    Matrix b(2, 1);
    b << 1, 1;
    Matrix c = matmul(Tensor(a), Tensor(b)).value();
    CHECK(c(0, 0) == 3.0);
    CHECK(c(1, 0) == 7.0);
  }
  SUBCASE("matches triple loop") {
    Matrix a = random_matrix(5, 7, rng);
    Matrix b = random_matrix(7, 3, rng);
    CHECK(max_abs_diff(matmul(Tensor(a), Tensor(b)).value(), naive_matmul(a, b)) < 1e-12);
  }
  SUBCASE("shape mismatch names both shapes") {
    try {
      matmul(Tensor(Matrix::Zero(2, 3)), Tensor(Matrix::Zero(4, 5)));
      FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("2x3") != std::string::npos);
      CHECK(msg.find("4x5") != std::string::npos);
    }
  }
}

TEST_CASE("softmax") {
  SUBCASE("uniform") {
    Matrix y = softmax(Tensor(row({0, 0, 0}))).value();
    for (Index i = 0; i < 3; ++i) CHECK(y(0, i) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("single unmasked element") {
    Mask mask(1, 3);
    mask << false, true, false;
    Matrix y = softmax(Tensor(row({5, -2, 9})), Axis::kCols, mask).value();
    CHECK(y(0, 0) == 0.0);
    CHECK(y(0, 1) == 1.0);
    CHECK(y(0, 2) == 0.0);
  }
  SUBCASE("closed form [2, 0]") {
    Matrix y = softmax(Tensor(row({2, 0}))).value();
    const double e2 = std::exp(2.0);
    CHECK(std::abs(y(0, 0) - e2 / (e2 + 1)) < 1e-15);
    CHECK(std::abs(y(0, 1) - 1 / (e2 + 1)) < 1e-15);
  }
  SUBCASE("stable for huge logits") {
    Matrix y = softmax(Tensor(row({1000, 1000}))).value();
    CHECK(y(0, 0) == doctest::Approx(0.5));
  }
  SUBCASE("fully masked row is an error") {
    Mask mask = Mask::Constant(1, 2, false);
    CHECK_THROWS_AS(softmax(Tensor(row({1, 2})), Axis::kCols, mask), DegenerateMaskError);
  }
  SUBCASE("column axis") {
    Matrix x(2, 2);
    x << 0, 1, 0, 1;
    Matrix y = softmax(Tensor(x), Axis::kRows).value();
    CHECK(y(0, 0) == doctest::Approx(0.5));
    CHECK(y(1, 1) == doctest::Approx(0.5));
  }
}

TEST_CASE("softmax normalization property over random shapes and masks") {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const Index rows = 1 + static_cast<Index>(rng.index(5));
    const Index cols = 1 + static_cast<Index>(rng.index(8));
    Matrix x = random_matrix(rows, cols, rng, 5.0);
    Mask mask(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) mask(r, c) = rng.bernoulli(0.6);
      mask(r, static_cast<Index>(rng.index(static_cast<std::size_t>(cols)))) = true;
    }
    Matrix y = softmax(Tensor(x), Axis::kCols, mask).value();
    for (Index r = 0; r < rows; ++r) {
      CHECK(std::abs(y.row(r).sum() - 1.0) < 1e-9);
      for (Index c = 0; c < cols; ++c) {
        if (!mask(r, c)) CHECK(y(r, c) == 0.0);
        CHECK(y(r, c) >= 0.0);
      }
    }
  }
}

TEST_CASE("tanh_affine") {
  SUBCASE("zero input and bias") {
    Matrix y = tanh_affine(Tensor(Matrix::Zero(2, 3)), Tensor(Matrix::Ones(3, 3)), Tensor(Matrix::Zero(1, 3))).value();
    CHECK(y.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("saturates for large inputs") {
    Matrix x = row({50, -50, 30});
    Matrix y = tanh_affine(Tensor(x), Tensor(Matrix::Identity(3, 3)), Tensor(Matrix::Zero(1, 3))).value();
    CHECK(std::abs(y(0, 0) - 1.0) < 1e-6);
    CHECK(std::abs(y(0, 1) + 1.0) < 1e-6);
    CHECK(std::abs(y(0, 2) - 1.0) < 1e-6);
  }
  SUBCASE("gradient matches finite differences") {
    Rng rng(3);
    Tensor x = Tensor::parameter(random_matrix(3, 4, rng), "x");
    Tensor w = Tensor::parameter(random_matrix(4, 5, rng, 0.5), "w");
    Tensor b = Tensor::parameter(random_matrix(1, 5, rng), "b");
    auto report = grad_check([&] { return sum(tanh_affine(x, w, b)); }, {x, w, b});
    CHECK(report.max_relative_error < 1e-4);
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(tanh_affine(Tensor(Matrix::Zero(2, 3)), Tensor(Matrix::Zero(4, 3)), Tensor(Matrix::Zero(1, 3))),
                    DimensionError);
  }
}

TEST_CASE("dropout") {
  Rng rng(5);
  Tensor x(random_matrix(4, 4, rng));
  SUBCASE("rate 0 is the identity") { CHECK(dropout(x, 0.0, true, rng).same_node(x)); }
  SUBCASE("evaluation mode is the exact identity") {
    Tensor y = dropout(x, 0.5, false, rng);
    CHECK(y.same_node(x));
    CHECK((y.value().array() == x.value().array()).all());
  }
  SUBCASE("rate outside range") {
    CHECK_THROWS_AS(dropout(x, 1.0, true, rng), ConfigError);
    CHECK_THROWS_AS(dropout(x, -0.1, true, rng), ConfigError);
  }
  SUBCASE("statistics at rate 0.1") {
    Tensor big(Matrix::Ones(100, 1000));
    Matrix y = dropout(big, 0.1, true, rng).value();
    const double zero_fraction = (y.array() == 0.0).cast<double>().mean();
    CHECK(std::abs(zero_fraction - 0.1) < 0.01);
    CHECK(std::abs(y.mean() - 1.0) < 0.02);
  }
}

TEST_CASE("cross_entropy") {
  SUBCASE("perfect one-hot") {
    Matrix p(2, 3);
    p << 1, 0, 0, 0, 0, 1;
    CHECK(cross_entropy(Tensor(p), {0, 2}).item() <= 1e-14);
  }
  SUBCASE("uniform gives ln 3") {
    Matrix p = Matrix::Constant(4, 3, 1.0 / 3.0);
    CHECK(std::abs(cross_entropy(Tensor(p), {0, 1, 2, 0}).item() - std::log(3.0)) < 1e-12);
  }
  SUBCASE("gradient through softmax matches finite differences on logits") {
    Rng rng(9);
    Tensor logits = Tensor::parameter(random_matrix(3, 3, rng), "logits");
    auto report = grad_check([&] { return cross_entropy(softmax(logits), {0, 2, 1}); }, {logits});
    CHECK(report.max_relative_error < 1e-4);
  }
  SUBCASE("gold index out of range") {
    Matrix p = Matrix::Constant(1, 3, 1.0 / 3.0);
    CHECK_THROWS_AS(cross_entropy(Tensor(p), {3}), DimensionError);
  }
  SUBCASE("rows must be normalized") {
    Matrix p = Matrix::Constant(1, 3, 0.5);
    CHECK_THROWS_AS(cross_entropy(Tensor(p), {0}), DimensionError);
  }
}

TEST_CASE("every differentiable op passes grad_check") {
  Rng rng(21);
  Tensor a = Tensor::parameter(random_matrix(3, 4, rng), "a");
  Tensor b = Tensor::parameter(random_matrix(3, 4, rng), "b");
  Tensor c = Tensor::parameter(random_matrix(4, 2, rng), "c");
  Tensor r = Tensor::parameter(random_matrix(1, 4, rng), "r");
  Tensor pos = Tensor::parameter((random_matrix(3, 4, rng).array().abs() + 0.5).matrix(), "pos");
  Tensor gain = Tensor::parameter((random_matrix(1, 4, rng).array() + 1.0).matrix(), "gain");
  Tensor weights = Tensor(random_matrix(3, 2, rng));
  auto dot = [&](const Tensor& t) {
    // A fixed random projection makes the scalar sensitive to every element.
    Rng local(99);
    return sum(mul(t, Tensor(random_matrix(t.rows(), t.cols(), local))));
  };
  struct Case {
    const char* name;
    std::function<Tensor()> fn;
    std::vector<Tensor> params;
  };
  std::vector<Case> cases = {
      {"matmul", [&] { return dot(matmul(a, c)); }, {a, c}},
      {"transpose", [&] { return dot(transpose(a)); }, {a}},
      {"add", [&] { return dot(add(a, b)); }, {a, b}},
      {"sub", [&] { return dot(sub(a, b)); }, {a, b}},
      {"mul", [&] { return dot(mul(a, b)); }, {a, b}},
      {"scale", [&] { return dot(scale(a, -2.5)); }, {a}},
      {"add_row", [&] { return dot(add_row(a, r)); }, {a, r}},
      {"tanh", [&] { return dot(tanh(a)); }, {a}},
      {"gelu", [&] { return dot(gelu(a)); }, {a}},
      {"log", [&] { return dot(log(pos)); }, {pos}},
      {"softmax cols", [&] { return dot(softmax(a)); }, {a}},
      {"softmax rows", [&] { return dot(softmax(a, Axis::kRows)); }, {a}},
      {"softmax masked", [&] {
         Mask m(1, 4);
         m << true, false, true, true;
         return dot(softmax(a, Axis::kCols, m));
       }, {a}},
      {"mean", [&] { return mean(mul(a, a)); }, {a}},
      {"slice_rows", [&] { return dot(slice_rows(a, 1, 2)); }, {a}},
      {"slice_cols", [&] { return dot(slice_cols(a, 1, 3)); }, {a}},
      {"concat_rows", [&] { return dot(concat_rows({a, b})); }, {a, b}},
      {"concat_cols", [&] { return dot(concat_cols({a, b})); }, {a, b}},
      {"gather_rows", [&] { return dot(gather_rows(a, {2, 0, 2})); }, {a}},
      {"layer_norm", [&] { return dot(layer_norm(a, gain, r)); }, {a, gain, r}},
      {"cross_entropy", [&] { return cross_entropy(softmax(matmul(a, c)), {1, 0, 1}); }, {a, c}},
      {"weighted", [&] { return dot(mul(tanh(matmul(a, c)), weights)); }, {a, c}},
  };
  for (auto& tc : cases) {
    const std::string op_name = tc.name;
    CAPTURE(op_name);
    auto report = grad_check(tc.fn, tc.params);
    CAPTURE(report.worst_parameter);
    CAPTURE(report.worst_analytic);
    CAPTURE(report.worst_numeric);
    CHECK(report.max_relative_error < 1e-4);
  }
}
