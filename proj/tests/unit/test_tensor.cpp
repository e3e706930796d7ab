#include <random>

#include "util.hpp"

using namespace covconv;
using namespace test;

TEST_CASE("rank component counts") {
  CHECK(TensorRank{0, 0}.component_count(2) == 1);
  CHECK(TensorRank{1, 0}.component_count(2) == 2);
  CHECK(TensorRank{2, 1}.component_count(2) == 8);
  CHECK(TensorRank{1, 1}.component_count(3) == 9);
}

TEST_CASE("tensor values reject bad shapes and non-finite components") {
  CHECK_THROWS_AS(TensorValue(TensorRank{1, 0}, pt(0, 0), {1.0}), InvalidArgument);
  CHECK_THROWS_AS(TensorValue(TensorRank{0, 0}, pt(0, 0), {std::nan("")}), NumericalError);
}

TEST_CASE("push_tensor examples") {
  const Matrix j = mat(1, 0, 0, 2);
  SUBCASE("scalar is unchanged") {
    const auto s = push_tensor(TensorValue::scalar(3.5, pt(2, 0)), mat(0.3, -1.0, 2.0, 4.0));
    CHECK(s.components[0] == 3.5);
  }
  SUBCASE("vector (1,1) under the polar Jacobian at rho = 2") {
    const auto v = push_tensor(TensorValue::vector(vec(1, 1), pt(2, 0)), j);
    CHECK(v.components[0] == doctest::Approx(1.0));
    CHECK(v.components[1] == doctest::Approx(2.0));
  }
  SUBCASE("identity (1,1) tensor stays the identity") {
    const Matrix a = mat(0.3, -1.0, 2.0, 4.0);
    const auto t = push_tensor(TensorValue(TensorRank{1, 1}, pt(0, 0), {1, 0, 0, 1}), a);
    CHECK(max_diff(t.components, {1, 0, 0, 1}) < 1e-14);
  }
  SUBCASE("covector uses the inverse transpose") {
    const auto w = push_tensor(TensorValue(TensorRank{0, 1}, pt(0, 0), {1, 1}), j);
    CHECK(w.components[0] == doctest::Approx(1.0));
    CHECK(w.components[1] == doctest::Approx(0.5));
  }
}

TEST_CASE("push_tensor: pairing of vector and covector is invariant") {
  const Matrix a = mat(0.3, -1.0, 2.0, 4.0);
  const auto v = push_tensor(TensorValue::vector(vec(0.7, -0.2), pt(0, 0)), a);
  const auto w = push_tensor(TensorValue(TensorRank{0, 1}, pt(0, 0), {1.5, 0.25}), a);
  const double before = 0.7 * 1.5 - 0.2 * 0.25;
  const double after = v.components[0] * w.components[0] + v.components[1] * w.components[1];
  CHECK(after == doctest::Approx(before).epsilon(1e-14));
}

TEST_CASE("push_tensor: identity Jacobian is exactly the identity") {
  const TensorValue t(TensorRank{2, 1}, pt(0.1, 0.2), {1, -2, 3, -4, 5, -6, 7.25, 8e-3});
  const auto u = push_tensor(t, Matrix::Identity(2, 2));
  CHECK(u.components == t.components);
}

TEST_CASE("push_tensor: composition property over random ranks and Jacobians") {
  std::mt19937_64 rng(42);
  auto uni = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  for (int trial = 0; trial < 50; ++trial) {
    const TensorRank r{static_cast<int>(rng() % 3), static_cast<int>(rng() % 3)};
    std::vector<double> c(r.component_count(2));
    for (auto& x : c) x = uni();
    const TensorValue t(r, pt(0, 0), c);
    Matrix j1 = Matrix::Identity(2, 2) + 0.5 * Matrix::NullaryExpr(2, 2, [&] { return uni(); });
    Matrix j2 = Matrix::Identity(2, 2) + 0.5 * Matrix::NullaryExpr(2, 2, [&] { return uni(); });
    const auto lhs = push_tensor(push_tensor(t, j1), j2);
    const auto rhs = push_tensor(t, Matrix(j2 * j1));
    CHECK(lhs.max_abs_difference(rhs) < 1e-12 * std::max(1.0, rhs.max_abs()));
  }
}

TEST_CASE("push_tensor rejects singular Jacobians") {
  CHECK_THROWS_AS(push_tensor(TensorValue::vector(vec(1, 0), pt(0, 0)), mat(1, 2, 2, 4)), NumericalError);
}

TEST_CASE("multi-index labels are 1-based and row-major") {
  CHECK(multi_index_labels("c", 2, 0) == std::vector<std::string>{"c"});
  CHECK(multi_index_labels("c", 2, 1) == std::vector<std::string>{"c_1", "c_2"});
  CHECK(multi_index_labels("out", 2, 2) == std::vector<std::string>{"out_11", "out_12", "out_21", "out_22"});
}
