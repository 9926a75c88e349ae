#include <doctest.h>

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "msa/activation.hpp"
#include "msa/conv.hpp"
#include "msa/ref_kernels.hpp"
#include "test_support.hpp"

using namespace msa;
using test_support::random_tensor;
using test_support::rel_diff;

TEST_CASE("conv2d: 1x1 identity kernel passes the input through") {
  Rng rng(1);
  Tensor x = random_tensor({1, 5, 6}, rng);
  Tensor w({1, 1, 1, 1}, {1.0});
  CHECK(test_support::bit_equal(conv2d(x, w), x));
}

TEST_CASE("conv2d: zero kernel gives the zero tensor") {
  Rng rng(2);
  Tensor x = random_tensor({2, 4, 4}, rng);
  Tensor w({3, 2, 3, 3});
  CHECK(max_abs(conv2d(x, w)) == 0.0);
}

TEST_CASE("conv2d matches the direct nested-loop oracle") {
  Rng rng(3);
  Tensor x = random_tensor({1, 4, 4}, rng);
  Tensor w = random_tensor({2, 1, 3, 3}, rng);
  CHECK(rel_diff(conv2d(x, w), ref::conv2d(x, w)) < 1e-12);
}

TEST_CASE("conv2d shape errors name the offending axis") {
  Tensor x({2, 4, 4});
  CHECK_THROWS_WITH_AS(conv2d(x, Tensor({1, 3, 3, 3})), doctest::Contains("axis 1"), ShapeError);
  CHECK_THROWS_WITH_AS(conv2d(x, Tensor({1, 2, 2, 2})), doctest::Contains("odd"), ShapeError);
  CHECK_THROWS_WITH_AS(conv2d(x, Tensor({1, 2, 3, 5})), doctest::Contains("square"), ShapeError);
  CHECK_THROWS_WITH_AS(conv2d(Tensor({4, 4}), Tensor({1, 2, 3, 3})), doctest::Contains("rank"),
                       ShapeError);
}

TEST_CASE("adjoint trivials") {
  Rng rng(4);
  Tensor g = random_tensor({1, 5, 5}, rng);
  Tensor w({1, 1, 1, 1}, {1.0});
  CHECK(test_support::bit_equal(conv2d_adjoint_input(g, w), g));
  Tensor zero_g({2, 5, 5});
  Tensor w2 = random_tensor({2, 1, 3, 3}, rng);
  CHECK(max_abs(conv2d_adjoint_input(zero_g, w2)) == 0.0);
  CHECK(max_abs(conv2d_adjoint_weights(Tensor({1, 5, 5}), g, {1, 1, 3, 3})) == 0.0);
  CHECK(max_abs(conv2d_adjoint_weights(random_tensor({1, 5, 5}, rng), Tensor({1, 5, 5}),
                                       {1, 1, 3, 3})) == 0.0);
}

TEST_CASE("adjoint identities hold on 100 random shape-conformant instances") {
  Rng rng(42);
  for (int it = 0; it < 100; ++it) {
    const int cin = 1 + static_cast<int>(rng.next_u64() % 3);
    const int cout = 1 + static_cast<int>(rng.next_u64() % 3);
    const int h = 1 + static_cast<int>(rng.next_u64() % 6);
    const int w = 1 + static_cast<int>(rng.next_u64() % 6);
    const int k = 1 + 2 * static_cast<int>(rng.next_u64() % 3);
    Tensor u = random_tensor({cin, h, w}, rng);
    Tensor v = random_tensor({cout, h, w}, rng);
    Tensor wt = random_tensor({cout, cin, k, k}, rng);

    const double lhs = dot(conv2d(u, wt), v);
    const double rhs_input = dot(u, conv2d_adjoint_input(v, wt));
    const double rhs_weights = dot(wt, conv2d_adjoint_weights(u, v, wt.shape()));
    CHECK(rel_diff(lhs, rhs_input) < 1e-10);
    CHECK(rel_diff(lhs, rhs_weights) < 1e-10);
  }
}

TEST_CASE("conv2d is linear in its input") {
  Rng rng(7);
  Tensor x = random_tensor({2, 6, 5}, rng);
  Tensor y = random_tensor({2, 6, 5}, rng);
  Tensor w = random_tensor({3, 2, 3, 3}, rng);
  const double a = -1.7, b = 0.4;
  Tensor lhs = conv2d(add(scale(x, a), scale(y, b)), w);
  Tensor rhs = add(scale(conv2d(x, w), a), scale(conv2d(y, w), b));
  CHECK(rel_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("dual conv: zero tangent propagates to zero, tangents are the linearization") {
  Rng rng(8);
  Tensor x = random_tensor({1, 4, 4}, rng);
  Tensor w = random_tensor({2, 1, 3, 3}, rng);
  DualTensor out0 = dual_conv2d(constant_dual(x), w);
  CHECK(max_abs(out0.tangent) == 0.0);

  Tensor v = random_tensor({1, 4, 4}, rng);
  DualTensor out = dual_conv2d(make_dual(x, v), w);
  CHECK(test_support::bit_equal(out.tangent, conv2d(v, w)));

  // product rule against the dual-weights overload
  Tensor wv = random_tensor({2, 1, 3, 3}, rng);
  DualTensor both = dual_conv2d(make_dual(x, v), make_dual(w, wv));
  Tensor want = add(conv2d(v, w), conv2d(x, wv));
  CHECK(rel_diff(both.tangent, want) < 1e-13);
}

TEST_CASE("dual SiLU tangent matches the central finite difference") {
  Tensor x({1, 1, 1}, {1.0});
  Tensor v({1, 1, 1}, {1.0});
  DualTensor out = dual_elementwise_map(make_dual(x, v), silu());
  CHECK(out.tangent[0] == doctest::Approx(0.927671).epsilon(1e-4));

  const double eps = 1e-6;
  const double fd = (silu_value(1.0 + eps) - silu_value(1.0 - eps)) / (2 * eps);
  CHECK(std::fabs(out.tangent[0] - fd) < 1e-6);
}

TEST_CASE("dual propagation of a composite pipeline matches central finite differences") {
  Rng rng(9);
  Tensor x = random_tensor({1, 5, 5}, rng);
  Tensor v = random_tensor({1, 5, 5}, rng);
  Tensor w1 = random_tensor({3, 1, 3, 3}, rng, 0.4);
  Tensor w2 = random_tensor({1, 3, 3, 3}, rng, 0.4);

  auto pipeline = [&](const Tensor& in) {
    return conv2d(elementwise_map(conv2d(in, w1), silu()), w2);
  };
  DualTensor dual_out =
      dual_conv2d(dual_elementwise_map(dual_conv2d(make_dual(x, v), w1), silu()), w2);

  const double eps = 1e-5;
  Tensor plus = pipeline(add(x, scale(v, eps)));
  Tensor minus = pipeline(add(x, scale(v, -eps)));
  Tensor fd = scale(sub(plus, minus), 1.0 / (2 * eps));
  CHECK(rel_diff(dual_out.tangent, fd) < 1e-5);
}

TEST_CASE("conv kernels are deterministic across repeats and thread counts") {
  Rng rng(10);
  Tensor x = random_tensor({4, 32, 32}, rng);
  Tensor w = random_tensor({4, 4, 3, 3}, rng);
  Tensor first = conv2d(x, w);
  CHECK(test_support::bit_equal(first, conv2d(x, w)));
#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  Tensor serial = conv2d(x, w);
  omp_set_num_threads(saved);
  CHECK(test_support::bit_equal(first, serial));
#endif
}
