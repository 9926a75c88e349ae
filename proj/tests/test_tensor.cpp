#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "msa/ref_kernels.hpp"
#include "msa/tensor.hpp"
#include "test_support.hpp"

using namespace msa;
using test_support::random_tensor;

TEST_CASE("tensor shape validation names the offending axis") {
  CHECK_THROWS_WITH_AS(Tensor({2, 0, 3}), doctest::Contains("axis 1"), ShapeError);
  CHECK_THROWS_WITH_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), doctest::Contains("data length"),
                       ShapeError);
  CHECK_THROWS_WITH_AS(add(Tensor({2, 2}), Tensor({2, 3})), doctest::Contains("axis 1"),
                       ShapeError);
}

TEST_CASE("vector-space basics") {
  Tensor a({2, 2}, {1, 2, 3, 4});
  Tensor b({2, 2}, {5, 6, 7, 8});
  CHECK(add(a, b)[3] == 12.0);
  CHECK(sub(b, a)[0] == 4.0);
  CHECK(scale(a, -2.0)[1] == -4.0);
  CHECK(hadamard(a, b)[2] == 21.0);
  Tensor y = a;
  add_scaled_inplace(y, 0.5, b);
  CHECK(y[0] == doctest::Approx(3.5));
  CHECK(dot(a, b) == doctest::Approx(70.0));
  CHECK(sum_squares(a) == doctest::Approx(30.0));
  CHECK(max_abs(scale(a, -1.0)) == 4.0);
  CHECK(all_finite(a));
  Tensor c = a;
  c[2] = std::numeric_limits<double>::infinity();
  CHECK_FALSE(all_finite(c));
}

TEST_CASE("blocked reductions match the serial reference and any thread count") {
  Rng rng(11);
  Tensor a = random_tensor({1, 100, 173}, rng);
  Tensor b = random_tensor({1, 100, 173}, rng);
  const double want = ref::dot(a, b);
  const double got = dot(a, b);
  CHECK(test_support::rel_diff(want, got) < 1e-12);

#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double serial = dot(a, b);
  omp_set_num_threads(saved);
  CHECK(serial == got);  // bit-identical across thread counts
#endif
}

TEST_CASE("map applies entrywise and preserves shape") {
  Rng rng(3);
  Tensor x = random_tensor({2, 5, 7}, rng);
  Tensor idm = map(x, [](double v) { return v; });
  CHECK(test_support::bit_equal(idm, x));
  Tensor zero = map(x, [](double) { return 0.0; });
  CHECK(max_abs(zero) == 0.0);
}

TEST_CASE("dual arithmetic: zero tangents stay zero, products follow the rule") {
  Rng rng(5);
  Tensor x = random_tensor({1, 4, 4}, rng);
  DualTensor dx = constant_dual(x);
  DualTensor out = dual_map(dx, [](double v) { return v * v; }, [](double v) { return 2 * v; });
  CHECK(max_abs(out.tangent) == 0.0);

  Tensor v = random_tensor({1, 4, 4}, rng);
  DualTensor seeded = make_dual(x, v);
  DualTensor sq = dual_map(seeded, [](double z) { return z * z; }, [](double z) { return 2 * z; });
  // tangent of x^2 along v is 2 x v
  CHECK(test_support::rel_diff(sq.tangent, hadamard(scale(x, 2.0), v)) < 1e-14);

  DualTensor prod = dual_hadamard(seeded, seeded);
  CHECK(test_support::rel_diff(prod.tangent, sq.tangent) < 1e-14);
}
