#include <cstring>
#include <random>

#include "doctest.h"
#include "stagewise/kernels.hpp"
#include "util.hpp"

using namespace stagewise;
namespace k = stagewise::kernels;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::vector<k::Backend> vector_backends() {
  std::vector<k::Backend> out;
  for (auto b : {k::Backend::Avx2, k::Backend::Neon}) {
    if (k::available(b)) out.push_back(b);
  }
  return out;
}

}  // namespace

TEST_CASE("scalar reductions match naive sums on small inputs") {
  const auto& s = k::scalar_table();
  const double x[] = {1.0, -2.0, 3.5, -0.5};
  const double y[] = {2.0, 1.0, -1.0, 4.0};
  CHECK(s.dot(x, y, 4) == doctest::Approx(2.0 - 2.0 - 3.5 - 2.0));
  CHECK(s.sum_abs(x, 4) == 7.0);
  CHECK(s.max_abs(x, 4) == 3.5);
  CHECK(s.argmax_abs(x, 4) == 2);
  CHECK(s.argmax_abs(x, 0) == 0);
}

TEST_CASE("argmax_abs returns the smallest index among ties") {
  const double x[] = {0.5, -3.0, 3.0, -3.0, 1.0, 3.0, 0.0, 0.0, 0.0, -3.0, 2.0};
  CHECK(k::scalar_table().argmax_abs(x, 11) == 1);
  for (auto b : vector_backends()) CHECK(k::table(b).argmax_abs(x, 11) == 1);
}

TEST_CASE("sign_step leaves zero entries alone") {
  const double d[] = {1.0, 0.0, -2.0};
  double u[] = {0.0, 0.0, 0.0};
  k::scalar_table().sign_step(0.25, d, u, 3);
  CHECK(u[0] == -0.25);
  CHECK(u[1] == 0.0);
  CHECK(u[2] == 0.25);
}

TEST_CASE("vector kernels are bitwise equal to the scalar reference") {
  std::mt19937_64 g(7);
  const auto& s = k::scalar_table();
  for (auto b : vector_backends()) {
    const auto& v = k::table(b);
    for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 100u, 1001u}) {
      Vector x = testutil::gauss(g, static_cast<Index>(n));
      Vector y = testutil::gauss(g, static_cast<Index>(n));
      if (n > 5) x(5) = 0.0;
      CHECK(same_bits(s.dot(x.data(), y.data(), n), v.dot(x.data(), y.data(), n)));
      CHECK(same_bits(s.sum_abs(x.data(), n), v.sum_abs(x.data(), n)));
      CHECK(same_bits(s.max_abs(x.data(), n), v.max_abs(x.data(), n)));
      CHECK(s.argmax_abs(x.data(), n) == v.argmax_abs(x.data(), n));

      Vector y1 = y, y2 = y;
      s.axpy(0.3, x.data(), y1.data(), n);
      v.axpy(0.3, x.data(), y2.data(), n);
      CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);

      y1 = y, y2 = y;
      s.scale(-1.7, y1.data(), n);
      v.scale(-1.7, y2.data(), n);
      CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);

      y1 = y, y2 = y;
      s.sign_step(0.01, x.data(), y1.data(), n);
      v.sign_step(0.01, x.data(), y2.data(), n);
      CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("gemv wrappers agree across backends") {
  std::mt19937_64 g(11);
  const Matrix X = testutil::gauss(g, 37, 13);
  const Vector b = testutil::gauss(g, 13), r = testutil::gauss(g, 37);
  const auto original = k::detect();
  k::select(k::Backend::Scalar);
  Vector o1(37), t1(13);
  k::gemv(X, view(b), view(o1));
  k::gemv_t(X, view(r), view(t1));
  CHECK((o1 - X * b).norm() < 1e-12);
  CHECK((t1 - X.transpose() * r).norm() < 1e-12);
  for (auto be : vector_backends()) {
    k::select(be);
    Vector o2(37), t2(13);
    k::gemv(X, view(b), view(o2));
    k::gemv_t(X, view(r), view(t2));
    CHECK(std::memcmp(o1.data(), o2.data(), sizeof(double) * 37) == 0);
    CHECK(std::memcmp(t1.data(), t2.data(), sizeof(double) * 13) == 0);
  }
  k::select(original);
}
