#include <doctest.h>

#include <random>

#include "fastqm/error.hpp"
#include "fastqm/tensorops.hpp"
#include "helpers.hpp"

using namespace fastqm;

namespace {

// Full Kronecker product x ⊗ x with (j,i) duplicates (j > i) removed.
Eigen::VectorXd dedup_kron(const Eigen::VectorXd& x) {
  const Eigen::Index r = x.size();
  Eigen::VectorXd out(quad_dim(r));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j)
      if (j >= i) out(k++) = x(i) * x(j);
  return out;
}

}  // namespace

TEST_CASE("quad_dim and index map") {
  CHECK(quad_dim(1) == 1);
  CHECK(quad_dim(3) == 6);
  const QuadIndexMap map(4);
  CHECK(map.size() == 10);
  for (Eigen::Index p = 0; p < map.size(); ++p) {
    const auto [i, j] = map.pairs()[p];
    CHECK(i <= j);
    CHECK(map.index_of(i, j) == p);
  }
  CHECK(map.pairs().front() == std::pair<Eigen::Index, Eigen::Index>{0, 0});
  CHECK(map.pairs()[1] == std::pair<Eigen::Index, Eigen::Index>{0, 1});
  CHECK(map.pairs().back() == std::pair<Eigen::Index, Eigen::Index>{3, 3});
}

TEST_CASE("compressed_square small cases") {
  CHECK(compressed_square(Eigen::VectorXd::Constant(1, 2.0))(0) == 4.0);
  Eigen::VectorXd e(3);
  e << 1, 0, 0;
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(6);
  expected(0) = 1;
  CHECK(compressed_square(e) == expected);
}

TEST_CASE("compressed_square matches deduplicated Kronecker") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = testing::gaussian(testing::uniform_int(1, 6, rng), 1, rng);
    CHECK((compressed_square(x) - dedup_kron(x)).norm() == doctest::Approx(0.0));
  }
  Eigen::VectorXd ab(2);
  ab << 1.5, -0.7;
  Eigen::VectorXd w(3);
  w << 1.5 * 1.5, 1.5 * -0.7, 0.49;
  CHECK((compressed_square(ab) - w).norm() < 1e-15);
}

TEST_CASE("khatri_rao_square") {
  CHECK(khatri_rao_square(Eigen::MatrixXd::Zero(3, 4)) == Eigen::MatrixXd::Zero(6, 4));
  CHECK(khatri_rao_square(Eigen::VectorXd::Ones(2)) == Eigen::VectorXd::Ones(3));
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd X = testing::gaussian(3, 5, rng);
  const Eigen::MatrixXd W = khatri_rao_square(X);
  REQUIRE(W.rows() == 6);
  REQUIRE(W.cols() == 5);
  for (Eigen::Index k = 0; k < 5; ++k) CHECK(W.col(k) == compressed_square(X.col(k)));
}

TEST_CASE("expand_to_full") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index r = testing::uniform_int(1, 5, rng);
    const Eigen::VectorXd x = testing::gaussian(r, 1, rng);
    Eigen::VectorXd kron(r * r);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j) kron(i * r + j) = x(i) * x(j);
    CHECK((expand_to_full(compressed_square(x)) - kron).norm() < 1e-12);
  }
  CHECK(expand_to_full(Eigen::VectorXd::Zero(6)) == Eigen::VectorXd::Zero(9));
  Eigen::VectorXd one(1);
  one << 3.25;
  CHECK(expand_to_full(one) == one);
  CHECK_THROWS_AS(expand_to_full(Eigen::VectorXd::Zero(4)), InputError);
  CHECK(reduced_dim_from_quad(10) == 4);
}
