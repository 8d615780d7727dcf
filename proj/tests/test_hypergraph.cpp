#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <vector>

#include "hcae/hypergraph.hpp"
#include "test_util.hpp"

using namespace hcae;
using test::exact_equal;
using test::random_connectivity;
using test::random_subject;

namespace {

// Independent oracle: for every center, rank the other nodes by an explicit
// (weight desc, index asc) sort and mark the first k plus the center.
Matrix oracle_incidence(const Matrix& x, int k) {
  const int n = static_cast<int>(x.rows());
  Matrix h = Matrix::Zero(n, n);
  for (int center = 0; center < n; ++center) {
    std::vector<std::pair<double, int>> ranked;
    for (int i = 0; i < n; ++i) {
      if (i != center) ranked.emplace_back(x(center, i), i);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    h(center, center) = 1.0;
    for (int i = 0; i < k; ++i) h(ranked[i].second, center) = 1.0;
  }
  return h;
}

}  // namespace

TEST_CASE("k = N-1 connects every node to every other") {
  Rng rng(5);
  const auto x = random_connectivity(6, rng);
  const Matrix h = build_view_incidence(x, 5);
  CHECK(exact_equal(h, Matrix::Ones(6, 6)));
}

TEST_CASE("top-k selection follows the documented example") {
  // row 0 weights [0, .9, .1, .5], k=2 -> neighbors {1, 3}
  Matrix x(4, 4);
  x << 0, .9, .1, .5,
      .9, 0, .2, .3,
      .1, .2, 0, .4,
      .5, .3, .4, 0;
  const Matrix h = build_view_incidence({x, 1}, 2);
  CHECK(h(0, 0) == 1.0);
  CHECK(h(1, 0) == 1.0);
  CHECK(h(3, 0) == 1.0);
  CHECK(h(2, 0) == 0.0);
  CHECK(h.col(0).sum() == 3.0);
}

TEST_CASE("ties break toward the lower node index") {
  for (int n = 3; n <= 5; ++n) {
    Matrix x = Matrix::Ones(n, n) - Matrix::Identity(n, n);
    const Matrix h = build_view_incidence({x, 1}, 1);
    for (int center = 0; center < n; ++center) {
      const int expected = center == 0 ? 1 : 0;  // min index != center
      CHECK(h(expected, center) == 1.0);
      CHECK(h(center, center) == 1.0);
      CHECK(h.col(center).sum() == 2.0);
    }
  }
}

TEST_CASE("k out of range is a parameter error") {
  Rng rng(6);
  const auto x = random_connectivity(5, rng);
  CHECK_THROWS_AS(build_view_incidence(x, 0), ParameterError);
  CHECK_THROWS_AS(build_view_incidence(x, 5), ParameterError);
}

TEST_CASE("incidence matches the brute-force oracle on random small matrices") {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(5));  // N <= 6
    const int k = 1 + static_cast<int>(rng.index(n - 1));
    Matrix x = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        // quantized weights so ties actually occur
        x(i, j) = x(j, i) = rng.index(4) * 0.25;
      }
    }
    const Matrix got = build_view_incidence({x, 1}, k);
    const Matrix want = oracle_incidence(x, k);
    REQUIRE(exact_equal(got, want));
  }
}

TEST_CASE("multi-view stack: shapes, column sums, degrees") {
  Rng rng(8);
  const auto subject = random_subject(35, 4, rng);
  auto [h, features] = build_hyperconnectome(subject, 5);
  CHECK(h.incidence.rows() == 35);
  CHECK(h.incidence.cols() == 140);
  CHECK(features.values.rows() == 35);
  CHECK(features.values.cols() == 140);
  CHECK(h.n_views == 4);

  for (int e = 0; e < 140; ++e) {
    CHECK(h.incidence.col(e).sum() == 6.0);       // k+1 ones
    CHECK(h.edge_degrees(e) == 6.0);
  }
  for (int v = 0; v < 35; ++v) {
    CHECK(h.vertex_degrees(v) == h.incidence.row(v).sum());
    CHECK(h.vertex_degrees(v) >= 4.0);  // centers one hyperedge per view
  }
  // feature block b is view b exactly
  for (int v = 0; v < 4; ++v) {
    CHECK(exact_equal(features.values.middleCols(35 * v, 35),
                      subject.views[v].values));
  }
  // binary entries
  CHECK(((h.incidence.array() == 0.0) || (h.incidence.array() == 1.0)).all());
}

TEST_CASE("single view reduces to build_view_incidence") {
  Rng rng(9);
  const auto subject = random_subject(12, 1, rng);
  auto [h, features] = build_hyperconnectome(subject, 3);
  CHECK(exact_equal(h.incidence, build_view_incidence(subject.views[0], 3)));
  CHECK(exact_equal(features.values, subject.views[0].values));
}

TEST_CASE("k = N-1 gives uniform degrees") {
  Rng rng(10);
  const auto subject = random_subject(9, 3, rng);
  auto [h, features] = build_hyperconnectome(subject, 8);
  CHECK((h.vertex_degrees.array() == 27.0).all());  // M*N
  CHECK((h.edge_degrees.array() == 9.0).all());     // N
}

TEST_CASE("propagation operator: symmetry, PSD, spectrum, fixed vector") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 5 + static_cast<int>(rng.index(31));
    const int m = 1 + static_cast<int>(rng.index(4));
    const int k = 1 + static_cast<int>(rng.index(n - 1));
    const auto subject = random_subject(n, m, rng);
    auto [h, features] = build_hyperconnectome(subject, k);
    const Matrix prop = propagation_operator(h);

    CHECK(test::max_abs_diff(prop, prop.transpose().eval()) <= 1e-12);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(prop);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    CHECK(eig.eigenvalues().maxCoeff() <= 1.0 + 1e-9);

    // u(v) = sqrt(d(v)) is an eigenvector with eigenvalue 1
    const Vector u = h.vertex_degrees.array().sqrt();
    CHECK((prop * u - u).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("node relabeling permutes incidence rows and conjugates the operator") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(rng.index(4));  // N <= 6
    const int m = 1 + static_cast<int>(rng.index(2));
    const int k = 1 + static_cast<int>(rng.index(n - 1));
    const auto subject = random_subject(n, m, rng);

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    Matrix p = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) p(perm[i], i) = 1.0;  // new = perm[old]

    MultiViewConnectome permuted;
    permuted.subject_id = "p";
    for (const auto& view : subject.views) {
      permuted.views.push_back(
          {(p * view.values * p.transpose()).eval(), view.view_id});
    }

    auto [h, f] = build_hyperconnectome(subject, k);
    auto [hp, fp] = build_hyperconnectome(permuted, k);

    // per view: permuted incidence = P * H with columns re-centered by perm
    for (int v = 0; v < m; ++v) {
      const Matrix block = h.incidence.middleCols(n * v, n);
      const Matrix block_p = hp.incidence.middleCols(n * v, n);
      for (int col = 0; col < n; ++col) {
        const Vector expected = p * block.col(col);
        REQUIRE(exact_equal(block_p.col(perm[col]), expected));
      }
    }
    const Matrix prop = propagation_operator(h);
    const Matrix prop_p = propagation_operator(hp);
    REQUIRE(test::max_abs_diff(prop_p, p * prop * p.transpose()) <= 1e-12);
  }
}
