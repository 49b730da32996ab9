#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "sstgnn/differential.hpp"
#include "sstgnn/errors.hpp"
#include "sstgnn/gat.hpp"
#include "sstgnn/optim.hpp"
#include "support.hpp"

using namespace sstgnn;
using testing::random_adjacency;
using testing::random_matrix;

namespace {

double lrelu(double v) { return v > 0 ? v : 0.2 * v; }

struct Oracle {
  Tensor alpha;
  Tensor out;
};

// Straight from the definition, no shared code with the library.
Oracle brute_force(const Tensor& x, const Tensor& signs, const Tensor& w, const Tensor& a) {
  const std::size_t m = x.rows(), din = x.cols(), d = w.cols();
  Tensor h = Tensor::zeros(m, d);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t o = 0; o < d; ++o)
      for (std::size_t k = 0; k < din; ++k) h(i, o) += x(i, k) * w(k, o);
  Oracle r{Tensor::zeros(m, m), Tensor::zeros(m, d)};
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> e(m, 0.0);
    double mx = -1e300;
    for (std::size_t j = 0; j < m; ++j) {
      if (signs(i, j) == 0.0) continue;
      double s = 0.0;
      for (std::size_t o = 0; o < d; ++o) s += a(o, 0) * h(i, o) + a(d + o, 0) * h(j, o);
      e[j] = lrelu(s);
      mx = std::max(mx, e[j]);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (signs(i, j) != 0.0) z += std::exp(e[j] - mx);
    for (std::size_t j = 0; j < m; ++j)
      if (signs(i, j) != 0.0) r.alpha(i, j) = std::exp(e[j] - mx) / z;
    for (std::size_t o = 0; o < d; ++o) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += r.alpha(i, j) * signs(i, j) * h(j, o);
      r.out(i, o) = lrelu(s);
    }
  }
  return r;
}

// Random signed matrix with self-loops, as a test graph.
Tensor random_signed(std::size_t n, std::uint64_t seed) {
  Tensor a = random_adjacency(n, seed, 0.4);
  const Tensor flip = random_matrix(n, n, seed + 7777);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (flip(i, j) < -0.4) a(i, j) = a(j, i) = -a(i, j);
  return a;
}

}  // namespace

TEST_SUITE("gat") {
  TEST_CASE("matches the brute-force oracle on random signed graphs") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const std::size_t n = 3 + s % 9, din = 4, d = 3 + s % 3;
      const Tensor a = random_signed(n, 100 + s);
      const SignedAdjacency adj = SignedAdjacency::from_matrix(a);
      const Tensor x = random_matrix(n, din, 200 + s), w = random_matrix(din, d, 300 + s),
                   att = random_matrix(2 * d, 1, 400 + s);
      ad::Tape tape;
      GatTrace trace;
      const ad::Var out = gat_forward(tape.constant(x), adj, {tape.constant(w), tape.constant(att)}, &trace);
      const Oracle o = brute_force(x, adj.sign, w, att);
      CHECK(max_abs_diff(out.value(), o.out) < 1e-12);
      CHECK(max_abs_diff(trace.attention, o.alpha) < 1e-12);
      CHECK_FALSE(trace.isolated_rows);
    }
  }

  TEST_CASE("attention is row-stochastic and zero off the support") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const std::size_t n = 10;
      const SignedAdjacency adj = SignedAdjacency::from_matrix(random_signed(n, 500 + s));
      ad::Tape tape;
      GatTrace trace;
      gat_forward(tape.constant(random_matrix(n, 5, 600 + s)), adj,
                  {tape.constant(random_matrix(5, 4, 700 + s)), tape.constant(random_matrix(8, 1, 800 + s))}, &trace);
      for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          CHECK(trace.attention(i, j) >= 0.0);
          if (!adj.support(i, j)) CHECK(trace.attention(i, j) == 0.0);
          row += trace.attention(i, j);
        }
        CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("relabelling nodes permutes the output") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const std::size_t n = 8;
      const Tensor a = random_signed(n, 900 + s), x = random_matrix(n, 3, 1000 + s);
      const Tensor w = random_matrix(3, 4, 1100 + s), att = random_matrix(8, 1, 1200 + s);
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::rotate(perm.begin(), perm.begin() + 1 + s % (n - 1), perm.end());
      std::swap(perm[0], perm[n - 1]);
      Tensor pa = Tensor::zeros(n, n), px = Tensor::zeros(n, 3);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) pa(i, j) = a(perm[i], perm[j]);
        for (std::size_t k = 0; k < 3; ++k) px(i, k) = x(perm[i], k);
      }
      ad::Tape tape;
      const GatLayer layer{tape.constant(w), tape.constant(att)};
      const Tensor y = gat_forward(tape.constant(x), SignedAdjacency::from_matrix(a), layer).value();
      const Tensor py = gat_forward(tape.constant(px), SignedAdjacency::from_matrix(pa), layer).value();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t o = 0; o < 4; ++o) CHECK(py(i, o) == doctest::Approx(y(perm[i], o)).epsilon(1e-12));
    }
  }

  TEST_CASE("a single negative neighbour flips the message") {
    // Node 0 only sees node 1, with a negative sign.
    Tensor a = Tensor::zeros(2, 2);
    a(0, 1) = -1.0;
    a(1, 1) = 1.0;
    const SignedAdjacency adj = SignedAdjacency::from_matrix(a, false);
    const Tensor x = Tensor::from_rows({{0.0, 0.0}, {1.0, 2.0}});
    ad::Tape tape;
    const ad::Var out = gat_forward(tape.constant(x), adj,
                                    {tape.constant(Tensor::identity(2)), tape.constant(Tensor::zeros(4, 1))});
    CHECK(out.value()(0, 0) == doctest::Approx(-0.2));
    CHECK(out.value()(0, 1) == doctest::Approx(-0.4));
    CHECK(out.value()(1, 0) == doctest::Approx(1.0));
  }

  TEST_CASE("self-loops are added only where missing") {
    const SignedAdjacency s = SignedAdjacency::from_matrix(Tensor::from_rows({{-1, 0}, {0, 0}}));
    CHECK(s.sign(0, 0) == -1.0);
    CHECK(s.sign(1, 1) == 1.0);
    CHECK(s.support(1, 1));
    CHECK_FALSE(s.support(0, 1));
    const SignedAdjacency bare = SignedAdjacency::from_matrix(Tensor::zeros(2, 2), false);
    CHECK_FALSE(bare.support(1, 1));
  }

  TEST_CASE("row without support is flagged") {
    const SignedAdjacency bare = SignedAdjacency::from_matrix(Tensor::from_rows({{1, 0}, {0, 0}}), false);
    ad::Tape tape;
    GatTrace trace;
    const ad::Var out = gat_forward(tape.constant(Tensor::from_rows({{1}, {2}})), bare,
                                    {tape.constant(Tensor::identity(1)), tape.constant(Tensor::zeros(2, 1))}, &trace);
    CHECK(trace.isolated_rows);
    CHECK(out.value()(1, 0) == 0.0);
  }

  TEST_CASE("dimension errors") {
    ad::Tape tape;
    const SignedAdjacency adj = SignedAdjacency::from_matrix(Tensor::identity(3));
    CHECK_THROWS_AS(gat_forward(tape.constant(Tensor::zeros(2, 2)), adj,
                                {tape.constant(Tensor::zeros(2, 2)), tape.constant(Tensor::zeros(4, 1))}),
                    DimensionError);
    CHECK_THROWS_AS(gat_forward(tape.constant(Tensor::zeros(3, 2)), adj,
                                {tape.constant(Tensor::zeros(2, 2)), tape.constant(Tensor::zeros(3, 1))}),
                    DimensionError);
  }

  TEST_CASE("gradients agree with central differences") {
    ParamSet params;
    params.add("w", random_matrix(3, 4, 1300));
    params.add("a", random_matrix(8, 1, 1301));
    const Tensor x = random_matrix(6, 3, 1302), weights = random_matrix(6, 4, 1303);
    const SignedAdjacency adj = SignedAdjacency::from_matrix(random_signed(6, 1304));
    const ScalarFunction f = [&](ad::Tape& tape, const BoundParams& b) {
      return ad::sum(ad::mul_const(gat_forward(tape.constant(x), adj, {b["w"], b["a"]}), weights));
    };
    CHECK(finite_diff_check(f, params, 1e-6).max_rel_error < 1e-6);
  }
}

TEST_SUITE("supports") {
  VideoGraph two_frame_graph() {
    VideoGraph g;
    g.index = {2, 1, 2};
    g.spatial = Tensor::from_rows({{1, 0.7, 0, 0}, {0.7, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
    g.temporal = Tensor::zeros(4, 4);
    g.temporal(0, 2) = g.temporal(2, 0) = 1.6;
    return g;
  }

  TEST_CASE("consistency support is spatial plus positive temporal, all positive") {
    const SignedAdjacency s = consistency_adjacency(two_frame_graph());
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        const bool expect = i == j || (i + j == 1) || (i + j == 2 && i != j);
        CHECK(s.support(i, j) == expect);
        CHECK(s.sign(i, j) == (expect ? 1.0 : 0.0));
      }
  }

  TEST_CASE("inconsistency support is the negative edges plus self-loops") {
    const NodeIndex idx{2, 2, 2};
    const Tensor ans = build_spatial_negative(idx, 2);
    Tensor temporal = Tensor::zeros(8, 8);
    temporal(1, 5) = temporal(5, 1) = 1.9;
    const Tensor tn = add_temporal_negative(temporal, idx);
    const SignedAdjacency s = inconsistency_adjacency(8, &ans, &tn);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j) {
        double expect = ans(i, j);
        if (tn(i, j) < 0.0) expect = tn(i, j);
        if (i == j && expect == 0.0) expect = 1.0;
        CHECK(s.sign(i, j) == expect);
      }
    // Without either source only self-loops remain.
    const SignedAdjacency empty = inconsistency_adjacency(3, nullptr, nullptr);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(empty.support(i, j) == (i == j));
  }

  TEST_CASE("fusion is an affine map of the concatenation, then a node mean") {
    const Tensor hc = random_matrix(5, 2, 1400), hic = random_matrix(5, 3, 1401);
    const Tensor w = random_matrix(5, 4, 1402), b = random_matrix(1, 4, 1403);
    ad::Tape tape;
    const ad::Affine fusion{tape.constant(w), tape.constant(b)};
    const Tensor nodes = fuse_nodes(tape.constant(hc), tape.constant(hic), fusion).value();
    const Tensor pooled = spatial_fuse(tape.constant(hc), tape.constant(hic), fusion).value();
    for (std::size_t o = 0; o < 4; ++o) {
      double mean = 0.0;
      for (std::size_t i = 0; i < 5; ++i) {
        double v = b(0, o);
        for (std::size_t k = 0; k < 2; ++k) v += hc(i, k) * w(k, o);
        for (std::size_t k = 0; k < 3; ++k) v += hic(i, k) * w(2 + k, o);
        CHECK(nodes(i, o) == doctest::Approx(v).epsilon(1e-13));
        mean += v / 5.0;
      }
      CHECK(pooled(0, o) == doctest::Approx(mean).epsilon(1e-13));
    }
    CHECK_THROWS_AS(fuse_nodes(tape.constant(Tensor::zeros(2, 2)), tape.constant(Tensor::zeros(3, 3)), fusion),
                    DimensionError);
  }
}
