#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "sstgnn/errors.hpp"
#include "sstgnn/graph.hpp"
#include "sstgnn/rng.hpp"
#include "support.hpp"

using namespace sstgnn;
using testing::random_matrix;

namespace {

FrameSequence noise_clip(std::size_t t, std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed) {
  FrameSequence clip(t, h, w, c);
  const rng::Stream s(seed, "graph_clip");
  for (std::size_t k = 0; k < clip.pixels.size(); ++k) clip.pixels[k] = static_cast<float>(s.uniform(k));
  return clip;
}

double plain_cosine(const Tensor& a, std::size_t i, const Tensor& b, std::size_t j) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.cols(); ++k) {
    ab += a(i, k) * b(j, k);
    aa += a(i, k) * a(i, k);
    bb += b(j, k) * b(j, k);
  }
  return (aa == 0 || bb == 0) ? 0.0 : ab / std::sqrt(aa * bb);
}

}  // namespace

TEST_SUITE("patchify") {
  TEST_CASE("64x64 frame with l = 32 gives a 2x2 grid") {
    const PatchTensor p = patchify(noise_clip(2, 64, 64, 1, 1), 32);
    CHECK(p.index.grid_h == 2);
    CHECK(p.index.grid_w == 2);
    CHECK(p.index.per_frame() == 4);
    CHECK(p.vectors.rows() == 8);
    CHECK(p.vectors.cols() == 1024);
  }

  TEST_CASE("l = 1 makes every pixel a patch") {
    const FrameSequence clip = noise_clip(1, 4, 4, 1, 2);
    const PatchTensor p = patchify(clip, 1);
    CHECK(p.index.per_frame() == 16);
    for (std::size_t k = 0; k < 16; ++k) CHECK(p.vectors(k, 0) == clip.at(0, k / 4, k % 4));
  }

  TEST_CASE("65x64 frame is centre-cropped to 64x64") {
    const FrameSequence clip = noise_clip(1, 65, 64, 1, 3);
    const PatchTensor p = patchify(clip, 32);
    CHECK(p.index.per_frame() == 4);
    CHECK(p.crop_y == 0);
    CHECK(p.crop_x == 0);
    const PatchTensor q = patchify(noise_clip(1, 70, 67, 1, 3), 32);
    CHECK(q.crop_y == 3);
    CHECK(q.crop_x == 1);
  }

  TEST_CASE("patch larger than the frame or zero is rejected") {
    CHECK_THROWS_AS(patchify(noise_clip(1, 8, 16, 1, 4), 9), InputError);
    CHECK_THROWS_AS(patchify(noise_clip(1, 8, 16, 1, 4), 0), InputError);
  }

  TEST_CASE("unpatchify reconstructs the cropped clip") {
    const FrameSequence clip = noise_clip(3, 13, 10, 2, 5);
    const PatchTensor p = patchify(clip, 4);
    const FrameSequence back = unpatchify(p);
    REQUIRE(back.height == 12);
    REQUIRE(back.width == 8);
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t y = 0; y < 12; ++y)
        for (std::size_t x = 0; x < 8; ++x)
          for (std::size_t c = 0; c < 2; ++c) CHECK(back.at(t, y, x, c) == clip.at(t, y + p.crop_y, x + p.crop_x, c));
  }

  TEST_CASE("every cropped pixel lands in exactly one patch") {
    FrameSequence clip(1, 6, 6, 1);
    for (std::size_t k = 0; k < 36; ++k) clip.pixels[k] = static_cast<float>(k) / 64.0f;
    const PatchTensor p = patchify(clip, 3);
    std::multiset<double> seen(p.vectors.data().begin(), p.vectors.data().end());
    CHECK(seen.size() == 36);
    CHECK(std::set<double>(seen.begin(), seen.end()).size() == 36);
  }
}

TEST_SUITE("row_normalize") {
  TEST_CASE("row (3, 4)") {
    const Tensor y = row_normalize(Tensor::from_rows({{3, 4}}), 1e-4);
    CHECK(y(0, 0) == doctest::Approx(3.0 / 5.0001).epsilon(1e-15));
    CHECK(y(0, 1) == doctest::Approx(4.0 / 5.0001).epsilon(1e-15));
    CHECK(y(0, 0) == doctest::Approx(0.599988).epsilon(1e-6));
  }

  TEST_CASE("zero row stays zero") {
    const Tensor y = row_normalize(Tensor::from_rows({{0, 0, 0}}), 1e-4);
    CHECK(y == Tensor::zeros(1, 3));
  }

  TEST_CASE("unit row shrinks by the epsilon") {
    const Tensor y = row_normalize(Tensor::from_rows({{0, 1}}), 1e-4);
    CHECK(y(0, 1) == doctest::Approx(1.0 / 1.0001).epsilon(1e-15));
  }

  TEST_CASE("non-positive epsilon is rejected") {
    CHECK_THROWS_AS(row_normalize(Tensor::zeros(1, 1), 0.0), InputError);
  }
}

TEST_SUITE("intra_frame_adjacency") {
  TEST_CASE("identical rows stay connected") {
    const Tensor x = row_normalize(Tensor::from_rows({{1, 2, 3}, {1, 2, 3}}), 1e-4);
    const Tensor a = intra_frame_adjacency(x, 0.6);
    CHECK(a(0, 1) == doctest::Approx(0.9998).epsilon(1e-4));
    CHECK(a(0, 1) == a(1, 0));
  }

  TEST_CASE("orthogonal rows are pruned") {
    const Tensor x = row_normalize(Tensor::from_rows({{1, 0}, {0, 1}}), 1e-4);
    const Tensor a = intra_frame_adjacency(x, 0.6);
    CHECK(a(0, 1) == 0.0);
    CHECK(a(0, 0) > 0.99);
  }

  TEST_CASE("matches the pairwise dot oracle after pruning") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Tensor x = row_normalize(random_matrix(3 + s % 4, 5, 50 + s, -0.2, 1.0), 1e-4);
      const Tensor a = intra_frame_adjacency(x, 0.6);
      for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.rows(); ++j) {
          double dot = 0.0;
          for (std::size_t k = 0; k < x.cols(); ++k) dot += x(i, k) * x(j, k);
          const double expect = (i == j || dot >= 0.6) ? dot : 0.0;
          CHECK(a(i, j) == doctest::Approx(expect).epsilon(1e-14));
        }
    }
  }

  TEST_CASE("symmetric, nonnegative, surviving weights at least tau") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Tensor x = row_normalize(random_matrix(9, 4, 70 + s), 1e-4);
      for (double tau : {0.0, 0.3, 0.6, 0.9}) {
        const Tensor a = intra_frame_adjacency(x, tau);
        for (std::size_t i = 0; i < 9; ++i)
          for (std::size_t j = 0; j < 9; ++j) {
            CHECK(a(i, j) == a(j, i));
            CHECK(a(i, j) >= 0.0);
            if (i != j && a(i, j) != 0.0) CHECK(a(i, j) >= tau);
          }
      }
    }
  }

  TEST_CASE("raising tau never adds edges") {
    const Tensor x = row_normalize(random_matrix(12, 3, 90, -0.3, 1.0), 1e-4);
    Tensor prev = intra_frame_adjacency(x, 0.0);
    for (double tau = 0.05; tau <= 1.0; tau += 0.05) {
      const Tensor a = intra_frame_adjacency(x, tau);
      for (std::size_t k = 0; k < a.size(); ++k)
        if (prev[k] == 0.0) CHECK(a[k] == 0.0);
      prev = a;
    }
  }
}

TEST_SUITE("temporal_bridge") {
  TEST_CASE("identical frames score about 2 and are kept") {
    const Tensor x = random_matrix(4, 6, 100);
    const Tensor a = intra_frame_adjacency(row_normalize(x), 0.0);
    const TemporalBridge b = temporal_bridge(a, a, x, x, 0.6);
    for (std::size_t v = 0; v < 4; ++v) {
      CHECK(b.structural[v] == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(b.feature[v] == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(b.score[v] == doctest::Approx(2.0).epsilon(1e-12));
      CHECK(b.kept[v]);
    }
  }

  TEST_CASE("orthogonal rows score 0 and are pruned") {
    const Tensor a1 = Tensor::from_rows({{1, 0}, {0, 1}}), a2 = Tensor::from_rows({{0, 1}, {1, 0}});
    const Tensor x1 = Tensor::from_rows({{1, 0, 0}, {0, 1, 0}}), x2 = Tensor::from_rows({{0, 0, 1}, {0, 0, 1}});
    const TemporalBridge b = temporal_bridge(a1, a2, x1, x2, 0.6);
    for (std::size_t v = 0; v < 2; ++v) {
      CHECK(b.score[v] == 0.0);
      CHECK_FALSE(b.kept[v]);
    }
  }

  TEST_CASE("random 4-node frames match a per-coordinate cosine oracle") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Tensor x1 = random_matrix(4, 5, 200 + s, -0.2, 1), x2 = random_matrix(4, 5, 300 + s, -0.2, 1);
      const Tensor a1 = intra_frame_adjacency(row_normalize(x1), 0.3);
      const Tensor a2 = intra_frame_adjacency(row_normalize(x2), 0.3);
      const TemporalBridge b = temporal_bridge(a1, a2, x1, x2, 0.6);
      for (std::size_t v = 0; v < 4; ++v) {
        const double st = plain_cosine(a1, v, a2, v), ft = plain_cosine(x1, v, x2, v);
        CHECK(b.structural[v] == doctest::Approx(st).epsilon(1e-13));
        CHECK(b.feature[v] == doctest::Approx(ft).epsilon(1e-13));
        CHECK(b.kept[v] == ((st + ft) / 2.0 >= 0.6));
      }
    }
  }

  TEST_CASE("mismatched node counts are rejected") {
    CHECK_THROWS_AS(temporal_bridge(Tensor::zeros(3, 3), Tensor::zeros(4, 4), Tensor::zeros(3, 2), Tensor::zeros(4, 2), 0.6),
                    InputError);
  }
}

TEST_SUITE("assemble") {
  TEST_CASE("single frame has no temporal edges") {
    const NodeIndex idx{1, 2, 2};
    const Tensor x = random_matrix(4, 3, 400);
    const VideoGraph g = build_video_graph(idx, x);
    CHECK(g.spatial == intra_frame_adjacency(row_normalize(x), 0.6));
    CHECK(g.temporal == Tensor::zeros(4, 4));
  }

  TEST_CASE("two frames of four nodes form two 4x4 blocks") {
    const NodeIndex idx{2, 2, 2};
    const Tensor x = random_matrix(8, 3, 401);
    const VideoGraph g = build_video_graph(idx, x, {0.0, 0.6, 1e-4});
    CHECK(g.spatial.rows() == 8);
    for (std::size_t u = 0; u < 8; ++u)
      for (std::size_t v = 0; v < 8; ++v)
        if (u / 4 != v / 4) CHECK(g.spatial(u, v) == 0.0);
    CHECK(g.spatial(0, 0) > 0.0);
    CHECK(g.spatial(4, 4) > 0.0);
  }

  TEST_CASE("index map round-trips for every node") {
    const NodeIndex idx{3, 4, 5};
    for (std::size_t k = 0; k < idx.nodes(); ++k) {
      const NodeCoord c = idx.coord(k);
      CHECK(idx.flat(c.t, c.i, c.j) == k);
    }
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 5; ++j) CHECK(idx.coord(idx.flat(t, i, j)) == NodeCoord{t, i, j});
  }

  TEST_CASE("graph invariants on random clips") {
    for (std::uint64_t s = 0; s < 8; ++s) {
      const NodeIndex idx{3, 3, 3};
      // Slowly drifting embeddings so some temporal edges survive.
      Tensor x = random_matrix(27, 6, 500 + s, 0.0, 1.0);
      for (std::size_t t = 1; t < 3; ++t)
        for (std::size_t v = 0; v < 9; ++v)
          for (std::size_t k = 0; k < 6; ++k) x(t * 9 + v, k) = x(v, k) + 0.05 * static_cast<double>(t * k % 3);
      const VideoGraph g = build_video_graph(idx, x);
      std::size_t temporal_edges = 0;
      for (std::size_t u = 0; u < 27; ++u)
        for (std::size_t v = 0; v < 27; ++v) {
          CHECK(g.spatial(u, v) == g.spatial(v, u));
          CHECK(g.spatial(u, v) >= 0.0);
          if (u / 9 != v / 9) CHECK(g.spatial(u, v) == 0.0);
          if (u != v && g.spatial(u, v) != 0.0) CHECK(g.spatial(u, v) >= 0.6);
          CHECK(g.temporal(u, v) == g.temporal(v, u));
          if (g.temporal(u, v) != 0.0) {
            ++temporal_edges;
            const NodeCoord a = idx.coord(u), b = idx.coord(v);
            CHECK(a.i == b.i);
            CHECK(a.j == b.j);
            CHECK((a.t + 1 == b.t || b.t + 1 == a.t));
            CHECK(g.temporal(u, v) > 0.0);
          }
        }
      CHECK(temporal_edges > 0);
    }
  }

  TEST_CASE("edge list lists each undirected edge once") {
    const NodeIndex idx{2, 1, 2};
    const Tensor x = Tensor::from_rows({{1, 0}, {1, 0.1}, {1, 0}, {1, 0.1}});
    const VideoGraph g = build_video_graph(idx, x);
    std::ostringstream os;
    write_edge_list(os, g);
    std::istringstream is(os.str());
    std::size_t u, v, spatial = 0, temporal = 0;
    double w;
    std::string kind;
    while (is >> u >> v >> w >> kind) {
      CHECK(u <= v);
      (kind == "spatial" ? spatial : temporal) += 1;
    }
    CHECK(spatial == 6);   // 4 self-loops + one edge per frame
    CHECK(temporal == 2);  // both coordinates bridged
  }
}
