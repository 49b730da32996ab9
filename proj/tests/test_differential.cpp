#include <doctest.h>

#include <cmath>

#include "sstgnn/differential.hpp"
#include "sstgnn/errors.hpp"
#include "sstgnn/rng.hpp"
#include "support.hpp"

using namespace sstgnn;
using testing::random_matrix;

namespace {

Tensor image_to_column(const Tensor& img) {
  Tensor x = Tensor::zeros(img.size(), 1);
  for (std::size_t k = 0; k < img.size(); ++k) x(k, 0) = img[k];
  return x;
}

}  // namespace

TEST_SUITE("npr") {
  TEST_CASE("pixel differences against the block's top-left value") {
    const Tensor img = Tensor::from_rows({{1, 2, 5, 5}, {3, 4, 5, 9}, {0, 0, 7, 1}, {0, 1, 2, 3}});
    const Tensor expect = Tensor::from_rows({{0, 1, 0, 0}, {2, 3, 0, 4}, {0, 0, 0, -6}, {0, 1, -5, -4}});
    CHECK(npr_reference(img, 2) == expect);
  }

  TEST_CASE("odd sizes are centre-cropped") {
    const Tensor img = random_matrix(5, 7, 1);
    const Tensor npr = npr_reference(img, 2);
    CHECK(npr.rows() == 4);
    CHECK(npr.cols() == 6);
    CHECK_THROWS_AS(npr_reference(img, 0), InputError);
  }

  TEST_CASE("graph aggregation equals NPR at every non-anchor pixel") {
    // Oracle written directly: x_v - x_anchor(v).
    for (std::uint64_t s = 0; s < 20; ++s) {
      const std::size_t n = s % 2 ? 8 : 16, tile = s % 3 ? 2 : 4;
      const Tensor img = random_matrix(n, n, 10 + s, 0.0, 1.0);
      const Tensor agg = sgc_aggregate(image_to_column(img), build_spatial_negative({1, n, n}, tile));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t ai = i / tile * tile, aj = j / tile * tile;
          if (i == ai && j == aj) continue;
          CHECK(agg(i * n + j, 0) == img(i, j) - img(ai, aj));
        }
    }
  }

  TEST_CASE("equivalence check reports exactness and the anchor convention") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Tensor img = random_matrix(8, 8, 40 + s, 0.0, 1.0);
      const NprEquivalence r = npr_equivalence_check(img, 2);
      CHECK(r.exact);
      CHECK(r.max_non_anchor_deviation == 0.0);
      CHECK(r.non_anchor_nodes == 48);
      CHECK(r.anchor_nodes == 16);
      CHECK(r.anchor_convention_deviation < 1e-12);
      CHECK(r.anchor_vs_npr > 0.0);  // anchors follow the graph form, not NPR's zero
    }
  }

  TEST_CASE("anchor value is x_anchor minus the rest of the block") {
    const Tensor img = Tensor::from_rows({{1, 2}, {3, 4}});
    const Tensor agg = sgc_aggregate(image_to_column(img), build_spatial_negative({1, 2, 2}, 2));
    CHECK(agg(0, 0) == 1.0 - 2.0 - 3.0 - 4.0);
    CHECK(agg(1, 0) == 1.0);
    CHECK(agg(2, 0) == 2.0);
    CHECK(agg(3, 0) == 3.0);
  }
}

TEST_SUITE("negative sub-adjacency") {
  TEST_CASE("entries within one 2x2 block") {
    const Tensor a = build_spatial_negative({1, 2, 2}, 2);
    const Tensor expect = Tensor::from_rows({{1, -1, -1, -1}, {-1, 1, 0, 0}, {-1, 0, 1, 0}, {-1, 0, 0, 1}});
    CHECK(a == expect);
  }

  TEST_CASE("partial trailing blocks are left empty") {
    const NodeIndex idx{1, 3, 3};
    const Tensor a = build_spatial_negative(idx, 2);
    for (std::size_t k = 0; k < 9; ++k) {
      const NodeCoord c = idx.coord(k);
      if (c.i == 2 || c.j == 2)
        for (std::size_t m = 0; m < 9; ++m) {
          CHECK(a(k, m) == 0.0);
          CHECK(a(m, k) == 0.0);
        }
    }
    CHECK(a(0, 0) == 1.0);
    CHECK(a(4, 0) == -1.0);
  }

  TEST_CASE("blocks never cross frames or tiles") {
    const NodeIndex idx{2, 4, 4};
    const Tensor a = build_spatial_negative(idx, 2);
    for (std::size_t u = 0; u < idx.nodes(); ++u)
      for (std::size_t v = 0; v < idx.nodes(); ++v) {
        const NodeCoord p = idx.coord(u), q = idx.coord(v);
        const bool same_block = p.t == q.t && p.i / 2 == q.i / 2 && p.j / 2 == q.j / 2;
        if (!same_block) CHECK(a(u, v) == 0.0);
        CHECK((a(u, v) == 0.0 || a(u, v) == 1.0 || a(u, v) == -1.0));
      }
  }

  TEST_CASE("tile 0 is rejected") {
    CHECK_THROWS_AS(build_spatial_negative({1, 2, 2}, 0), InputError);
  }
}

TEST_SUITE("temporal differential") {
  TEST_CASE("next-frame selector") {
    const NodeIndex idx{3, 1, 2};
    const Tensor p = next_frame_selector(idx);
    for (std::size_t k = 0; k < 6; ++k) {
      const std::size_t target = k < 4 ? k + 2 : k;
      for (std::size_t m = 0; m < 6; ++m) CHECK(p(k, m) == (m == target ? 1.0 : 0.0));
    }
  }

  TEST_CASE("temporal concat matches an explicit affine oracle") {
    const NodeIndex idx{3, 2, 2};
    const Tensor x = random_matrix(12, 3, 60), w = random_matrix(6, 4, 61), b = random_matrix(1, 4, 62);
    ad::Tape tape;
    const ad::Var out = temporal_concat(tape.constant(x), idx, {tape.constant(w), tape.constant(b)});
    REQUIRE(out.value().rows() == 12);
    REQUIRE(out.value().cols() == 4);
    for (std::size_t k = 0; k < 12; ++k) {
      const std::size_t next = k + 4 < 12 ? k + 4 : k;
      for (std::size_t o = 0; o < 4; ++o) {
        double v = b(0, o);
        for (std::size_t c = 0; c < 3; ++c) v += x(k, c) * w(c, o) + x(next, c) * w(3 + c, o);
        CHECK(out.value()(k, o) == doctest::Approx(v).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("temporal concat rejects a wrong node count") {
    ad::Tape tape;
    CHECK_THROWS_AS(temporal_concat(tape.constant(Tensor::zeros(5, 2)), {2, 2, 2},
                                    {tape.constant(Tensor::zeros(4, 2)), tape.constant(Tensor::zeros(1, 2))}),
                    DimensionError);
  }

  TEST_CASE("negative temporal edges overwrite positive ones") {
    const NodeIndex idx{3, 1, 2};
    Tensor temporal = Tensor::zeros(6, 6);
    temporal(0, 2) = temporal(2, 0) = 1.7;
    temporal(0, 1) = temporal(1, 0) = 0.3;  // not a temporal pair, must survive
    const Tensor a = add_temporal_negative(temporal, idx);
    for (std::size_t u = 0; u < 6; ++u)
      for (std::size_t v = 0; v < 6; ++v) {
        const NodeCoord p = idx.coord(u), q = idx.coord(v);
        const bool pair = p.j == q.j && (p.t + 1 == q.t || q.t + 1 == p.t);
        if (pair)
          CHECK(a(u, v) == -1.0);
        else
          CHECK(a(u, v) == temporal(u, v));
      }
  }
}

TEST_SUITE("npr patch vectors") {
  TEST_CASE("each patch matches the pixel-level reference, per channel") {
    FrameSequence clip(2, 8, 8, 2);
    const rng::Stream s(5, "npr_patch");
    for (std::size_t k = 0; k < clip.pixels.size(); ++k) clip.pixels[k] = static_cast<float>(s.uniform(k));
    const PatchTensor p = patchify(clip, 4);
    const Tensor v = npr_patch_vectors(p, 2);
    REQUIRE(v.same_shape(p.vectors));
    for (std::size_t node = 0; node < v.rows(); ++node)
      for (std::size_t c = 0; c < 2; ++c) {
        Tensor grid = Tensor::zeros(4, 4);
        for (std::size_t dy = 0; dy < 4; ++dy)
          for (std::size_t dx = 0; dx < 4; ++dx) grid(dy, dx) = p.vectors(node, (dy * 4 + dx) * 2 + c);
        const Tensor ref = npr_reference(grid, 2);
        for (std::size_t dy = 0; dy < 4; ++dy)
          for (std::size_t dx = 0; dx < 4; ++dx) CHECK(v(node, (dy * 4 + dx) * 2 + c) == ref(dy, dx));
      }
  }

  TEST_CASE("partial tiles inside a patch become zero") {
    FrameSequence clip(1, 3, 3, 1);
    for (std::size_t k = 0; k < 9; ++k) clip.pixels[k] = static_cast<float>(k + 1) / 10.0f;
    const Tensor v = npr_patch_vectors(patchify(clip, 3), 2);
    for (std::size_t k = 0; k < 9; ++k) {
      const std::size_t dy = k / 3, dx = k % 3;
      if (dy == 2 || dx == 2) CHECK(v(0, k) == 0.0);
    }
    CHECK(v(0, 4) == doctest::Approx(0.4).epsilon(1e-6));
  }

  TEST_CASE("upsampled patches vanish") {
    FrameSequence clip(1, 4, 4, 1);
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 0; x < 4; ++x) clip.at(0, y, x) = static_cast<float>((y / 2) * 2 + x / 2) / 4.0f;
    const Tensor v = npr_patch_vectors(patchify(clip, 4), 2);
    CHECK(v == Tensor::zeros(1, 16));
  }
}
