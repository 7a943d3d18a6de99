#include <doctest.h>

#include <algorithm>
#include <random>

#include "cosparse/errors.hpp"
#include "cosparse/registration.hpp"
#include "cosparse/synthetic.hpp"

using namespace cosparse;

TEST_CASE("scenes are deterministic in the seed") {
  for (ModalityPair pair : {ModalityPair::intensity_depth, ModalityPair::intensity_nir}) {
    const SyntheticScene a = generate_scene(7, 64, pair);
    const SyntheticScene b = generate_scene(7, 64, pair);
    const SyntheticScene c = generate_scene(8, 64, pair);
    CHECK(a.first.vector() == b.first.vector());
    CHECK(a.second.vector() == b.second.vector());
    CHECK(a.first.vector() != c.first.vector());
    CHECK(a.second.modality_tag() == (pair == ModalityPair::intensity_depth ? "depth" : "nir"));
  }
  CHECK_THROWS_AS(generate_scene(1, 31, ModalityPair::intensity_depth), TooSmall);
  CHECK(parse_modality_pair("intensity_nir") == ModalityPair::intensity_nir);
  CHECK_THROWS_AS(parse_modality_pair("rgb"), InvalidArgument);
}

TEST_CASE("layouts hold distinct levels per label") {
  const SceneLayout layout = make_layout(5, 96);
  const int labels = layout.label_count();
  CHECK(labels >= 7);
  CHECK(labels <= 10);
  CHECK(layout.albedo.size() == static_cast<std::size_t>(labels));
  CHECK(layout.nir.size() == static_cast<std::size_t>(labels));
  auto sorted = layout.depth;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  CHECK(sorted.front() == doctest::Approx(0.1));
  CHECK(sorted.back() == doctest::Approx(0.9));
  auto nir = layout.nir;
  std::sort(nir.begin(), nir.end());
  CHECK(std::adjacent_find(nir.begin(), nir.end()) == nir.end());
}

TEST_CASE("modality layers share their edges") {
  double worst = 1.0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    for (int size : {64, 96}) {
      for (ModalityPair pair : {ModalityPair::intensity_depth, ModalityPair::intensity_nir}) {
        const SyntheticScene s = generate_scene(seed, size, pair);
        worst = std::min(worst, jaccard_index(edge_map(s.first, 0.02), edge_map(s.second, 0.02)));
      }
    }
  }
  CHECK(worst > 0.8);
}

TEST_CASE("permuting albedos keeps the edge set") {
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    SceneLayout layout = make_layout(seed, 80);
    const ModalImage original = render_layers(layout).intensity;
    std::mt19937_64 rng(seed);
    std::shuffle(layout.albedo.begin(), layout.albedo.end(), rng);
    const ModalImage permuted = render_layers(layout).intensity;
    CHECK(jaccard_index(edge_map(original, 0.02), edge_map(permuted, 0.02)) > 0.8);
  }
}

TEST_CASE("deregistered layers satisfy J(tau x) = V(x)") {
  const int size = 96;
  const SyntheticScene s = generate_scene(4, size, ModalityPair::intensity_depth);
  CHECK(generate_deregistered(4, size, s.pair, 0.0, 0.0, 0.0).vector() == s.second.vector());

  const ModalImage moved = generate_deregistered(4, size, s.pair, 3.0, -2.0, 6.0);
  const Region region{16, 16, size - 32, size - 32};
  const ModalImage back = warp(moved, rigid_transform(3.0, -2.0, 6.0), region, Eigen::Vector2d(47.5, 47.5),
                               Interpolation::bilinear)
                              .image;
  const ModalImage truth = s.second.crop(16, 16, size - 32, size - 32);
  int close = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) close += std::abs(back.values()[i] - truth.values()[i]) < 0.02;
  // Only pixels straddling an edge differ.
  CHECK(close > static_cast<int>(0.9 * static_cast<double>(truth.size())));
}

TEST_CASE("edge maps and the Jaccard index") {
  ModalImage step(16, 16);
  for (int r = 0; r < 16; ++r)
    for (int c = 8; c < 16; ++c) step(r, c) = 1.0;
  const auto edges = edge_map(step, 0.1);
  int count = 0;
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      if (edges[static_cast<std::size_t>(r) * 16 + c]) {
        ++count;
        CHECK((c == 7 || c == 8));
      }
    }
  }
  CHECK(count > 0);
  const std::vector<std::uint8_t> a{1, 1, 0, 0}, b{1, 0, 1, 0}, none(4, 0);
  CHECK(jaccard_index(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(jaccard_index(none, none) == 1.0);
  CHECK_THROWS_AS(jaccard_index(a, std::vector<std::uint8_t>(3, 0)), DimensionMismatch);
}
