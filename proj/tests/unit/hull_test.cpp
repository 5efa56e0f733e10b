#include <cocycle/hull.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace cocycle;

namespace {

Vector v(std::initializer_list<double> xs) {
    Vector out(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) {
        out[i++] = x;
    }
    return out;
}

} // namespace

TEST(Hull, SquareDropsInteriorAndEdgePoints) {
    const std::vector<Vector> cloud{v({0, 0}), v({1, 0}), v({1, 1}), v({0, 1}), v({0.5, 0.5}), v({0.5, 0}),
                                    v({0.2, 0.7})};
    EXPECT_EQ(hull_vertices(cloud).size(), 4u);
}

TEST(Hull, CollinearKeepsEndpoints) {
    const std::vector<Vector> cloud{v({0, 1}), v({1, 0}), v({0.25, 0.75}), v({0.5, 0.5})};
    const auto h = hull_vertices(cloud);
    ASSERT_EQ(h.size(), 2u);
    EXPECT_TRUE(h[0].isApprox(v({0, 1})));
    EXPECT_TRUE(h[1].isApprox(v({1, 0})));
}

TEST(Hull, PlanarCloudInThreeDimensions) {
    std::vector<Vector> cloud{v({1, 0, 0}), v({0, 1, 0}), v({0, 0, 1}), v({1.0 / 3, 1.0 / 3, 1.0 / 3})};
    EXPECT_EQ(hull_vertices(cloud).size(), 3u);
    EXPECT_EQ(affine_frame(cloud).dimension(), 2);
}

TEST(Hull, CubeWithInteriorPoints) {
    std::vector<Vector> cloud;
    for (int i = 0; i < 8; ++i) {
        cloud.push_back(v({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)}));
    }
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    for (int i = 0; i < 30; ++i) {
        cloud.push_back(v({u(rng), u(rng), u(rng)}));
    }
    cloud.push_back(v({0.5, 0.5, 1.0}));
    EXPECT_EQ(hull_vertices(cloud).size(), 8u);
}

TEST(Hull, DuplicatesCollapse) {
    const std::vector<Vector> cloud{v({1, 2}), v({1, 2}), v({1, 2 + 1e-13})};
    EXPECT_EQ(hull_vertices(cloud).size(), 1u);
}

TEST(AffineFrame, OffsetMeasuresDistanceToHull) {
    const std::vector<Vector> cloud{v({0, 0, 1}), v({1, 0, 1}), v({0, 1, 1})};
    const AffineFrame f = affine_frame(cloud);
    EXPECT_EQ(f.dimension(), 2);
    EXPECT_NEAR(f.offset(v({0.3, 0.3, 3})), 2.0, 1e-12);
}
