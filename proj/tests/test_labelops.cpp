#include <doctest.h>

#include <deque>
#include <map>

#include "gmc/labelops.hpp"
#include "test_util.hpp"

using namespace gmc;

namespace {

/// Independent flood-fill labeling oracle (BFS, row-major seed order).
InstanceMap flood_fill_oracle(const BinaryMask& mask, int connectivity) {
    InstanceMap out(mask.width, mask.height);
    std::uint32_t next = 0;
    for (int sy = 0; sy < mask.height; ++sy) {
        for (int sx = 0; sx < mask.width; ++sx) {
            if (!mask.at(sx, sy) || out.at(sx, sy)) continue;
            const std::uint32_t id = ++next;
            std::deque<std::pair<int, int>> queue{{sx, sy}};
            out.at(sx, sy) = id;
            while (!queue.empty()) {
                const auto [x, y] = queue.front();
                queue.pop_front();
                auto visit = [&](int nx, int ny) {
                    if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) return;
                    if (!mask.at(nx, ny) || out.at(nx, ny)) return;
                    out.at(nx, ny) = id;
                    queue.emplace_back(nx, ny);
                };
                visit(x - 1, y);
                visit(x + 1, y);
                visit(x, y - 1);
                visit(x, y + 1);
                if (connectivity == 8) {
                    visit(x - 1, y - 1);
                    visit(x + 1, y - 1);
                    visit(x - 1, y + 1);
                    visit(x + 1, y + 1);
                }
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("connected_components basics") {
    SUBCASE("empty mask") {
        const InstanceMap out = connected_components(BinaryMask(5, 4), 4);
        CHECK(out.max_id() == 0);
    }
    SUBCASE("diagonal touch: 2 components at connectivity 4, 1 at 8") {
        BinaryMask m(4, 4);
        m.at(0, 0) = m.at(1, 0) = 1;
        m.at(2, 1) = m.at(3, 1) = 1;
        CHECK(connected_components(m, 4).max_id() == 2);
        CHECK(connected_components(m, 8).max_id() == 1);
    }
    SUBCASE("invalid connectivity") {
        CHECK_THROWS_AS(connected_components(BinaryMask(2, 2), 6), ConfigError);
    }
}

TEST_CASE("connected_components equals flood-fill oracle on random masks") {
    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const BinaryMask m = testutil::random_mask(32, 32, rng, 0.4);
        for (int conn : {4, 8}) {
            const InstanceMap got = connected_components(m, conn);
            const InstanceMap want = flood_fill_oracle(m, conn);
            CHECK(got.ids == want.ids);
        }
    }
}

TEST_CASE("connected_components idempotent on its own foreground") {
    Rng rng(43);
    const BinaryMask m = testutil::random_mask(24, 24, rng, 0.45);
    const InstanceMap once = connected_components(m, 4);
    const InstanceMap again = connected_components(foreground(once), 4);
    CHECK(once.ids == again.ids);
}

TEST_CASE("extract_edges") {
    SUBCASE("constant maps have no edges") {
        InstanceMap m(5, 5);
        CHECK(extract_edges(m).count() == 0);
        for (auto& id : m.ids) id = 7;
        CHECK(extract_edges(m).count() == 0);
    }
    SUBCASE("single center pixel: itself and its 4 neighbors are edge") {
        InstanceMap m(3, 3);
        m.at(1, 1) = 1;
        const BinaryMask e = extract_edges(m);
        CHECK(e.count() == 5);
        CHECK(e.at(1, 1));
        CHECK(e.at(0, 1));
        CHECK(e.at(2, 1));
        CHECK(e.at(1, 0));
        CHECK(e.at(1, 2));
        CHECK(!e.at(0, 0));
    }
    SUBCASE("two instances sharing a vertical border: both columns are edge") {
        InstanceMap m(4, 3);
        for (int y = 0; y < 3; ++y) {
            m.at(0, y) = m.at(1, y) = 1;
            m.at(2, y) = m.at(3, y) = 2;
        }
        const BinaryMask e = extract_edges(m);
        for (int y = 0; y < 3; ++y) {
            CHECK(e.at(1, y));
            CHECK(e.at(2, y));
            CHECK(!e.at(0, y));
            CHECK(!e.at(3, y));
        }
    }
    SUBCASE("every edge pixel has a differing 4-neighbor") {
        Rng rng(47);
        const InstanceMap m = testutil::random_instances(20, 20, rng);
        const BinaryMask e = extract_edges(m);
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 20; ++x) {
                if (!e.at(x, y)) continue;
                bool differs = false;
                const std::uint32_t c = m.at(x, y);
                if (x > 0) differs |= m.at(x - 1, y) != c;
                if (x < 19) differs |= m.at(x + 1, y) != c;
                if (y > 0) differs |= m.at(x, y - 1) != c;
                if (y < 19) differs |= m.at(x, y + 1) != c;
                CHECK(differs);
            }
    }
}

TEST_CASE("dilate") {
    SUBCASE("radius 0 is the identity") {
        Rng rng(53);
        const BinaryMask m = testutil::random_mask(16, 16, rng);
        CHECK(dilate(m, 0).bits == m.bits);
    }
    SUBCASE("single pixel radius 1: plus-shaped 5 pixels") {
        BinaryMask m(7, 7);
        m.at(3, 3) = 1;
        CHECK(dilate(m, 1).count() == 5);
    }
    SUBCASE("single pixel radius 3: the 29-pixel discrete disk") {
        BinaryMask m(9, 9);
        m.at(4, 4) = 1;
        CHECK(dilate(m, 3).count() == 29);
    }
    SUBCASE("monotone in the mask and in the radius") {
        Rng rng(59);
        const BinaryMask m = testutil::random_mask(20, 20, rng, 0.1);
        const BinaryMask d1 = dilate(m, 1.5), d2 = dilate(m, 2.5);
        for (std::size_t i = 0; i < m.bits.size(); ++i) {
            if (m.bits[i]) CHECK(d1.bits[i]);
            if (d1.bits[i]) CHECK(d2.bits[i]);
        }
    }
}

TEST_CASE("fill_boxes") {
    SUBCASE("no boxes: all zeros") {
        const CoverageMap c = fill_boxes({}, 6, 5);
        CHECK(c.max_count() == 0);
    }
    SUBCASE("three boxes over one pixel count 3") {
        const std::vector<Box> boxes = {{0, 0, 3, 3}, {1, 1, 4, 4}, {2, 2, 5, 5}};
        const CoverageMap c = fill_boxes(boxes, 6, 6);
        CHECK(c.at(2, 2) == 3);
        CHECK(c.max_count() == 3);
    }
    SUBCASE("two 2x2 boxes overlapping in one pixel: sum 8, max 2") {
        const std::vector<Box> boxes = {{0, 0, 2, 2}, {1, 1, 3, 3}};
        const CoverageMap c = fill_boxes(boxes, 4, 4);
        long long sum = 0;
        for (auto v : c.counts) sum += v;
        CHECK(sum == 8);
        CHECK(c.max_count() == 2);
    }
    SUBCASE("conservation: sum of counts equals sum of box areas, exactly") {
        Rng rng(61);
        for (int trial = 0; trial < 100; ++trial) {
            const int w = rng.range(4, 40), h = rng.range(4, 40);
            std::vector<Box> boxes;
            long long total_area = 0;
            const int n = rng.range(0, 8);
            for (int i = 0; i < n; ++i) {
                Box b;
                b.x0 = rng.range(0, w - 1);
                b.y0 = rng.range(0, h - 1);
                b.x1 = rng.range(b.x0 + 1, w);
                b.y1 = rng.range(b.y0 + 1, h);
                total_area += b.area();
                boxes.push_back(b);
            }
            const CoverageMap c = fill_boxes(boxes, w, h);
            long long sum = 0;
            for (auto v : c.counts) sum += v;
            CHECK(sum == total_area);
        }
    }
    SUBCASE("out-of-extent box names itself") {
        CHECK_THROWS_WITH_AS(fill_boxes({{2, 2, 9, 4}}, 8, 8), doctest::Contains("box 0"), DataError);
    }
}

TEST_CASE("overlap_matrix") {
    SUBCASE("identical maps give a diagonal of areas") {
        Rng rng(67);
        const InstanceMap m = testutil::random_instances(16, 16, rng);
        const OverlapMatrix ov = overlap_matrix(m, m);
        for (std::size_t i = 0; i < ov.n_pred; ++i)
            for (std::size_t j = 0; j < ov.n_gt; ++j)
                CHECK(ov.at(i, j) == (i == j ? ov.pred_area[i] : 0));
    }
    SUBCASE("matches per-pair brute-force recount on random maps") {
        Rng rng(71);
        for (int trial = 0; trial < 20; ++trial) {
            const InstanceMap a = testutil::random_instances(16, 16, rng);
            const InstanceMap b = testutil::random_instances(16, 16, rng);
            const OverlapMatrix ov = overlap_matrix(a, b);
            for (std::size_t i = 0; i < ov.n_pred; ++i)
                for (std::size_t j = 0; j < ov.n_gt; ++j) {
                    long long count = 0;
                    for (std::size_t p = 0; p < a.ids.size(); ++p)
                        if (a.ids[p] == i + 1 && b.ids[p] == j + 1) ++count;
                    CHECK(ov.at(i, j) == count);
                }
        }
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(overlap_matrix(InstanceMap(3, 3), InstanceMap(4, 3)), DataError);
    }
}
