#include <doctest.h>

#include <filesystem>

#include "gmc/manifest.hpp"
#include "gmc/netpbm.hpp"
#include "gmc/weights_io.hpp"
#include "test_util.hpp"
#include <unistd.h>

namespace fs = std::filesystem;
using namespace gmc;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("gmcnet-test-" + std::to_string(::getpid()) + "-" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

}  // namespace

TEST_CASE("instance maps round-trip through 16-bit PGM") {
    Rng rng(301);
    TempDir tmp;
    InstanceMap m = testutil::random_instances(17, 13, rng);
    m.at(0, 0) = 65535;  // full 16-bit range
    write_instance_map(tmp.path / "m.pgm", m, "config deadbeef");
    const InstanceMap back = read_instance_map(tmp.path / "m.pgm");
    CHECK(back.width == m.width);
    CHECK(back.height == m.height);
    CHECK(back.ids == m.ids);
}

TEST_CASE("masks round-trip through 8-bit PGM") {
    Rng rng(303);
    TempDir tmp;
    const BinaryMask m = testutil::random_mask(9, 21, rng);
    write_mask(tmp.path / "m.pgm", m);
    const BinaryMask back = read_mask(tmp.path / "m.pgm");
    CHECK(back.bits == m.bits);
}

TEST_CASE("ppm images round-trip integral values") {
    Rng rng(305);
    TempDir tmp;
    Image img(11, 7, 3);
    for (double& v : img.values) v = std::floor(rng.uniform(0, 256));
    write_image_ppm(tmp.path / "i.ppm", img);
    const Image back = read_image_ppm(tmp.path / "i.ppm");
    CHECK(back.values == img.values);
}

TEST_CASE("pnm readers reject junk") {
    TempDir tmp;
    atomic_write(tmp.path / "bad.pgm", "P5\n4 4\n255\nxx");  // truncated raster
    CHECK_THROWS_AS(read_mask(tmp.path / "bad.pgm"), DataError);
    atomic_write(tmp.path / "magic.pgm", "P4\n4 4\n255\n0123456789abcdef");
    CHECK_THROWS_AS(read_mask(tmp.path / "magic.pgm"), DataError);
    CHECK_THROWS_AS(read_instance_map(tmp.path / "missing.pgm"), DataError);
}

TEST_CASE("GMCN1 weights") {
    TempDir tmp;
    Tensor a({2, 3}, true), b({4}, true);
    Rng rng(307);
    for (double& v : a.values) v = rng.uniform(-2, 2);
    for (double& v : b.values) v = rng.uniform(-2, 2);
    nn::NetworkParams params;
    params.add("net.kernel", &a);
    params.add("net.bias", &b);

    SUBCASE("round-trip restores names, shapes and exact values") {
        save_params(tmp.path / "w.gmcn", params);
        const auto loaded = load_params(tmp.path / "w.gmcn");
        REQUIRE(loaded.size() == 2);
        CHECK(loaded[0].name == "net.kernel");
        CHECK(loaded[0].tensor.shape == std::vector<int>{2, 3});
        CHECK(loaded[0].tensor.values == a.values);
        CHECK(loaded[1].tensor.values == b.values);

        Tensor a2({2, 3}, true), b2({4}, true);
        nn::NetworkParams params2;
        params2.add("net.kernel", &a2);
        params2.add("net.bias", &b2);
        assign_params(params2, loaded);
        CHECK(a2.values == a.values);
    }
    SUBCASE("corrupted magic is rejected") {
        std::string blob = serialize_params(params);
        blob[0] = 'X';
        atomic_write(tmp.path / "bad.gmcn", blob);
        CHECK_THROWS_WITH_AS(load_params(tmp.path / "bad.gmcn"), doctest::Contains("magic"), DataError);
    }
    SUBCASE("truncated payload is rejected") {
        const std::string blob = serialize_params(params);
        atomic_write(tmp.path / "trunc.gmcn", blob.substr(0, blob.size() - 5));
        CHECK_THROWS_WITH_AS(load_params(tmp.path / "trunc.gmcn"), doctest::Contains("truncated"),
                             DataError);
    }
    SUBCASE("shape mismatch on assignment is rejected") {
        save_params(tmp.path / "w.gmcn", params);
        const auto loaded = load_params(tmp.path / "w.gmcn");
        Tensor wrong({3, 3}, true), b2({4}, true);
        nn::NetworkParams params2;
        params2.add("net.kernel", &wrong);
        params2.add("net.bias", &b2);
        CHECK_THROWS_AS(assign_params(params2, loaded), DataError);
    }
}

TEST_CASE("probability-map cache round-trips") {
    TempDir tmp;
    Rng rng(311);
    ProbMap p(6, 5, 2);
    for (double& v : p.values) v = rng.uniform();
    save_probmap(tmp.path / "p", p, "cafebabe");
    const ProbMap back = load_probmap(tmp.path / "p");
    CHECK(back.width == 6);
    CHECK(back.height == 5);
    CHECK(back.channels == 2);
    CHECK(back.values == p.values);
}

TEST_CASE("run config") {
    SUBCASE("defaults parse and hash deterministically") {
        const RunConfig a, b;
        CHECK(a.hash() == b.hash());
        CHECK(a.get_int("instantiate.min_area") == 16);
        CHECK(a.get_double("rank.weight_a") == 0.75);
    }
    SUBCASE("overrides change the hash") {
        RunConfig cfg = RunConfig::from_text("seed = 99\nedge.radius = 0 # EDGE1\n");
        CHECK(cfg.get_u64("seed") == 99);
        CHECK(cfg.get_double("edge.radius") == 0.0);
        CHECK(cfg.hash() != RunConfig().hash());
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_WITH_AS(RunConfig::from_text("sed = 1\n"), doctest::Contains("sed"), ConfigError);
    }
    SUBCASE("malformed lines are rejected") {
        CHECK_THROWS_AS(RunConfig::from_text("just words\n"), ConfigError);
        CHECK_THROWS_AS(RunConfig::from_text("seed : 4\n"), ConfigError);
    }
    SUBCASE("typed getters validate") {
        RunConfig cfg = RunConfig::from_text("seed = abc\n");
        CHECK_THROWS_AS(cfg.get_u64("seed"), ConfigError);
    }
}

TEST_CASE("manifest") {
    TempDir tmp;
    Rng rng(313);
    Image img(8, 8, 3);
    for (double& v : img.values) v = std::floor(rng.uniform(0, 256));
    InstanceMap labels(8, 8);
    labels.at(2, 2) = 1;
    write_image_ppm(tmp.path / "a.ppm", img);
    write_instance_map(tmp.path / "a.pgm", labels);
    atomic_write(tmp.path / "a.json", "[{\"x0\":0,\"y0\":0,\"x1\":4,\"y1\":4}]");

    SUBCASE("load validates dimensions and files") {
        atomic_write(tmp.path / "m.json",
                     R"({"split":"train","records":[{"name":"a","image":"a.ppm","labels":"a.pgm","boxes":"a.json"}]})");
        const Manifest m = Manifest::load(tmp.path / "m.json");
        REQUIRE(m.records.size() == 1);
        CHECK(m.split == "train");
        CHECK(m.records[0].name == "a");
        CHECK(m.records[0].boxes.has_value());
    }
    SUBCASE("dimension disagreement is a data error") {
        InstanceMap wrong(9, 8);
        write_instance_map(tmp.path / "wrong.pgm", wrong);
        atomic_write(tmp.path / "m.json",
                     R"({"split":"train","records":[{"image":"a.ppm","labels":"wrong.pgm"}]})");
        CHECK_THROWS_AS(Manifest::load(tmp.path / "m.json"), DataError);
    }
    SUBCASE("bad split name is rejected") {
        atomic_write(tmp.path / "m.json", R"({"split":"dev","records":[]})");
        CHECK_THROWS_AS(Manifest::load(tmp.path / "m.json"), DataError);
    }
    SUBCASE("save/load round-trip") {
        Manifest m;
        m.split = "testA";
        m.records.push_back({"a", tmp.path / "a.ppm", tmp.path / "a.pgm", tmp.path / "a.json"});
        m.save(tmp.path / "out.json");
        const Manifest back = Manifest::load(tmp.path / "out.json");
        CHECK(back.split == "testA");
        REQUIRE(back.records.size() == 1);
        CHECK(back.records[0].name == "a");
    }
}
