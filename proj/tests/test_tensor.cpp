#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "vortex/io.hpp"
#include "vortex/rng.hpp"
#include "vortex/tensor.hpp"

using namespace vortex;

namespace {

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<char> slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return std::vector<char>(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

TEST_CASE("fmap round-trips bit-exactly") {
    for (Dtype dt : {Dtype::f32, Dtype::f64}) {
        FeatureMap m = rng_fill(42, 5, 3, 4, dt);
        const std::string path = tmp_path("rt.fmap");
        fmap_write(m, path);
        FeatureMap r = fmap_read(path);
        CHECK(r.h == m.h);
        CHECK(r.w == m.w);
        CHECK(r.c == m.c);
        CHECK(r.dtype == m.dtype);
        CHECK(r.data == m.data);

        // and the file itself round-trips byte for byte
        const std::string path2 = tmp_path("rt2.fmap");
        fmap_write(r, path2);
        CHECK(slurp(path) == slurp(path2));
        std::remove(path.c_str());
        std::remove(path2.c_str());
    }
}

TEST_CASE("fmap file layout") {
    FeatureMap m(1, 1, 1, Dtype::f64);
    m.data[0] = 42.0;
    const std::string path = tmp_path("layout.fmap");
    fmap_write(m, path);
    std::vector<char> bytes = slurp(path);
    CHECK(bytes.size() == 32);  // 24-byte header + one f64
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "VPFM");
    CHECK(bytes[8] == 1);  // dtype code f64

    // single-element change touches only that element's payload bytes
    FeatureMap m2 = rng_fill(7, 4, 4, 2, Dtype::f64);
    FeatureMap m3 = m2;
    m3.at(2, 1, 1) = m3.at(2, 1, 1) + 1.0;
    const std::string pa = tmp_path("la.fmap"), pb = tmp_path("lb.fmap");
    fmap_write(m2, pa);
    fmap_write(m3, pb);
    std::vector<char> ba = slurp(pa), bb = slurp(pb);
    REQUIRE(ba.size() == bb.size());
    const std::size_t elem = 24 + m2.index(2, 1, 1) * 8;
    for (std::size_t i = 0; i < ba.size(); ++i) {
        if (i >= elem && i < elem + 8) continue;
        CHECK(ba[i] == bb[i]);
    }
    std::remove(path.c_str());
    std::remove(pa.c_str());
    std::remove(pb.c_str());
}

TEST_CASE("fmap read diagnostics") {
    const std::string path = tmp_path("bad.fmap");
    auto write_bytes = [&](const std::vector<char>& b) {
        std::ofstream os(path, std::ios::binary);
        os.write(b.data(), static_cast<std::streamsize>(b.size()));
    };

    FeatureMap ones(2, 2, 1, Dtype::f32);
    for (double& v : ones.data) v = 1.0;
    fmap_write(ones, path);
    std::vector<char> good = slurp(path);

    SUBCASE("constant map decodes") {
        FeatureMap r = fmap_read(path);
        for (double v : r.data) CHECK(v == 1.0);
    }
    SUBCASE("bad magic") {
        std::vector<char> b = good;
        b[0] = 'X';
        write_bytes(b);
        CHECK_THROWS_WITH_AS(fmap_read(path), doctest::Contains("magic"), IoError);
    }
    SUBCASE("truncated payload") {
        std::vector<char> b(good.begin(), good.end() - 4);  // 12 of 16 payload bytes
        write_bytes(b);
        CHECK_THROWS_WITH_AS(fmap_read(path), doctest::Contains("truncated"), IoError);
    }
    SUBCASE("bad dtype code") {
        std::vector<char> b = good;
        b[8] = 2;
        write_bytes(b);
        CHECK_THROWS_WITH_AS(fmap_read(path), doctest::Contains("dtype"), IoError);
    }
    SUBCASE("zero dimension") {
        std::vector<char> b = good;
        b[12] = b[13] = b[14] = b[15] = 0;  // h = 0
        write_bytes(b);
        CHECK_THROWS_WITH_AS(fmap_read(path), doctest::Contains("zero dimension"), IoError);
    }
    std::remove(path.c_str());
}

TEST_CASE("layout probe: (i,j,k) lives at (i*w + j)*c + k") {
    FeatureMap m(3, 4, 2, Dtype::f64);
    m.at(1, 2, 1) = 5.0;
    for (std::size_t t = 0; t < m.data.size(); ++t)
        CHECK(m.data[t] == (t == (1 * 4 + 2) * 2 + 1 ? 5.0 : 0.0));
}

TEST_CASE("rng_fill") {
    SUBCASE("golden first draw of seed 1") {
        FeatureMap m = rng_fill(1, 1, 1, 1, Dtype::f64);
        CHECK(m.data[0] == doctest::Approx(0.1331231503445618).epsilon(1e-15));
    }
    SUBCASE("pure function of seed and shape") {
        CHECK(rng_fill(5, 4, 4, 3).data == rng_fill(5, 4, 4, 3).data);
    }
    SUBCASE("different seeds differ") {
        CHECK(rng_fill(1, 4, 4, 3).data != rng_fill(2, 4, 4, 3).data);
    }
    SUBCASE("f32 values are exact floats") {
        for (double v : rng_fill(9, 3, 3, 3, Dtype::f32).data)
            CHECK(static_cast<double>(static_cast<float>(v)) == v);
    }
    SUBCASE("values in [-1, 1)") {
        for (double v : rng_fill(11, 8, 8, 4).data) {
            CHECK(v >= -1.0);
            CHECK(v < 1.0);
        }
    }
}

TEST_CASE("concat_channels") {
    FeatureMap a = rng_fill(1, 2, 2, 3);
    FeatureMap b = rng_fill(2, 2, 2, 1);
    FeatureMap cat = concat_channels({a, b});
    CHECK(cat.c == 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 3; ++k) CHECK(cat.at(i, j, k) == a.at(i, j, k));
            CHECK(cat.at(i, j, 3) == b.at(i, j, 0));
        }

    CHECK(concat_channels({a}).data == a.data);

    FeatureMap wrong = rng_fill(3, 3, 3, 1);
    CHECK_THROWS_AS(concat_channels({a, wrong}), std::invalid_argument);
    FeatureMap f32 = rng_fill(3, 2, 2, 1, Dtype::f32);
    CHECK_THROWS_AS(concat_channels({a, f32}), std::invalid_argument);
    CHECK_THROWS_AS(concat_channels(std::vector<FeatureMap>{}), std::invalid_argument);
}

TEST_CASE("weight bank round-trip") {
    WeightBank bank;
    bank.put("a", rng_weights(1, 2, 3, 3, 3));
    bank.put("b", rng_weights(2, 4, 2, 1, 1, Dtype::f32));
    const std::string path = tmp_path("bank.vpwb");
    wbank_write(bank, path);
    WeightBank r = wbank_read(path);
    REQUIRE(r.entries.size() == 2);
    CHECK(r.entries[0].first == "a");
    CHECK(r.get("a").weights == bank.get("a").weights);
    CHECK(r.get("a").bias == bank.get("a").bias);
    CHECK(r.get("b").weights == bank.get("b").weights);
    CHECK(r.get("b").dtype == Dtype::f32);
    CHECK_THROWS_AS(r.get("missing"), std::out_of_range);
    std::remove(path.c_str());
}
