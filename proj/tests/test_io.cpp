#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "gareg/io.hpp"
#include "oracles.hpp"

using namespace gareg;
using namespace gareg::testing;

TEST_CASE("xyz: basic parse, comments, blank lines") {
    const PointCloud cloud = parse_cloud("0 0 0\n1 2 3\n", CloudFormat::Xyz, "mem");
    REQUIRE(cloud.size() == 2);
    CHECK(cloud.points[1] == Point3{1, 2, 3});

    const PointCloud commented = parse_cloud(
        "# header comment\n\n 1 2 3  # inline\n\r\n4 5 6\n", CloudFormat::Xyz, "mem");
    REQUIRE(commented.size() == 2);
    CHECK(commented.points[0] == Point3{1, 2, 3});
    CHECK(commented.points[1] == Point3{4, 5, 6});
}

TEST_CASE("xyz: errors carry line and column information") {
    CHECK_THROWS_WITH_AS(parse_cloud("0 0 0\n1 2\n", CloudFormat::Xyz, "f.xyz"),
                         doctest::Contains("f.xyz:2"), ParseError);
    CHECK_THROWS_WITH_AS(parse_cloud("0 0 0\n1 bogus 3\n", CloudFormat::Xyz, "f.xyz"),
                         doctest::Contains("f.xyz:2:3"), ParseError);
    CHECK_THROWS_WITH_AS(parse_cloud("0 0 nan\n", CloudFormat::Xyz, "f.xyz"),
                         doctest::Contains("f.xyz:1"), NonFiniteCoordinateError);
    CHECK_THROWS_AS(parse_cloud("1 2 inf\n", CloudFormat::Xyz, "f.xyz"),
                    NonFiniteCoordinateError);
}

TEST_CASE("xyz: save/load round-trip is exact at printed precision") {
    Rng rng(3);
    PointCloud cloud = random_cloud(2000, rng, -1000, 1000);
    cloud.points.push_back({1.0 / 3.0, 2.0 / 7.0, -1e-17});
    const PointCloud back =
        parse_cloud(serialize_cloud(cloud, CloudFormat::Xyz), CloudFormat::Xyz, "mem");
    REQUIRE(back.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) CHECK(back.points[i] == cloud.points[i]);
}

TEST_CASE("ply: save/load round-trip is exact") {
    Rng rng(5);
    const PointCloud cloud = random_cloud(500, rng, -50, 50);
    const std::string text = serialize_cloud(cloud, CloudFormat::PlyAscii);
    CHECK(text.rfind("ply\nformat ascii 1.0\n", 0) == 0);
    const PointCloud back = parse_cloud(text, CloudFormat::PlyAscii, "mem");
    REQUIRE(back.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) CHECK(back.points[i] == cloud.points[i]);
}

TEST_CASE("ply: zero vertices load as an empty cloud") {
    const std::string text =
        "ply\nformat ascii 1.0\nelement vertex 0\n"
        "property double x\nproperty double y\nproperty double z\nend_header\n";
    CHECK(parse_cloud(text, CloudFormat::PlyAscii, "mem").empty());
}

TEST_CASE("ply: extra properties and elements are ignored") {
    const std::string text =
        "ply\nformat ascii 1.0\ncomment made somewhere\n"
        "element vertex 2\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\n"
        "element face 1\nproperty list uchar int vertex_indices\n"
        "end_header\n"
        "1 2 3 255\n"
        "4 5 6 128\n"
        "3 0 1 0\n";
    const PointCloud cloud = parse_cloud(text, CloudFormat::PlyAscii, "mem");
    REQUIRE(cloud.size() == 2);
    CHECK(cloud.points[0] == Point3{1, 2, 3});
    CHECK(cloud.points[1] == Point3{4, 5, 6});
}

TEST_CASE("ply: malformed headers are rejected") {
    CHECK_THROWS_AS(parse_cloud("not a ply\n", CloudFormat::PlyAscii, "m"), ParseError);
    CHECK_THROWS_AS(
        parse_cloud("ply\nformat binary_little_endian 1.0\nend_header\n", CloudFormat::PlyAscii,
                    "m"),
        ParseError);
    CHECK_THROWS_AS(parse_cloud("ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\n"
                                "property double y\nend_header\n1 2\n",
                                CloudFormat::PlyAscii, "m"),
                    ParseError);  // missing z
    CHECK_THROWS_AS(parse_cloud("ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\n"
                                "property double y\nproperty double z\nend_header\n1 2 3\n",
                                CloudFormat::PlyAscii, "m"),
                    ParseError);  // truncated data
}

TEST_CASE("format_for_path picks PLY only for .ply extensions") {
    CHECK(format_for_path("scan.ply") == CloudFormat::PlyAscii);
    CHECK(format_for_path("scan.PLY") == CloudFormat::PlyAscii);
    CHECK(format_for_path("scan.xyz") == CloudFormat::Xyz);
    CHECK(format_for_path("scan.txt") == CloudFormat::Xyz);
    CHECK(format_for_path("noext") == CloudFormat::Xyz);
}

TEST_CASE("file save/load round-trip with atomic writes") {
    Rng rng(7);
    const PointCloud cloud = random_cloud(100, rng);
    const std::string path = "io_test_tmp.xyz";
    save_cloud(cloud, path, CloudFormat::Xyz);

    // No temp file left behind.
    std::ifstream tmp(path + ".tmp");
    CHECK_FALSE(tmp.good());

    const PointCloud back = load_cloud(path, CloudFormat::Xyz);
    REQUIRE(back.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) CHECK(back.points[i] == cloud.points[i]);
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_cloud("missing_file.xyz", CloudFormat::Xyz), IoError);
}

TEST_CASE("fnv-1a content hash matches known vectors") {
    CHECK(content_hash_hex("") == "cbf29ce484222325");
    CHECK(content_hash_hex("a") == "af63dc4c8601ec8c");
    CHECK(content_hash_hex("hello") == "a430d84680aabd0b");
}
