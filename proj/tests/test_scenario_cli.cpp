#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aicp/cli.hpp"
#include "aicp/scenario.hpp"
#include "doctest.h"

using namespace aicp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("aicp_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

const char* kTinyScenario = R"({
  "vehicle_count": 5,
  "duration_s": 3,
  "seed": 3,
  "area": {"width_m": 500, "height_m": 400},
  "mobility": {"grid_cols": 1, "grid_rows": 1, "speed_min_mps": 1.0,
               "speed_max_mps": 2.0, "turn_probability": 0.2},
  "filters": ["cmr", "hop"],
  "output": {"metrics_csv": "OUTDIR/metrics_{filter}.csv",
             "cdf_csv": "OUTDIR/cdf_{filter}.csv"}
})";

std::string tiny_scenario(const TempDir& dir) {
    std::string text = kTinyScenario;
    const std::string token = "OUTDIR";
    std::size_t pos;
    while ((pos = text.find(token)) != std::string::npos) {
        text.replace(pos, token.size(), dir.path.string());
    }
    return text;
}

}  // namespace

TEST_SUITE("scenario_cli") {

TEST_CASE("an empty scenario takes the reference defaults") {
    const Scenario sc = parse_scenario("{}");
    CHECK(sc.config.area_width_m == 4000.0);
    CHECK(sc.config.area_height_m == 5000.0);
    CHECK(sc.config.duration_s == 60.0);
    CHECK(sc.config.beacon_rate_hz == 10.0);
    CHECK(sc.config.bit_rate_bps == 6e6);
    CHECK(sc.config.tx_power_dbm == 13.0);
    CHECK(sc.config.noise_floor_dbm == -98.0);
    CHECK(sc.config.antenna == AntennaType::FrontRear);
    CHECK(sc.config.vehicle_count == 212);
    CHECK(sc.config.cmr.ttl_initial == 2);
    CHECK(sc.config.cmr.direction_threshold_deg == 30.0);
    CHECK(sc.config.cmr.distance_threshold_m == 100.0);
    REQUIRE(sc.filters.size() == 3);
}

TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"banana": 1})"),
                         doctest::Contains("banana"), InvalidConfig);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"cmr": {"ttl": 2}})"),
                         doctest::Contains("ttl"), InvalidConfig);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"mobility": {"lanes": 2}})"),
                         doctest::Contains("lanes"), InvalidConfig);
    CHECK_THROWS_AS(parse_scenario("not json"), InvalidConfig);
    CHECK_THROWS_AS(parse_scenario(R"({"filters": ["gps"]})"), InvalidConfig);
    CHECK_THROWS_AS(parse_scenario(R"({"duration_s": "long"})"),
                    InvalidConfig);
}

TEST_CASE("multi-filter runs demand a filter placeholder in output paths") {
    CHECK_THROWS_WITH_AS(
        parse_scenario(R"({"output": {"metrics_csv": "metrics.csv"}})"),
        doctest::Contains("{filter}"), InvalidConfig);
    // A single filter may write anywhere.
    const Scenario sc = parse_scenario(
        R"({"filters": ["cmr"], "output": {"metrics_csv": "m.csv",
            "cdf_csv": "c.csv"}})");
    CHECK(sc.filters.size() == 1);
}

TEST_CASE("output path placeholder substitution") {
    CHECK(resolve_output_path("out/metrics_{filter}.csv", FilterType::Cmr) ==
          "out/metrics_cmr.csv");
    CHECK(resolve_output_path("{filter}_{filter}", FilterType::Hop) ==
          "hop_hop");
    CHECK(resolve_output_path("plain.csv", FilterType::HopDis) == "plain.csv");
}

TEST_CASE("simulate: missing scenario file names the path") {
    std::string err;
    const int code = cli({"simulate", "--scenario", "/nope/missing.json"},
                         nullptr, &err);
    CHECK(code != 0);
    CHECK(err.find("/nope/missing.json") != std::string::npos);
}

TEST_CASE("simulate writes one CSV pair per filter and repeats bit-exactly") {
    TempDir dir;
    const std::string scenario_path = dir.file("scenario.json");
    write_file(scenario_path, tiny_scenario(dir));

    std::string out;
    REQUIRE(cli({"simulate", "--scenario", scenario_path, "--seed", "7"},
                &out) == 0);
    CHECK(out.find("cmr") != std::string::npos);
    CHECK(out.find("hop") != std::string::npos);

    const std::string metrics_cmr = read_file(dir.file("metrics_cmr.csv"));
    const std::string metrics_hop = read_file(dir.file("metrics_hop.csv"));
    const std::string cdf_cmr = read_file(dir.file("cdf_cmr.csv"));
    CHECK(!metrics_cmr.empty());
    CHECK(!metrics_hop.empty());
    CHECK(!cdf_cmr.empty());

    REQUIRE(cli({"simulate", "--scenario", scenario_path, "--seed", "7"},
                &out) == 0);
    CHECK(read_file(dir.file("metrics_cmr.csv")) == metrics_cmr);
    CHECK(read_file(dir.file("metrics_hop.csv")) == metrics_hop);
    CHECK(read_file(dir.file("cdf_cmr.csv")) == cdf_cmr);
}

TEST_CASE("simulate honors filter overrides") {
    TempDir dir;
    const std::string scenario_path = dir.file("scenario.json");
    write_file(scenario_path, tiny_scenario(dir));

    std::string out;
    REQUIRE(cli({"simulate", "--scenario", scenario_path, "--filter",
                 "hopdis"},
                &out) == 0);
    CHECK(fs::exists(dir.file("metrics_hopdis.csv")));
    CHECK(!fs::exists(dir.file("metrics_cmr.csv")));
}

TEST_CASE("train writes a loadable matrix and reports accuracy") {
    TempDir dir;
    const std::string matrix_path = dir.file("fitness.matrix");

    std::string out;
    REQUIRE(cli({"train", "--synthetic", "2000", "--seed", "1", "--out",
                 matrix_path},
                &out) == 0);
    CHECK(out.find("objective:") != std::string::npos);
    const std::string marker = "holdout accuracy: ";
    const std::size_t pos = out.find(marker);
    REQUIRE(pos != std::string::npos);
    const double accuracy = std::stod(out.substr(pos + marker.size()));
    CHECK(accuracy >= 0.9);

    const std::string first = read_file(matrix_path);
    CHECK(first.rfind("aicp-fitness-matrix v1", 0) == 0);

    REQUIRE(cli({"train", "--synthetic", "2000", "--seed", "1", "--out",
                 matrix_path},
                &out) == 0);
    CHECK(read_file(matrix_path) == first);
}

TEST_CASE("train rejects single-class data with the missing label named") {
    TempDir dir;
    const std::string data_path = dir.file("one_class.csv");
    write_file(data_path, "d,v,r,c,label\n10,5,20,1,1\n12,6,25,1,1\n");
    std::string err;
    const int code = cli({"train", "--data", data_path, "--out",
                          dir.file("m.matrix")},
                         nullptr, &err);
    CHECK(code != 0);
    CHECK(err.find("labeled 0") != std::string::npos);
}

TEST_CASE("train reports parse errors with line numbers") {
    TempDir dir;
    const std::string data_path = dir.file("broken.csv");
    write_file(data_path, "d,v,r,c,label\n10,5,20,1,1\n10,oops,20,1,0\n");
    std::string err;
    const int code = cli({"train", "--data", data_path, "--out",
                          dir.file("m.matrix")},
                         nullptr, &err);
    CHECK(code != 0);
    CHECK(err.find(":3") != std::string::npos);
    CHECK(err.find("oops") != std::string::npos);
}

TEST_CASE("rank prints the top objects and the measured sort time") {
    TempDir dir;
    const std::string matrix_path = dir.file("fitness.matrix");
    REQUIRE(cli({"train", "--synthetic", "600", "--seed", "2", "--out",
                 matrix_path}) == 0);

    const std::string data_path = dir.file("objects.csv");
    write_file(data_path,
               "d,v,r,c\n"
               "5,20,5,3\n"
               "120,-10,160,0\n"
               "40,10,30,2\n");

    std::string out;
    REQUIRE(cli({"rank", "--data", data_path, "--matrix", matrix_path,
                 "--top", "2"},
                &out) == 0);
    // Two ranked rows, nearest/most dangerous first.
    CHECK(out.find("1     ") != std::string::npos);
    CHECK(out.find("2     ") != std::string::npos);
    CHECK(out.find("3     ") == std::string::npos);
    CHECK(out.find("ranked 3 tuples in") != std::string::npos);

    // Radix ordering on tuples differing only in distance: nearest first.
    const std::string radix_data = dir.file("radix.csv");
    write_file(radix_data,
               "d,v,r,c\n"
               "90,5,45,1\n"
               "10,5,45,1\n"
               "50,5,45,1\n");
    REQUIRE(cli({"rank", "--data", radix_data, "--matrix", matrix_path,
                 "--algo", "radix", "--top", "3"},
                &out) == 0);
    const std::size_t near = out.find("10.00");
    const std::size_t mid = out.find("50.00");
    const std::size_t far = out.find("90.00");
    REQUIRE(near != std::string::npos);
    REQUIRE(mid != std::string::npos);
    REQUIRE(far != std::string::npos);
    CHECK(near < mid);
    CHECK(mid < far);
}

TEST_CASE("packet encode/decode round-trips through the CLI") {
    std::string hex;
    REQUIRE(cli({"packet", "encode", "--ttl", "2", "--timestamp", "51966",
                 "--lat", "60.16952", "--lon", "24.93545", "--velocity",
                 "13.89", "--direction", "270", "--category", "1", "--object",
                 "1000,0,200,20,5,0,0", "--object", "1001,10,190,25,15,1,25"},
                &hex) == 0);
    std::size_t bytes = 0;
    for (char c : hex) {
        bytes += std::isxdigit(static_cast<unsigned char>(c)) ? 1 : 0;
    }
    CHECK(bytes == 2 * (1 + 22 + 16));

    std::string listing;
    REQUIRE(cli({"packet", "decode", hex}, &listing) == 0);
    CHECK(listing.find("ttl: 2") != std::string::npos);
    CHECK(listing.find("60.16952") != std::string::npos);
    CHECK(listing.find("24.93545") != std::string::npos);
    CHECK(listing.find("270.00") != std::string::npos);
    CHECK(listing.find("objects: 2") != std::string::npos);
    CHECK(listing.find("id=1000") != std::string::npos);
    CHECK(listing.find("id=1001") != std::string::npos);

    std::string err;
    CHECK(cli({"packet", "decode", "02fe"}, nullptr, &err) != 0);
    CHECK(err.find("frame is") != std::string::npos);
}

TEST_CASE("a ten-object packet encodes to 103 bytes of hex") {
    std::vector<std::string> args{"packet", "encode", "--ttl", "2"};
    for (int i = 0; i < 10; ++i) {
        args.push_back("--object");
        args.push_back(std::to_string(1000 + i) + ",0,0,0,0,0,0");
    }
    std::string hex;
    REQUIRE(cli(args, &hex) == 0);
    std::size_t bytes = 0;
    for (char c : hex) {
        bytes += std::isxdigit(static_cast<unsigned char>(c)) ? 1 : 0;
    }
    CHECK(bytes == 2 * 103);
}

}  // TEST_SUITE
