#include "colearn/loaders.hpp"

#include "colearn/error.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace colearn;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("colearn_loader_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// A PAMAP2-shaped line: 54 whitespace-separated columns.
std::string pamap2_line(double ts, int activity, double fill, const std::string& nan_at = "") {
    std::string line = std::to_string(ts) + " " + std::to_string(activity) + " 110";
    for (int col = 3; col < 54; ++col) {
        if (nan_at == std::to_string(col))
            line += " NaN";
        else
            line += " " + std::to_string(fill + col);
    }
    return line;
}

}  // namespace

TEST_CASE("pamap2 default selection covers the 36 motion columns") {
    const auto cols = pamap2::default_columns();
    CHECK(cols.size() == 36);
    // acc/gyro/mag block of the hand IMU starts right after its temperature
    CHECK(cols.front() == 4);
    CHECK(cols.back() == 49);
    const auto acts = pamap2::default_activities();
    CHECK(acts.size() == 12);
}

TEST_CASE("pamap2 loader filters activities and keeps selected columns") {
    const auto dir = temp_dir("pamap2");
    std::ofstream f(dir / "subject101.dat");
    f << pamap2_line(0.00, 1, 0.5) << "\n";
    f << pamap2_line(0.01, 1, 1.5) << "\n";
    f << pamap2_line(0.02, 0, 2.5) << "\n";  // transient activity: dropped
    f.close();

    const auto series = load_pamap2(dir.string(), {"subject101"}, pamap2::default_columns(), {1});
    REQUIRE(series.size() == 1);
    const auto& s = series.front();
    CHECK(s.length() == 2);
    CHECK(s.num_channels == 36);
    CHECK(s.sample_rate_hz == 100.0);
    CHECK(s.labels == std::vector<int>{1, 1});
    // column 4 of the first kept row carries fill + 4
    CHECK(s.at(0, 0) == doctest::Approx(4.5));
    std::filesystem::remove_all(dir);
}

TEST_CASE("pamap2 loader passes missing values through as NaN") {
    const auto dir = temp_dir("pamap2_nan");
    std::ofstream f(dir / "subject101.dat");
    f << pamap2_line(0.00, 1, 0.5, "4") << "\n";
    f.close();

    const auto series = load_pamap2(dir.string(), {"subject101"}, pamap2::default_columns(), {1});
    CHECK(std::isnan(series.front().at(0, 0)));
    std::filesystem::remove_all(dir);
}

TEST_CASE("pamap2 loader names the subject on a missing file") {
    const auto dir = temp_dir("pamap2_missing");
    try {
        load_pamap2(dir.string(), {"subject104"}, pamap2::default_columns(), {1});
        FAIL("expected data_error");
    } catch (const data_error& e) {
        CHECK(std::string(e.what()).find("subject104") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("pamap2 loader reports the line of a corrupt cell") {
    const auto dir = temp_dir("pamap2_bad");
    std::ofstream f(dir / "subject101.dat");
    f << pamap2_line(0.00, 1, 0.5) << "\n";
    std::string bad = pamap2_line(0.01, 1, 1.5);
    bad.replace(bad.find("5.500000"), 8, "oops");  // column 4, first selected
    f << bad << "\n";
    f.close();

    try {
        load_pamap2(dir.string(), {"subject101"}, pamap2::default_columns(), {1});
        FAIL("expected data_error");
    } catch (const data_error& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("harth loader maps labels through the whitelist") {
    const auto dir = temp_dir("harth");
    std::ofstream f(dir / "S006.csv");
    f << "timestamp,back_x,back_y,back_z,thigh_x,thigh_y,thigh_z,label\n";
    f << "2019-01-15 10:00:00.000,-0.9,0.1,0.2,-1.0,0.0,0.1,1\n";   // walking
    f << "2019-01-15 10:00:00.020,-0.8,0.1,0.2,-1.0,0.0,0.1,13\n";  // cycling: dropped
    f << "2019-01-15 10:00:00.040,-0.7,0.1,0.2,-1.0,0.0,0.1,1\n";
    f.close();

    const auto series = load_harth(dir.string(), {"S006"}, harth::default_activities());
    REQUIRE(series.size() == 1);
    const auto& s = series.front();
    CHECK(s.length() == 2);
    CHECK(s.num_channels == 6);
    CHECK(s.sample_rate_hz == 50.0);
    CHECK(s.at(0, 1) == doctest::Approx(-0.7));
    CHECK(s.timestamps[1] - s.timestamps[0] == doctest::Approx(0.04));
    std::filesystem::remove_all(dir);
}

TEST_CASE("harth loader tolerates extra columns but requires the named ones") {
    const auto dir = temp_dir("harth_cols");
    {
        std::ofstream f(dir / "S006.csv");
        f << "index,timestamp,back_x,back_y,back_z,thigh_x,thigh_y,thigh_z,label\n";
        f << "0,100.0,-0.9,0.1,0.2,-1.0,0.0,0.1,1\n";
        f.close();
        const auto series = load_harth(dir.string(), {"S006"}, {1});
        CHECK(series.front().length() == 1);
        CHECK(series.front().timestamps[0] == 100.0);
    }
    {
        std::ofstream f(dir / "S007.csv");
        f << "timestamp,bx,by,bz,tx,ty,tz,label\n";
        f << "0.0,1,2,3,4,5,6,1\n";
        f.close();
        try {
            load_harth(dir.string(), {"S007"}, {1});
            FAIL("expected data_error");
        } catch (const data_error& e) {
            CHECK(std::string(e.what()).find("back_x") != std::string::npos);
        }
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("empty subject list loads nothing") {
    CHECK(load_harth("/nonexistent", {}, {1}).empty());
    CHECK(load_pamap2("/nonexistent", {}, pamap2::default_columns(), {1}).empty());
}
