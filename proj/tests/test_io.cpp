#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmq/io.hpp"

using namespace mmq;
namespace fs = std::filesystem;

TEST_CASE("17-digit formatting round trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.338107410459767, 1e-300, 6.02214076e23}) CHECK(std::strtod(io::fmt17(v).c_str(), nullptr) == v);
    CHECK(io::fmt17(NAN) == "nan");
    CHECK(io::fmt17(-INFINITY) == "-inf");
}

TEST_CASE("CSV quoting and layout") {
    CHECK(io::csv_field("plain") == "plain");
    CHECK(io::csv_field("a,b") == "\"a,b\"");
    CHECK(io::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    io::CsvTable t({"x", "tag"});
    t.row_text({"0.5", "Region, I"});
    CHECK(t.str() == "x,tag\n0.5,\"Region, I\"\n");
    CHECK_THROWS_AS(t.row({1.0}), UsageError);
    io::CsvTable u({"a", "b"});
    u.row({0.25, -1.0});
    CHECK(u.str() == "a,b\n0.25,-1\n");
}

TEST_CASE("atomic write") {
    const fs::path dir = fs::temp_directory_path() / "mmq_io_test";
    fs::remove_all(dir);
    const fs::path p = dir / "sub" / "out.txt";
    io::write_atomic(p, "first\n");
    io::write_atomic(p, "second\n");
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str() == "second\n");
    CHECK_FALSE(fs::exists(fs::path(p.string() + ".tmp")));
    fs::remove_all(dir);
}

TEST_CASE("config files") {
    const fs::path p = fs::temp_directory_path() / "mmq_cfg_test.conf";
    {
        std::ofstream f(p);
        f << "# run settings\neps = 1e-3\n\nD=2   # diffusion ratio\n";
    }
    const auto kv = io::read_config(p);
    CHECK(kv.size() == 2);
    CHECK(kv.at("eps") == "1e-3");
    CHECK(kv.at("D") == "2");
    {
        std::ofstream f(p);
        f << "novalue\n";
    }
    CHECK_THROWS_AS(io::read_config(p), UsageError);
    fs::remove(p);
    CHECK_THROWS_AS(io::read_config(p), UsageError);
}

TEST_CASE("JSON layer output keeps key order and encodes non-finite values") {
    LayerEval ev;
    ev.nu = nu_region1;
    ev.phase_1 = -0.5;
    ev.amplitude = 0.25;
    const auto j = io::to_json(ev, 1e-3);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"tag", "nu", "phase_1", "phase_13", "phase_0", "amplitude", "value_log10", "diagnostics"});
    CHECK(j["nu"] == "-3/2");
    CHECK(io::num(INFINITY) == "inf");
    CHECK(io::dump(io::json{{"a", 1}}) == "{\n  \"a\": 1\n}\n");
}
