#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "levystop/cli.hpp"
#include "levystop/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "levystop");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = levystop::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("levystop_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return (path / name).string();
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kBrownian = R"({"model": {"family": "brownian", "m": 0, "sigma": 1}, "r": 1, "alpha": 1, "c": 1, "v": 1})";
const char* kKou =
    R"({"model": {"family": "kou", "m": 0.1, "sigma": 0.3, "a": 1, "p": 0.5, "eta1": 3, "eta2": 2}, "r": 1, "alpha": 1, "c": 1, "v": 1})";

}  // namespace

TEST_CASE("inspect reports a violated discounting assumption") {
    TempDir d;
    auto spec = d.write("b.json", R"({"model": {"family": "brownian", "m": 0, "sigma": 1}, "r": 0.4, "alpha": 1, "c": 1})");
    auto r = cli({"inspect", "--spec", spec});
    CHECK(r.code == 2);
    CHECK(r.err.find("r > psi(1) = 0.5") != std::string::npos);
}

TEST_CASE("inspect prints kou roots in slot order") {
    TempDir d;
    auto r = cli({"inspect", "--spec", d.write("k.json", kKou)});
    REQUIRE(r.code == 0);
    auto j = levystop::parse_json(r.out);
    REQUIRE(j["roots"].size() == 4);
    std::vector<double> roots;
    for (const auto& x : j["roots"]) roots.push_back(x.get<double>());
    CHECK(roots[0] > 3.0);
    CHECK(roots[0] > roots[1]);
    CHECK(roots[1] > 0.0);
    CHECK(roots[2] < 0.0);
    CHECK(roots[3] < -2.0);
    CHECK(j["assumptions"]["ok"] == true);
}

TEST_CASE("malformed input exits 1") {
    TempDir d;
    auto r = cli({"threshold", "--spec", d.write("bad.json", "{\"model\": ")});
    CHECK(r.code == 1);
    CHECK(r.err.find("parse error") != std::string::npos);
    CHECK(cli({"threshold", "--spec", d.file("missing.json")}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"value", "--spec", d.write("b.json", kBrownian), "--grid", "1:0:3"}).code == 1);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("threshold matches the analytic brownian value") {
    TempDir d;
    auto r = cli({"threshold", "--spec", d.write("b.json", kBrownian)});
    REQUIRE(r.code == 0);
    auto j = levystop::parse_json(r.out);
    double s = std::sqrt(2.0);
    CHECK(std::abs(j["b_c"].get<double>() - s * 0.5 / (s + 1.0)) < 1e-12 * 0.3);
    CHECK(j["regime"] == "g_continuous");
    CHECK(j["roots"].is_null());
}

TEST_CASE("value CSV is zero left of the threshold") {
    TempDir d;
    auto r = cli({"value", "--spec", d.write("b.json", kBrownian), "--grid", "0.05:1:20"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "v,w\r");
    double bc = std::sqrt(2.0) * 0.5 / (std::sqrt(2.0) + 1.0);
    int rows = 0;
    while (std::getline(in, line)) {
        auto comma = line.find(',');
        double v = std::stod(line.substr(0, comma)), w = std::stod(line.substr(comma + 1));
        if (v <= bc) CHECK(w == 0.0);
        else CHECK(w > 0.0);
        ++rows;
    }
    CHECK(rows == 20);
}

TEST_CASE("sweep flags exactly one argmax row") {
    TempDir d;
    auto r = cli({"sweep", "--spec", d.write("k.json", kKou), "--grid", "0.3:1.2:5", "--paths", "3000"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("b,mean,std_error,n_paths,truncated_fraction,", 0) == 0);
    int flagged = 0;
    while (std::getline(in, line)) {
        auto last = line.rfind(',');
        auto prev = line.rfind(',', last - 1);
        flagged += line.substr(prev + 1, last - prev - 1) == "1";
    }
    CHECK(flagged == 1);
}

TEST_CASE("scale-fn header and model-only documents") {
    TempDir d;
    auto r = cli({"scale-fn", "--spec", d.write("m.json", R"({"family": "brownian", "m": 0, "sigma": 1})"), "--q",
                  "0.5", "--grid", "0:2:5"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("x,W,Wprime,Z\r\n0,0,", 0) == 0);
    CHECK(cli({"scale-fn", "--spec", d.write("k.json", kKou), "--q", "1", "--grid", "0:1:2"}).code == 1);
}

TEST_CASE("threshold output feeds simulate, and outputs are deterministic") {
    TempDir d;
    auto spec = d.write("k.json", kKou);
    REQUIRE(cli({"threshold", "--spec", spec, "--out", d.file("th.json")}).code == 0);
    auto a = cli({"simulate", "--spec", spec, "--threshold", d.file("th.json"), "--paths", "2000", "--seed", "7",
                  "--out", d.file("s1.json")});
    auto b = cli({"simulate", "--spec", spec, "--threshold", d.file("th.json"), "--paths", "2000", "--seed", "7",
                  "--out", d.file("s2.json")});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(slurp(d.file("s1.json")) == slurp(d.file("s2.json")));
    auto j = levystop::parse_json(slurp(d.file("s1.json")));
    CHECK(j["b"] == levystop::parse_json(slurp(d.file("th.json")))["b_c"]);
    CHECK(j["direct"]["n_paths"] == 2000);
    CHECK(j["reduced"]["seed"] == 7);
}

TEST_CASE("simulate modes emit CSV") {
    TempDir d;
    auto spec = d.write("k.json", kKou);
    auto hit = cli({"simulate", "--spec", spec, "--mode", "hit", "--grid", "-1:-0.2:3", "--paths", "1000"});
    REQUIRE(hit.code == 0);
    CHECK(hit.out.rfind("x,functional,mean,std_error,n_paths,truncated_fraction\r\n", 0) == 0);
    auto eps = cli({"simulate", "--spec", spec, "--mode", "epsilon", "--eps", "0.1,0.01", "--paths", "500", "--dt",
                    "0.01"});
    REQUIRE(eps.code == 0);
    CHECK(eps.out.rfind("eps,boundary,mean,", 0) == 0);
    auto cd = cli({"simulate", "--spec", spec, "--mode", "class-d", "--grid", "1:4:3", "--paths", "1000"});
    REQUIRE(cd.code == 0);
    CHECK(cd.out.rfind("n,mean,std_error,n_paths,truncated_fraction\r\n", 0) == 0);
    CHECK(cli({"simulate", "--spec", spec, "--mode", "bogus"}).code == 1);
    CHECK(cli({"simulate", "--spec", spec}).code == 1);
}

TEST_CASE("strict mode passes when the scale function is accurate") {
    TempDir d;
    auto spec = d.write("s.json",
                        R"({"model": {"family": "spectneg_kou", "m": 0.1, "sigma": 0.3, "a": 1, "eta2": 2}, "r": 1, "alpha": 1, "c": 1})");
    auto r = cli({"threshold", "--spec", spec, "--strict"});
    CHECK(r.code == 0);
    CHECK(r.err.empty());
}
