#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "curvheat/cli.hpp"
#include "curvheat/geometry.hpp"
#include "curvheat/heat_coeff.hpp"

using namespace curvheat;

namespace {

struct CaptureStdout {
    std::ostringstream buffer;
    std::streambuf* saved;
    CaptureStdout() : saved(std::cout.rdbuf(buffer.rdbuf())) {}
    ~CaptureStdout() { std::cout.rdbuf(saved); }
};

std::pair<int, std::string> run_capture(const std::vector<std::string>& args) {
    CaptureStdout cap;
    const int rc = curvheat::run(args);
    return {rc, cap.buffer.str()};
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("p-range grammar") {
    CHECK(parse_p_range("32:256:log") == std::vector<int>{32, 48, 64, 96, 128, 192, 256});
    CHECK(parse_p_range("2:10:2") == std::vector<int>{2, 4, 6, 8, 10});
    CHECK(parse_p_range("7") == std::vector<int>{7});
    CHECK(parse_p_range("5,10,20") == std::vector<int>{5, 10, 20});
    CHECK_THROWS(parse_p_range("10:2:log"));
    CHECK_THROWS(parse_p_range("a:b:log"));
}

TEST_CASE("coeff subcommand emits the expected value") {
    const auto [rc, out] = run_capture(
        {"coeff", "--geometry", "torus:d=1,A=1", "--u", "0.5", "--q", "0"});
    CHECK(rc == 0);
    const auto lines = split_lines(out);
    REQUIRE(lines.size() >= 3);
    CHECK(lines[0] == "u,q,point,weight,e0_trace,e0_bochner");
    // The point row carries e0_trace for alpha = 2pi at u = 0.5.
    const std::vector<double> tp{2.0 * std::numbers::pi};
    const double expect = e0_trace(tp, 0.5, 0, 1);
    CHECK(lines[1].find("0.5,0,0,1,") == 0);
    const auto last_comma = lines[1].rfind(',');
    const auto prev_comma = lines[1].rfind(',', last_comma - 1);
    const double got = std::stod(lines[1].substr(prev_comma + 1, last_comma - prev_comma - 1));
    CHECK(got == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("verify subcommand exits cleanly on cp1") {
    const auto [rc, out] = run_capture({"verify", "--geometry", "cp1", "--p", "5", "--u", "1"});
    CHECK(rc == 0);
    CHECK(out.find("mckean_singer") != std::string::npos);
    CHECK(out.find("FAIL") == std::string::npos);
}

TEST_CASE("fit subcommand produces the subleading comparison") {
    const auto [rc, out] = run_capture({"fit", "--geometry", "cp1", "--u", "0.5", "--p",
                                        "32:128:log", "--k", "1", "--q", "0"});
    CHECK(rc == 0);
    const auto lines = split_lines(out);
    REQUIRE(lines.size() >= 4);
    CHECK(lines[0].find("fitted,predicted") != std::string::npos);
    bool saw_r1 = false;
    for (const auto& line : lines) {
        if (line.find("coeff,1,") != std::string::npos) saw_r1 = true;
    }
    CHECK(saw_r1);
}

TEST_CASE("deterministic output") {
    const std::vector<std::string> args{"trace",  "--geometry", "torus:d=1,A=1", "--u",
                                        "0.5,1", "--p",        "5,10",          "--q", "0,1"};
    const auto a = run_capture(args);
    const auto b = run_capture(args);
    CHECK(a.first == 0);
    CHECK(a.second == b.second);  // byte identical
    CHECK(a.second.find("p,u,q,trace") == 0);

    // The thread cap must not change the emitted bytes.
    setenv("CURVHEAT_THREADS", "1", 1);
    const auto serial = run_capture(args);
    setenv("CURVHEAT_THREADS", "4", 1);
    const auto parallel = run_capture(args);
    unsetenv("CURVHEAT_THREADS");
    CHECK(serial.second == a.second);
    CHECK(parallel.second == a.second);
}

TEST_CASE("verify subcommand on an exact torus model") {
    const auto [rc, out] =
        run_capture({"verify", "--geometry", "torus:d=1,A=1", "--p", "5,10", "--u", "0.5,1"});
    CHECK(rc == 0);
    CHECK(out.find("torus_exactness") != std::string::npos);
    CHECK(out.find("morse_chain") != std::string::npos);
    CHECK(out.find("FAIL") == std::string::npos);
}

TEST_CASE("manifest geometry through the CLI") {
    const std::string path = "cli_test_manifest.json";
    {
        std::ofstream f(path);
        f << R"({"n":1,"rank_e":1,"points":[{"alphas":[1.0],"weight":1.0}]})";
    }
    const auto [rc, out] = run_capture({"bounds", "--geometry", "file:" + path, "--q", "0"});
    CHECK(rc == 0);
    CHECK(out.find("weak") != std::string::npos);
    std::remove(path.c_str());

    const auto [rc2, out2] = run_capture({"bounds", "--manifest", "no_such_file.json"});
    CHECK(rc2 == 3);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_capture({"unknown-subcommand"}).first == 2);
    CHECK(run_capture({"coeff", "--geometry", "klein-bottle", "--u", "1"}).first == 2);
    CHECK(run_capture({"trace", "--geometry", "cp1"}).first == 2);  // missing --u/--p
    CHECK(run_capture({"fit", "--geometry", "cp1", "--u", "0.5", "--p", "8:64:log", "--k",
                       "7"}).first == 2);
}

TEST_CASE("tree output is valid JSON-shaped text") {
    const auto [rc, out] =
        run_capture({"bounds", "--geometry", "cp1", "--q", "0", "--format", "tree"});
    CHECK(rc == 0);
    CHECK(out.front() == '[');
    CHECK(out.find("\"kind\": \"weak\"") != std::string::npos);
}

TEST_CASE("bounds with tensor powers emits the inequality report") {
    const auto [rc, out] = run_capture(
        {"bounds", "--geometry", "torus:d=1,A=1", "--p", "5", "--u", "1", "--q", "0"});
    CHECK(rc == 0);
    CHECK(out.find("geom,q,p,u,kind,value,margin,verdict") == 0);
    CHECK(out.find("dim<=trace") != std::string::npos);
    CHECK(out.find("equality@n") != std::string::npos);
    CHECK(out.find("FAIL") == std::string::npos);
}

TEST_CASE("trace --spectrum exports raw levels") {
    const auto [rc, out] = run_capture({"trace", "--geometry", "cp1", "--p", "2", "--u", "1",
                                        "--q", "0", "--spectrum"});
    CHECK(rc == 0);
    const auto lines = split_lines(out);
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0] == "p,q,lambda,multiplicity");
    CHECK(lines[1] == "2,0,0,3");  // kernel of O(2): dimension p+1 = 3
}
