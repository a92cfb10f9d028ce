#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("blowup_cli_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
};

const Scratch& scratch() {
    static Scratch s;
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct Result {
    int code;
    std::string out, err;
};

// Runs the CLI binary with `args` from the scratch directory.
Result cli(const std::string& args, const std::string& env = "") {
    const fs::path d = scratch().dir;
    const fs::path o = d / "stdout.txt", e = d / "stderr.txt";
    const std::string cmd = "cd '" + d.string() + "' && " + env + " '" + BLOWUP_CLI_PATH + "' " + args + " > '" +
                            o.string() + "' 2> '" + e.string() + "'";
    const int st = std::system(cmd.c_str());
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(o), slurp(e)};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::size_t line_count(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("solve writes trace and metadata") {
    const auto r = cli("--out solve1 solve --p 0.5 --n 3 --alpha 0.2 --eta-max 50");
    REQUIRE(r.code == 0);
    const fs::path d = scratch().dir / "solve1";
    const std::string csv = slurp(d / "trace.csv");
    CHECK(first_line(csv) == "eta,w,wp,V");
    CHECK(line_count(csv) > 1000);
    const auto meta = nlohmann::json::parse(slurp(d / "trace.meta.json"));
    CHECK(meta["method_tag"] == "rk_continuation");
    CHECK(meta["params"]["alpha"] == 0.2);
    CHECK(meta.contains("version"));
    const auto rep = nlohmann::json::parse(slurp(d / "solve_report.json"));
    CHECK(rep["result"] == "pass");
}

TEST_CASE("solve with zero amplitude") {
    const auto r = cli("--out zero solve --alpha 0");
    REQUIRE(r.code == 0);
    const std::string csv = slurp(scratch().dir / "zero" / "trace.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        CHECK(line.substr(c1) == ",0,0,0");
    }
}

TEST_CASE("sigma prints the bootstrap sequence") {
    const auto r = cli("--out sig sigma --p 0.5 --m 3");
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    double a, b, c;
    in >> a >> b >> c;
    CHECK(a == 0.0);
    CHECK(b == 2.0);
    CHECK(c == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
    CHECK(first_line(slurp(scratch().dir / "sig" / "sigma.csv")) == "m,sigma,closed_form");
}

TEST_CASE("exit codes") {
    CHECK(cli("--out e1 solve --p 1.5").code == 1);
    CHECK(cli("--out e1 solve --alpha 0.3").code == 1);
    CHECK(cli("--out e1 bogus").code == 1);
    CHECK(cli("--out e1").code == 1);
    CHECK(cli("--config missing.ini solve").code == 1);
    CHECK(cli("--out e1 solve --mode sideways").code == 1);
    {
        std::ofstream(scratch().dir / "blocker") << "file";
        CHECK(cli("--out blocker/sub solve --alpha 0").code == 1);
    }
    // too few steps for the census: diagnostic failure with the report path
    const auto r = cli("--out e2 --max-steps 100 zeros");
    CHECK(r.code == 2);
    CHECK(r.err.find("zeros_report.json") != std::string::npos);
    const auto rep = nlohmann::json::parse(slurp(scratch().dir / "e2" / "zeros_report.json"));
    CHECK(rep["result"] == "fail");
}

TEST_CASE("config file with flag overrides") {
    const fs::path d = scratch().dir;
    std::ofstream(d / "run.ini") << "p=0.75\nn=2\nalpha=0.002\neta-max=30\n[decay]\nwindow-lo=12\nwindow-hi=30\n";
    REQUIRE(cli("--config run.ini --out cfg1 decay").code == 0);
    const auto a = nlohmann::json::parse(slurp(d / "cfg1" / "decay_report.json"));
    CHECK(a["params"]["p"] == 0.75);
    CHECK(a["params"]["n"] == 2);
    CHECK(a["details"]["window"][0] == 12.0);

    cli("--config run.ini --p 0.5 --out cfg2 decay");
    const auto b = nlohmann::json::parse(slurp(d / "cfg2" / "decay_report.json"));
    CHECK(b["params"]["p"] == 0.5);
    CHECK(b["params"]["alpha"] == 0.002);
}

TEST_CASE("output directory from the environment") {
    REQUIRE(cli("solve --alpha 0", "BLOWUP_PROFILES_OUT=envout").code == 0);
    CHECK(fs::exists(scratch().dir / "envout" / "trace.csv"));
    REQUIRE(cli("--out flagout solve --alpha 0", "BLOWUP_PROFILES_OUT=envout2").code == 0);
    CHECK(fs::exists(scratch().dir / "flagout" / "trace.csv"));
    CHECK_FALSE(fs::exists(scratch().dir / "envout2"));
}

TEST_CASE("json tables") {
    REQUIRE(cli("--out js --format json zeros").code == 0);
    const auto t = nlohmann::json::parse(slurp(scratch().dir / "js" / "zeros.json"));
    REQUIRE(t.is_array());
    REQUIRE(t.size() >= 3);
    CHECK(t[0].contains("eta_zero"));
    CHECK(t[0].contains("slope"));
    CHECK(t[0].contains("window"));
}

TEST_CASE("sweep") {
    const auto empty = cli("--out sw0 sweep");
    CHECK(empty.code == 0);
    CHECK(slurp(scratch().dir / "sw0" / "sweep.csv") ==
          "alpha,zeros,decay_exponent,F_inf,energy_ok,containment_ok,convergence_ok,oscillation_ok\n");

    const auto r = cli("--out sw1 --p 0.5 --n 3 sweep --alphas 0.2,0.05,0.1,0.1");
    CHECK(r.code == 0);
    CHECK(r.err.find("duplicate") != std::string::npos);
    std::istringstream in(slurp(scratch().dir / "sw1" / "sweep.csv"));
    std::string line;
    std::getline(in, line);
    std::vector<double> alphas;
    while (std::getline(in, line)) {
        alphas.push_back(std::stod(line.substr(0, line.find(','))));
        CHECK(line.substr(line.size() - 8) == ",1,1,1,1");
    }
    REQUIRE(alphas.size() == 3);
    CHECK(alphas[0] == 0.05);
    CHECK(alphas[1] == 0.1);
    CHECK(alphas[2] == 0.2);

    CHECK(cli("--out sw2 sweep --alphas 0.3").code == 1);
}

TEST_CASE("identical runs give identical artifacts") {
    const fs::path d = scratch().dir;
    REQUIRE(cli("--out det1 --alpha 0.15 --eta-max 30 solve").code == 0);
    REQUIRE(cli("--out det2 --alpha 0.15 --eta-max 30 solve").code == 0);
    for (const char* f : {"trace.csv", "trace.meta.json", "solve_report.json"})
        CHECK(slurp(d / "det1" / f) == slurp(d / "det2" / f));
    REQUIRE(cli("--out det3 zeros").code == 0);
    REQUIRE(cli("--out det4 zeros").code == 0);
    CHECK(slurp(d / "det3" / "zeros.csv") == slurp(d / "det4" / "zeros.csv"));
}

TEST_CASE("reports follow the shipped schema") {
    const auto schema = nlohmann::json::parse(slurp(BLOWUP_SCHEMA_PATH));
    const auto& props = schema["properties"];
    REQUIRE(cli("--out schema energy").code == 0);
    REQUIRE(cli("--out schema zeros").code == 0);
    REQUIRE(cli("--out schema decay").code == 0);
    for (const char* f : {"energy_report.json", "zeros_report.json", "decay_report.json"}) {
        const auto rep = nlohmann::json::parse(slurp(scratch().dir / "schema" / f));
        for (const auto& key : schema["required"]) CHECK(rep.contains(key.get<std::string>()));
        for (const auto& [key, value] : rep.items()) CHECK(props.contains(key));
        CHECK((rep["result"] == "pass" || rep["result"] == "fail"));
        CHECK(rep["check_name"].is_string());
        CHECK(rep["details"].is_object());
        for (const char* k : {"measured", "bound", "tolerance"})
            CHECK((rep[k].is_number() || rep[k].is_null()));
    }
}
