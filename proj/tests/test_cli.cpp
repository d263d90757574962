#include "doctest.h"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gpx/app.hpp"

using namespace gpx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("gpx_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "gpx");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    const int rc = run_cli(int(argv.size()), argv.data(), o, e);
    return {rc, o.str(), e.str()};
}

template <typename F>
Error caught(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e;
    }
    FAIL("expected an error");
    return Error(ErrorKind::DomainError, "unreachable");
}

}  // namespace

TEST_CASE("empty config gives the documented defaults") {
    const RunConfig c = parse_config("");
    CHECK_FALSE(c.a.has_value());
    CHECK(c.q == 2.2);
    CHECK(c.b1 == 1.2);
    CHECK(c.b2 == 1.0);
    CHECK(c.A == 1.0);
    CHECK(c.nx == 257);
    CHECK(c == RunConfig{});
    CHECK(parse_config("# only a comment\n\n   \n") == RunConfig{});
}

TEST_CASE("config parsing: values, comments and lists") {
    const RunConfig c = parse_config(
        "q = 2.1   # target\n"
        "a=0.9\n"
        "seed_x0 = -1.2, 0\n"
        "q_schedule = 2.3,2.2\n"
        "q_list = 2.2, 2.1, 2.05, 2.025\n"
        "potential = zero\n"
        "threads = 4\n");
    CHECK(c.q == 2.1);
    REQUIRE(c.a.has_value());
    CHECK(*c.a == 0.9);
    REQUIRE(c.seed_x0.has_value());
    CHECK(c.seed_x0->x() == -1.2);
    CHECK(c.q_schedule == std::vector<double>{2.3, 2.2});
    CHECK(c.q_list.size() == 4);
    CHECK(c.potential == PotentialKind::zero);
    CHECK(c.threads == 4);
}

TEST_CASE("config round trip is exact") {
    RunConfig c;
    c.a = 0.1 + 0.2;  // not a short decimal
    c.q = 2.0 + 1.0 / 3.0;
    c.seed_x0 = Point(-1.2, 1e-17);
    c.q_schedule = {3.1, 2.7};
    c.q_list = {2.2, 2.1};
    c.seed = 18446744073709551615ULL;
    c.out = "some dir/out";
    const RunConfig back = parse_config(serialize_config(c));
    CHECK(back == c);
    CHECK(serialize_config(back) == serialize_config(c));
    CHECK(parse_config(serialize_config(RunConfig{})) == RunConfig{});
}

TEST_CASE("config errors carry the line or the key") {
    Error e = caught([] { parse_config("q = 1.5\n"); });
    CHECK(e.kind() == ErrorKind::RangeError);
    CHECK(e.message().rfind("q = 1.5", 0) == 0);

    e = caught([] { parse_config("q = 2.2\nbogus = 1\n"); });
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(e.message().find("line 2") != std::string::npos);
    CHECK(e.message().find("bogus") != std::string::npos);

    e = caught([] { parse_config("\n\nnx = 12x\n"); });
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(e.message().find("line 3") != std::string::npos);

    e = caught([] { parse_config("q 2.2\n"); });
    CHECK(e.message().find("line 1") != std::string::npos);

    e = caught([] { parse_config("q = 2.2\nq = 2.3\n"); });
    CHECK(e.message().find("duplicate") != std::string::npos);

    e = caught([] { parse_config("b1 = 0.9\n"); });
    CHECK(e.kind() == ErrorKind::RangeError);
    CHECK(e.message().rfind("b1", 0) == 0);

    e = caught([] { parse_config("q_list = 2.1, 2.2\n"); });
    CHECK(e.message().rfind("q_list", 0) == 0);

    e = caught([] { parse_config("nx = 128\n"); });
    CHECK(e.message().rfind("nx", 0) == 0);
}

TEST_CASE("hash and number formatting") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(fmt17(0.1) == "0.10000000000000001");
    CHECK(fmt17(2.0) == "2");
    CHECK(std::stod(fmt17(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(report_name(2.05) == "report_q2.05.txt");
    CHECK(field_name(2.2) == "field_q2.2.f2d");
}

TEST_CASE("report block round trip") {
    SolveReport r;
    r.q = 2.1;
    r.tau = 1234.5678901234567;
    r.mu_q = -1.0 / 3.0;
    r.energy.total = 42.0 + 1e-9;
    r.excess_scaled = 0.2093;
    r.K_stmt = 0.59375;
    r.K_proof = 0.59375 / 1.44;
    r.bracket_stmt = Bracket::inside;
    r.bracket_proof = Bracket::above;
    r.x_c = Point(1.2 - 1e-13, 0.0);
    r.sigma = {1e-20, -3.0};
    r.converged = true;
    const Grid g = Grid::centered(Point(1.2, 0), 0.1, 0.1, 9, 9, Stencil::fourth_order);
    r.u_q = sample(g, [](const Point& x) { return std::exp(-x.squaredNorm()); });
    ProblemParams p;
    p.a = 0.9;
    p.q = 2.1;

    const fs::path dir = scratch("report");
    {
        std::ofstream f(dir / field_name(r.q), std::ios::binary);
        write_field(f, r.u_q);
        std::ofstream t(dir / report_name(r.q), std::ios::binary);
        t << report_text(r, p, field_name(r.q));
    }
    const StoredReport s = read_report(dir / report_name(r.q));
    CHECK(s.report.tau == r.tau);
    CHECK(s.report.mu_q == r.mu_q);
    CHECK(s.report.energy.total == r.energy.total);
    CHECK(s.report.K_proof == r.K_proof);
    CHECK(s.report.bracket_proof == Bracket::above);
    CHECK(s.report.x_c == r.x_c);
    CHECK(s.report.sigma == r.sigma);
    CHECK(s.report.converged);
    CHECK(s.params.a == 0.9);
    CHECK(s.report.u_q.grid() == g);
    CHECK((s.report.u_q.values() == r.u_q.values()).all());
    CHECK(report_text(s.report, s.params, field_name(r.q)) == report_text(r, p, field_name(r.q)));
}

TEST_CASE("command line: usage and config errors exit with 2") {
    Run r = cli({});
    CHECK(r.code == 2);
    r = cli({"nonsense"});
    CHECK(r.code == 2);
    const std::string missing = (fs::temp_directory_path() / "gpx_no_such_config.txt").string();
    r = cli({"--config", missing, "constants"});
    CHECK(r.code == 2);
    CHECK(r.err.find(missing) != std::string::npos);
    r = cli({"groundstate", "--q", "1.5"});
    CHECK(r.code == 2);
    CHECK(r.err.find("q = 1.5") != std::string::npos);
    r = cli({"--set", "nope=1", "constants"});
    CHECK(r.code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("constants subcommand: CSV, manifest and determinism") {
    const fs::path d1 = scratch("const1"), d2 = scratch("const2");
    Run r = cli({"constants", "--q-list", "2.5,2.2", "--out", d1.string()});
    REQUIRE(r.code == 0);
    const std::string csv = slurp(d1 / "constants.csv");
    CHECK(csv.rfind("q,u0,norm2_sq,a_q_star,tau_q,c_tilde_q,grad_sq,pohozaev_res\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(r.out == csv);

    REQUIRE(cli({"constants", "--q-list", "2.5,2.2", "--out", d2.string(), "--threads", "2"}).code == 0);
    CHECK(slurp(d2 / "constants.csv") == csv);

    const auto j = nlohmann::json::parse(slurp(d2 / "manifest_constants.json"));
    CHECK(j["threads"] == 2);
    CHECK(j["exit_code"] == 0);
    CHECK(j["artifacts"].size() == 1);
    CHECK(j["config"].get<std::string>().find("q_list = 2.5,2.2") != std::string::npos);

    auto checks = check_manifests(d1);
    REQUIRE(checks.size() == 1);
    CHECK(checks[0].ok);
    std::ofstream(d1 / "constants.csv", std::ios::app) << "tampered\n";
    checks = check_manifests(d1);
    CHECK_FALSE(checks[0].ok);
}

TEST_CASE("thread count environment override") {
    const fs::path d = scratch("env");
    ::setenv("GP_EXCITED_THREADS", "3", 1);
    const Run r = cli({"constants", "--q-list", "2.5", "--out", d.string(), "--threads", "1"});
    ::setenv("GP_EXCITED_THREADS", "zero", 1);
    const Run bad = cli({"constants", "--q-list", "2.5", "--out", d.string()});
    ::unsetenv("GP_EXCITED_THREADS");
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(slurp(d / "manifest_constants.json"))["threads"] == 3);
    CHECK(bad.code == 2);
    CHECK(bad.err.find("GP_EXCITED_THREADS") != std::string::npos);
}
