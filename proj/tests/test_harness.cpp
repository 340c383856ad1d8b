#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "conslab/battery.hpp"
#include "conslab/config.hpp"
#include "conslab/grid.hpp"
#include "conslab/runner.hpp"
#include "conslab/snapshot.hpp"

using namespace conslab;
namespace fs = std::filesystem;

namespace {

PeriodicGrid grid2d(int n) {
    PeriodicGrid g;
    g.dim = 2;
    g.n = {n, n, 1};
    g.validate();
    return g;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("conslab_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config parser covers the supported subset") {
    const std::string text =
        "top = 1\n"
        "[experiment]\n"
        "kind = \"burgers\"  # trailing comment\n"
        "strictness = true\n"
        "[grid]\n"
        "points = 128\n"
        "length = 2.5\n"
        "weights = [0.25, 0.75]\n"
        "names = [\"a\", \"b\"]\n"
        "# full-line comment\n"
        "negative = -3\n";
    ConfigTable t = parse_config(text);
    CHECK(t.get_int("", "top") == 1);
    CHECK(t.get_string("experiment", "kind") == "burgers");
    CHECK(t.get_bool("experiment", "strictness"));
    CHECK(t.get_int("grid", "points") == 128);
    CHECK(t.get_float("grid", "length") == doctest::Approx(2.5));
    CHECK(t.get_int("grid", "negative") == -3);
    CHECK(t.get_float("grid", "points") == doctest::Approx(128.0));  // int coerces to float
    std::vector<double> w = t.get_float_array("grid", "weights");
    REQUIRE(w.size() == 2);
    CHECK(w[1] == doctest::Approx(0.75));
    std::vector<std::string> names = t.get_string_array("grid", "names");
    REQUIRE(names.size() == 2);
    CHECK(names[0] == "a");
}

TEST_CASE("config parser reports line numbers and rejects duplicates") {
    try {
        parse_config("ok = 1\nbroken line\n");
        FAIL("expected a parse error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS(parse_config("[s]\nk = 1\nk = 2\n"));
    try {
        ConfigTable t = parse_config("[grid]\npoints = 4\n");
        t.get_int("grid", "missing");
        FAIL("expected a lookup error");
    } catch (const std::exception& e) {
        const std::string msg = e.what();
        CHECK(msg.find("grid") != std::string::npos);
        CHECK(msg.find("missing") != std::string::npos);
    }
}

TEST_CASE("experiment configs require a kind and hash their raw text") {
    ExperimentConfig cfg = parse_experiment_config("[experiment]\nkind = \"gen\"\n");
    CHECK(cfg.kind == "gen");
    CHECK(cfg.hash == fnv1a_hash(cfg.raw));
    CHECK_THROWS(parse_experiment_config("[grid]\npoints = 8\n"));
}

TEST_CASE("fnv1a matches the published test vectors") {
    CHECK(fnv1a_hash("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a_hash("a") == 0xaf63dc4c8601ec8cull);
    CHECK(hash_hex(fnv1a_hash("")).size() == 16);
    CHECK(hash_hex(0xcbf29ce484222325ull) == "cbf29ce484222325");
}

TEST_CASE("snapshots round-trip bitwise for every rank") {
    PeriodicGrid g = grid2d(16);
    ScalarField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f.v[i] = std::sin(0.37 * double(i)) * 1e3;

    Snapshot s = snapshot_of(f, "density");
    std::vector<unsigned char> bytes = snapshot_bytes(s);
    Snapshot back = snapshot_from_bytes(bytes);
    CHECK(back.name == "density");
    CHECK(back.rank == 0);
    ScalarField f2 = scalar_from_snapshot(back);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f2.v[i] == f.v[i]);

    VectorField u(g);
    u[0] = f;
    for (std::size_t i = 0; i < f.size(); ++i) u[1].v[i] = -2.0 * f.v[i];
    VectorField u2 = vector_from_snapshot(snapshot_from_bytes(snapshot_bytes(snapshot_of(u, "vel"))));
    for (int a = 0; a < 2; ++a)
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(u2[a].v[i] == u[a].v[i]);

    PeriodicGrid g3;
    g3.dim = 3;
    g3.n = {8, 8, 8};
    g3.validate();
    MatrixField m(g3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < g3.total(); ++i)
                m.row[r][c].v[i] = r * 3.0 + c + 1e-3 * double(i);
    MatrixField m2 =
        matrix_from_snapshot(snapshot_from_bytes(snapshot_bytes(snapshot_of(m, "state"))));
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < g3.total(); ++i)
                CHECK(m2.row[r][c].v[i] == m.row[r][c].v[i]);
}

TEST_CASE("snapshot reader rejects malformed input with specific messages") {
    PeriodicGrid g = grid2d(8);
    ScalarField f(g, 1.0);
    std::vector<unsigned char> bytes = snapshot_bytes(snapshot_of(f, "x"));

    std::vector<unsigned char> bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS(snapshot_from_bytes(bad_magic));

    std::vector<unsigned char> truncated(bytes.begin(), bytes.end() - 17);
    try {
        snapshot_from_bytes(truncated);
        FAIL("expected a payload-size error");
    } catch (const std::exception& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bytes") != std::string::npos);
    }

    std::vector<unsigned char> tiny(bytes.begin(), bytes.begin() + 6);
    CHECK_THROWS(snapshot_from_bytes(tiny));

    // Flip the endianness tag inside the JSON header and fix up the length.
    const std::string header_tag = "\"little\"";
    std::string as_str(bytes.begin(), bytes.end());
    std::size_t pos = as_str.find(header_tag);
    REQUIRE(pos != std::string::npos);
    std::string foreign = as_str.substr(0, pos) + "\"big\"" + as_str.substr(pos + header_tag.size());
    std::uint32_t hlen = std::uint32_t(foreign[4] & 0xff) | std::uint32_t(foreign[5] & 0xff) << 8 |
                         std::uint32_t(foreign[6] & 0xff) << 16 |
                         std::uint32_t(foreign[7] & 0xff) << 24;
    hlen -= 3;  // "little" -> "big"
    foreign[4] = char(hlen & 0xff);
    foreign[5] = char((hlen >> 8) & 0xff);
    foreign[6] = char((hlen >> 16) & 0xff);
    foreign[7] = char((hlen >> 24) & 0xff);
    std::vector<unsigned char> foreign_bytes(foreign.begin(), foreign.end());
    try {
        snapshot_from_bytes(foreign_bytes);
        FAIL("expected an endianness rejection");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("endian") != std::string::npos);
    }
}

TEST_CASE("snapshot files survive a disk round trip") {
    TempDir tmp("snapshot");
    PeriodicGrid g = grid2d(8);
    ScalarField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f.v[i] = 1.0 / (1.0 + double(i));
    write_snapshot((tmp.path / "f.clf").string(), snapshot_of(f, "f"));
    Snapshot s = read_snapshot((tmp.path / "f.clf").string());
    ScalarField f2 = scalar_from_snapshot(s);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f2.v[i] == f.v[i]);
}

TEST_CASE("the test-function battery has fifteen admissible members") {
    PeriodicGrid g = grid2d(64);
    std::vector<TestFunction> batt = test_function_battery(g);
    CHECK(batt.size() == 15);
    std::set<std::string> ids;
    for (const TestFunction& tf : batt) {
        ids.insert(tf.id);
        CHECK(tf.grad_sup > 0.0);
        double mn = 1e300, mx = -1e300;
        int zero_count = 0;
        for (double v : tf.phi.v) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
            if (v == 0.0) ++zero_count;
        }
        CHECK(mn >= 0.0);              // nonnegative
        CHECK(mx > 0.0);               // nontrivial
        CHECK(zero_count > 0);         // compactly supported
    }
    CHECK(ids.size() == 15);  // unique ids
}

TEST_CASE("the burgers runner writes its reports and is deterministic") {
    const std::string config_text =
        "[experiment]\n"
        "kind = \"burgers\"\n"
        "[burgers]\n"
        "cells = 1024\n"
        "t_end = 2.0\n"
        "datum = \"ramp\"\n"
        "[window]\n"
        "t1 = 1.2\n"
        "t2 = 2.0\n";
    ExperimentConfig cfg = parse_experiment_config(config_text);

    TempDir a("runner_a"), b("runner_b");
    RunOptions opt;
    opt.out_dir = a.path.string();
    RunResult r1 = run_experiment("burgers", cfg, opt);
    CHECK(r1.exit_code == 0);

    const fs::path balance = a.path / "burgers_balance.csv";
    REQUIRE(fs::exists(balance));
    const std::string csv = read_file(balance);
    CHECK(csv.find("t_start,t_end,window_rate,boundary_inflow,dissipation") != std::string::npos);

    // The recorded dissipation sits near the exact 1/12.
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    REQUIRE(std::getline(lines, line));
    const std::size_t last_comma = line.rfind(',');
    const double dissipation = std::stod(line.substr(last_comma + 1));
    CHECK(dissipation == doctest::Approx(1.0 / 12.0).epsilon(0.05));

    opt.out_dir = b.path.string();
    RunResult r2 = run_experiment("burgers", cfg, opt);
    CHECK(r2.exit_code == 0);
    CHECK(read_file(b.path / "burgers_balance.csv") == csv);
    CHECK(read_file(b.path / "report.json") == read_file(a.path / "report.json"));
}

TEST_CASE("unknown experiment kinds are rejected") {
    ExperimentConfig cfg = parse_experiment_config("[experiment]\nkind = \"nope\"\n");
    RunOptions opt;
    TempDir tmp("runner_bad");
    opt.out_dir = tmp.path.string();
    CHECK_THROWS(run_experiment("nope", cfg, opt));
}

TEST_CASE("thread resolution prefers the cli over the environment") {
    CHECK(resolve_threads(4) == 4);
#ifdef _WIN32
    _putenv_s("CONSERVE_LAB_THREADS", "3");
#else
    setenv("CONSERVE_LAB_THREADS", "3", 1);
#endif
    CHECK(resolve_threads(0) == 3);
#ifdef _WIN32
    _putenv_s("CONSERVE_LAB_THREADS", "");
#else
    unsetenv("CONSERVE_LAB_THREADS");
#endif
    CHECK(resolve_threads(0) == 1);
}
