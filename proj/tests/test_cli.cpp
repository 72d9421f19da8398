#include "eyetap/session_log.hpp"
#include "eyetap/signal.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace eyetap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("eyetap_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args, const fs::path& stdout_file = "/dev/null") {
    const std::string cmd = std::string(EYETAP_CLI) + " " + args + " >" + stdout_file.string() + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("calibrate prints the 95th percentile plus margin") {
    const auto dir = scratch("calibrate");
    AudioFrame f;
    f.samples.assign(32000, 0.01f);  // constant 0.01 -> -40 dBFS
    write_wav((dir / "quiet.wav").string(), std::vector<AudioFrame>{f});
    CHECK(run("calibrate --wav " + (dir / "quiet.wav").string() + " --margin 20", dir / "out.txt") == 0);
    CHECK(slurp(dir / "out.txt") == "-20.0\n");
    CHECK(run("calibrate --wav " + (dir / "quiet.wav").string(), dir / "out.txt") == 0);
    CHECK(slurp(dir / "out.txt") == "-20.0\n");
    fs::remove_all(dir);
}

TEST_CASE("simulate is deterministic apart from the wall clock") {
    const auto dir = scratch("simulate");
    write(dir / "s.cfg", "technique = voice\ntask = matrix\nmatrix.level = 2\n");
    const std::string base = "simulate --config " + (dir / "s.cfg").string() + " --seed 3";
    REQUIRE(run(base + " --out " + (dir / "a").string()) == 0);
    REQUIRE(run(base + " --out " + (dir / "b").string()) == 0);
    const auto name = "p1_voice_matrix_s3.jsonl";
    const auto a = read_session_log(dir / "a" / name), b = read_session_log(dir / "b" / name);
    CHECK(a.without_wall_time() == b.without_wall_time());
    CHECK_FALSE(a.header.wall_time.empty());
    CHECK(run("replay --log " + (dir / "a" / name).string()) == 0);
    CHECK(run("simulate --set technique=dwell --set task=dart --set dart.trials=2 --out " + (dir / "c").string()) == 0);
    CHECK(fs::exists(dir / "c" / "p1_dwell_dart_s1.jsonl"));
    fs::remove_all(dir);
}

TEST_CASE("study then analyze reproduces the report byte for byte") {
    const auto dir = scratch("study");
    write(dir / "plan.txt", "techniques = eyetap, pointer\ntasks = matrix:1, circle\nparticipants = 2\n"
                            "fitts.trials_per_condition = 3\n");
    REQUIRE(run("study --plan " + (dir / "plan.txt").string() + " --jobs 2 --out " + (dir / "study").string()) == 0);
    REQUIRE(run("analyze --logs " + (dir / "study" / "logs").string() + " --out " + (dir / "again").string()) == 0);
    for (const char* f : {"report.json", "trials.csv", "conditions.csv"}) {
        CAPTURE(f);
        CHECK_FALSE(slurp(dir / "study" / f).empty());
        CHECK(slurp(dir / "study" / f) == slurp(dir / "again" / f));
    }
    fs::remove_all(dir);
}

TEST_CASE("exit codes: 1 for usage errors, 2 for bad input") {
    const auto dir = scratch("exit");
    CHECK(run("simulate --bogus") == 1);
    CHECK(run("") == 1);
    write(dir / "bad.cfg", "seed = 1\nwarp_drive = on\n");
    CHECK(run("simulate --config " + (dir / "bad.cfg").string() + " --out " + dir.string()) == 2);
    CHECK(run("simulate --set matrix.level=9 --out " + dir.string()) == 2);
    fs::remove_all(dir);
}
