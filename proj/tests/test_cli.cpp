#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string tool_path() {
    const char* p = std::getenv("WSVOD_TOOL");
    return p ? std::string(p) : std::string();
}

// Exit status of the tool run with the given arguments, output discarded.
int run_tool(const std::string& args) {
    const std::string cmd = tool_path() + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1 || !WIFEXITED(rc)) return -1;
    return WEXITSTATUS(rc);
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("wsvod_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

}  // namespace

TEST_CASE("tool maps argument and data failures onto exit codes") {
    if (tool_path().empty()) {
        MESSAGE("WSVOD_TOOL not set; skipping the subprocess checks");
        return;
    }

    CHECK(run_tool("") == 2);
    CHECK(run_tool("--help") == 0);
    CHECK(run_tool("no-such-command") == 2);
    CHECK(run_tool("generate") == 2);  // missing required --out

    TempDir tmp;
    const fs::path cfg = tmp.path / "gen.json";
    {
        std::ofstream out(cfg);
        out << R"({"image_size": 32, "frames_per_video": 4, "num_fully_labeled": 2,)"
            << R"( "num_weak": 2, "num_validation": 1, "num_test": 2, "seed": 9})";
    }
    const std::string data_dir = (tmp.path / "data").string();

    CHECK(run_tool("generate --out " + data_dir + " --config " + cfg.string()) == 0);
    CHECK(fs::exists(fs::path(data_dir) / "manifest.json"));

    // A second generate refuses to clobber the dataset unless forced.
    CHECK(run_tool("generate --out " + data_dir + " --config " + cfg.string()) == 2);
    CHECK(run_tool("generate --out " + data_dir + " --config " + cfg.string() + " --force") == 0);

    const std::string missing = (tmp.path / "nowhere").string();
    CHECK(run_tool("evaluate --data " + missing + " --model " + missing) == 3);
}
