#include <gtest/gtest.h>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <netinet/in.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <thread>

#include <httplib.h>

#include "cli.hpp"
#include "support/test_support.hpp"

extern char** environ;

namespace dune {
namespace {

using testing::fixture_path;
using testing::read_fixture;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(const std::vector<std::string>& args, const std::string& input = "") {
    std::istringstream in(input);
    std::ostringstream out, err;
    int code = cli::run(args, in, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("dune_cli_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Runs the installed binary through the shell, capturing stdout.
Outcome run_binary(const std::string& args) {
    auto dir = scratch_dir("bin");
    auto out_path = dir / "out";
    auto err_path = dir / "err";
    std::string cmd = std::string(DUNE_BINARY) + " " + args + " > " + out_path.string() + " 2> " + err_path.string();
    int status = std::system(cmd.c_str());
    std::ifstream out(out_path, std::ios::binary), err(err_path, std::ios::binary);
    std::stringstream o, e;
    o << out.rdbuf();
    e << err.rdbuf();
    std::filesystem::remove_all(dir);
    return {WEXITSTATUS(status), o.str(), e.str()};
}

// A plain listening socket: holds a port exclusively until closed.
struct PortHolder {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    int port = 0;

    PortHolder() {
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_ANY);
        socklen_t len = sizeof(addr);
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), len) == 0 && ::listen(fd, 1) == 0 &&
            ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
            port = ntohs(addr.sin_port);
        }
    }
    ~PortHolder() { ::close(fd); }
};

int free_port() { return PortHolder().port; }

TEST(CmdReplay, PaperOutputMatchesGoldenByteForByte) {
    auto r = run_binary("replay --kb " + fixture_path("kb_run1.dune") + " --inputs " + fixture_path("run1.features") +
                        " --format paper");
    EXPECT_EQ(r.code, 0) << r.err;
    auto steps = read_fixture("run1_steps.golden");
    EXPECT_EQ(r.out.substr(0, steps.size()), steps);
    EXPECT_EQ(r.out, steps + read_fixture("run1_matrix.golden"));
    EXPECT_NE(steps.find("output from demon depressive_ep: depressive_ep\n"), std::string::npos);
}

TEST(CmdReplay, Run2DefaultFormatEndsWithMatrix) {
    auto r = run_cli({"replay", "--kb", fixture_path("kb_run2.dune"), "--inputs", fixture_path("run2.features")});
    EXPECT_EQ(r.code, 0);
    auto matrix = read_fixture("run2_matrix.golden");
    ASSERT_GE(r.out.size(), matrix.size());
    EXPECT_EQ(r.out.substr(r.out.size() - matrix.size()), matrix);
}

TEST(CmdReplay, MissingInputsFileExitsTwo) {
    auto r = run_cli({"replay", "--kb", fixture_path("kb_run1.dune"), "--inputs", "/nonexistent/run.features"});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(r.err.empty());
    EXPECT_TRUE(r.out.empty());
}

TEST(CmdReplay, MissingInputsFlagIsUsageError) {
    auto r = run_cli({"replay", "--kb", fixture_path("kb_run1.dune")});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(run_cli({"replay", "--kb", fixture_path("kb_run1.dune"), "--inputs", fixture_path("run1.features"),
                       "--format", "xml"})
                  .code,
              2);
}

TEST(CmdReplay, JsonlFormatAndLogDir) {
    auto dir = scratch_dir("logdir");
    auto r = run_cli({"replay", "--kb", fixture_path("kb_run1.dune"), "--inputs", fixture_path("run1.features"), "--format",
                      "jsonl", "--log-dir", dir.string()});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 9);
    std::vector<std::filesystem::path> logs(std::filesystem::directory_iterator(dir), {});
    ASSERT_EQ(logs.size(), 1u);
    std::ifstream in(logs[0]);
    std::stringstream text;
    text << in.rdbuf();
    EXPECT_EQ(text.str(), r.out);
    std::filesystem::remove_all(dir);
}

TEST(CmdReplay, LogDirFallsBackToEnvironment) {
    auto dir = scratch_dir("env");
    ::setenv("DUNE_LOG_DIR", dir.string().c_str(), 1);
    auto r = run_cli({"replay", "--kb", fixture_path("kb_run1.dune"), "--inputs", fixture_path("run1.features")});
    ::unsetenv("DUNE_LOG_DIR");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}), 1);
    std::filesystem::remove_all(dir);
}

TEST(CmdInteractive, Run1FeaturesMatchReplay) {
    std::string input;
    for (const auto& f : testing::fixture_features("run1.features")) input += f.str() + "\n";
    input += "done\n";
    auto r = run_cli({"interactive", "--kb", fixture_path("kb_run1.dune")}, input);
    EXPECT_EQ(r.code, 0) << r.err;
    auto matrix = read_fixture("run1_matrix.golden");
    auto accept = std::string("output from demon depressive_ep: depressive_ep\n");
    EXPECT_EQ(r.out.substr(r.out.size() - matrix.size() - accept.size()), matrix + accept);

    // The ninth prompt, shown after input 8, suggests sleep_disorder.
    std::size_t pos = 0;
    for (int prompt = 0; prompt < 8; ++prompt) pos = r.out.find("> ", pos) + 2;
    auto ninth = r.out.substr(pos, r.out.find("> ", pos) - pos);
    EXPECT_NE(ninth.find("ask about: sleep_disorder?"), std::string::npos) << ninth;
}

TEST(CmdInteractive, ImmediateDoneGivesEmptyMatrix) {
    auto r = run_cli({"interactive", "--kb", fixture_path("kb_run1.dune")}, "done\n");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("\nbipolar_mixed_ep\nmanic_ep\n"), std::string::npos);
}

TEST(CmdInteractive, MalformedInputIsReportedAndSkipped) {
    auto r = run_cli({"interactive", "--kb", fixture_path("kb_run1.dune")}, "Fatigue!\nfatigue\nmystery\n");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("malformed feature 'Fatigue!'"), std::string::npos);
    EXPECT_NE(r.err.find("unknown feature 'mystery'"), std::string::npos);
    EXPECT_NE(r.out.find("\ndepressive_ep\t3\t3\n"), std::string::npos);
}

TEST(CmdValidate, Run1PassesWithWarning) {
    auto r = run_cli({"validate", "--kb", fixture_path("kb_run1.dune")});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("warning: demon 'cyclothymic_hyp_ep' can never reach accept (max 4 < 90)"), std::string::npos);
    EXPECT_EQ(r.err.find("error"), std::string::npos);
}

TEST(CmdValidate, BadBonusExitsTwoWithPosition) {
    auto dir = scratch_dir("validate");
    auto path = dir / "bad.dune";
    std::ofstream(path) << "demon d {\n  group g { members [a, b] bonus [5, 3] }\n}\n";
    auto r = run_cli({"validate", "--kb", path.string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find(path.string() + ":2:38: error: bonus not nondecreasing"), std::string::npos) << r.err;
    std::filesystem::remove_all(dir);
}

TEST(CmdValidate, UnreadablePathExitsTwo) {
    EXPECT_EQ(run_cli({"validate", "--kb", "/nonexistent/kb.dune"}).code, 2);
}

TEST(CmdServe, PortOutOfRangeIsUsageError) {
    EXPECT_EQ(run_cli({"serve", "--port", "0"}).code, 2);
    EXPECT_EQ(run_cli({"serve", "--port", "70000"}).code, 2);
}

TEST(CmdServe, OccupiedPortExitsTwo) {
    PortHolder blocker;
    ASSERT_GT(blocker.port, 0);
    auto r = run_cli({"serve", "--port", std::to_string(blocker.port)});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("cannot bind"), std::string::npos);
}

TEST(CmdServe, AnswersHealthAndStopsOnSigterm) {
    int port = free_port();
    std::string port_text = std::to_string(port);
    std::string kb_dir = DUNE_FIXTURE_DIR;
    std::vector<std::string> args{DUNE_BINARY, "serve", "--port", port_text, "--kb-dir", kb_dir};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, 1, "/dev/null", O_WRONLY, 0);
    pid_t pid = 0;
    ASSERT_EQ(posix_spawn(&pid, DUNE_BINARY, &actions, nullptr, argv.data(), environ), 0);
    posix_spawn_file_actions_destroy(&actions);

    httplib::Client client("127.0.0.1", port);
    httplib::Result res;
    for (int attempt = 0; attempt < 100 && !res; ++attempt) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        res = client.Get("/healthz");
    }
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->body, "ok");

    // Fixture KBs were registered at startup, so posting one again is idempotent.
    auto kb = client.Post("/kb", read_fixture("kb_run1.dune"), "text/plain");
    ASSERT_TRUE(kb);
    EXPECT_EQ(kb->status, 200);

    kill(pid, SIGTERM);
    int status = 0;
    waitpid(pid, &status, 0);
    EXPECT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 0);
}

}  // namespace
}  // namespace dune
