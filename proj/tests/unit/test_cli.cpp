// SPDX-License-Identifier: Apache-2.0
//
// Runs the tsnfv executable as a subprocess against the fixture documents.
#include <gtest/gtest.h>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tsnfv/json_io.hpp"
#include "tsnfv/service.hpp"
#include "tsnfv/workspace.hpp"

namespace tsnfv {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture(const std::string& name) { return (fs::path(TSNFV_FIXTURES_DIR) / name).string(); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("tsnfv-cli-") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path state() const { return dir_ / "state.json"; }

  Outcome run(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd =
        std::string(TSNFV_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Outcome r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  Outcome with_state(const std::string& args) const { return run("--state " + state().string() + " " + args); }

  Outcome instantiate(const std::string& topology, const std::string& nsd, const std::string& placement) const {
    return with_state("--topology " + fixture(topology) + " --nsd " + fixture(nsd) + " --placement " +
                      fixture(placement) + " instantiate");
  }

  fs::path dir_;
};

TEST_F(Cli, CrossPopLifecycle) {
  const Outcome inst = instantiate("topology_cross.json", "nsd_control_loop.json", "placement_h1_h2.json");
  ASSERT_EQ(inst.code, 0) << inst.err;
  EXPECT_EQ(inst.out.substr(0, 5), "ns-1\n");
  EXPECT_NE(inst.out.find("31640"), std::string::npos);

  const Outcome audit = with_state("show audit");
  EXPECT_EQ(audit.code, 0);
  EXPECT_NE(audit.out.find("Or-Wi"), std::string::npos);

  const Outcome gcl = with_state("show gcl B1.p1");
  EXPECT_EQ(gcl.code, 0);
  EXPECT_NE(gcl.out.find("entries 4"), std::string::npos);

  const Outcome ok = with_state("verify ns-1");
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
  EXPECT_EQ(ok.out.substr(0, 5), "PASS\n");

  EXPECT_EQ(with_state("terminate ns-1").code, 0);
  EXPECT_EQ(with_state("terminate ns-1").code, 1);
  EXPECT_EQ(with_state("terminate ns-9").code, 1);
  EXPECT_EQ(with_state("verify ns-1").code, 1);
}

TEST_F(Cli, AdmissionFailureExitsTwo) {
  const Outcome r = instantiate("topology_intra.json", "nsd_tight.json", "placement_h1_h2.json");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("admission failed: instance ns-1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("cause infeasible_budget"), std::string::npos) << r.out;
  // the failed instance is on record, with nothing reserved
  const auto ws = Workspace::load(state());
  EXPECT_EQ(ws->cuc().instance("ns-1").status, InstanceStatus::failed);
  EXPECT_TRUE(ws->cnc("pop1").admitted().empty());
}

TEST_F(Cli, CorruptInstalledListFailsVerification) {
  ASSERT_EQ(instantiate("topology_intra.json", "nsd_control_loop.json", "placement_h1_h2.json").code, 0);
  {
    auto ws = Workspace::load(state());
    GateControlList g = ws->installed_gcls().at("B1.p1");
    g.entries = {GclEntry{0x7F, g.cycle_ns}};  // no window for the stream class
    ws->install_gcl(g);
    ws->save(state());
  }
  const Outcome r = with_state("verify ns-1");
  EXPECT_EQ(r.code, 3) << r.out << r.err;
  EXPECT_EQ(r.out.substr(0, 5), "FAIL\n");
}

TEST_F(Cli, UpdateExitCodes) {
  ASSERT_EQ(instantiate("topology_intra.json", "nsd_control_loop.json", "placement_h1_h2.json").code, 0);
  const std::string docs = " --nsd " + fixture("nsd_relaxed.json") + " --placement " + fixture("placement_h1_h2.json");
  EXPECT_EQ(with_state(docs + " update ns-1").code, 0);
  const std::string before = slurp(state());

  const std::string tight = " --nsd " + fixture("nsd_tight.json") + " --placement " + fixture("placement_h1_h2.json");
  const Outcome r = with_state(tight + " update ns-1");
  EXPECT_EQ(r.code, 2) << r.out << r.err;
  const auto ws = Workspace::load(state());
  EXPECT_EQ(ws->cuc().instance("ns-1").status, InstanceStatus::active);
  EXPECT_EQ(ws->cnc("pop1").to_json(), Workspace::from_json(io::parse_text(before, "before"))->cnc("pop1").to_json());
}

TEST_F(Cli, InputErrorsExitOne) {
  ASSERT_EQ(instantiate("topology_intra.json", "nsd_control_loop.json", "placement_h1_h2.json").code, 0);
  EXPECT_EQ(instantiate("topology_cross.json", "nsd_control_loop.json", "placement_h1_h2.json").code, 1);
  EXPECT_EQ(with_state("--nsd " + fixture("nsd_relaxed.json") + " --placement " + (dir_ / "missing.json").string() +
                       " instantiate")
                .code,
            1);
  EXPECT_EQ(with_state("--placement " + fixture("placement_h1_h2.json") + " instantiate").code, 1);
  EXPECT_EQ(with_state("--bg-load 1.5 verify ns-1").code, 1);
  EXPECT_EQ(with_state("show nonsense").code, 1);
  EXPECT_EQ(with_state("show gcl B7.p0").code, 1);
  EXPECT_EQ(with_state("show config nobody").code, 1);
  EXPECT_EQ(with_state("dance").code, 1);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("--state " + (dir_ / "absent.json").string() + " show streams").code, 1);
}

TEST_F(Cli, CorruptStateFileExitsOne) {
  std::ofstream(state()) << "{ \"format\": ";
  EXPECT_EQ(with_state("show streams").code, 1);
}

TEST_F(Cli, PnfConfigIsNotEmitted) {
  const Outcome r = instantiate("topology_cross.json", "nsd_pnf.json", "placement_pnf.json");
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  const Outcome cfg = with_state("show config plc");
  EXPECT_EQ(cfg.code, 0);
  EXPECT_EQ(cfg.out, "no config (unmanaged PNF)\n");
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  std::vector<std::string> states, gcls, bridges;
  for (int i = 0; i < 2; ++i) {
    fs::remove(state());
    ASSERT_EQ(instantiate("topology_cross.json", "nsd_control_loop.json", "placement_h1_h2.json").code, 0);
    ASSERT_EQ(instantiate("topology_cross.json", "nsd_pnf.json", "placement_pnf.json").code, 0);
    states.push_back(slurp(state()));
    gcls.push_back(with_state("show gcl B2.p1").out);
    bridges.push_back(with_state("show bridges").out);
  }
  EXPECT_EQ(states[0], states[1]);
  EXPECT_EQ(gcls[0], gcls[1]);
  EXPECT_EQ(bridges[0], bridges[1]);
}

TEST_F(Cli, ServeAnswersAndSavesOnSignal) {
  int pipefd[2];
  ASSERT_EQ(::pipe(pipefd), 0);
  const std::string topo = fixture("topology_cross.json"), st = state().string();
  const pid_t pid = ::fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    ::dup2(pipefd[1], STDOUT_FILENO);
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    ::execl(TSNFV_CLI_PATH, TSNFV_CLI_PATH, "--topology", topo.c_str(), "--state", st.c_str(), "--listen",
            "127.0.0.1:0", "serve", static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(pipefd[1]);
  FILE* out = ::fdopen(pipefd[0], "r");
  char line[256] = {0};
  ASSERT_NE(std::fgets(line, sizeof line, out), nullptr);
  int port = 0;
  ASSERT_EQ(std::sscanf(line, "listening on port %d", &port), 1) << line;
  {
    LineClient c("127.0.0.1:" + std::to_string(port));
    const io::Json op{{"op", "instantiate"},
                      {"nsd", io::read_file(fixture("nsd_control_loop.json"))},
                      {"placement", io::read_file(fixture("placement_h1_h2.json"))}};
    const io::Json reply = io::Json::parse(c.request(op.dump()));
    EXPECT_EQ(reply.at("status"), "ok");
  }
  ::kill(pid, SIGTERM);
  int status = 0;
  ::waitpid(pid, &status, 0);
  std::fclose(out);
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);

  const Outcome verify = with_state("verify ns-1");
  EXPECT_EQ(verify.code, 0) << verify.out << verify.err;
}

}  // namespace
}  // namespace tsnfv
