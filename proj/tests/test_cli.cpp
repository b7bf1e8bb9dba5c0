// Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <string>

#include "nbrec/common.hpp"
#include "test_util.hpp"
#include "workflow.hpp"

namespace nbrec {
namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NBREC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, HelpAndUsage) {
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("train --help"), 0);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("no-such-command"), 2);
}

TEST(Cli, ConfigErrorsExitTwo) {
  testing::TempDir dir("cli-config");
  EXPECT_EQ(run_cli("verify-bias-variance -o " + dir.str() + " --set bogus.key=1"), 2);
  EXPECT_EQ(run_cli("verify-bias-variance -c " + dir.file("missing.cfg")), 2);
  testing::write_text(dir.file("bad.cfg"), "this line has no equals sign\n");
  EXPECT_EQ(run_cli("verify-bias-variance -c " + dir.file("bad.cfg")), 2);
  EXPECT_EQ(run_cli("verify-bias-variance -o " + dir.str() + " --set ref.kernel=exact"), 2);
}

TEST(Cli, DataErrorsExitThree) {
  testing::TempDir dir("cli-data");
  EXPECT_EQ(run_cli("train -o " + dir.str() + " --set data.train=" + dir.file("none.tsv") +
                    " --set data.test=" + dir.file("none.tsv")),
            3);
  testing::write_text(dir.file("bad.tsv"), "u1\ti1\tfive\n");
  EXPECT_EQ(run_cli("train -o " + dir.str() + " --set data.train=" + dir.file("bad.tsv") +
                    " --set data.test=" + dir.file("bad.tsv")),
            3);
}

TEST(Cli, NumericErrorsExitFour) {
  testing::TempDir dir("cli-numeric");
  EXPECT_EQ(run_cli("sweep-bandwidth -o " + dir.str() +
                    " --set ref.kappa=1 --set ref.n=100 --set sweep.replications=2"
                    " --set sweep.h=0.1,0.2"),
            4);
  const auto files = testing::write_coat_like(dir.str(), testing::small_coat());
  EXPECT_EQ(run_cli("train -o " + dir.file("out") + " --set data.train=" + files.train +
                    " --set data.test=" + files.test +
                    " --set train.trainer=naive --set train.lr=1e300"),
            4);
}

TEST(Cli, SynthIsDeterministic) {
  testing::TempDir dir("cli-synth");
  testing::write_text(dir.file("s.cfg"),
                      "source.users=40\nsource.items=40\nsource.density=0.15\n"
                      "mf.epochs=3\nsynth.seed=9\n");
  const std::string base = "synth -c " + dir.file("s.cfg") + " -o ";
  ASSERT_EQ(run_cli(base + dir.file("a")), 0);
  ASSERT_EQ(run_cli(base + dir.file("b")), 0);
  for (const char* f : {"manifest.txt", "completed.tsv", "exposure.tsv"}) {
    EXPECT_EQ(read_file(dir.file(std::string("a/") + f)),
              read_file(dir.file(std::string("b/") + f)))
        << f;
  }
}

TEST(Cli, TrainAndEval) {
  testing::TempDir dir("cli-train");
  const auto files = testing::write_coat_like(dir.str(), testing::small_coat());
  const std::string common = " -o " + dir.file("out") + " --set data.train=" + files.train +
                             " --set data.test=" + files.test +
                             " --set train.trainer=ips --set train.epochs=3";
  ASSERT_EQ(run_cli("train" + common), 0);
  ASSERT_EQ(run_cli("eval" + common), 0);
  EXPECT_EQ(read_file(dir.file("out/metrics.csv")), read_file(dir.file("out/eval_metrics.csv")));
}

}  // namespace
}  // namespace nbrec
