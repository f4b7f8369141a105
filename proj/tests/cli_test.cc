// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "config.h"
#include "merlin/errors.h"
#include "merlin/io.h"
#include "test_util.h"

namespace merlin::cli {
namespace {

namespace fs = std::filesystem;
using merlin::testing::scratch_dir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(Config, DefaultsAndTypedGetters) {
  const RunConfig c;
  EXPECT_EQ(c.get("patience"), "6");
  EXPECT_EQ(c.get_size("batch_size"), 512u);
  EXPECT_EQ(c.get_sizes("f_hidden"), (std::vector<size_t>{256, 64}));
  EXPECT_EQ(c.get_double("offset_l2"), 1e-3);
  EXPECT_FALSE(c.has_value("target"));
  EXPECT_THROW(c.get("nonsense"), ConfigError);
}

TEST(Config, LoadTextCommentsAndErrors) {
  RunConfig c;
  c.load_text("# comment\n\nseed = 42  # trailing\nf_hidden=8,4\n", "t.cfg");
  EXPECT_EQ(c.get_seed(), 42u);
  EXPECT_EQ(c.get_sizes("f_hidden"), (std::vector<size_t>{8, 4}));
  try {
    c.load_text("seed = 1\nbogus_key = 3\n", "t.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("t.cfg:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(c.load_text("no equals sign\n", "t.cfg"), ConfigError);
  c.set("batch_size", "abc");
  EXPECT_THROW(c.get_size("batch_size"), ConfigError);
}

TEST(Config, DumpReloadsAndEchoSkipsPaths) {
  RunConfig c;
  c.set("seed", "9");
  c.set("out", "/tmp/x");
  c.set("threads", "4");
  RunConfig back;
  back.load_text(c.dump(), "dump");
  EXPECT_EQ(back.dump(), c.dump());
  const ConfigEcho echo = c.echo();
  EXPECT_EQ(echo.at("seed"), "9");
  EXPECT_EQ(echo.count("out"), 0u);
  EXPECT_EQ(echo.count("threads"), 0u);
}

TEST(Config, BuildersUseValues) {
  RunConfig c;
  c.set("n_users", "17");
  c.set("embedding_dim", "5");
  c.set("optimizer", "sgd");
  c.set("pmf_rank", "3");
  EXPECT_EQ(c.synth_config().n_users, 17u);
  EXPECT_EQ(c.architecture(8, 3).embedding_dim, 5u);
  EXPECT_EQ(c.architecture(8, 3).frame_dim, 8u);
  EXPECT_EQ(c.train_config().optimizer.kind, OptimizerKind::kSgd);
  EXPECT_EQ(c.pmf_config().rank, 3u);
  c.set("optimizer", "rmsprop");
  EXPECT_THROW(c.train_config(), Error);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  const Outcome bad = invoke({"synth", "--bogus", "1"});
  EXPECT_EQ(bad.code, kExitUsage);
  EXPECT_EQ(bad.err.rfind("error: usage:", 0), 0u) << bad.err;
  // Missing required out directory.
  EXPECT_EQ(invoke({"synth"}).code, kExitUsage);
  // Malformed value.
  const auto dir = scratch_dir("cli_usage");
  EXPECT_EQ(invoke({"synth", "--out", dir.string(), "--n-users", "many"}).code, kExitUsage);
}

TEST(Cli, MissingInputExitsOne) {
  const auto dir = scratch_dir("cli_missing");
  const Outcome o = invoke({"split", "--attendance", (dir / "nope.csv").string(),
                            "--out", dir.string()});
  EXPECT_EQ(o.code, kExitRuntime);
  EXPECT_EQ(o.err.rfind("error: io_error:", 0), 0u) << o.err;
}

std::vector<std::string> small_world_flags() {
  return {"--n-users", "200", "--n-movies", "40", "--latent-dim", "4",
          "--frame-dim", "8", "--frames-min", "5", "--frames-max", "15"};
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// synth -> pool -> split -> train -> eval -> comps under `root`.
void run_pipeline(const fs::path& root, const std::string& model,
                  const std::string& target) {
  const std::string w = (root / "world").string();
  const std::string s = (root / "split").string();
  const std::string m = (root / "model").string();
  ASSERT_EQ(invoke(cat({"synth", "--out", w, "--seed", "3"}, small_world_flags())).code, 0);
  ASSERT_EQ(invoke({"pool", "--frames-dir", w + "/frames", "--out", w}).code, 0);
  ASSERT_EQ(invoke({"split", "--attendance", w + "/attendance.csv", "--n-coldstart", "8",
                    "--out", s})
                .code,
            0);
  const std::vector<std::string> data{"--split-dir", s, "--schema", w + "/schema.csv",
                                      "--demographics", w + "/demographics.csv",
                                      "--videos", w + "/videos.csv"};
  const Outcome train =
      invoke(cat({"train", "--model", model, "--out", m, "--max-epochs", "3",
                  "--embedding-dim", "8", "--f-hidden", "16", "--g-hidden", "16",
                  "--batch-size", "128", "--pmf-rank", "4"},
                 data));
  ASSERT_EQ(train.code, 0) << train.err;
  const std::string ckpt = m + "/model.mrlc";
  const Outcome eval = invoke(cat({"eval", "--checkpoint", ckpt, "--out", m + "/eval"}, data));
  ASSERT_EQ(eval.code, 0) << eval.err;
  const Outcome comps = invoke(cat({"comps", "--checkpoint", ckpt, "--target", target,
                                    "--k-users", "20", "--out", m + "/comps"},
                                   data));
  ASSERT_EQ(comps.code, 0) << comps.err;
}

TEST(Cli, PipelineIsByteDeterministic) {
  const auto a = scratch_dir("cli_pipe_a");
  const auto b = scratch_dir("cli_pipe_b");
  run_pipeline(a, "merlin", "m0039");
  run_pipeline(b, "merlin", "m0039");
  for (const char* f : {"world/attendance.csv", "world/videos.csv", "split/train.csv",
                        "model/model.mrlc", "model/eval/eval.csv", "model/comps/comps.csv"}) {
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
  }
  const std::string eval = read_file(a / "model/eval/eval.csv");
  EXPECT_EQ(eval.rfind("protocol,model,auc,n_pos,n_neg,seed\n", 0), 0u);
  EXPECT_NE(eval.find("in_matrix,merlin,"), std::string::npos);
  EXPECT_NE(eval.find("cold_start,merlin,"), std::string::npos);
  // run.log reloads as a config file.
  RunConfig back;
  EXPECT_NO_THROW(back.load_file(a / "model/run.log"));
  EXPECT_EQ(back.get("max_epochs"), "3");
}

TEST(Cli, PmfReportsColdStartAsUnsupported) {
  const auto root = scratch_dir("cli_pmf");
  // PMF can only build comps for movies with training attendance.
  run_pipeline(root, "pmf", "m0000");
  const std::string eval = read_file(root / "model/eval/eval.csv");
  EXPECT_NE(eval.find("cold_start,pmf,NA,0,0,"), std::string::npos) << eval;
  const std::string w = (root / "world").string();
  const Outcome o = invoke({"eval", "--checkpoint", (root / "model/model.mrlc").string(),
                            "--protocol", "cold_start", "--split-dir",
                            (root / "split").string(), "--schema", w + "/schema.csv",
                            "--demographics", w + "/demographics.csv", "--videos",
                            w + "/videos.csv", "--out", (root / "cold").string()});
  EXPECT_EQ(o.code, kExitRuntime);
  EXPECT_NE(o.err.find("cold_start_unsupported"), std::string::npos) << o.err;
  const Outcome comps = invoke({"comps", "--checkpoint", (root / "model/model.mrlc").string(),
                                "--target", "m0039", "--split-dir", (root / "split").string(),
                                "--schema", w + "/schema.csv", "--demographics",
                                w + "/demographics.csv", "--videos", w + "/videos.csv",
                                "--out", (root / "cold_comps").string()});
  EXPECT_EQ(comps.code, kExitRuntime);
}

TEST(Cli, FlagBeatsConfigFileBeatsDefault) {
  const auto dir = scratch_dir("cli_precedence");
  write_file(dir / "run.cfg", "n_users = 30\nn_movies = 12\nlatent_dim = 4\nframe_dim = 4\n"
                              "frames_min = 2\nframes_max = 3\nseed = 5\n");
  ASSERT_EQ(invoke({"synth", "--config", (dir / "run.cfg").string(), "--n-users", "25",
                    "--out", (dir / "w").string()})
                .code,
            0);
  RunConfig log;
  log.load_file(dir / "w/run.log");
  EXPECT_EQ(log.get("n_users"), "25");
  EXPECT_EQ(log.get("n_movies"), "12");
  EXPECT_EQ(log.get("awareness"), "0.5");
  EXPECT_EQ(load_attendance(dir / "w/attendance.csv").records.empty(), false);
}

TEST(Cli, GradcheckPasses) {
  const Outcome o = invoke({"gradcheck", "--gradcheck-instances", "5"});
  EXPECT_EQ(o.code, 0) << o.err;
}

}  // namespace
}  // namespace merlin::cli
