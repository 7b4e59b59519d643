//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct Outcome {
  int code;
  std::string out;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path()
                 / ("g2t_cli_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

Outcome run(const std::string &args) {
  const fs::path out = scratch() / "stdout.txt";
  const std::string cmd = std::string(G2T_CLI_PATH) + " " + args + " > "
                          + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out);
  std::ostringstream s;
  s << in.rdbuf();
  return { WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str() };
}

std::string data(const std::string &name) {
  return (fs::path(G2T_DATA_DIR) / name).string();
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("--version").code, 0);
  EXPECT_EQ(run("encode --help").code, 0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("nonsense").code, 2);
  EXPECT_EQ(run("train --out x.json").code, 2);
  EXPECT_EQ(run("train --corpus a --out b --order 1").code, 2);
  EXPECT_EQ(run("encode").code, 2);
}

TEST(Cli, EncodeAndDecode) {
  const Outcome enc = run("encode -s C");
  ASSERT_EQ(enc.code, 0);
  EXPECT_EQ(enc.out, "{\"atom_name\":\"C\",\"atom_id\":0,\"bonds\":[]}\n");

  const Outcome toks = run("encode -s C --tokens");
  ASSERT_EQ(toks.code, 0);
  EXPECT_EQ(toks.out.substr(0, 1), "{");
  EXPECT_NE(toks.out.find(" atom_name "), std::string::npos);

  const fs::path tree = scratch() / "tree.xml";
  const Outcome xml = run("encode -s 'CC(=O)[O-]' --format xml");
  ASSERT_EQ(xml.code, 0);
  std::ofstream(tree) << xml.out;
  const Outcome dec = run("decode --format xml --input " + tree.string());
  ASSERT_EQ(dec.code, 0);
  const auto j = ojson::parse(dec.out);
  EXPECT_EQ(j["smiles"].get<std::string>().find('-') != std::string::npos,
            true);
  EXPECT_EQ(j["key"], ojson::parse(run("decode --input " + tree.string()
                                       + " --format xml")
                                       .out)["key"]);
}

TEST(Cli, DataErrors) {
  EXPECT_EQ(run("encode -s 'C1CC'").code, 4);
  EXPECT_EQ(run("encode -s 'C[C@H](O)N'").code, 4);
  const fs::path bad = scratch() / "bad.json";
  {
    std::ofstream(bad) << R"({"atom_name":"C","atom_id":0,"bonds":[)"
                          R"({"bond_type":"single","atom":{"atom_name":"C",)"
                          R"("atom_id":7,"bonds":[]}}]})";
  }
  EXPECT_EQ(run("decode --input " + bad.string()).code, 4);
  {
    std::ofstream(bad) << "{not json";
  }
  EXPECT_EQ(run("decode --input " + bad.string()).code, 4);
}

TEST(Cli, IoErrors) {
  EXPECT_EQ(run("decode --input /nonexistent/tree.json").code, 3);
  EXPECT_EQ(run("ingest --dataset /nonexistent.smi -o x.jsonl").code, 3);
  EXPECT_EQ(run("train --corpus /nonexistent.jsonl --out x.json").code, 3);
}

TEST(Cli, Mask) {
  const Outcome empty = run("mask");
  ASSERT_EQ(empty.code, 0);
  const auto j0 = ojson::parse(empty.out);
  EXPECT_EQ(j0["prefix_tokens"], 0);
  EXPECT_EQ(j0["complete"], false);
  EXPECT_EQ(j0["allowed"], ojson::parse("[\"{\"]"));

  const Outcome done =
      run("mask -p '{\"atom_name\":\"C\",\"atom_id\":0,\"bonds\":[]}'");
  ASSERT_EQ(done.code, 0);
  const auto j1 = ojson::parse(done.out);
  EXPECT_EQ(j1["complete"], true);
  EXPECT_EQ(j1["allowed"], ojson::parse("[\"<END>\"]"));
}

TEST(Cli, Roundtrip) {
  const Outcome r = run("roundtrip --dataset " + data("zinc_micro.smi")
                        + " -n 200 --seed 3");
  ASSERT_EQ(r.code, 0);
  const auto j = ojson::parse(r.out);
  EXPECT_EQ(j["molecules"], 200);
  EXPECT_EQ(j["ok"], true);
}

TEST(Cli, StagedPipeline) {
  const fs::path d = scratch();
  const std::string corpus = (d / "corpus.jsonl").string();
  const std::string ref = (d / "ref.jsonl").string();
  const std::string model = (d / "model.json").string();
  const std::string samples = (d / "samples.jsonl").string();
  const std::string report = (d / "report.json").string();

  ASSERT_EQ(run("ingest --dataset " + data("qm9_micro.smi") + " -o " + corpus
                + " -n 200 --seed 1")
                .code,
            0);
  ASSERT_EQ(run("ingest --dataset " + data("qm9_micro.smi") + " -o " + ref
                + " -n 50 --seed 2")
                .code,
            0);
  ASSERT_TRUE(fs::exists(corpus + ".report.json"));
  ASSERT_EQ(run("train --corpus " + corpus + " --out " + model + " --order 3")
                .code,
            0);
  ASSERT_EQ(run("generate --model " + model + " --corpus " + corpus + " -o "
                + samples + " --count 20 --seed 5")
                .code,
            0);
  const std::string first = slurp(samples);
  ASSERT_EQ(run("generate --model " + model + " --corpus " + corpus + " -o "
                + samples + " --count 20 --seed 5")
                .code,
            0);
  EXPECT_EQ(slurp(samples), first);
  ASSERT_EQ(run("evaluate --samples " + samples + " --train " + corpus
                + " --ref " + ref + " -o " + report)
                .code,
            0);
  const auto j = ojson::parse(slurp(report));
  EXPECT_EQ(j["report"]["samples"], 20);
  EXPECT_EQ(j["report"]["validity"], 1.0);

  EXPECT_EQ(run("generate --model " + corpus + " --corpus " + corpus + " -o "
                + samples + " --count 2 --seed 5")
                .code,
            4);
}

TEST(Cli, RunWritesArtifacts) {
  const fs::path d = scratch() / "run";
  ASSERT_EQ(run("run --dataset " + data("qm9_micro.smi")
                + " --sample-size 200 --ref-size 50 --count 20 --order 3"
                  " --seed 9 -o "
                + d.string())
                .code,
            0);
  for (const char *name: { "corpus.jsonl", "ref.jsonl", "model.json",
                           "samples.jsonl", "report.json" })
    EXPECT_TRUE(fs::exists(d / name)) << name;
  EXPECT_EQ(run("run --dataset " + data("qm9_micro.smi") + " --seed 9 -o "
                + d.string() + " --count 0")
                .code,
            2);
}

}  // namespace
