//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <map>
#include <numeric>

#include <gtest/gtest.h>

#include "g2t/genmodel.h"
#include "test_support.h"

namespace g2t {
namespace {

using testing::load_corpus;
using testing::mol;

std::vector<std::vector<Token>> encode_all(
    const std::vector<CorpusEntry> &entries) {
  return canonical_sequences(entries);
}

TEST(NGram, TrigramCertaintyAsAlphaVanishes) {
  using namespace tok;
  const std::vector<std::vector<Token>> corpus {
    { kLBrace, kQuote, kAtomName }
  };
  const NGramModel m = train_ngram(corpus, 3, 1e-12);
  const std::vector<Token> ab { kLBrace, kQuote };
  EXPECT_NEAR(m.probability(ab, kAtomName), 1.0, 1e-9);
  const std::vector<Token> abc { kLBrace, kQuote, kAtomName };
  EXPECT_NEAR(m.probability(abc, kEnd), 1.0, 1e-9);
}

// Independent count table over padded windows.
TEST(NGram, MatchesAddAlphaOracle) {
  const auto seqs = encode_all(load_corpus("qm9_micro.smi", 60));
  const int order = 3;
  const double alpha = 0.5;
  const NGramModel m = train_ngram(seqs, order, alpha);

  std::map<std::vector<int>, std::map<int, int>> table;
  for (const auto &s: seqs) {
    std::vector<int> padded(order - 1, kBos);
    padded.insert(padded.end(), s.begin(), s.end());
    padded.push_back(tok::kEnd);
    for (size_t j = order - 1; j < padded.size(); ++j) {
      std::vector<int> ctx(padded.begin() + j - (order - 1),
                           padded.begin() + j);
      ++table[ctx][padded[j]];
    }
  }
  for (const auto &s: seqs)
    for (size_t j = 0; j <= s.size(); ++j) {
      const std::span<const Token> hist(s.data(), j);
      std::vector<int> ctx;
      for (int i = static_cast<int>(j) - (order - 1);
           i < static_cast<int>(j); ++i)
        ctx.push_back(i < 0 ? kBos : s[i]);
      const auto &row = table.at(ctx);
      const int total = std::accumulate(
          row.begin(), row.end(), 0,
          [](int acc, const auto &kv) { return acc + kv.second; });
      for (int t = 0; t < tok::kVocabSize; ++t) {
        const int c = row.count(t) ? row.at(t) : 0;
        const double expect =
            (c + alpha) / (total + alpha * tok::kVocabSize);
        ASSERT_NEAR(m.probability(hist, static_cast<Token>(t)), expect,
                    1e-12);
      }
    }
}

TEST(NGram, DistributionsNormalizeWithFullSupport) {
  const NGramModel m = train_ngram(
      encode_all(load_corpus("zinc_micro.smi", 100)), 4, 0.01);
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Token> hist(rng.below(10));
    for (auto &t: hist)
      t = static_cast<Token>(rng.below(tok::kVocabSize));
    const Distribution p = m.distribution(hist);
    double sum = 0;
    for (double x: p) {
      EXPECT_GT(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  const Distribution u = NGramModel::uniform().distribution({});
  for (double x: u)
    EXPECT_DOUBLE_EQ(x, 1.0 / tok::kVocabSize);
}

TEST(NGram, Errors) {
  EXPECT_THROW(NGramModel(1, 0.1), GenError);
  EXPECT_THROW(NGramModel(10, 0.1), GenError);
  EXPECT_THROW(NGramModel(3, 0.0), GenError);
  try {
    train_ngram({}, 4, 0.1);
    FAIL();
  } catch (const GenError &e) {
    EXPECT_EQ(e.kind(), GenErrorKind::kEmptyCorpus);
  }
}

TEST(NGram, JsonRoundtripIsByteStable) {
  const NGramModel m = train_ngram(
      encode_all(load_corpus("qm9_micro.smi", 100)), 4, 0.01);
  const std::string text = m.to_json();
  const NGramModel back = NGramModel::from_json(text);
  EXPECT_EQ(back, m);
  EXPECT_EQ(back.to_json(), text);
  EXPECT_EQ(text.rfind(R"({"version":1,"order":4,"alpha":0.01,"counts":[)",
                       0),
            0u);
}

TEST(NGram, ModelFormatErrors) {
  for (const char *bad: { "", "[]", R"({"version":2,"order":3,"alpha":1,"counts":[]})",
                          R"({"version":1,"order":3,"alpha":1})",
                          R"({"version":1,"order":3,"alpha":1,"counts":[[["{"],{}]]})",
                          R"({"version":1,"order":2,"alpha":1,"counts":[[["zz"],{}]]})",
                          R"({"version":1,"order":2,"alpha":1,"counts":[[["{"],{"q":1}]]})" }) {
    try {
      NGramModel::from_json(bad);
      ADD_FAILURE() << bad;
    } catch (const GenError &e) {
      EXPECT_EQ(e.kind(), GenErrorKind::kModelFormat) << bad;
    }
  }
}

TEST(NGram, HigherOrderHasLowerHeldOutPerplexity) {
  auto entries = load_corpus("qm9_like.smi", 2000);
  const size_t held = entries.size() / 10;
  const std::vector<CorpusEntry> test(entries.end() - held, entries.end());
  entries.erase(entries.end() - static_cast<std::ptrdiff_t>(held), entries.end());
  const auto train = training_sequences(entries, 2, 1);
  const auto eval = encode_all(test);
  const double p2 = perplexity(train_ngram(train, 2, 0.01), eval);
  const double p4 = perplexity(train_ngram(train, 4, 0.01), eval);
  EXPECT_TRUE(std::isfinite(p2));
  EXPECT_TRUE(std::isfinite(p4));
  EXPECT_LT(p4, p2);
  EXPECT_GT(p4, 1.0);
}

TEST(CompletionPair, Boundaries) {
  const MolGraph g = mol("CC(=O)N");
  const auto full = tokenize(serialize_tree(graph_to_tree(g,
                                                          RootPolicy::seeded(5))));
  const auto p0 = make_completion_pair(g, 0.0, 5);
  EXPECT_EQ(p0.prompt, std::vector<Token>({ tok::kLBrace }));
  const auto p1 = make_completion_pair(g, 1.0, 5);
  EXPECT_TRUE(p1.target.empty());
  EXPECT_EQ(p1.prompt, full);
  const auto half = make_completion_pair(g, 0.5, 5);
  EXPECT_EQ(half.prompt.size(),
            static_cast<size_t>(std::lround(0.5 * full.size())));
  EXPECT_THROW(make_completion_pair(g, 1.5, 5), GenError);
}

TEST(CompletionPair, ConcatenationReplays) {
  const auto entries = load_corpus("zinc_micro.smi", 1000);
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const auto &e = entries[rng.below(entries.size())];
    const double f = rng.uniform();
    const auto seed = rng.next();
    const auto pair = make_completion_pair(e.graph, f, seed);
    auto all = pair.prompt;
    all.insert(all.end(), pair.target.begin(), pair.target.end());
    ASSERT_TRUE(is_complete(replay(all))) << e.id;
    const auto again = make_completion_pair(e.graph, f, seed);
    ASSERT_EQ(again.prompt, pair.prompt);
  }
}

class Sampling: public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    corpus_ = new std::vector<CorpusEntry>(load_corpus("qm9_like.smi", 1500));
    model_ = new NGramModel(
        train_ngram(training_sequences(*corpus_, 2, 3), 4, 0.01));
  }
  static void TearDownTestSuite() {
    delete model_;
    delete corpus_;
  }
  static std::vector<CorpusEntry> *corpus_;
  static NGramModel *model_;
};

std::vector<CorpusEntry> *Sampling::corpus_ = nullptr;
NGramModel *Sampling::model_ = nullptr;

TEST_F(Sampling, ConstrainedIsDeterministicAndValid) {
  for (int i = 0; i < 300; ++i) {
    const auto pair =
        make_completion_pair((*corpus_)[i].graph, 0.2, static_cast<unsigned>(i));
    const Sample a = sample_constrained(*model_, pair.prompt, 1.0, 1000 + i);
    const Sample b = sample_constrained(*model_, pair.prompt, 1.0, 1000 + i);
    ASSERT_EQ(a.tokens, b.tokens);
    ASSERT_FALSE(a.truncated);
    ASSERT_TRUE(std::equal(pair.prompt.begin(), pair.prompt.end(),
                           a.tokens.begin()));
    const Decoded d = decode_sample(a);
    ASSERT_EQ(d.status, SampleStatus::kOk) << d.error;
  }
}

TEST_F(Sampling, UniformProposerUnderMaskIsValid) {
  const NGramModel u = NGramModel::uniform();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Sample s = sample_constrained(u, std::vector<Token> { tok::kLBrace },
                                        1.0, seed);
    ASSERT_EQ(decode_sample(s).status, SampleStatus::kOk);
  }
}

TEST_F(Sampling, PromptRejected) {
  const std::vector<Token> bad { tok::kRBrace };
  try {
    sample_constrained(*model_, bad, 1.0, 1);
    FAIL();
  } catch (const GenError &e) {
    EXPECT_EQ(e.kind(), GenErrorKind::kPromptRejected);
  }
  EXPECT_THROW(sample_constrained(*model_, {}, 0.0, 1), GenError);
}

TEST_F(Sampling, UnconstrainedTruncatesAndIsDeterministic) {
  const std::vector<Token> prompt { tok::kLBrace };
  const Sample s = sample_unconstrained(*model_, prompt, 1.0, 4, 10);
  EXPECT_TRUE(s.truncated);
  EXPECT_EQ(s.tokens.size(), 10u);
  EXPECT_EQ(decode_sample(s).status, SampleStatus::kTruncated);
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    EXPECT_EQ(sample_unconstrained(*model_, prompt, 0.7, seed).tokens,
              sample_unconstrained(*model_, prompt, 0.7, seed).tokens);
}

TEST_F(Sampling, DecodeStatuses) {
  Sample parse_fail { tokenize(R"({"atom_name":"C")"), false };
  EXPECT_EQ(decode_sample(parse_fail).status, SampleStatus::kParseFail);
  Sample decode_fail {
    tokenize(R"({"atom_name":"C","atom_id":0,"bonds":[{"bond_type":"single",)"
             R"("atom":{"atom_name":"O","atom_id":0,"bonds":[]}}]})"),
    false
  };
  EXPECT_EQ(decode_sample(decode_fail).status, SampleStatus::kDecodeFail);
  Sample valence_fail {
    tokenize(R"({"atom_name":"F","atom_id":0,"bonds":[{"bond_type":"double",)"
             R"("atom":{"atom_name":"C","atom_id":1,"bonds":[]}}]})"),
    false
  };
  EXPECT_EQ(decode_sample(valence_fail).status, SampleStatus::kValenceFail);
  Sample ok { tokenize(R"({"atom_name":"C","atom_id":0,"bonds":[]})"), false };
  const Decoded d = decode_sample(ok);
  EXPECT_EQ(d.status, SampleStatus::kOk);
  ASSERT_TRUE(d.graph.has_value());
  EXPECT_EQ(d.graph->num_atoms(), 1);
}

TEST_F(Sampling, BatchIsIndependentOfJobs) {
  const auto prompts = graphs_of(*corpus_);
  GenerationConfig cfg;
  cfg.seed = 77;
  cfg.jobs = 1;
  const auto a = generate_batch(*model_, prompts, 120, cfg);
  cfg.jobs = 3;
  const auto b = generate_batch(*model_, prompts, 120, cfg);
  ASSERT_EQ(a.size(), 120u);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].sample.tokens, b[i].sample.tokens);
    EXPECT_EQ(a[i].source, b[i].source);
    EXPECT_EQ(a[i].decoded.status, SampleStatus::kOk);
    EXPECT_GE(a[i].fraction, cfg.fraction_min);
    EXPECT_LE(a[i].fraction, cfg.fraction_max);
  }
  EXPECT_THROW(generate_batch(*model_, prompts, 0, cfg), GenError);
}

TEST_F(Sampling, UnconstrainedBatchIsWorseThanConstrained) {
  const auto prompts = graphs_of(*corpus_);
  GenerationConfig cfg;
  cfg.seed = 5;
  const auto with_mask = generate_batch(*model_, prompts, 300, cfg);
  cfg.constrained = false;
  const auto without = generate_batch(*model_, prompts, 300, cfg);
  auto ok_count = [](const auto &items) {
    return std::count_if(items.begin(), items.end(), [](const auto &x) {
      return x.decoded.status == SampleStatus::kOk;
    });
  };
  EXPECT_EQ(ok_count(with_mask), 300);
  EXPECT_LT(ok_count(without), 300);
}

TEST(SampleStatus, Names) {
  for (SampleStatus s: { SampleStatus::kOk, SampleStatus::kParseFail,
                         SampleStatus::kDecodeFail, SampleStatus::kValenceFail,
                         SampleStatus::kTruncated })
    EXPECT_EQ(sample_status_from_name(sample_status_name(s)), s);
  EXPECT_FALSE(sample_status_from_name("bogus").has_value());
}

}  // namespace
}  // namespace g2t
