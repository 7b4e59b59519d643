//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "g2t/genmodel.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "g2t/random.h"

namespace g2t {

std::string_view gen_error_name(GenErrorKind kind) {
  switch (kind) {
  case GenErrorKind::kEmptyCorpus:
    return "EmptyCorpus";
  case GenErrorKind::kBadParameter:
    return "BadParameter";
  case GenErrorKind::kPromptRejected:
    return "PromptRejected";
  case GenErrorKind::kModelFormat:
    return "ModelFormat";
  }
  return "GenError";
}

/* NGramModel */

namespace {

constexpr int kModelVersion = 1;
constexpr int kSymbolBits = 6;
constexpr std::string_view kBosName = "<BOS>";

std::string_view symbol_name(int sym) {
  return sym == kBos ? kBosName : token_text(static_cast<Token>(sym));
}

std::optional<int> symbol_from_name(std::string_view name) {
  if (name == kBosName)
    return kBos;
  if (auto t = token_from_text(name))
    return *t;
  return std::nullopt;
}

[[noreturn]] void bad_model(const std::string &msg) {
  throw GenError(GenErrorKind::kModelFormat, msg);
}

}  // namespace

NGramModel::NGramModel(int order, double alpha): order_(order), alpha_(alpha) {
  if (order < 2 || order > kMaxOrder)
    throw GenError(GenErrorKind::kBadParameter,
                   "n-gram order must be in [2, "
                       + std::to_string(kMaxOrder) + "]");
  if (!(alpha > 0) || !std::isfinite(alpha))
    throw GenError(GenErrorKind::kBadParameter,
                   "smoothing alpha must be positive");
}

NGramModel NGramModel::uniform(int order) { return NGramModel(order, 1.0); }

std::uint64_t NGramModel::context_key(std::span<const Token> history) const {
  std::uint64_t key = 0;
  const int width = order_ - 1;
  const int n = static_cast<int>(history.size());
  for (int i = n - width; i < n; ++i) {
    const int sym = i < 0 ? kBos : history[i];
    key = (key << kSymbolBits) | static_cast<std::uint64_t>(sym);
  }
  return key;
}

void NGramModel::add_sequence(std::span<const Token> sequence) {
  std::vector<Token> seq(sequence.begin(), sequence.end());
  seq.push_back(tok::kEnd);
  const std::span<const Token> all(seq);
  for (size_t j = 0; j < seq.size(); ++j) {
    Counts &c = counts_[context_key(all.first(j))];
    ++c.next[seq[j]];
    ++c.total;
  }
}

Distribution NGramModel::distribution(std::span<const Token> history) const {
  Distribution p;
  auto it = counts_.find(context_key(history));
  if (it == counts_.end()) {
    p.fill(1.0 / tok::kVocabSize);
    return p;
  }
  const Counts &c = it->second;
  const double denom =
      static_cast<double>(c.total) + alpha_ * tok::kVocabSize;
  for (int t = 0; t < tok::kVocabSize; ++t)
    p[t] = (c.next[t] + alpha_) / denom;
  return p;
}

double NGramModel::probability(std::span<const Token> history,
                               Token next) const {
  return distribution(history)[next];
}

std::string NGramModel::to_json() const {
  std::vector<std::uint64_t> keys;
  keys.reserve(counts_.size());
  for (const auto &kv: counts_)
    keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());

  nlohmann::ordered_json counts = nlohmann::ordered_json::array();
  const std::uint64_t mask = (1ULL << kSymbolBits) - 1;
  for (std::uint64_t key: keys) {
    nlohmann::ordered_json ctx = nlohmann::ordered_json::array();
    for (int i = order_ - 2; i >= 0; --i)
      ctx.push_back(symbol_name(static_cast<int>((key >> (i * kSymbolBits))
                                                 & mask)));
    nlohmann::ordered_json next = nlohmann::ordered_json::object();
    const Counts &c = counts_.at(key);
    for (int t = 0; t < tok::kVocabSize; ++t)
      if (c.next[t] > 0)
        next[std::string(token_text(static_cast<Token>(t)))] = c.next[t];
    counts.push_back({ std::move(ctx), std::move(next) });
  }

  nlohmann::ordered_json doc;
  doc["version"] = kModelVersion;
  doc["order"] = order_;
  doc["alpha"] = alpha_;
  doc["counts"] = std::move(counts);
  return doc.dump();
}

NGramModel NGramModel::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error &e) {
    bad_model(e.what());
  }
  if (!doc.is_object() || !doc.contains("version")
      || doc["version"] != kModelVersion)
    bad_model("unsupported model version");
  if (!doc.contains("order") || !doc["order"].is_number_integer()
      || !doc.contains("alpha") || !doc["alpha"].is_number()
      || !doc.contains("counts") || !doc["counts"].is_array())
    bad_model("model requires order, alpha and counts");

  NGramModel model(doc["order"].get<int>(), doc["alpha"].get<double>());
  for (const auto &entry: doc["counts"]) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_array()
        || static_cast<int>(entry[0].size()) != model.order_ - 1
        || !entry[1].is_object())
      bad_model("malformed counts entry");
    std::uint64_t key = 0;
    for (const auto &name: entry[0]) {
      auto sym = name.is_string() ? symbol_from_name(name.get<std::string>())
                                  : std::nullopt;
      if (!sym || *sym == tok::kEnd)
        bad_model("unknown context symbol");
      key = (key << kSymbolBits) | static_cast<std::uint64_t>(*sym);
    }
    Counts &c = model.counts_[key];
    for (auto it = entry[1].begin(); it != entry[1].end(); ++it) {
      auto t = token_from_text(it.key());
      if (!t || !it->is_number_unsigned())
        bad_model("malformed next-token count");
      c.next[*t] = it->get<std::uint32_t>();
      c.total += c.next[*t];
    }
  }
  return model;
}

NGramModel train_ngram(std::span<const std::vector<Token>> corpus, int order,
                       double alpha) {
  if (corpus.empty())
    throw GenError(GenErrorKind::kEmptyCorpus, "training corpus is empty");
  NGramModel model(order, alpha);
  for (const auto &seq: corpus)
    model.add_sequence(seq);
  return model;
}

double perplexity(const NGramModel &model,
                  std::span<const std::vector<Token>> corpus) {
  if (corpus.empty())
    throw GenError(GenErrorKind::kEmptyCorpus, "evaluation corpus is empty");
  double nll = 0;
  std::size_t count = 0;
  std::vector<Token> seq;
  for (const auto &s: corpus) {
    seq.assign(s.begin(), s.end());
    seq.push_back(tok::kEnd);
    const std::span<const Token> all(seq);
    for (size_t j = 0; j < seq.size(); ++j)
      nll -= std::log(model.probability(all.first(j), seq[j]));
    count += seq.size();
  }
  return std::exp(nll / static_cast<double>(count));
}

/* completion pairs */

CompletionPair make_completion_pair(const MolGraph &graph, double fraction,
                                    std::uint64_t seed) {
  if (!(fraction >= 0 && fraction <= 1))
    throw GenError(GenErrorKind::kBadParameter,
                   "fraction must be in [0, 1]");
  const TreeNode tree = graph_to_tree(graph, RootPolicy::seeded(seed));
  const std::vector<Token> tokens = tokenize(serialize_tree(tree));
  const auto len = static_cast<long>(tokens.size());
  const long split =
      std::clamp(std::max(1L, std::lround(fraction * len)), 1L, len);
  CompletionPair pair;
  pair.prompt.assign(tokens.begin(), tokens.begin() + split);
  pair.target.assign(tokens.begin() + split, tokens.end());
  return pair;
}

/* sampling */

std::string_view sample_status_name(SampleStatus status) {
  switch (status) {
  case SampleStatus::kOk:
    return "ok";
  case SampleStatus::kParseFail:
    return "parse_fail";
  case SampleStatus::kDecodeFail:
    return "decode_fail";
  case SampleStatus::kValenceFail:
    return "valence_fail";
  case SampleStatus::kTruncated:
    return "truncated";
  }
  return "unknown";
}

std::optional<SampleStatus> sample_status_from_name(std::string_view name) {
  for (auto s: { SampleStatus::kOk, SampleStatus::kParseFail,
                 SampleStatus::kDecodeFail, SampleStatus::kValenceFail,
                 SampleStatus::kTruncated })
    if (sample_status_name(s) == name)
      return s;
  return std::nullopt;
}

namespace {

void check_temperature(double temperature) {
  if (!(temperature > 0) || !std::isfinite(temperature))
    throw GenError(GenErrorKind::kBadParameter,
                   "temperature must be positive");
}

// Draws from p restricted to `allowed`, with p_t^(1/T) weights.
Token draw(const Distribution &p, const TokenSet &allowed, double temperature,
           Rng &rng) {
  std::array<double, tok::kVocabSize> w {};
  double max_logit = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < tok::kVocabSize; ++t) {
    if (!allowed.test(t))
      continue;
    w[t] = std::log(p[t]) / temperature;
    max_logit = std::max(max_logit, w[t]);
  }
  double total = 0;
  int last = -1;
  for (int t = 0; t < tok::kVocabSize; ++t) {
    if (!allowed.test(t))
      continue;
    w[t] = std::exp(w[t] - max_logit);
    total += w[t];
    last = t;
  }

  const double u = rng.uniform() * total;
  double acc = 0;
  for (int t = 0; t < tok::kVocabSize; ++t) {
    if (!allowed.test(t))
      continue;
    acc += w[t];
    if (u < acc)
      return static_cast<Token>(t);
  }
  return static_cast<Token>(last);
}

}  // namespace

Sample sample_constrained(const NGramModel &model,
                          std::span<const Token> prompt, double temperature,
                          std::uint64_t seed,
                          std::shared_ptr<const DecoderConfig> config,
                          int max_len) {
  check_temperature(temperature);
  DecoderState state(std::move(config));
  try {
    for (Token t: prompt)
      state.accept(t);
  } catch (const ConstrainError &e) {
    throw GenError(GenErrorKind::kPromptRejected,
                   std::string("prompt rejected: ") + e.what());
  }

  Sample out;
  out.tokens.assign(prompt.begin(), prompt.end());
  Rng rng(seed);
  while (!state.complete()) {
    if (static_cast<int>(out.tokens.size()) >= max_len) {
      out.truncated = true;
      break;
    }
    const Token t =
        draw(model.distribution(out.tokens), state.allowed(), temperature, rng);
    state.accept(t);
    out.tokens.push_back(t);
  }
  return out;
}

Sample sample_unconstrained(const NGramModel &model,
                            std::span<const Token> prompt, double temperature,
                            std::uint64_t seed, int max_len) {
  check_temperature(temperature);
  TokenSet all;
  all.set();

  Sample out;
  out.tokens.assign(prompt.begin(), prompt.end());
  Rng rng(seed);
  while (true) {
    if (static_cast<int>(out.tokens.size()) >= max_len) {
      out.truncated = true;
      break;
    }
    const Token t = draw(model.distribution(out.tokens), all, temperature, rng);
    if (t == tok::kEnd)
      break;
    out.tokens.push_back(t);
  }
  return out;
}

Decoded decode_sample(const Sample &sample, const ValenceTable &table) {
  Decoded d;
  if (sample.truncated) {
    d.status = SampleStatus::kTruncated;
    d.error = "no END within the length limit";
    return d;
  }

  TreeNode tree;
  try {
    tree = parse_tree(detokenize(sample.tokens));
  } catch (const Error &e) {
    d.status = SampleStatus::kParseFail;
    d.error = e.what();
    return d;
  }

  try {
    d.graph = tree_to_graph(tree);
  } catch (const Error &e) {
    d.status = SampleStatus::kDecodeFail;
    d.error = e.what();
    return d;
  }

  const ValenceVerdict verdict = validate_valence(*d.graph, table);
  if (!verdict.ok()) {
    d.status = SampleStatus::kValenceFail;
    d.error = "valence exceeded at atom "
              + std::to_string(verdict.violations.front());
    d.graph.reset();
  }
  return d;
}

std::vector<GenerationItem> generate_batch(const NGramModel &model,
                                           std::span<const MolGraph> prompts,
                                           int n, const GenerationConfig &cfg) {
  if (n < 1)
    throw GenError(GenErrorKind::kBadParameter,
                   "generation count must be at least 1");
  if (prompts.empty())
    throw GenError(GenErrorKind::kEmptyCorpus, "no prompt molecules");
  if (!(cfg.fraction_min >= 0 && cfg.fraction_min <= cfg.fraction_max
        && cfg.fraction_max <= 1))
    throw GenError(GenErrorKind::kBadParameter,
                   "fraction range must satisfy 0 <= min <= max <= 1");
  check_temperature(cfg.temperature);

  std::vector<GenerationItem> items(n);
  auto run_one = [&](int i) {
    GenerationItem &item = items[i];
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    item.source = static_cast<int>(rng.below(prompts.size()));
    item.fraction = rng.uniform(cfg.fraction_min, cfg.fraction_max);
    const std::uint64_t pair_seed = rng.next();
    const std::uint64_t sample_seed = rng.next();

    const CompletionPair pair =
        make_completion_pair(prompts[item.source], item.fraction, pair_seed);
    item.prompt_len = pair.prompt.size();
    item.sample = cfg.constrained
                      ? sample_constrained(model, pair.prompt, cfg.temperature,
                                           sample_seed, cfg.decoder,
                                           cfg.max_len)
                      : sample_unconstrained(model, pair.prompt,
                                             cfg.temperature, sample_seed,
                                             cfg.max_len);
    item.decoded = decode_sample(item.sample, cfg.decoder->table);
  };

  const int jobs = std::clamp(cfg.jobs, 1, n);
  if (jobs == 1) {
    for (int i = 0; i < n; ++i)
      run_one(i);
    return items;
  }

  std::atomic<int> next { 0 };
  std::exception_ptr failure;
  std::atomic<bool> failed { false };
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < n && !failed; i = next++) {
        try {
          run_one(i);
        } catch (...) {
          if (!failed.exchange(true))
            failure = std::current_exception();
        }
      }
    });
  }
  for (auto &t: workers)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
  return items;
}

}  // namespace g2t
