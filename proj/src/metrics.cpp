//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "g2t/metrics.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include <json.hpp>

#include "g2t/random.h"

namespace g2t {

std::string_view metrics_error_name(MetricsErrorKind kind) {
  switch (kind) {
  case MetricsErrorKind::kEmptySet:
    return "EmptySet";
  case MetricsErrorKind::kLengthMismatch:
    return "LengthMismatch";
  case MetricsErrorKind::kReportFormat:
    return "ReportFormat";
  }
  return "MetricsError";
}

namespace {

[[noreturn]] void empty_set(const char *what) {
  throw MetricsError(MetricsErrorKind::kEmptySet,
                     std::string(what) + " of an empty set");
}

}  // namespace

/* Fingerprint */

Fingerprint::Fingerprint(int nbits): nbits_(nbits) {
  if (nbits <= 0)
    throw MetricsError(MetricsErrorKind::kLengthMismatch,
                       "fingerprint length must be positive");
  words_.assign((nbits + 63) / 64, 0);
}

int Fingerprint::count() const {
  int n = 0;
  for (std::uint64_t w: words_)
    n += std::popcount(w);
  return n;
}

std::vector<int> Fingerprint::on_bits() const {
  std::vector<int> bits;
  for (int i = 0; i < nbits_; ++i)
    if (test(i))
      bits.push_back(i);
  return bits;
}

std::uint64_t hash_sequence(std::uint64_t seed,
                            std::span<const std::uint64_t> values) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t v: values)
    h = mix64(h ^ v);
  return h;
}

std::vector<char> ring_atoms(const MolGraph &graph) {
  const int n = graph.num_atoms();
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<char> bridge(graph.num_bonds(), 0);
  int timer = 0;

  auto dfs = [&](auto &self, int a, int parent_bond) -> void {
    disc[a] = low[a] = timer++;
    for (const auto &nb: graph.neighbors(a)) {
      if (nb.bond == parent_bond)
        continue;
      if (disc[nb.atom] >= 0) {
        low[a] = std::min(low[a], disc[nb.atom]);
      } else {
        self(self, nb.atom, nb.bond);
        low[a] = std::min(low[a], low[nb.atom]);
        if (low[nb.atom] > disc[a])
          bridge[nb.bond] = 1;
      }
    }
  };
  dfs(dfs, 0, -1);

  std::vector<char> in_ring(n, 0);
  for (int b = 0; b < graph.num_bonds(); ++b) {
    if (bridge[b])
      continue;
    in_ring[graph.bond(b).begin] = 1;
    in_ring[graph.bond(b).end] = 1;
  }
  return in_ring;
}

Fingerprint morgan_fingerprint(const MolGraph &graph, int radius, int nbits,
                               const ValenceTable &table) {
  const int n = graph.num_atoms();
  const int words = (graph.num_bonds() + 63) / 64;
  using BondSet = std::vector<std::uint64_t>;

  Fingerprint fp(nbits);
  const std::vector<char> in_ring = ring_atoms(graph);

  std::vector<std::uint64_t> ids(n);
  for (int a = 0; a < n; ++a) {
    const Atom &atom = graph.atom(a);
    const std::uint64_t inv[] = {
      static_cast<std::uint64_t>(atomic_number(atom.element)),
      static_cast<std::uint64_t>(graph.degree(a)),
      static_cast<std::uint64_t>(table.implicit_hydrogens(
          atom.element, atom.charge, graph.bond_order_sum(a))),
      static_cast<std::uint64_t>(atom.charge + 8),
      static_cast<std::uint64_t>(in_ring[a]),
    };
    ids[a] = hash_sequence(0, inv);
    fp.set(static_cast<int>(ids[a] % nbits));
  }

  std::vector<BondSet> env(n, BondSet(words, 0));
  std::set<BondSet> seen { BondSet(words, 0) };
  std::vector<std::uint64_t> buf;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;

  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next_ids(n);
    std::vector<BondSet> next_env(n);
    for (int a = 0; a < n; ++a) {
      pairs.clear();
      next_env[a] = env[a];
      for (const auto &nb: graph.neighbors(a)) {
        pairs.emplace_back(bond_valence(nb.order), ids[nb.atom]);
        next_env[a][nb.bond >> 6] |= 1ULL << (nb.bond & 63);
        for (int w = 0; w < words; ++w)
          next_env[a][w] |= env[nb.atom][w];
      }
      std::sort(pairs.begin(), pairs.end());
      buf.assign(1, ids[a]);
      for (auto [o, id]: pairs) {
        buf.push_back(o);
        buf.push_back(id);
      }
      next_ids[a] = hash_sequence(r, buf);
    }

    std::vector<int> order(n);
    for (int a = 0; a < n; ++a)
      order[a] = a;
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      return std::tie(next_env[x], next_ids[x])
             < std::tie(next_env[y], next_ids[y]);
    });
    std::vector<BondSet> added;
    for (int a: order) {
      if (seen.count(next_env[a]))
        continue;
      if (!added.empty() && added.back() == next_env[a])
        continue;
      added.push_back(next_env[a]);
      fp.set(static_cast<int>(next_ids[a] % nbits));
    }
    seen.insert(added.begin(), added.end());
    ids = std::move(next_ids);
    env = std::move(next_env);
  }
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.size() != b.size())
    throw MetricsError(MetricsErrorKind::kLengthMismatch,
                       "fingerprints of different lengths");
  int both = 0, either = 0;
  for (size_t i = 0; i < a.words().size(); ++i) {
    both += std::popcount(a.words()[i] & b.words()[i]);
    either += std::popcount(a.words()[i] | b.words()[i]);
  }
  if (either == 0)
    return 1.0;
  return static_cast<double>(both) / either;
}

/* scaffolds */

std::string Scaffold::key() const {
  return graph ? canonical_key(*graph) : std::string(kAcyclicScaffold);
}

Scaffold murcko_scaffold(const MolGraph &graph) {
  if (graph.cyclomatic_number() == 0)
    return {};

  const int n = graph.num_atoms();
  std::vector<int> degree(n);
  std::vector<char> removed(n, 0);
  std::vector<int> leaves;
  for (int a = 0; a < n; ++a) {
    degree[a] = graph.degree(a);
    if (degree[a] <= 1)
      leaves.push_back(a);
  }
  while (!leaves.empty()) {
    const int a = leaves.back();
    leaves.pop_back();
    if (removed[a])
      continue;
    removed[a] = 1;
    for (const auto &nb: graph.neighbors(a)) {
      if (removed[nb.atom])
        continue;
      if (--degree[nb.atom] == 1)
        leaves.push_back(nb.atom);
    }
  }

  std::vector<int> remap(n, -1);
  std::vector<Atom> atoms;
  for (int a = 0; a < n; ++a) {
    if (removed[a])
      continue;
    remap[a] = static_cast<int>(atoms.size());
    atoms.push_back(graph.atom(a));
  }
  std::vector<Bond> bonds;
  for (const Bond &b: graph.bonds())
    if (!removed[b.begin] && !removed[b.end])
      bonds.push_back({ remap[b.begin], remap[b.end], b.order });
  return { MolGraph(std::move(atoms), std::move(bonds)) };
}

Scaffold murcko_scaffold(const Scaffold &scaffold) {
  if (scaffold.acyclic())
    return {};
  return murcko_scaffold(*scaffold.graph);
}

double scaf_similarity_keys(std::span<const std::string> gen,
                            std::span<const std::string> ref) {
  if (gen.empty() || ref.empty())
    empty_set("scaffold similarity");
  std::map<std::string_view, std::pair<double, double>> freq;
  for (const auto &k: gen)
    freq[k].first += 1;
  for (const auto &k: ref)
    freq[k].second += 1;
  double dot = 0, na = 0, nb = 0;
  for (const auto &[k, f]: freq) {
    dot += f.first * f.second;
    na += f.first * f.first;
    nb += f.second * f.second;
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double scaf_similarity(std::span<const MolGraph> gen,
                       std::span<const MolGraph> ref) {
  auto keys = [](std::span<const MolGraph> mols) {
    std::vector<std::string> out;
    out.reserve(mols.size());
    for (const auto &m: mols)
      out.push_back(murcko_scaffold(m).key());
    return out;
  };
  const auto g = keys(gen), r = keys(ref);
  return scaf_similarity_keys(g, r);
}

/* set metrics */

double validity(std::span<const SampleStatus> statuses) {
  if (statuses.empty())
    empty_set("validity");
  const auto ok = std::count(statuses.begin(), statuses.end(),
                             SampleStatus::kOk);
  return static_cast<double>(ok) / static_cast<double>(statuses.size());
}

double uniqueness(std::span<const MolGraph> mols) {
  if (mols.empty())
    empty_set("uniqueness");
  std::unordered_set<std::string> keys;
  for (const auto &m: mols)
    keys.insert(canonical_key(m));
  return static_cast<double>(keys.size()) / static_cast<double>(mols.size());
}

double novelty(std::span<const MolGraph> mols,
               const std::unordered_set<std::string> &train_keys) {
  if (mols.empty())
    empty_set("novelty");
  std::size_t fresh = 0;
  for (const auto &m: mols)
    fresh += train_keys.count(canonical_key(m)) == 0;
  return static_cast<double>(fresh) / static_cast<double>(mols.size());
}

MetricsReport evaluate_report(std::span<const Decoded> attempts,
                              const std::unordered_set<std::string> &train_keys,
                              std::span<const MolGraph> ref) {
  if (attempts.empty())
    empty_set("report");
  if (ref.empty())
    empty_set("reference set");

  MetricsReport report;
  report.samples = static_cast<std::int64_t>(attempts.size());
  std::vector<SampleStatus> statuses;
  std::vector<MolGraph> valid;
  for (const Decoded &d: attempts) {
    statuses.push_back(d.status);
    for (size_t s = 0; s < kAllStatuses.size(); ++s)
      if (kAllStatuses[s] == d.status)
        ++report.status_counts[s];
    if (d.status == SampleStatus::kOk)
      valid.push_back(*d.graph);
  }
  report.valid = static_cast<std::int64_t>(valid.size());
  report.validity = validity(statuses);
  if (valid.empty())
    return report;

  report.uniqueness = uniqueness(valid);
  report.novelty = novelty(valid, train_keys);
  report.scaf_similarity = scaf_similarity(valid, ref);

  std::vector<Fingerprint> ref_fps;
  ref_fps.reserve(ref.size());
  for (const auto &m: ref)
    ref_fps.push_back(morgan_fingerprint(m));
  double sum = 0;
  for (const auto &m: valid) {
    const Fingerprint fp = morgan_fingerprint(m);
    double best = 0;
    for (const auto &r: ref_fps)
      best = std::max(best, tanimoto(fp, r));
    sum += best;
  }
  report.mean_nearest_tanimoto = sum / static_cast<double>(valid.size());
  return report;
}

/* report IO */

std::string format_fraction(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

namespace {

std::string optional_fraction(const std::optional<double> &v) {
  return v ? format_fraction(*v) : "null";
}

}  // namespace

std::string report_to_json(const MetricsReport &r) {
  std::string out = "{";
  out += "\"validity\":" + format_fraction(r.validity);
  out += ",\"uniqueness\":" + optional_fraction(r.uniqueness);
  out += ",\"novelty\":" + optional_fraction(r.novelty);
  out += ",\"scaf_similarity\":" + optional_fraction(r.scaf_similarity);
  out += ",\"mean_nearest_tanimoto\":"
         + optional_fraction(r.mean_nearest_tanimoto);
  out += ",\"fcd\":null,\"nspdk\":null";
  out += ",\"samples\":" + std::to_string(r.samples);
  out += ",\"valid\":" + std::to_string(r.valid);
  out += ",\"status_counts\":{";
  for (size_t s = 0; s < kAllStatuses.size(); ++s) {
    if (s > 0)
      out += ',';
    out += '"';
    out += sample_status_name(kAllStatuses[s]);
    out += "\":" + std::to_string(r.status_counts[s]);
  }
  out += "}}";
  return out;
}

MetricsReport report_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error &e) {
    throw MetricsError(MetricsErrorKind::kReportFormat, e.what());
  }

  auto bad = [](const std::string &what) {
    return MetricsError(MetricsErrorKind::kReportFormat,
                        "report field " + what + " is missing or mistyped");
  };
  auto number = [&](const char *key) {
    if (!j.contains(key) || !j[key].is_number())
      throw bad(key);
    return j[key].get<double>();
  };
  auto optional = [&](const char *key) -> std::optional<double> {
    if (!j.contains(key))
      throw bad(key);
    if (j[key].is_null())
      return std::nullopt;
    return number(key);
  };
  auto count = [&](const nlohmann::json &obj, const std::string &key) {
    if (!obj.contains(key) || !obj[key].is_number_integer())
      throw bad(key);
    return obj[key].get<std::int64_t>();
  };

  if (!j.is_object())
    throw bad("root");
  MetricsReport r;
  r.validity = number("validity");
  r.uniqueness = optional("uniqueness");
  r.novelty = optional("novelty");
  r.scaf_similarity = optional("scaf_similarity");
  r.mean_nearest_tanimoto = optional("mean_nearest_tanimoto");
  r.samples = count(j, "samples");
  r.valid = count(j, "valid");
  if (!j.contains("status_counts") || !j["status_counts"].is_object())
    throw bad("status_counts");
  for (size_t s = 0; s < kAllStatuses.size(); ++s)
    r.status_counts[s] = count(
        j["status_counts"], std::string(sample_status_name(kAllStatuses[s])));
  return r;
}

}  // namespace g2t
