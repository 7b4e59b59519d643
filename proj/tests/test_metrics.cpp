//
// Project g2t - Copyright 2026 The g2t Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <map>
#include <queue>
#include <set>

#include <gtest/gtest.h>

#include "g2t/metrics.h"
#include "test_support.h"

namespace g2t {
namespace {

using testing::load_corpus;
using testing::mol;
using testing::random_permutation;

Fingerprint bits(std::initializer_list<int> on, int n = 2048) {
  Fingerprint fp(n);
  for (int b: on)
    fp.set(b);
  return fp;
}

/* independent Morgan oracle */

std::uint64_t oracle_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t oracle_hash(std::uint64_t seed,
                          const std::vector<std::uint64_t> &values) {
  std::uint64_t h = oracle_mix(seed);
  for (auto v: values)
    h = oracle_mix(h ^ v);
  return h;
}

// Ring membership by bond deletion: a bond is in a ring iff its endpoints
// stay connected without it.
std::vector<char> oracle_rings(const MolGraph &g) {
  std::vector<char> ring(g.num_atoms(), 0);
  for (int b = 0; b < g.num_bonds(); ++b) {
    const Bond &bond = g.bond(b);
    std::vector<char> seen(g.num_atoms(), 0);
    std::queue<int> q;
    q.push(bond.begin);
    seen[bond.begin] = 1;
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      for (const auto &nb: g.neighbors(a))
        if (nb.bond != b && !seen[nb.atom]) {
          seen[nb.atom] = 1;
          q.push(nb.atom);
        }
    }
    if (seen[bond.end])
      ring[bond.begin] = ring[bond.end] = 1;
  }
  return ring;
}

// Environments enumerated from BFS distances: the radius-r environment of
// an atom is the set of bonds with an endpoint closer than r.
std::set<int> oracle_fingerprint(const MolGraph &g, int radius = 2) {
  const int n = g.num_atoms();
  const auto ring = oracle_rings(g);
  const auto &table = ValenceTable::standard();
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, 1 << 20));
  for (int s = 0; s < n; ++s) {
    std::queue<int> q;
    q.push(s);
    dist[s][s] = 0;
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      for (const auto &nb: g.neighbors(a))
        if (dist[s][nb.atom] > dist[s][a] + 1) {
          dist[s][nb.atom] = dist[s][a] + 1;
          q.push(nb.atom);
        }
    }
  }

  std::set<int> out;
  std::vector<std::uint64_t> ids(n);
  for (int a = 0; a < n; ++a) {
    const Atom &atom = g.atom(a);
    ids[a] = oracle_hash(
        0, { static_cast<std::uint64_t>(atomic_number(atom.element)),
             static_cast<std::uint64_t>(g.degree(a)),
             static_cast<std::uint64_t>(table.implicit_hydrogens(
                 atom.element, atom.charge, g.bond_order_sum(a))),
             static_cast<std::uint64_t>(atom.charge + 8),
             static_cast<std::uint64_t>(ring[a]) });
    out.insert(static_cast<int>(ids[a] % 2048));
  }
  std::set<std::set<int>> seen { {} };
  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(n);
    std::map<std::set<int>, std::uint64_t> best;
    for (int a = 0; a < n; ++a) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
      for (const auto &nb: g.neighbors(a))
        pairs.emplace_back(bond_valence(nb.order), ids[nb.atom]);
      std::sort(pairs.begin(), pairs.end());
      std::vector<std::uint64_t> vals { ids[a] };
      for (auto [o, id]: pairs) {
        vals.push_back(o);
        vals.push_back(id);
      }
      next[a] = oracle_hash(r, vals);

      std::set<int> env;
      for (int b = 0; b < g.num_bonds(); ++b)
        if (std::min(dist[a][g.bond(b).begin], dist[a][g.bond(b).end]) < r)
          env.insert(b);
      if (seen.count(env))
        continue;
      auto it = best.find(env);
      if (it == best.end() || next[a] < it->second)
        best[env] = next[a];
    }
    for (const auto &[env, id]: best) {
      out.insert(static_cast<int>(id % 2048));
      seen.insert(env);
    }
    ids = next;
  }
  return out;
}

std::set<int> on_set(const Fingerprint &fp) {
  const auto v = fp.on_bits();
  return { v.begin(), v.end() };
}

TEST(Fingerprint, Basics) {
  Fingerprint fp(100);
  EXPECT_EQ(fp.size(), 100);
  EXPECT_EQ(fp.count(), 0);
  fp.set(0);
  fp.set(64);
  fp.set(99);
  EXPECT_TRUE(fp.test(64));
  EXPECT_FALSE(fp.test(65));
  EXPECT_EQ(fp.on_bits(), std::vector<int>({ 0, 64, 99 }));
}

TEST(Morgan, HashSequenceIsOrderSensitive) {
  const std::vector<std::uint64_t> a { 1, 2 }, b { 2, 1 };
  EXPECT_NE(hash_sequence(0, a), hash_sequence(0, b));
  EXPECT_NE(hash_sequence(0, a), hash_sequence(1, a));
  EXPECT_EQ(hash_sequence(3, a), oracle_hash(3, { 1, 2 }));
}

TEST(Morgan, MethaneHasOneBit) {
  EXPECT_EQ(morgan_fingerprint(mol("C")).count(), 1);
}

TEST(Morgan, EthaneAndEthanolDiffer) {
  EXPECT_NE(morgan_fingerprint(mol("CC")), morgan_fingerprint(mol("CCO")));
  EXPECT_NE(oracle_fingerprint(mol("CC")), oracle_fingerprint(mol("CCO")));
}

// Golden bits from tests/tools/morgan_golden.py, a separate implementation
// of the same hash; pins the values across platforms.
TEST(Morgan, GoldenBits) {
  const std::map<std::string, std::vector<int>> golden {
    { "C", { 271 } },
    { "CCO", { 873, 977, 1080, 1342, 1578, 1651 } },
    { "C1=CC=CC=C1", { 248, 787, 1912 } },
    { "CC(=O)[O-]", { 77, 128, 850, 1259, 1268, 1471, 1578, 1670 } },
    { "C1CC1C#N",
      { 66, 119, 250, 284, 541, 1239, 1314, 1592, 1662, 1724, 1971 } },
  };
  for (const auto &[smiles, expect]: golden)
    EXPECT_EQ(morgan_fingerprint(mol(smiles)).on_bits(), expect) << smiles;
}

TEST(Morgan, MatchesEnvironmentOracleOnCorpus) {
  for (const auto &name: { "qm9_micro.smi", "zinc_micro.smi" })
    for (const auto &e: load_corpus(name, 300))
      ASSERT_EQ(on_set(morgan_fingerprint(e.graph)),
                oracle_fingerprint(e.graph))
          << e.id;
}

TEST(Morgan, RelabelingInvariant) {
  Rng rng(31);
  for (const auto &e: load_corpus("zinc_micro.smi", 200)) {
    const Fingerprint fp = morgan_fingerprint(e.graph);
    const auto perm = random_permutation(e.graph.num_atoms(), rng);
    ASSERT_EQ(morgan_fingerprint(e.graph.permuted(perm)), fp) << e.id;
  }
}

TEST(RingAtoms, MatchesBondDeletionOracle) {
  for (const auto &e: load_corpus("zinc_micro.smi", 300))
    ASSERT_EQ(ring_atoms(e.graph), oracle_rings(e.graph)) << e.id;
}

TEST(Tanimoto, Fixtures) {
  EXPECT_NEAR(tanimoto(bits({ 1, 2 }), bits({ 2, 3 })), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(tanimoto(bits({ 5, 9 }), bits({ 5, 9 })), 1.0);
  EXPECT_EQ(tanimoto(bits({ 1 }), bits({ 2 })), 0.0);
  EXPECT_EQ(tanimoto(bits({}), bits({})), 1.0);
  try {
    tanimoto(bits({}, 64), bits({}, 128));
    FAIL();
  } catch (const MetricsError &e) {
    EXPECT_EQ(e.kind(), MetricsErrorKind::kLengthMismatch);
  }
}

TEST(Tanimoto, BoundedAndSymmetric) {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    Fingerprint a, b;
    const int na = 1 + static_cast<int>(rng.below(80));
    const int nb = 1 + static_cast<int>(rng.below(80));
    for (int k = 0; k < na; ++k)
      a.set(static_cast<int>(rng.below(2048)));
    for (int k = 0; k < nb; ++k)
      b.set(static_cast<int>(rng.below(2048)));
    const double t = tanimoto(a, b);
    ASSERT_GE(t, 0.0);
    ASSERT_LE(t, 1.0);
    ASSERT_EQ(t, tanimoto(b, a));
    ASSERT_EQ(tanimoto(a, a), 1.0);
  }
}

/* scaffolds */

// Deletes degree-1 atoms one at a time, rescanning from scratch each round.
std::string oracle_scaffold_key(const MolGraph &g) {
  std::vector<char> alive(g.num_atoms(), 1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int a = 0; a < g.num_atoms(); ++a) {
      if (!alive[a])
        continue;
      int deg = 0;
      for (const auto &nb: g.neighbors(a))
        deg += alive[nb.atom];
      if (deg <= 1) {
        alive[a] = 0;
        changed = true;
      }
    }
  }
  std::vector<int> remap(g.num_atoms(), -1);
  std::vector<Atom> atoms;
  for (int a = 0; a < g.num_atoms(); ++a)
    if (alive[a]) {
      remap[a] = static_cast<int>(atoms.size());
      atoms.push_back(g.atom(a));
    }
  if (atoms.empty())
    return std::string(kAcyclicScaffold);
  std::vector<Bond> bonds;
  for (const auto &b: g.bonds())
    if (alive[b.begin] && alive[b.end])
      bonds.push_back({ remap[b.begin], remap[b.end], b.order });
  return canonical_key(MolGraph(atoms, bonds));
}

TEST(Scaffold, Fixtures) {
  EXPECT_TRUE(murcko_scaffold(mol("CCC")).acyclic());
  EXPECT_EQ(murcko_scaffold(mol("CCC")).key(), "ACYCLIC");
  EXPECT_EQ(murcko_scaffold(mol("C1=CC1")).key(), canonical_key(mol("C1=CC1")));
  EXPECT_EQ(murcko_scaffold(mol("Cc1ccccc1")).key(),
            canonical_key(mol("c1ccccc1")));
  // The linker between two rings stays.
  EXPECT_EQ(murcko_scaffold(mol("OC(c1ccccc1)CCC1CC1")).key(),
            canonical_key(mol("c1ccccc1CCCC1CC1")));
  EXPECT_EQ(murcko_scaffold(mol("O=C1CCCC1")).key(),
            canonical_key(mol("C1CCCC1")));
}

TEST(Scaffold, MatchesDeletionOracleAndIsIdempotent) {
  for (const auto &name: { "qm9_micro.smi", "zinc_micro.smi" })
    for (const auto &e: load_corpus(name, 1000)) {
      const Scaffold s = murcko_scaffold(e.graph);
      ASSERT_EQ(s.key(), oracle_scaffold_key(e.graph)) << e.id;
      ASSERT_EQ(murcko_scaffold(s).key(), s.key()) << e.id;
    }
}

TEST(ScafSimilarity, Fixtures) {
  const std::vector<std::string> s1s1 { "S1", "S1" }, s1s2 { "S1", "S2" },
      s3 { "S3" };
  EXPECT_NEAR(scaf_similarity_keys(s1s1, s1s2), 2.0 / (2.0 * std::sqrt(2.0)),
              1e-12);
  EXPECT_NEAR(scaf_similarity_keys(s1s1, s1s2), 0.7071067811865476, 1e-12);
  EXPECT_NEAR(scaf_similarity_keys(s1s2, s1s2), 1.0, 1e-12);
  EXPECT_EQ(scaf_similarity_keys(s1s2, s3), 0.0);
  EXPECT_THROW(scaf_similarity_keys({}, s3), MetricsError);

  std::vector<MolGraph> mols;
  for (const auto &e: load_corpus("zinc_micro.smi", 200))
    mols.push_back(e.graph);
  EXPECT_NEAR(scaf_similarity(mols, mols), 1.0, 1e-12);
  std::vector<MolGraph> reversed(mols.rbegin(), mols.rend());
  EXPECT_NEAR(scaf_similarity(reversed, mols), 1.0, 1e-12);
}

/* set metrics */

TEST(SetMetrics, Fixtures) {
  using S = SampleStatus;
  const std::vector<S> half { S::kOk, S::kParseFail, S::kOk, S::kTruncated };
  EXPECT_EQ(validity(half), 0.5);
  EXPECT_EQ(validity(std::vector<S>(3, S::kOk)), 1.0);
  EXPECT_THROW(validity({}), MetricsError);

  const std::vector<MolGraph> aab { mol("CCO"), mol("OCC"), mol("CC") };
  EXPECT_NEAR(uniqueness(aab), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(uniqueness(std::vector<MolGraph>(4, mol("C"))), 0.25, 1e-15);

  const std::unordered_set<std::string> train { canonical_key(mol("CCO")),
                                                canonical_key(mol("CC")) };
  EXPECT_EQ(novelty(aab, train), 0.0);
  EXPECT_EQ(novelty(std::vector<MolGraph> { mol("CCN") }, train), 1.0);
  EXPECT_THROW(novelty({}, train), MetricsError);
  EXPECT_THROW(uniqueness({}), MetricsError);
}

TEST(SetMetrics, UniquenessMatchesBruteForceDedup) {
  auto entries = load_corpus("qm9_micro.smi", 40);
  std::vector<MolGraph> mols;
  for (const auto &e: entries)
    mols.push_back(e.graph);
  Rng rng(2);
  for (int k = 0; k < 10; ++k) {
    const MolGraph &src = mols[rng.below(40)];
    mols.push_back(src.permuted(random_permutation(src.num_atoms(), rng)));
  }
  const double by_brute =
      static_cast<double>(testing::brute_distinct(mols)) / mols.size();
  EXPECT_EQ(uniqueness(mols), by_brute);
}

Decoded ok_of(const MolGraph &g) { return { SampleStatus::kOk, g, "" }; }

TEST(Report, AllInvalid) {
  const std::vector<Decoded> attempts { { SampleStatus::kParseFail, {}, "x" },
                                        { SampleStatus::kTruncated, {}, "" } };
  const std::vector<MolGraph> ref { mol("CC") };
  const MetricsReport r = evaluate_report(attempts, {}, ref);
  EXPECT_EQ(r.validity, 0.0);
  EXPECT_EQ(r.valid, 0);
  EXPECT_FALSE(r.uniqueness.has_value());
  EXPECT_FALSE(r.novelty.has_value());
  EXPECT_FALSE(r.scaf_similarity.has_value());
  EXPECT_FALSE(r.mean_nearest_tanimoto.has_value());
  EXPECT_EQ(report_to_json(r),
            R"({"validity":0.0000,"uniqueness":null,"novelty":null,)"
            R"("scaf_similarity":null,"mean_nearest_tanimoto":null,)"
            R"("fcd":null,"nspdk":null,"samples":2,"valid":0,)"
            R"("status_counts":{"ok":0,"parse_fail":1,"decode_fail":0,)"
            R"("valence_fail":0,"truncated":1}})");
}

TEST(Report, GenEqualsRef) {
  std::vector<MolGraph> ref;
  std::vector<Decoded> attempts;
  for (const auto &e: load_corpus("zinc_micro.smi", 50)) {
    ref.push_back(e.graph);
    attempts.push_back(ok_of(e.graph));
  }
  const std::unordered_set<std::string> train { canonical_key(ref[0]) };
  const MetricsReport r = evaluate_report(attempts, train, ref);
  EXPECT_EQ(r.validity, 1.0);
  EXPECT_NEAR(*r.scaf_similarity, 1.0, 1e-12);
  EXPECT_NEAR(*r.mean_nearest_tanimoto, 1.0, 1e-12);
  EXPECT_NEAR(*r.novelty, 49.0 / 50.0, 1e-12);
  EXPECT_EQ(*r.uniqueness, uniqueness(ref));
}

TEST(Report, SerializationRoundtripsByteExactly) {
  std::vector<Decoded> attempts { ok_of(mol("CCO")), ok_of(mol("c1ccccc1")),
                                  { SampleStatus::kValenceFail, {}, "" } };
  const std::vector<MolGraph> ref { mol("CCN"), mol("Cc1ccccc1") };
  const MetricsReport r = evaluate_report(attempts, {}, ref);
  const std::string text = report_to_json(r);
  const MetricsReport back = report_from_json(text);
  EXPECT_EQ(report_to_json(back), text);
  EXPECT_EQ(back.samples, 3);
  EXPECT_EQ(back.status_counts[3], 1);
  EXPECT_THROW(report_from_json("{}"), MetricsError);
  EXPECT_EQ(format_fraction(2.0 / 3.0), "0.6667");
}

}  // namespace
}  // namespace g2t
