#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Build a QM9-like supplement corpus (data/qm9_like.smi).

Only ~1,000 real QM9 lines ship with the repository (data/qm9_micro.smi).
This script tops the small-molecule corpus up with connected substructures
of 3-9 heavy atoms (C, N, O, F only, neutral) cut out of MOSES/ZINC
molecules. Hydrogens are re-added implicitly by RDKit sanitization.

Requires RDKit and the MOSES training split (molsets wheel). Offline use
only; the C++ build never runs this.
"""
import argparse
import gzip
import random
import zipfile

from rdkit import Chem, RDLogger

RDLogger.DisableLog("rdApp.*")
ALLOWED = {6, 7, 8, 9}


def random_fragment(mol, rng, size):
    start = rng.randrange(mol.GetNumAtoms())
    chosen = [start]
    frontier = set(n.GetIdx() for n in mol.GetAtomWithIdx(start).GetNeighbors())
    while len(chosen) < size and frontier:
        nxt = rng.choice(sorted(frontier))
        chosen.append(nxt)
        frontier.discard(nxt)
        for n in mol.GetAtomWithIdx(nxt).GetNeighbors():
            if n.GetIdx() not in chosen:
                frontier.add(n.GetIdx())
    return chosen


def extract(mol, atoms):
    keep = set(atoms)
    rw = Chem.RWMol()
    remap = {}
    for idx in atoms:
        a = mol.GetAtomWithIdx(idx)
        if a.GetAtomicNum() not in ALLOWED or a.GetFormalCharge() != 0:
            return None
        na = Chem.Atom(a.GetAtomicNum())
        remap[idx] = rw.AddAtom(na)
    for b in mol.GetBonds():
        i, j = b.GetBeginAtomIdx(), b.GetEndAtomIdx()
        if i in keep and j in keep:
            rw.AddBond(remap[i], remap[j], b.GetBondType())
    frag = rw.GetMol()
    try:
        Chem.SanitizeMol(frag)
    except Exception:
        return None
    return Chem.MolToSmiles(frag, isomericSmiles=False)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--molsets-wheel", required=True)
    ap.add_argument("--exclude", default="data/qm9_micro.smi")
    ap.add_argument("--out", default="data/qm9_like.smi")
    ap.add_argument("--count", type=int, default=6000)
    ap.add_argument("--seed", type=int, default=9)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    wheel = zipfile.ZipFile(args.molsets_wheel)
    rows = gzip.decompress(wheel.read("moses/dataset/data/test.csv.gz")).decode().splitlines()[1:]
    smiles = [r.split(",")[0] for r in rows]
    rng.shuffle(smiles)

    seen = set()
    with open(args.exclude) as f:
        for line in f:
            m = Chem.MolFromSmiles(line.split()[0])
            if m is not None:
                seen.add(Chem.MolToSmiles(m, isomericSmiles=False))

    out = []
    for smi in smiles:
        if len(out) >= args.count:
            break
        mol = Chem.MolFromSmiles(smi)
        if mol is None:
            continue
        Chem.Kekulize(mol, clearAromaticFlags=True)
        for _ in range(3):
            frag = extract(mol, random_fragment(mol, rng, rng.randint(3, 9)))
            if frag is None or "." in frag or frag in seen:
                continue
            seen.add(frag)
            out.append(frag)
    with open(args.out, "w") as f:
        for i, s in enumerate(out[: args.count]):
            f.write(f"{s}\tqm9like_{i}\n")


if __name__ == "__main__":
    main()
