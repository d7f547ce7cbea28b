"""Generate the synthetic stand-in signature catalogs shipped under crates/core/fixtures.

The profiles are hand-shaped to mimic the sparsity pattern of well-known
catalog signatures (they are NOT copies of any published catalog). Output is
deterministic for a fixed numpy seed.
"""
import sys
from pathlib import Path

import numpy as np

SUBS = ["C>A", "C>G", "C>T", "T>A", "T>C", "T>G"]
BASES = "ACGT"


def sbs_labels():
    return [f"{f}[{s}]{t}" for s in SUBS for f in BASES for t in BASES]


def indel_labels():
    out = []
    for kind in ("Del", "Ins"):
        for base in ("C", "T"):
            for n in range(6):
                out.append(f"1:{kind}:{base}:{n}")
    for kind in ("Del", "Ins"):
        for size in ("2", "3", "4", "5"):
            for n in range(6):
                out.append(f"{size}:{kind}:R:{n}")
    for size, reps in (("2", 1), ("3", 2), ("4", 3), ("5", 5)):
        for n in range(1, reps + 1):
            out.append(f"{size}:Del:M:{n}")
    assert len(out) == 83
    return out


def normalize(v):
    v = np.asarray(v, dtype=float)
    return v / v.sum()


def background(rng, n, scale, shape=2.0):
    return rng.gamma(shape, 1.0 / shape, size=n) * scale * 2.0


def sbs_catalog(rng):
    labels = sbs_labels()
    idx = {l: i for i, l in enumerate(labels)}
    n = len(labels)
    sigs = {}

    s = background(rng, n, 0.0025)
    for l, w in (("A[C>T]G", 0.18), ("C[C>T]G", 0.11), ("G[C>T]G", 0.15), ("T[C>T]G", 0.12)):
        s[idx[l]] += w
    sigs["synSBS1"] = normalize(s)

    s = background(rng, n, 0.0004)
    for l, w in (("T[C>T]A", 0.56), ("T[C>T]T", 0.30), ("T[C>T]C", 0.05), ("T[C>T]G", 0.03),
                 ("T[C>G]A", 0.02), ("T[C>G]T", 0.015)):
        s[idx[l]] += w
    sigs["synSBS2"] = normalize(s)

    # flat profiles: lognormal jitter around uniform
    s = np.exp(rng.normal(0.0, 0.55, size=n))
    sigs["synSBS3"] = normalize(s)

    s = np.exp(rng.normal(0.0, 0.5, size=n))
    for l in ("A[T>C]A", "A[T>C]G", "A[T>C]T", "A[T>C]C"):
        s[idx[l]] *= 3.0
    # correlated with synSBS3 by sharing part of its profile
    s = 0.62 * normalize(s) + 0.38 * sigs["synSBS3"]
    sigs["synSBS5"] = normalize(s)

    s = background(rng, n, 0.002)
    for l, w in (("T[C>G]A", 0.38), ("T[C>G]T", 0.27), ("T[C>G]C", 0.05), ("T[C>A]A", 0.06),
                 ("T[C>T]A", 0.04), ("T[C>G]G", 0.03)):
        s[idx[l]] += w
    sigs["synSBS13"] = normalize(s)

    s = background(rng, n, 0.002)
    for f in BASES:
        for t in BASES:
            s[idx[f"{f}[C>A]{t}"]] += 0.035 if t == "A" or f == "T" else 0.015
    sigs["synSBS18"] = normalize(s)

    s = background(rng, n, 0.002)
    for l, w in (("C[T>G]T", 0.30), ("A[T>G]T", 0.12), ("G[T>G]T", 0.16), ("T[T>G]T", 0.08),
                 ("C[T>C]T", 0.05)):
        s[idx[l]] += w
    sigs["synSBS17b"] = normalize(s)

    s = background(rng, n, 0.003)
    for f in BASES:
        for t in BASES:
            if f in "CT":
                s[idx[f"{f}[C>T]{t}"]] += 0.045 if f == "C" else 0.03
    sigs["synSBS7a"] = normalize(s)

    return labels, sigs


def indel_catalog(rng):
    labels = indel_labels()
    idx = {l: i for i, l in enumerate(labels)}
    n = len(labels)
    sigs = {}

    s = background(rng, n, 0.0002, shape=0.1)
    for n_rep, w in ((3, 0.03), (4, 0.07), (5, 0.55)):
        s[idx[f"1:Ins:T:{n_rep}"]] += w
    s[idx["1:Del:T:5"]] += 0.12
    sigs["synID1"] = normalize(s)

    s = background(rng, n, 0.0002, shape=0.1)
    for n_rep, w in ((3, 0.04), (4, 0.10), (5, 0.60)):
        s[idx[f"1:Del:T:{n_rep}"]] += w
    s[idx["1:Ins:T:5"]] += 0.06
    sigs["synID2"] = normalize(s)

    s = background(rng, n, 0.0004, shape=0.1)
    for l, w in (("5:Del:R:0", 0.14), ("5:Del:M:1", 0.10), ("5:Del:M:2", 0.08), ("4:Del:R:0", 0.05),
                 ("3:Del:R:0", 0.05), ("2:Del:R:0", 0.05), ("5:Del:M:3", 0.04), ("1:Del:C:0", 0.06)):
        s[idx[l]] += w
    sigs["synID8"] = normalize(s)

    s = background(rng, n, 0.0003, shape=0.1)
    for l, w in (("1:Del:T:1", 0.16), ("1:Del:T:2", 0.12), ("1:Del:C:0", 0.10), ("1:Del:C:1", 0.08),
                 ("1:Del:T:0", 0.08), ("1:Del:T:3", 0.05)):
        s[idx[l]] += w
    sigs["synID9"] = normalize(s)

    return labels, sigs


def write(path, labels, sigs):
    names = list(sigs)
    with open(path, "w") as fh:
        fh.write("channel," + ",".join(names) + "\n")
        for i, l in enumerate(labels):
            fh.write(l + "," + ",".join(f"{sigs[nm][i]:.16e}" for nm in names) + "\n")


def main(outdir):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240601)
    labels, sigs = sbs_catalog(rng)
    write(outdir / "sbs_catalog.csv", labels, sigs)
    labels, sigs = indel_catalog(rng)
    write(outdir / "indel_catalog.csv", labels, sigs)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/fixtures")
