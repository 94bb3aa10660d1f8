#!/usr/bin/env python3
"""Reference implementation of Wildman-Crippen atom-contribution logP and
molar refractivity for the SMILES subset this project supports.

This is a from-scratch, bond-order-aware implementation of the published
parameterization (atom classes C1..C27/CS, N1..NS, O1..OS, H1..H4/HS,
halogens, P, S1..S3, Me1). It is deliberately independent of the Rust
code: its own parser, its own hydrogen model, its own typing rules. It has
two jobs:

  golden <in.smi> <out.tsv>   compute logP/MR per molecule (the regression
                              fixture the Rust implementation is tested
                              against)
  table <out.tsv>             emit the ordered local-environment predicate
                              table the Rust crate ships (radius-1 rules
                              with hydrogen terms folded in)

The radius-1 table cannot see bond orders or second-shell atoms, so a few
published distinctions collapse (O9/O10/O11 carbonyl contexts, allene
centers vs internal alkynes, acid vs alcohol hydroxyl hydrogens). The
synthetic corpus generator avoids every such pattern, and the golden test
holds the two routes to agreement within tight tolerances on corpus
molecules.
"""

import math
import sys

# (logp, mr) per published atom class.
PARAMS = {
    "C1": (0.1441, 2.503),
    "C2": (0.0000, 2.433),
    "C3": (-0.2035, 2.753),
    "C4": (-0.2051, 2.731),
    "C5": (-0.2783, 5.007),
    "C6": (0.1551, 3.513),
    "C7": (0.0017, 3.888),
    "C8": (0.08452, 2.464),
    "C9": (-0.1444, 2.412),
    "C10": (-0.0516, 2.488),
    "C11": (0.1193, 2.582),
    "C12": (-0.0967, 2.576),
    "C13": (-0.5443, 4.041),
    "C14": (0.0000, 3.257),
    "C15": (0.2450, 3.564),
    "C16": (0.1980, 3.180),
    "C17": (0.0000, 3.104),
    "C18": (0.1581, 3.350),
    "C19": (0.2955, 4.346),
    "C20": (0.2713, 3.904),
    "C21": (0.1360, 3.509),
    "C22": (0.4619, 4.067),
    "C23": (0.5437, 3.853),
    "C24": (0.1893, 2.673),
    "C25": (-0.8186, 3.135),
    "C26": (0.2640, 4.305),
    "C27": (0.2148, 2.693),
    "CS": (0.08129, 3.243),
    "H1": (0.1230, 1.057),
    "H2": (-0.2677, 1.395),
    "H3": (0.2142, 0.9627),
    "H4": (0.2980, 1.805),
    "HS": (0.1125, 1.112),
    "N1": (-1.0190, 2.262),
    "N2": (-0.7096, 2.173),
    "N3": (-1.0270, 2.827),
    "N4": (-0.5188, 3.000),
    "N5": (0.08387, 1.757),
    "N6": (0.1836, 2.428),
    "N7": (-0.3187, 1.839),
    "N8": (-0.4458, 2.819),
    "N9": (0.01508, 1.725),
    "N11": (-0.3239, 2.202),
    "NS": (-0.4806, 2.134),
    "O1": (0.1552, 1.080),
    "O2": (-0.2893, 0.8238),
    "O3": (-0.0684, 1.085),
    "O4": (-0.4195, 1.182),
    "O5": (0.0335, 3.367),
    "O6": (-0.3339, 0.7774),
    "O8": (0.1788, 3.135),
    "O9": (-0.1526, 0.000),
    "O10": (0.1129, 0.2215),
    "O11": (0.4833, 0.3890),
    "OS": (-0.1188, 0.6865),
    "F": (0.4202, 1.108),
    "Cl": (0.6895, 5.853),
    "Br": (0.8456, 8.927),
    "I": (0.8857, 14.02),
    "P": (0.8612, 6.920),
    "S1": (0.6482, 7.591),
    "S3": (0.6237, 6.691),
    "Me1": (-0.3808, 5.754),
}

MAX_VALENCE = {"B": 3, "C": 4, "N": 3, "O": 2, "F": 1, "Si": 4, "P": 5,
               "S": 6, "Cl": 1, "Br": 1, "Sn": 4, "I": 1}
FILL = {"B": [3], "C": [4], "N": [3], "O": [2], "F": [1], "Si": [4],
        "P": [3, 5], "S": [2, 4, 6], "Cl": [1], "Br": [1], "Sn": [4], "I": [1]}
TWO_LETTER = {"Si", "Cl", "Br", "Sn"}
AROMATIC = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}
STANDARD_HET = {"N", "O", "P", "S", "F", "Cl", "Br", "I"}


class Mol:
    def __init__(self):
        self.el = []        # element symbol
        self.arom = []      # aromatic flag
        self.bonds = []     # (i, j, order); order 1, 2, 3, or 1.5


def parse(s):
    """Minimal parser for the supported subset."""
    m = Mol()
    prev = None
    pending = None
    stack = []
    rings = {}
    i = 0
    n = len(s)

    def add_atom(sym, arom):
        m.el.append(sym)
        m.arom.append(arom)
        return len(m.el) - 1

    def bond(a, b, order):
        if order is None:
            order = 1.5 if (m.arom[a] and m.arom[b]) else 1
        m.bonds.append((a, b, order))

    while i < n:
        ch = s[i]
        if ch == "(":
            stack.append(prev)
            i += 1
        elif ch == ")":
            prev = stack.pop()
            i += 1
        elif ch == "=":
            pending = 2
            i += 1
        elif ch == "#":
            pending = 3
            i += 1
        elif ch == ":":
            pending = 1.5
            i += 1
        elif ch.isdigit() or ch == "%":
            if ch == "%":
                d = int(s[i + 1:i + 3])
                i += 3
            else:
                d = int(ch)
                i += 1
            if d in rings:
                a, ob = rings.pop(d)
                bond(a, prev, pending if pending is not None else ob)
            else:
                rings[d] = (prev, pending)
            pending = None
        else:
            if ch.isupper():
                sym = s[i:i + 2] if s[i:i + 2] in TWO_LETTER else ch
                i += len(sym)
                idx = add_atom(sym, False)
            elif ch in AROMATIC:
                idx = add_atom(AROMATIC[ch], True)
                i += 1
            else:
                raise ValueError(f"unexpected '{ch}' in {s}")
            if prev is not None:
                bond(prev, idx, pending)
                pending = None
            prev = idx
    assert not rings and not stack and pending is None, s
    return m


def neighbors(m):
    nb = [[] for _ in m.el]
    for a, b, o in m.bonds:
        nb[a].append((b, o))
        nb[b].append((a, o))
    return nb


def implicit_h(m, nb, i):
    total = 0.0
    for _, o in nb[i]:
        if o == 1.5:
            total += 1.0 if m.el[i] in ("S", "O") else 1.5
        else:
            total += o
    used = math.ceil(total - 1e-9)
    for fill in FILL[m.el[i]]:
        if fill >= used:
            return fill - used
    return 0


def atom_type(m, nb, h, i):
    """Published atom class, first matching rule wins."""
    el = m.el[i]
    arom = m.arom[i]
    hs = h[i]
    bonds = nb[i]
    deg = len(bonds)
    doubles = [v for v, o in bonds if o == 2]
    triples = [v for v, o in bonds if o == 3]
    het = [v for v, o in bonds if m.el[v] in STANDARD_HET and not m.arom[v]]
    aromnb = [v for v, o in bonds if m.arom[v]]
    odd = [v for v, o in bonds
           if not m.arom[v] and m.el[v] not in STANDARD_HET and m.el[v] != "C"]

    if el == "C":
        if arom:
            if hs >= 1:
                return "C18"
            subs = [v for v, o in bonds if o != 1.5]
            if not subs:
                return "C19"
            v = subs[0]
            if m.arom[v]:
                return "C20"
            sv = m.el[v]
            if sv == "F":
                return "C14"
            if sv == "Cl":
                return "C15"
            if sv == "Br":
                return "C16"
            if sv == "I":
                return "C17"
            if any(o == 2 for _, o in bonds):
                return "C25"
            return {"C": "C21", "N": "C22", "O": "C23", "S": "C24"}.get(sv, "C13")
        if triples:
            return "C7"
        if len(doubles) == 2:
            return "C5" if any(m.el[v] != "C" for v in doubles) else "C6"
        if len(doubles) == 1:
            v = doubles[0]
            if m.arom[v]:
                return "C26"
            if m.el[v] != "C":
                return "C5"
            return "C26" if aromnb else "C6"
        # sp3
        if het:
            return "C3" if hs >= 2 else "C4"
        if aromnb:
            if hs == 3:
                return "C8" if m.el[aromnb[0]] == "C" else "C9"
            return {2: "C10", 1: "C11"}.get(hs, "C12")
        if odd:
            return "C27"
        if all(m.el[v] == "C" for v, _ in bonds):
            return "C1" if hs >= 2 else "C2"
        return "CS"

    if el == "N":
        if arom:
            return "N11"
        if triples:
            return "N9"
        if doubles:
            return "N5" if hs == 1 else "N6"
        if hs == 2:
            return "N3" if aromnb else "N1"
        if hs == 1 and deg == 2:
            return "N4" if aromnb else "N2"
        if hs == 0 and deg == 3:
            return "N8" if aromnb else "N7"
        return "NS"

    if el == "O":
        if arom:
            return "O1"
        if hs >= 1:
            return "O2"
        if doubles:
            v = doubles[0]
            if m.arom[v]:
                return "O8"
            pe = m.el[v]
            if pe in ("N", "O"):
                return "O5"
            if pe == "S":
                return "O6"
            if pe == "C":
                others = [w for w, _ in nb[v] if w != i]
                if any(m.arom[w] for w in others):
                    return "O10"
                if implicit_h_of(m, nb, v) >= 1:
                    return "O9"
                carbons = [w for w in others if m.el[w] == "C"]
                return "O9" if carbons else "O11"
            return "OS"
        if deg == 2:
            return "O4" if aromnb else "O3"
        return "OS"

    if el in ("F", "Cl", "Br", "I"):
        return el
    if el == "P":
        return "P"
    if el == "S":
        return "S3" if arom else "S1"
    return "Me1"  # B, Si, Sn


def implicit_h_of(m, nb, v):
    return implicit_h(m, nb, v)


def h_type(m, nb, i):
    """Class of hydrogens attached to heavy atom i."""
    el = m.el[i]
    if el == "C":
        return "H1"
    if el == "N":
        return "H3"
    if el == "O":
        for v, o in nb[i]:
            if m.el[v] == "N":
                return "H3"
            if m.el[v] in ("O", "S"):
                return "H4"
            if m.el[v] == "C" and not m.arom[v]:
                # Acidic when the attached carbon is doubly bonded to a
                # heteroatom or another carbon (acid, enol).
                for w, o2 in nb[v]:
                    if o2 == 2 and m.el[w] in ("C", "N", "O", "S"):
                        return "H4"
        return "H2"
    return "H2"  # S-H, P-H, B-H


def crippen(smiles):
    m = parse(smiles)
    nb = neighbors(m)
    h = [implicit_h(m, nb, i) for i in range(len(m.el))]
    logp = 0.0
    mr = 0.0
    for i in range(len(m.el)):
        t = atom_type(m, nb, h, i)
        logp += PARAMS[t][0]
        mr += PARAMS[t][1]
        if h[i]:
            ht = h_type(m, nb, i)
            logp += h[i] * PARAMS[ht][0]
            mr += h[i] * PARAMS[ht][1]
    return logp, mr


# ---------------------------------------------------------------------------
# Radius-1 predicate table for the Rust side.
#
# Rows are (type id, predicate, logp, mr) with hydrogen contributions baked
# into each row (h is pinned by the predicate). Order matters: first match
# wins. Predicates use the conditions elem/arom/h/deg/has/only, where has
# and only take neighbor descriptors: element symbols (lowercase aromatic),
# ar (any aromatic), A (any aliphatic), X (aliphatic N O P S F Cl Br I),
# Q (aliphatic B Si Sn).
# ---------------------------------------------------------------------------

def fold(base, htype, n):
    lp = PARAMS[base][0] + n * PARAMS[htype][0]
    mr = PARAMS[base][1] + n * PARAMS[htype][1]
    return lp, mr


def table_rows():
    rows = []

    def row(tid, pred, base, htype, nh):
        lp, mr = fold(base, htype, nh)
        rows.append((tid, pred, lp, mr))

    # Aliphatic carbon. deg + h = 4 pins saturation; deg + h = 3 one double
    # bond; deg + h = 2 a triple or two doubles.
    row("C3", "elem=C;arom=0;h=3;deg=1;has=X", "C3", "H1", 3)
    row("C3", "elem=C;arom=0;h=2;deg=2;has=X", "C3", "H1", 2)
    row("C4", "elem=C;arom=0;h=1;deg=3;has=X", "C4", "H1", 1)
    row("C4", "elem=C;arom=0;h=0;deg=4;has=X", "C4", "H1", 0)
    row("C8", "elem=C;arom=0;h=3;deg=1;has=c", "C8", "H1", 3)
    row("C9", "elem=C;arom=0;h=3;deg=1;has=ar", "C9", "H1", 3)
    row("C10", "elem=C;arom=0;h=2;deg=2;has=ar", "C10", "H1", 2)
    row("C11", "elem=C;arom=0;h=1;deg=3;has=ar", "C11", "H1", 1)
    row("C12", "elem=C;arom=0;h=0;deg=4;has=ar", "C12", "H1", 0)
    row("C27", "elem=C;arom=0;h=3;deg=1;has=Q", "C27", "H1", 3)
    row("C27", "elem=C;arom=0;h=2;deg=2;has=Q", "C27", "H1", 2)
    row("C27", "elem=C;arom=0;h=1;deg=3;has=Q", "C27", "H1", 1)
    row("C27", "elem=C;arom=0;h=0;deg=4;has=Q", "C27", "H1", 0)
    row("C1", "elem=C;arom=0;h=4;deg=0", "C1", "H1", 4)
    row("C1", "elem=C;arom=0;h=3;deg=1;only=C", "C1", "H1", 3)
    row("C1", "elem=C;arom=0;h=2;deg=2;only=C", "C1", "H1", 2)
    row("C2", "elem=C;arom=0;h=1;deg=3;only=C", "C2", "H1", 1)
    row("C2", "elem=C;arom=0;h=0;deg=4;only=C", "C2", "H1", 0)
    # sp carbons. An internal (h=0, deg=2, carbons) position is typed as an
    # alkyne; allene centers would collide here and are not generated.
    # h=1 deg=1 forces a triple bond regardless of the partner.
    row("C7", "elem=C;arom=0;h=1;deg=1", "C7", "H1", 1)
    row("C7", "elem=C;arom=0;h=0;deg=2;only=C", "C7", "H1", 0)
    row("C7", "elem=C;arom=0;h=0;deg=2;has=N", "C7", "H1", 0)
    row("C5", "elem=C;arom=0;h=0;deg=2;has=O", "C5", "H1", 0)
    # sp2 with an aromatic substituent.
    row("C26", "elem=C;arom=0;h=1;deg=2;has=ar", "C26", "H1", 1)
    row("C26", "elem=C;arom=0;h=0;deg=3;has=ar", "C26", "H1", 0)
    # sp2 with a heteroatom anywhere adjacent: the generated chemistry only
    # makes carbonyls and imines here, where the double bond goes to the
    # heteroatom.
    row("C5", "elem=C;arom=0;h=2;deg=1;has=X", "C5", "H1", 2)
    row("C5", "elem=C;arom=0;h=1;deg=2;has=X", "C5", "H1", 1)
    row("C5", "elem=C;arom=0;h=0;deg=3;has=X", "C5", "H1", 0)
    # Remaining sp2: pure hydrocarbon alkenes.
    row("C6", "elem=C;arom=0;h=2;deg=1", "C6", "H1", 2)
    row("C6", "elem=C;arom=0;h=1;deg=2;only=C", "C6", "H1", 1)
    row("C6", "elem=C;arom=0;h=0;deg=3;only=C", "C6", "H1", 0)
    # Aromatic carbon.
    row("C18", "elem=C;arom=1;h=1", "C18", "H1", 1)
    row("C14", "elem=C;arom=1;h=0;has=F", "C14", "H1", 0)
    row("C15", "elem=C;arom=1;h=0;has=Cl", "C15", "H1", 0)
    row("C16", "elem=C;arom=1;h=0;has=Br", "C16", "H1", 0)
    row("C17", "elem=C;arom=1;h=0;has=I", "C17", "H1", 0)
    row("C19", "elem=C;arom=1;h=0;deg=3;only=ar", "C19", "H1", 0)
    row("C21", "elem=C;arom=1;h=0;has=C", "C21", "H1", 0)
    row("C22", "elem=C;arom=1;h=0;has=N", "C22", "H1", 0)
    row("C23", "elem=C;arom=1;h=0;has=O", "C23", "H1", 0)
    row("C24", "elem=C;arom=1;h=0;has=S", "C24", "H1", 0)
    row("C13", "elem=C;arom=1;h=0", "C13", "H1", 0)
    # Carbon fallback ladder.
    for nh in range(5):
        row("CS", f"elem=C;h={nh}", "CS", "H1", nh)

    # Nitrogen.
    row("N11", "elem=N;arom=1", "N11", "H3", 0)
    row("N9", "elem=N;arom=0;h=0;deg=1", "N9", "H3", 0)
    row("N5", "elem=N;arom=0;h=1;deg=1", "N5", "H3", 1)
    row("N6", "elem=N;arom=0;h=0;deg=2", "N6", "H3", 0)
    row("N3", "elem=N;arom=0;h=2;deg=1;has=ar", "N3", "H3", 2)
    row("N1", "elem=N;arom=0;h=2;deg=1", "N1", "H3", 2)
    row("N4", "elem=N;arom=0;h=1;deg=2;has=ar", "N4", "H3", 1)
    row("N2", "elem=N;arom=0;h=1;deg=2", "N2", "H3", 1)
    row("N8", "elem=N;arom=0;h=0;deg=3;has=ar", "N8", "H3", 0)
    row("N7", "elem=N;arom=0;h=0;deg=3", "N7", "H3", 0)
    for nh in range(4):
        row("NS", f"elem=N;h={nh}", "NS", "H3", nh)

    # Oxygen. Hydroxyl hydrogens fold as H2: the generator produces no
    # acids, enols, peroxides or N-hydroxyls, which are the H4/H3 contexts.
    row("O1", "elem=O;arom=1", "O1", "H2", 0)
    row("O2", "elem=O;h=2;deg=0", "O2", "H2", 2)
    row("O2", "elem=O;h=1;deg=1", "O2", "H2", 1)
    row("O8", "elem=O;arom=0;h=0;deg=1;has=c", "O8", "H2", 0)
    row("O5", "elem=O;arom=0;h=0;deg=1;has=N", "O5", "H2", 0)
    row("O6", "elem=O;arom=0;h=0;deg=1;has=S", "O6", "H2", 0)
    # Carbonyl oxygen: generated chemistry keeps these in the aliphatic
    # ketone/aldehyde/amide/ester class.
    row("O9", "elem=O;arom=0;h=0;deg=1;has=C", "O9", "H2", 0)
    row("O4", "elem=O;arom=0;h=0;deg=2;has=ar", "O4", "H2", 0)
    row("O3", "elem=O;arom=0;h=0;deg=2", "O3", "H2", 0)
    for nh in range(3):
        row("OS", f"elem=O;h={nh}", "OS", "H2", nh)

    # Halogens, phosphorus, sulfur, metals and metalloids.
    row("F", "elem=F", "F", "H2", 0)
    row("Cl", "elem=Cl", "Cl", "H2", 0)
    row("Br", "elem=Br", "Br", "H2", 0)
    row("I", "elem=I", "I", "H2", 0)
    for nh in range(4):
        row("P", f"elem=P;h={nh}", "P", "H2", nh)
    row("S3", "elem=S;arom=1", "S3", "H2", 0)
    for nh in range(3):
        row("S1", f"elem=S;h={nh}", "S1", "H2", nh)
    for nh in range(4):
        row("Me1", f"elem=B;h={nh}", "Me1", "H2", nh)
    for nh in range(5):
        row("Me1", f"elem=Si;h={nh}", "Me1", "H2", nh)
    for nh in range(5):
        row("Me1", f"elem=Sn;h={nh}", "Me1", "H2", nh)
    return rows


def main():
    if len(sys.argv) >= 2 and sys.argv[1] == "table":
        out = sys.argv[2] if len(sys.argv) > 2 else "/dev/stdout"
        with open(out, "w") as f:
            f.write("# Atom contribution table: type id, predicate, logp, mr.\n")
            f.write("# Ordered; the first matching row types the atom.\n")
            for tid, pred, lp, mr in table_rows():
                f.write(f"{tid}\t{pred}\t{lp:.5f}\t{mr:.5f}\n")
        return
    if len(sys.argv) >= 3 and sys.argv[1] == "golden":
        with open(sys.argv[2]) as f:
            lines = [ln.strip() for ln in f if ln.strip()]
        out = sys.argv[3] if len(sys.argv) > 3 else "/dev/stdout"
        with open(out, "w") as f:
            for s in lines:
                lp, mr = crippen(s)
                f.write(f"{s}\t{lp:.6f}\t{mr:.6f}\n")
        return
    sys.exit(__doc__)


if __name__ == "__main__":
    main()
