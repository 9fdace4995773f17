#!/usr/bin/env python3
"""Regenerate the bundled molecular fixtures.

Writes fixtures/h2_sto3g.fcidump, fixtures/h3_chain.fcidump and
fixtures/reference_energies.json.  Everything here is self-contained:
closed-form integrals over contracted s-type Gaussians (STO-3G set for
hydrogen), symmetric (Lowdin) orthogonalization, and an exact
diagonalization of the second-quantized Hamiltonian in the full Fock
space built from ladder matrices.  No electronic-structure package is
involved, so the reference energies are an independent oracle for the
C++ side.

Conventions match the FCIDUMP reader in src/fermion.cpp:
  - two-electron values are chemist-notation (ab|cd) with the full
    8-fold real-orbital symmetry; each orbit is written once,
  - spin orbitals interleave as 2p+sigma with sigma=0 for alpha,
  - the "x 0 0 0 0" line carries the nuclear repulsion constant.

Usage: python3 tools/make_fixtures.py [--out-dir fixtures]
"""

import argparse
import itertools
import json
import pathlib

import numpy as np
from scipy.special import erf

# STO-3G hydrogen 1s: exponents and contraction coefficients for
# normalized primitives (EMSL basis set exchange values).
H_EXPONENTS = np.array([3.42525091, 0.62391373, 0.16885540])
H_COEFFS = np.array([0.15432897, 0.53532814, 0.44463454])

WRITE_TOL = 1e-12


def boys0(x):
    """F0(x) = (1/2) sqrt(pi/x) erf(sqrt(x)), with the x -> 0 limit."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-12
    safe = np.where(small, 1.0, x)
    val = 0.5 * np.sqrt(np.pi / safe) * erf(np.sqrt(safe))
    return np.where(small, 1.0 - x / 3.0, val)


class ContractedS:
    """Contracted s-type Gaussian: sum_i c_i N(a_i) exp(-a_i |r-R|^2)."""

    def __init__(self, center, exponents, coeffs):
        self.center = np.asarray(center, dtype=float)
        self.exps = np.asarray(exponents, dtype=float)
        norms = (2.0 * self.exps / np.pi) ** 0.75
        self.coeffs = np.asarray(coeffs, dtype=float) * norms
        # Renormalize the contraction so <g|g> = 1 exactly.
        self.coeffs /= np.sqrt(self._raw_overlap(self))

    def _raw_overlap(self, other):
        s = 0.0
        for a, ca in zip(self.exps, self.coeffs):
            for b, cb in zip(other.exps, other.coeffs):
                s += ca * cb * _prim_overlap(a, self.center, b, other.center)
        return s


def _prim_overlap(a, A, b, B):
    p = a + b
    ab2 = float(np.dot(A - B, A - B))
    return (np.pi / p) ** 1.5 * np.exp(-a * b / p * ab2)


def _prim_kinetic(a, A, b, B):
    p = a + b
    mu = a * b / p
    ab2 = float(np.dot(A - B, A - B))
    return mu * (3.0 - 2.0 * mu * ab2) * (np.pi / p) ** 1.5 * np.exp(-mu * ab2)


def _prim_nuclear(a, A, b, B, C):
    # Attraction to a unit positive charge at C (sign applied by caller).
    p = a + b
    mu = a * b / p
    ab2 = float(np.dot(A - B, A - B))
    P = (a * A + b * B) / p
    pc2 = float(np.dot(P - C, P - C))
    return (2.0 * np.pi / p) * np.exp(-mu * ab2) * boys0(p * pc2)


def _prim_eri(a, A, b, B, c, C, d, D):
    # Chemist (ab|cd) over s primitives.
    p = a + b
    q = c + d
    P = (a * A + b * B) / p
    Q = (c * C + d * D) / q
    kab = np.exp(-a * b / p * float(np.dot(A - B, A - B)))
    kcd = np.exp(-c * d / q * float(np.dot(C - D, C - D)))
    pq2 = float(np.dot(P - Q, P - Q))
    pref = 2.0 * np.pi ** 2.5 / (p * q * np.sqrt(p + q))
    return pref * kab * kcd * boys0(p * q / (p + q) * pq2)


def _contract2(f, ga, gb, *extra):
    s = 0.0
    for a, ca in zip(ga.exps, ga.coeffs):
        for b, cb in zip(gb.exps, gb.coeffs):
            s += ca * cb * f(a, ga.center, b, gb.center, *extra)
    return s


def ao_integrals(centers, charges):
    """Overlap, core Hamiltonian, chemist ERI tensor and E_nn over the AO set."""
    aos = [ContractedS(c, H_EXPONENTS, H_COEFFS) for c in centers]
    n = len(aos)
    S = np.zeros((n, n))
    hcore = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            S[i, j] = _contract2(_prim_overlap, aos[i], aos[j])
            t = _contract2(_prim_kinetic, aos[i], aos[j])
            v = 0.0
            for C, Z in zip(centers, charges):
                v -= Z * _contract2(_prim_nuclear, aos[i], aos[j], np.asarray(C, float))
            hcore[i, j] = t + v
    eri = np.zeros((n, n, n, n))
    for i, j, k, l in itertools.product(range(n), repeat=4):
        ga, gb, gc, gd = aos[i], aos[j], aos[k], aos[l]
        s = 0.0
        for a, ca in zip(ga.exps, ga.coeffs):
            for b, cb in zip(gb.exps, gb.coeffs):
                for c, cc in zip(gc.exps, gc.coeffs):
                    for d, cd in zip(gd.exps, gd.coeffs):
                        s += ca * cb * cc * cd * _prim_eri(
                            a, ga.center, b, gb.center, c, gc.center, d, gd.center)
        eri[i, j, k, l] = s
    e_nn = 0.0
    pos = [np.asarray(c, float) for c in centers]
    for i in range(n):
        for j in range(i + 1, n):
            e_nn += charges[i] * charges[j] / np.linalg.norm(pos[i] - pos[j])
    return S, hcore, eri, e_nn


def lowdin_orthogonalize(S, hcore, eri):
    """Rotate into the symmetric-orthogonalized basis X = S^(-1/2).

    Keeps the orbitals atom-like, so no integral class is wiped out by
    point-group symmetry the way canonical MOs would do for H2.
    """
    w, U = np.linalg.eigh(S)
    if np.min(w) < 1e-8:
        raise ValueError("AO overlap is near singular")
    X = U @ np.diag(w ** -0.5) @ U.T
    h = X.T @ hcore @ X
    g = np.einsum("up,vq,lr,ms,uvlm->pqrs", X, X, X, X, eri, optimize=True)
    return h, g


def write_fcidump(path, h, g, core, nelec, ms2):
    norb = h.shape[0]
    lines = [f"&FCI NORB={norb},NELEC={nelec},MS2={ms2},"]
    lines.append(" ORBSYM=" + ",".join(["1"] * norb) + ",")
    lines.append(" ISYM=1,")
    lines.append("&END")

    def canonical(a, b, c, d):
        ab = (a, b) if a >= b else (b, a)
        cd = (c, d) if c >= d else (d, c)
        return max(ab + cd, cd + ab)

    seen = set()
    for a, b, c, d in itertools.product(range(norb), repeat=4):
        key = canonical(a, b, c, d)
        if key in seen:
            continue
        seen.add(key)
        val = g[key[0], key[1], key[2], key[3]]
        if abs(val) > WRITE_TOL:
            lines.append(f" {val: .16e} {key[0] + 1:3d} {key[1] + 1:3d} {key[2] + 1:3d} {key[3] + 1:3d}")
    for a in range(norb):
        for b in range(a + 1):
            if abs(h[a, b]) > WRITE_TOL:
                lines.append(f" {h[a, b]: .16e} {a + 1:3d} {b + 1:3d}   0   0")
    lines.append(f" {core: .16e}   0   0   0   0")
    pathlib.Path(path).write_text("\n".join(lines) + "\n")


def read_fcidump(path):
    """Minimal reader mirroring the C++ one, for a write/read round trip."""
    text = pathlib.Path(path).read_text().splitlines()
    header = ""
    body_start = 0
    for i, line in enumerate(text):
        header += line
        if "&END" in line or line.strip() == "/":
            body_start = i + 1
            break
    norb = int(header.split("NORB=")[1].split(",")[0])
    h = np.zeros((norb, norb))
    g = np.zeros((norb, norb, norb, norb))
    core = 0.0
    for line in text[body_start:]:
        toks = line.split()
        if not toks:
            continue
        val = float(toks[0])
        a, b, c, d = (int(t) for t in toks[1:5])
        if a == 0 and b == 0 and c == 0 and d == 0:
            core = val
        elif b == 0 and c == 0 and d == 0:
            continue  # orbital energy line, ignored
        elif c == 0 and d == 0:
            h[a - 1, b - 1] = h[b - 1, a - 1] = val
        else:
            a, b, c, d = a - 1, b - 1, c - 1, d - 1
            for p, q, r, s in ((a, b, c, d), (b, a, c, d), (a, b, d, c), (b, a, d, c),
                               (c, d, a, b), (d, c, a, b), (c, d, b, a), (d, c, b, a)):
                g[p, q, r, s] = val
    return h, g, core


def ladder_matrices(modes):
    """Fock-space annihilation matrices a_j with the usual Z-string phases."""
    I = np.eye(2)
    Z = np.diag([1.0, -1.0])
    sm = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1|
    ops = []
    for j in range(modes):
        factors = [Z] * j + [sm] + [I] * (modes - 1 - j)
        m = factors[0]
        for f in factors[1:]:
            m = np.kron(m, f)
        ops.append(m)
    return ops


def fock_hamiltonian(h, g, core):
    """H = core + sum h_pq a+_ps a_qs + 1/2 sum (pq|rs) a+_ps a+_rt a_st a_qs."""
    norb = h.shape[0]
    modes = 2 * norb
    a = ladder_matrices(modes)
    ad = [m.conj().T for m in a]
    dim = 1 << modes
    H = core * np.eye(dim)
    for p, q in itertools.product(range(norb), repeat=2):
        if h[p, q] == 0.0:
            continue
        for s in (0, 1):
            H += h[p, q] * (ad[2 * p + s] @ a[2 * q + s])
    for p, q, r, s in itertools.product(range(norb), repeat=4):
        if g[p, q, r, s] == 0.0:
            continue
        for sig in (0, 1):
            for tau in (0, 1):
                H += 0.5 * g[p, q, r, s] * (
                    ad[2 * p + sig] @ ad[2 * r + tau] @ a[2 * s + tau] @ a[2 * q + sig])
    return H


def sector_energies(H, modes, nelec, ms2):
    """Ground energies: (nelec, ms2) sector, nelec sector, full Fock space."""
    dim = H.shape[0]
    # Mode j occupies bit (modes-1-j); alpha spin orbitals are even j.
    occ = [[j for j in range(modes) if (idx >> (modes - 1 - j)) & 1] for idx in range(dim)]
    n_of = [len(o) for o in occ]
    ms2_of = [sum(1 if j % 2 == 0 else -1 for j in o) for o in occ]
    sector = [i for i in range(dim) if n_of[i] == nelec and ms2_of[i] == ms2]
    nsector = [i for i in range(dim) if n_of[i] == nelec]
    e_sector = float(np.min(np.linalg.eigvalsh(H[np.ix_(sector, sector)])))
    e_nelec = float(np.min(np.linalg.eigvalsh(H[np.ix_(nsector, nsector)])))
    e_fock = float(np.min(np.linalg.eigvalsh(H)))
    return e_sector, e_nelec, e_fock


def check_ladder_algebra():
    a = ladder_matrices(3)
    ad = [m.conj().T for m in a]
    for i in range(3):
        for j in range(3):
            anti = a[i] @ ad[j] + ad[j] @ a[i]
            expect = np.eye(8) if i == j else np.zeros((8, 8))
            assert np.allclose(anti, expect, atol=1e-14)
            assert np.allclose(a[i] @ a[j] + a[j] @ a[i], 0.0, atol=1e-14)


def build_fixture(name, centers, nelec, ms2, out_dir):
    charges = [1.0] * len(centers)
    S, hcore, eri, e_nn = ao_integrals(centers, charges)
    h, g = lowdin_orthogonalize(S, hcore, eri)
    path = out_dir / f"{name}.fcidump"
    write_fcidump(path, h, g, e_nn, nelec, ms2)

    # Round trip: energies must come out identical from the file we just wrote.
    h2, g2, core2 = read_fcidump(path)
    assert np.allclose(h, h2, atol=1e-13) and np.allclose(g, g2, atol=1e-13)
    H = fock_hamiltonian(h2, g2, core2)
    assert np.allclose(H, H.conj().T, atol=1e-12)
    modes = 2 * h.shape[0]
    e_sector, e_nelec, e_fock = sector_energies(H, modes, nelec, ms2)
    print(f"{name}: norb={h.shape[0]} nelec={nelec} ms2={ms2} "
          f"E_nn={e_nn:.10f} E0={e_sector:.10f}")
    return {
        "norb": h.shape[0],
        "nelec": nelec,
        "ms2": ms2,
        "geometry_bohr": [list(map(float, c)) for c in centers],
        "core_energy": e_nn,
        "ground_energy_sector": e_sector,
        "ground_energy_nelec": e_nelec,
        "ground_energy_fock": e_fock,
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="fixtures", type=pathlib.Path)
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    check_ladder_algebra()

    refs = {}
    # H2 at the standard equilibrium separation, minimal basis.
    refs["h2_sto3g"] = build_fixture(
        "h2_sto3g", [(0.0, 0.0, 0.0), (0.0, 0.0, 1.4011)], nelec=2, ms2=0,
        out_dir=args.out_dir)
    assert -1.2 < refs["h2_sto3g"]["ground_energy_sector"] < -1.0

    # Linear H3 chain, equal 1.8 bohr spacing, doublet.
    refs["h3_chain"] = build_fixture(
        "h3_chain", [(0.0, 0.0, 0.0), (0.0, 0.0, 1.8), (0.0, 0.0, 3.6)],
        nelec=3, ms2=1, out_dir=args.out_dir)

    ref_path = args.out_dir / "reference_energies.json"
    ref_path.write_text(json.dumps(refs, indent=2) + "\n")
    print(f"wrote {ref_path}")


if __name__ == "__main__":
    main()
