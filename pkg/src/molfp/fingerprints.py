"""The fingerprint families and vector post-processing.

Six families: circular (ecfp, fcfp), pairwise (atom_pair), torsional
(topological_torsion), linear (path), key-based (substructure), plus a
ten-entry real-valued descriptor vector.  All hashed families fold
32-bit feature codes modulo the configured length; binary variants
record presence, count variants record multiplicity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .chem import (
    HALOGENS,
    BondOrder,
    Molecule,
    atomic_weight,
    initial_atom_invariant,
    shortest_path_matrix,
)
from .errors import ConfigError, FoldError
from .hashing import (
    TAG_ATOM_PAIR,
    TAG_ATOM_TYPE,
    TAG_ECFP,
    TAG_PATH,
    TAG_PATH_ATOM,
    TAG_TORSION,
    stable_hash32,
)
from .smarts import MoleculeView, SmartsKey, count_unique, has_match, load_key_set

FAMILIES = (
    "ecfp",
    "fcfp",
    "atom_pair",
    "topological_torsion",
    "path",
    "substructure",
    "descriptors",
)

N_DESCRIPTORS = 10


@dataclass(frozen=True)
class FingerprintVector:
    """Sparse per-molecule feature vector.

    ``entries`` maps index to positive count; the binary variant stores
    only ones.  Zero-valued entries are never stored.
    """

    length: int
    variant: str
    entries: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ValueError("negative length")
        if self.variant not in ("binary", "count"):
            raise ValueError(f"bad variant {self.variant!r}")
        for idx, count in self.entries.items():
            if not 0 <= idx < self.length:
                raise ValueError(f"index {idx} out of range for length {self.length}")
            if count < 1:
                raise ValueError(f"non-positive count at index {idx}")
            if self.variant == "binary" and count != 1:
                raise ValueError(f"binary vector stores count {count} at index {idx}")

    def to_binary(self) -> "FingerprintVector":
        if self.variant == "binary":
            return self
        return FingerprintVector(self.length, "binary", {i: 1 for i in self.entries})

    def nonzero(self) -> list[int]:
        return sorted(self.entries)


@dataclass(frozen=True)
class FingerprintConfig:
    """Fingerprint family plus its parameters.

    ``length`` applies to the hashed families only; substructure vectors
    take the key count as their length and descriptors are fixed at 10.
    """

    family: str
    length: int = 2048
    radius: int = 2
    min_path: int = 1
    max_path: int = 7
    distance_cap: int = 30
    variant: str = "binary"
    key_set_path: str | None = None
    output: str = "dense"

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown fingerprint family {self.family!r}")
        if self.length < 1:
            raise ConfigError("length must be positive")
        if self.radius < 0:
            raise ConfigError("radius must be non-negative")
        if not 1 <= self.min_path <= self.max_path <= 10:
            raise ConfigError("need 1 <= min_path <= max_path <= 10")
        if not 1 <= self.distance_cap <= 30:
            raise ConfigError("need 1 <= distance_cap <= 30")
        if self.variant not in ("binary", "count"):
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.output not in ("dense", "sparse"):
            raise ConfigError(f"unknown output form {self.output!r}")


def _from_counts(counts: dict[int, int], length: int, variant: str) -> FingerprintVector:
    if variant == "binary":
        return FingerprintVector(length, "binary", {i: 1 for i in counts})
    return FingerprintVector(length, "count", dict(counts))


def _bounded_distances(mol: Molecule, start: int, limit: int) -> dict[int, int]:
    dist = {start: 0}
    queue = [start]
    depth = 0
    while queue and depth < limit:
        depth += 1
        nxt = []
        for cur in queue:
            for nbr, _ in mol.neighbors[cur]:
                if nbr not in dist:
                    dist[nbr] = depth
                    nxt.append(nbr)
        queue = nxt
    return dist


def _circular(mol: Molecule, cfg: FingerprintConfig, seeds: list[int]) -> FingerprintVector:
    """Shared ECFP/FCFP iteration.

    Iteration k hashes (k, own previous code, sorted (bond code,
    neighbor previous code) pairs).  An environment whose bond set was
    already produced by an earlier environment (lower iteration first,
    then lower identifier) is discarded; iteration-0 environments are
    one per atom and never collide.
    """
    n = mol.n_atoms
    # (iteration, identifier, dedup key); radius-0 keys are per-atom.
    features: list[tuple[int, int, object]] = [
        (0, code, ("atom", idx)) for idx, code in enumerate(seeds)
    ]
    if cfg.radius > 0 and n > 0:
        dists = [_bounded_distances(mol, a, cfg.radius) for a in range(n)]
        codes = seeds
        for k in range(1, cfg.radius + 1):
            new_codes = []
            for a in range(n):
                parts = sorted(
                    (mol.bonds[bidx].order.code, codes[nbr])
                    for nbr, bidx in mol.neighbors[a]
                )
                flat = [TAG_ECFP, k, codes[a]]
                for bond_code, nbr_code in parts:
                    flat.append(bond_code)
                    flat.append(nbr_code)
                ident = stable_hash32(*flat)
                new_codes.append(ident)
                env = frozenset(
                    bidx
                    for bidx, b in enumerate(mol.bonds)
                    if min(dists[a].get(b.i, k + 1), dists[a].get(b.j, k + 1)) <= k - 1
                )
                features.append((k, ident, env))
            codes = new_codes

    counts: dict[int, int] = {}
    seen_envs: set[object] = set()
    for _, ident, env in sorted(features, key=lambda f: (f[0], f[1])):
        if env in seen_envs:
            continue
        seen_envs.add(env)
        idx = ident % cfg.length
        counts[idx] = counts.get(idx, 0) + 1
    return _from_counts(counts, cfg.length, cfg.variant)


def ecfp(mol: Molecule, cfg: FingerprintConfig) -> FingerprintVector:
    """Circular fingerprint seeded by element-level atom invariants."""
    seeds = [initial_atom_invariant(mol, i) for i in range(mol.n_atoms)]
    return _circular(mol, cfg, seeds)


def _feature_class_code(mol: Molecule, idx: int) -> int:
    """Six-bit pharmacophoric class: donor, acceptor, positive, negative,
    aromatic, halogen."""
    a = mol.atoms[idx]
    code = 0
    if a.element in (7, 8) and mol.total_h[idx] >= 1:
        code |= 1
    if a.element in (7, 8):
        code |= 2
    if a.charge > 0:
        code |= 4
    if a.charge < 0:
        code |= 8
    if a.aromatic:
        code |= 16
    if a.element in HALOGENS:
        code |= 32
    return code


def fcfp(mol: Molecule, cfg: FingerprintConfig) -> FingerprintVector:
    """Circular fingerprint seeded by feature classes instead of elements."""
    seeds = [_feature_class_code(mol, i) for i in range(mol.n_atoms)]
    return _circular(mol, cfg, seeds)


def _atom_type_code(mol: Molecule, idx: int) -> int:
    a = mol.atoms[idx]
    return stable_hash32(TAG_ATOM_TYPE, a.element, a.degree, int(a.aromatic))


def atom_pair(mol: Molecule, cfg: FingerprintConfig) -> FingerprintVector:
    """Hash (type, topological distance, type) for every heavy-atom pair
    within the distance cap; cross-component pairs are excluded."""
    n = mol.n_atoms
    types = [_atom_type_code(mol, i) for i in range(n)]
    dmat = shortest_path_matrix(mol)
    counts: dict[int, int] = {}
    for i in range(n):
        if mol.atoms[i].element == 1:
            continue
        for j in range(i + 1, n):
            if mol.atoms[j].element == 1:
                continue
            d = dmat[i][j]
            if not 1 <= d <= cfg.distance_cap:
                continue
            lo, hi = min(types[i], types[j]), max(types[i], types[j])
            idx = stable_hash32(TAG_ATOM_PAIR, lo, int(d), hi) % cfg.length
            counts[idx] = counts.get(idx, 0) + 1
    return _from_counts(counts, cfg.length, cfg.variant)


def topological_torsion(mol: Molecule, cfg: FingerprintConfig) -> FingerprintVector:
    """Hash typed linear paths of exactly four distinct atoms, oriented
    by the lexicographically smaller of the type sequence and its
    reverse."""
    n = mol.n_atoms
    types = [_atom_type_code(mol, i) for i in range(n)]
    counts: dict[int, int] = {}
    for b in mol.bonds:
        # Each undirected 4-path arises exactly once: its central bond
        # in (min, max) orientation, ends drawn from either side.
        mid1, mid2 = min(b.i, b.j), max(b.i, b.j)
        for a, _ in mol.neighbors[mid1]:
            if a == mid2:
                continue
            for d, _ in mol.neighbors[mid2]:
                if d == mid1 or d == a:
                    continue
                seq = (types[a], types[mid1], types[mid2], types[d])
                canon = min(seq, seq[::-1])
                idx = stable_hash32(TAG_TORSION, *canon) % cfg.length
                counts[idx] = counts.get(idx, 0) + 1
    return _from_counts(counts, cfg.length, cfg.variant)


def path_fingerprint(mol: Molecule, cfg: FingerprintConfig) -> FingerprintVector:
    """Hash simple bond paths of min_path..max_path bonds as alternating
    (atom code, bond code) sequences, one feature per path."""
    n = mol.n_atoms
    acode = [
        stable_hash32(TAG_PATH_ATOM, a.element, int(a.aromatic), a.degree)
        for a in mol.atoms
    ]
    counts: dict[int, int] = {}

    def record(path: list[int], bond_codes: list[int]) -> None:
        if tuple(path) > tuple(reversed(path)):
            return
        seq: list[int] = [acode[path[0]]]
        for t in range(len(bond_codes)):
            seq.append(bond_codes[t])
            seq.append(acode[path[t + 1]])
        canon = min(tuple(seq), tuple(reversed(seq)))
        idx = stable_hash32(TAG_PATH, *canon) % cfg.length
        counts[idx] = counts.get(idx, 0) + 1

    path: list[int] = []
    bond_codes: list[int] = []
    on_path = [False] * n

    def extend(cur: int) -> None:
        if len(bond_codes) >= cfg.min_path:
            record(path, bond_codes)
        if len(bond_codes) == cfg.max_path:
            return
        for nbr, bidx in mol.neighbors[cur]:
            if on_path[nbr]:
                continue
            path.append(nbr)
            bond_codes.append(mol.bonds[bidx].order.code)
            on_path[nbr] = True
            extend(nbr)
            on_path[nbr] = False
            path.pop()
            bond_codes.pop()

    for start in range(n):
        path = [start]
        bond_codes = []
        on_path[start] = True
        extend(start)
        on_path[start] = False
    return _from_counts(counts, cfg.length, cfg.variant)


def substructure_fingerprint(
    mol: Molecule, keys: tuple[SmartsKey, ...], variant: str = "binary"
) -> FingerprintVector:
    """One vector position per key: match indicator or unique-match count."""
    if not keys:
        raise ConfigError("substructure fingerprint needs a non-empty key set")
    view = MoleculeView(mol)
    counts: dict[int, int] = {}
    for pos, key in enumerate(keys):
        if variant == "binary":
            if has_match(key.pattern, mol, view):
                counts[pos] = 1
        else:
            c = count_unique(key.pattern, mol, view)
            if c:
                counts[pos] = c
    return FingerprintVector(len(keys), variant, counts)


def descriptors(mol: Molecule) -> tuple[float, ...]:
    """Ten real-valued descriptors.

    Order: molecular weight, heavy atoms, rings, aromatic rings,
    H-bond donors, H-bond acceptors, rotatable bonds, net formal charge,
    fraction of sp3 carbons, halogens.
    """
    weights: list[float] = []
    heavy = 0
    hbd = 0
    hba = 0
    halogens = 0
    net_charge = 0
    n_carbon = 0
    n_sp3_carbon = 0
    bond_orders: list[list[BondOrder]] = [[] for _ in range(mol.n_atoms)]
    for b in mol.bonds:
        bond_orders[b.i].append(b.order)
        bond_orders[b.j].append(b.order)
    for idx, a in enumerate(mol.atoms):
        weights.append(atomic_weight(a.element) + a.implicit_h * atomic_weight(1))
        if a.element > 1:
            heavy += 1
        if a.element in (7, 8):
            hba += 1
            if mol.total_h[idx] >= 1:
                hbd += 1
        if a.element in HALOGENS:
            halogens += 1
        net_charge += a.charge
        if a.element == 6:
            n_carbon += 1
            if not a.aromatic and all(o is BondOrder.SINGLE for o in bond_orders[idx]):
                n_sp3_carbon += 1
    rings = mol.rings.rings
    aromatic_rings = sum(
        1 for ring in rings if all(mol.atoms[i].aromatic for i in ring)
    )
    rotatable = 0
    for bidx, b in enumerate(mol.bonds):
        if (
            b.order is BondOrder.SINGLE
            and not mol.rings.bond_in_ring[bidx]
            and mol.atoms[b.i].element > 1
            and mol.atoms[b.j].element > 1
            and mol.atoms[b.i].degree >= 2
            and mol.atoms[b.j].degree >= 2
        ):
            rotatable += 1
    frac_sp3 = n_sp3_carbon / n_carbon if n_carbon else 0.0
    # fsum makes the weight sum independent of atom iteration order
    return (
        math.fsum(weights),
        float(heavy),
        float(len(rings)),
        float(aromatic_rings),
        float(hbd),
        float(hba),
        float(rotatable),
        float(net_charge),
        frac_sp3,
        float(halogens),
    )


def fold(v: FingerprintVector, target: int) -> FingerprintVector:
    """Reduce length by combining indices congruent modulo target:
    OR for binary vectors, sum for counts."""
    if target < 1 or v.length % target != 0:
        raise FoldError(f"target {target} does not divide length {v.length}")
    entries: dict[int, int] = {}
    for idx, count in v.entries.items():
        j = idx % target
        entries[j] = entries.get(j, 0) + count
    if v.variant == "binary":
        entries = {j: 1 for j in entries}
    return FingerprintVector(target, v.variant, entries)


def compute(
    mol: Molecule, cfg: FingerprintConfig, keys: tuple[SmartsKey, ...] | None = None
) -> FingerprintVector | tuple[float, ...]:
    """Dispatch on the configured family.

    Substructure configs need compiled keys; they are loaded from the
    configured path when not supplied.  Descriptors return the raw
    real-valued tuple rather than a sparse vector.
    """
    cfg.validate()
    if cfg.family == "ecfp":
        return ecfp(mol, cfg)
    if cfg.family == "fcfp":
        return fcfp(mol, cfg)
    if cfg.family == "atom_pair":
        return atom_pair(mol, cfg)
    if cfg.family == "topological_torsion":
        return topological_torsion(mol, cfg)
    if cfg.family == "path":
        return path_fingerprint(mol, cfg)
    if cfg.family == "substructure":
        if keys is None:
            from .smarts import default_key_set_path

            keys = load_key_set(cfg.key_set_path or default_key_set_path())
        return substructure_fingerprint(mol, keys, cfg.variant)
    return descriptors(mol)
