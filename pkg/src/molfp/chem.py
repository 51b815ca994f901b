"""Molecular graph data model and sanitization.

A :class:`MoleculeDraft` is the mutable product of parsing; ``sanitize``
turns it into an immutable :class:`Molecule` with implicit hydrogens,
ring perception, and validated aromaticity.  Everything downstream
(fingerprints, SMARTS matching, canonical writing) consumes Molecules
and never mutates them, so they are safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import AromaticityError, ValenceError
from .hashing import TAG_ATOM_INVARIANT, stable_hash32

INF = math.inf

_SYMBOLS = (
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne",
    "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
    "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr",
    "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
    "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb",
    "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg",
    "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm",
    "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds",
    "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
)

_ATOMIC_NUMBER = {sym: i + 1 for i, sym in enumerate(_SYMBOLS)}

# Standard atomic weights (conventional values for interval elements,
# mass number of the most stable isotope for the radioactives).
_ATOMIC_WEIGHTS = (
    1.008, 4.003, 6.94, 9.012, 10.81, 12.011, 14.007, 15.999, 18.998, 20.180,
    22.990, 24.305, 26.982, 28.085, 30.974, 32.06, 35.45, 39.95, 39.098, 40.078,
    44.956, 47.867, 50.942, 51.996, 54.938, 55.845, 58.933, 58.693, 63.546, 65.38,
    69.723, 72.630, 74.922, 78.971, 79.904, 83.798, 85.468, 87.62, 88.906, 91.224,
    92.906, 95.95, 97.0, 101.07, 102.906, 106.42, 107.868, 112.414, 114.818, 118.710,
    121.760, 127.60, 126.904, 131.293, 132.905, 137.327, 138.905, 140.116, 140.908, 144.242,
    145.0, 150.36, 151.964, 157.25, 158.925, 162.500, 164.930, 167.259, 168.934, 173.045,
    174.967, 178.486, 180.948, 183.84, 186.207, 190.23, 192.217, 195.084, 196.967, 200.592,
    204.38, 207.2, 208.980, 209.0, 210.0, 222.0, 223.0, 226.0, 227.0, 232.038,
    231.036, 238.029, 237.0, 244.0, 243.0, 247.0, 247.0, 251.0, 252.0, 257.0,
    258.0, 259.0, 262.0, 267.0, 268.0, 271.0, 272.0, 270.0, 276.0, 281.0,
    280.0, 285.0, 284.0, 289.0, 288.0, 293.0, 294.0, 294.0,
)

MAX_ELEMENT = len(_SYMBOLS)

# SMILES organic subset: written bare, implicit hydrogens filled in.
ORGANIC_SUBSET = frozenset((5, 6, 7, 8, 9, 15, 16, 17, 35, 53))

# Elements allowed to carry the aromatic (lowercase) flag.
AROMATIC_ELEMENTS = frozenset((5, 6, 7, 8, 15, 16, 33, 34))

HALOGENS = frozenset((9, 17, 35, 53))

# Permitted valences; elements absent from this table accept any valence
# and never receive implicit hydrogens.
PERMITTED_VALENCES: dict[int, tuple[int, ...]] = {
    1: (1,),
    5: (3,),
    6: (4,),
    7: (3,),
    8: (2,),
    9: (1,),
    15: (3, 5),
    16: (2, 4, 6),
    17: (1,),
    35: (1,),
    53: (1,),
}


def atomic_number(symbol: str) -> int | None:
    """Atomic number for an element symbol, or None if unknown."""
    return _ATOMIC_NUMBER.get(symbol)


def symbol_of(element: int) -> str:
    return _SYMBOLS[element - 1]


def atomic_weight(element: int) -> float:
    return _ATOMIC_WEIGHTS[element - 1]


class BondOrder(Enum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> float:
        """Contribution to an atom's bond-order sum (aromatic counts 1.5)."""
        return 1.5 if self is BondOrder.AROMATIC else float(self.value)

    @property
    def code(self) -> int:
        """Stable small integer used in feature hashing."""
        return self.value


@dataclass(frozen=True)
class Bond:
    i: int
    j: int
    order: BondOrder

    def other(self, atom: int) -> int:
        return self.j if atom == self.i else self.i


@dataclass
class AtomDraft:
    """Pre-sanitization atom as read from input text."""

    element: int
    formal_charge: int = 0
    isotope: int | None = None
    explicit_h: int | None = None
    aromatic_flag: bool = False

    def __post_init__(self) -> None:
        if not 1 <= self.element <= MAX_ELEMENT:
            raise ValueError(f"element out of range: {self.element}")
        if self.isotope is not None and self.isotope < 0:
            raise ValueError("negative isotope")
        if self.explicit_h is not None and self.explicit_h < 0:
            raise ValueError("negative explicit hydrogen count")


@dataclass
class MoleculeDraft:
    """Mutable molecular graph under construction by a parser."""

    atoms: list[AtomDraft] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)
    source_text: str | None = None
    stereo_ignored: bool = False

    def add_atom(self, atom: AtomDraft) -> int:
        self.atoms.append(atom)
        return len(self.atoms) - 1

    def add_bond(self, i: int, j: int, order: BondOrder) -> None:
        n = len(self.atoms)
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"bond endpoint out of range: ({i}, {j})")
        if i == j:
            raise ValueError(f"self-loop bond on atom {i}")
        pair = (min(i, j), max(i, j))
        for b in self.bonds:
            if (min(b.i, b.j), max(b.i, b.j)) == pair:
                raise ValueError(f"duplicate bond between atoms {i} and {j}")
        self.bonds.append(Bond(i, j, order))


@dataclass(frozen=True)
class Atom:
    """Sanitized atom; ``degree`` counts heavy (non-hydrogen) neighbors."""

    element: int
    charge: int
    isotope: int | None
    implicit_h: int
    aromatic: bool
    degree: int


@dataclass(frozen=True)
class RingInfo:
    """Minimum cycle basis plus derived per-atom/per-bond membership."""

    rings: tuple[tuple[int, ...], ...]
    atom_in_ring: tuple[bool, ...]
    bond_in_ring: tuple[bool, ...]
    atom_ring_count: tuple[int, ...]
    smallest_ring_size: tuple[int | None, ...]


@dataclass(frozen=True)
class Molecule:
    """Immutable sanitized molecular graph."""

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    neighbors: tuple[tuple[tuple[int, int], ...], ...]  # (neighbor, bond index)
    rings: RingInfo
    total_h: tuple[int, ...]  # implicit + explicit hydrogen neighbors
    source_text: str | None = None

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def bond_between(self, i: int, j: int) -> Bond | None:
        for nbr, bidx in self.neighbors[i]:
            if nbr == j:
                return self.bonds[bidx]
        return None


def _adjacency(n_atoms: int, bonds: list[Bond] | tuple[Bond, ...]) -> list[list[tuple[int, int]]]:
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_atoms)]
    for bidx, b in enumerate(bonds):
        adj[b.i].append((b.j, bidx))
        adj[b.j].append((b.i, bidx))
    return adj


def _components(n_atoms: int, adj: list[list[tuple[int, int]]]) -> list[list[int]]:
    seen = [False] * n_atoms
    comps = []
    for start in range(n_atoms):
        if seen[start]:
            continue
        comp = [start]
        seen[start] = True
        queue = [start]
        while queue:
            cur = queue.pop()
            for nbr, _ in adj[cur]:
                if not seen[nbr]:
                    seen[nbr] = True
                    comp.append(nbr)
                    queue.append(nbr)
        comps.append(sorted(comp))
    return comps


def _normalize_cycle(cycle: tuple[int, ...]) -> tuple[int, ...]:
    """Canonical rotation/direction: start at the smallest atom, pick the
    lexicographically smaller of the two traversal directions."""
    k = len(cycle)
    start = cycle.index(min(cycle))
    forward = tuple(cycle[(start + t) % k] for t in range(k))
    backward = tuple(cycle[(start - t) % k] for t in range(k))
    return min(forward, backward)


def _cycle_edge_mask(cycle: tuple[int, ...], bond_index: dict[tuple[int, int], int]) -> int:
    mask = 0
    k = len(cycle)
    for t in range(k):
        a, b = cycle[t], cycle[(t + 1) % k]
        mask |= 1 << bond_index[(min(a, b), max(a, b))]
    return mask


def _gf2_add(mask: int, basis: dict[int, int]) -> bool:
    """Insert an edge-set vector into a GF(2) xor basis keyed by leading bit.

    Returns True when the vector was independent (and is now included).
    """
    while mask:
        lead = mask.bit_length() - 1
        if lead not in basis:
            basis[lead] = mask
            return True
        mask ^= basis[lead]
    return False


def _shortest_cycles_through(
    u: int, v: int, skip_bond: int, adj: list[list[tuple[int, int]]]
) -> list[tuple[int, ...]]:
    """All shortest cycles through bond (u, v), found by BFS from u with the
    bond removed, then enumerating every shortest u-v path."""
    n = len(adj)
    dist = [INF] * n
    dist[u] = 0
    queue = [u]
    while queue:
        nxt: list[int] = []
        for cur in queue:
            for nbr, bidx in adj[cur]:
                if bidx == skip_bond:
                    continue
                if dist[nbr] == INF:
                    dist[nbr] = dist[cur] + 1
                    nxt.append(nbr)
        queue = nxt
    if dist[v] == INF:
        return []
    paths: list[tuple[int, ...]] = []

    def extend(path: list[int]) -> None:
        cur = path[-1]
        if cur == u:
            paths.append(tuple(reversed(path)))
            return
        for nbr, bidx in adj[cur]:
            if bidx != skip_bond and dist[nbr] == dist[cur] - 1:
                path.append(nbr)
                extend(path)
                path.pop()

    extend([v])
    return paths


def perceive_rings(n_atoms: int, bonds: list[Bond] | tuple[Bond, ...]) -> RingInfo:
    """Perceive a minimum cycle basis.

    For every non-tree bond of a BFS spanning forest, take the smallest
    cycle through that bond; ties are broken by the lexicographically
    smallest sorted atom tuple.  If the collected cycles do not span the
    full cycle space (rank short of bonds - atoms + components, which
    does not occur on molecular graphs), the basis is completed greedily
    from the remaining candidates.
    """
    adj = _adjacency(n_atoms, bonds)
    bond_index = {(min(b.i, b.j), max(b.i, b.j)): idx for idx, b in enumerate(bonds)}
    comps = _components(n_atoms, adj)
    cyclomatic = len(bonds) - n_atoms + len(comps)

    tree_bonds: set[int] = set()
    visited = [False] * n_atoms
    for comp in comps:
        root = comp[0]
        visited[root] = True
        queue = [root]
        while queue:
            nxt: list[int] = []
            for cur in queue:
                for nbr, bidx in sorted(adj[cur]):
                    if not visited[nbr]:
                        visited[nbr] = True
                        tree_bonds.add(bidx)
                        nxt.append(nbr)
            queue = nxt

    candidates: list[tuple[int, ...]] = []
    for bidx, b in enumerate(bonds):
        if bidx in tree_bonds:
            continue
        paths = _shortest_cycles_through(b.i, b.j, bidx, adj)
        cycles = [_normalize_cycle(p) for p in paths]
        cycles.sort(key=lambda c: (tuple(sorted(c)), c))
        if cycles:
            candidates.append(cycles[0])

    rings: list[tuple[int, ...]] = []
    basis: dict[int, int] = {}
    for cyc in sorted(set(candidates), key=lambda c: (len(c), tuple(sorted(c)), c)):
        if _gf2_add(_cycle_edge_mask(cyc, bond_index), basis):
            rings.append(cyc)

    if len(rings) < cyclomatic:
        # Fallback: complete the basis with fundamental cycles of the forest.
        parent: dict[int, tuple[int, int]] = {}
        seen = [False] * n_atoms
        for comp in comps:
            root = comp[0]
            seen[root] = True
            queue = [root]
            while queue:
                nxt = []
                for cur in queue:
                    for nbr, bidx in sorted(adj[cur]):
                        if bidx in tree_bonds and not seen[nbr]:
                            seen[nbr] = True
                            parent[nbr] = (cur, bidx)
                            nxt.append(nbr)
                queue = nxt

        def root_path(x: int) -> list[int]:
            path = [x]
            while path[-1] in parent:
                path.append(parent[path[-1]][0])
            return path

        fundamentals = []
        for bidx, b in enumerate(bonds):
            if bidx in tree_bonds:
                continue
            pi, pj = root_path(b.i), root_path(b.j)
            common = set(pi) & set(pj)
            lca = next(x for x in pi if x in common)
            cyc = pi[: pi.index(lca)] + [lca] + list(reversed(pj[: pj.index(lca)]))
            fundamentals.append(_normalize_cycle(tuple(cyc)))
        for cyc in sorted(set(fundamentals), key=lambda c: (len(c), tuple(sorted(c)), c)):
            if len(rings) == cyclomatic:
                break
            if _gf2_add(_cycle_edge_mask(cyc, bond_index), basis):
                rings.append(cyc)

    rings.sort(key=lambda c: (len(c), tuple(sorted(c)), c))

    atom_in_ring = [False] * n_atoms
    bond_in_ring = [False] * len(bonds)
    ring_count = [0] * n_atoms
    smallest: list[int | None] = [None] * n_atoms
    for cyc in rings:
        for t, a in enumerate(cyc):
            atom_in_ring[a] = True
            ring_count[a] += 1
            if smallest[a] is None or len(cyc) < smallest[a]:
                smallest[a] = len(cyc)
            b = cyc[(t + 1) % len(cyc)]
            bond_in_ring[bond_index[(min(a, b), max(a, b))]] = True
    return RingInfo(
        rings=tuple(rings),
        atom_in_ring=tuple(atom_in_ring),
        bond_in_ring=tuple(bond_in_ring),
        atom_ring_count=tuple(ring_count),
        smallest_ring_size=tuple(smallest),
    )


def permitted_valences(element: int, charge: int) -> tuple[int, ...] | None:
    """Charge-adjusted permitted valences; None means any valence is fine.

    Lone-pair elements (N, P, O, S) gain a slot per positive charge and
    lose one per negative; carbon loses a slot for either ion; boron
    gains a slot when negative.  Halogens and hydrogen are unadjusted.
    """
    base = PERMITTED_VALENCES.get(element)
    if base is None:
        return None
    if element in (7, 8, 15, 16):
        shift = charge
    elif element == 6:
        shift = -abs(charge)
    elif element == 5:
        shift = -charge
    else:
        shift = 0
    vals = tuple(v + shift for v in base if v + shift >= 0)
    return vals if vals else (0,)


def default_implicit_h(
    element: int, charge: int, n_aromatic_bonds: int, other_order_sum: int
) -> int | None:
    """Implicit hydrogen count the valence model assigns to a bare atom.

    Aromatic bonds count 1.5 each with the half rounded down; when that
    accounting exceeds every permitted valence the atom is treated as an
    in-ring lone-pair donor and aromatic bonds count 1 each (furan-style
    oxygen).  Returns None when no accounting fits any permitted valence.
    """
    vals = permitted_valences(element, charge)
    if vals is None:
        return 0
    primary = other_order_sum + (3 * n_aromatic_bonds) // 2
    fits = [v for v in vals if v >= primary]
    if fits:
        return min(fits) - primary
    if n_aromatic_bonds:
        fallback = other_order_sum + n_aromatic_bonds
        fits = [v for v in vals if v >= fallback]
        if fits:
            return min(fits) - fallback
    return None


def sanitize(draft: MoleculeDraft) -> Molecule:
    """Validate a draft and build the immutable molecule.

    Checks performed: ring membership of aromatic atoms and bonds,
    demotion of non-ring aromatic bonds between aromatic atoms (biphenyl
    style) to single, and the valence model that assigns implicit
    hydrogens.  Raises ValenceError or AromaticityError on violations.
    """
    n = len(draft.atoms)
    for b in draft.bonds:
        if not (0 <= b.i < n and 0 <= b.j < n) or b.i == b.j:
            raise ValueError("draft bond endpoints invalid")

    rings = perceive_rings(n, draft.bonds)

    bonds: list[Bond] = []
    for bidx, b in enumerate(draft.bonds):
        if b.order is BondOrder.AROMATIC:
            ai, aj = draft.atoms[b.i], draft.atoms[b.j]
            if not (ai.aromatic_flag and aj.aromatic_flag):
                raise AromaticityError(
                    f"aromatic bond between non-aromatic atoms {b.i} and {b.j}"
                )
            if not rings.bond_in_ring[bidx]:
                b = Bond(b.i, b.j, BondOrder.SINGLE)
        bonds.append(b)

    for idx, a in enumerate(draft.atoms):
        if a.aromatic_flag and not rings.atom_in_ring[idx]:
            raise AromaticityError(f"aromatic atom {idx} is not in any ring")

    adj = _adjacency(n, bonds)
    atoms: list[Atom] = []
    for idx, a in enumerate(draft.atoms):
        n_arom = 0
        other_sum = 0
        for _, bidx in adj[idx]:
            order = bonds[bidx].order
            if order is BondOrder.AROMATIC:
                n_arom += 1
            else:
                other_sum += order.value
        if a.explicit_h is not None:
            # Bracket atom: take the written hydrogen count, but the total
            # must still fit a permitted valence.
            vals = permitted_valences(a.element, a.formal_charge)
            if vals is not None:
                primary = other_sum + (3 * n_arom) // 2 + a.explicit_h
                fallback = other_sum + n_arom + a.explicit_h
                if not any(v >= primary for v in vals) and not (
                    n_arom and any(v >= fallback for v in vals)
                ):
                    raise ValenceError(
                        f"atom {idx} ({symbol_of(a.element)}): bond order sum "
                        f"{primary} exceeds permitted valences {vals}"
                    )
            implicit = a.explicit_h
        else:
            implicit = default_implicit_h(a.element, a.formal_charge, n_arom, other_sum)
            if implicit is None:
                vals = permitted_valences(a.element, a.formal_charge)
                raise ValenceError(
                    f"atom {idx} ({symbol_of(a.element)}): bond order sum "
                    f"{other_sum + (3 * n_arom) // 2} exceeds permitted valences {vals}"
                )
        degree = sum(1 for nbr, _ in adj[idx] if draft.atoms[nbr].element != 1)
        atoms.append(
            Atom(
                element=a.element,
                charge=a.formal_charge,
                isotope=a.isotope,
                implicit_h=implicit,
                aromatic=a.aromatic_flag,
                degree=degree,
            )
        )

    total_h = tuple(
        atoms[idx].implicit_h + sum(1 for nbr, _ in adj[idx] if atoms[nbr].element == 1)
        for idx in range(n)
    )
    return Molecule(
        atoms=tuple(atoms),
        bonds=tuple(bonds),
        neighbors=tuple(tuple(sorted(adj[idx])) for idx in range(n)),
        rings=rings,
        total_h=total_h,
        source_text=draft.source_text,
    )


def shortest_path_matrix(mol: Molecule) -> list[list[float]]:
    """All-pairs unweighted BFS distances; unreachable pairs are inf."""
    n = mol.n_atoms
    out = []
    for start in range(n):
        dist = [INF] * n
        dist[start] = 0.0
        queue = [start]
        while queue:
            nxt = []
            for cur in queue:
                for nbr, _ in mol.neighbors[cur]:
                    if dist[nbr] == INF:
                        dist[nbr] = dist[cur] + 1
                        nxt.append(nbr)
            queue = nxt
        out.append(dist)
    return out


def initial_atom_invariant(mol: Molecule, idx: int) -> int:
    """Seed code for circular fingerprints: a stable hash of the atom's
    local tuple (element, heavy degree, total H, charge, isotope,
    in-ring flag, aromatic flag)."""
    a = mol.atoms[idx]
    return stable_hash32(
        TAG_ATOM_INVARIANT,
        a.element,
        a.degree,
        mol.total_h[idx],
        a.charge,
        a.isotope if a.isotope is not None else 0,
        int(mol.rings.atom_in_ring[idx]),
        int(a.aromatic),
    )
