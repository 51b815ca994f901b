"""SMILES tokenizer, parser, and canonical writer.

Supported subset: organic-subset atoms (B, C, N, O, P, S, F, Cl, Br, I,
lowercase aromatic forms), bracket atoms with isotope, charge, explicit
hydrogen count and atom map (maps are parsed and discarded), ring
closures including %nn, branches, dots, and the bond symbols - = # :.
Stereo markers (/ \\ @ @@) are parsed and ignored; the draft records
that they were dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .chem import (
    ORGANIC_SUBSET,
    AtomDraft,
    Bond,
    BondOrder,
    Molecule,
    MoleculeDraft,
    atomic_number,
    default_implicit_h,
    symbol_of,
)
from .errors import (
    ChargeOverflowError,
    SmilesSyntaxError,
    UnbalancedParenError,
    UnclosedRingError,
)

MAX_CHARGE = 15

_ORGANIC_TWO = ("Cl", "Br")
_ORGANIC_ONE = set("BCNOPSFI")
_ORGANIC_AROMATIC = set("bcnops")

_BRACKET_RE = re.compile(
    r"\[(?P<isotope>\d+)?"
    r"(?P<symbol>[A-Za-z][a-z]?)"
    r"(?P<stereo>@{1,2})?"
    r"(?P<hcount>H\d*)?"
    r"(?P<charge>[+-]\d+|\++|-+)?"
    r"(?::(?P<map>\d+))?"
    r"\]$"
)

_LOWERCASE_AROMATIC = {
    "b": 5, "c": 6, "n": 7, "o": 8, "p": 15, "s": 16, "se": 34, "as": 33,
}


class TokenKind(Enum):
    ATOM_ORGANIC = "organic_atom"
    ATOM_BRACKET = "bracket_atom"
    BOND = "bond"
    RING = "ring_closure"
    BRANCH_OPEN = "branch_open"
    BRANCH_CLOSE = "branch_close"
    DOT = "dot"


@dataclass(frozen=True)
class SmilesToken:
    kind: TokenKind
    text: str
    pos: int


def tokenize(text: str) -> list[SmilesToken]:
    """Split SMILES text into tokens with source positions.

    Token spans are contiguous and cover the whole input; any character
    that starts no valid token raises SmilesSyntaxError at its position.
    """
    tokens: list[SmilesToken] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "[":
            end = text.find("]", i)
            if end < 0:
                raise SmilesSyntaxError("unclosed bracket atom", i)
            tokens.append(SmilesToken(TokenKind.ATOM_BRACKET, text[i : end + 1], i))
            i = end + 1
        elif text[i : i + 2] in _ORGANIC_TWO:
            tokens.append(SmilesToken(TokenKind.ATOM_ORGANIC, text[i : i + 2], i))
            i += 2
        elif c in _ORGANIC_ONE or c in _ORGANIC_AROMATIC:
            tokens.append(SmilesToken(TokenKind.ATOM_ORGANIC, c, i))
            i += 1
        elif c in "-=#:/\\":
            tokens.append(SmilesToken(TokenKind.BOND, c, i))
            i += 1
        elif c.isdigit():
            tokens.append(SmilesToken(TokenKind.RING, c, i))
            i += 1
        elif c == "%":
            if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                raise SmilesSyntaxError("%% ring closure needs two digits", i)
            tokens.append(SmilesToken(TokenKind.RING, text[i : i + 3], i))
            i += 3
        elif c == "(":
            tokens.append(SmilesToken(TokenKind.BRANCH_OPEN, c, i))
            i += 1
        elif c == ")":
            tokens.append(SmilesToken(TokenKind.BRANCH_CLOSE, c, i))
            i += 1
        elif c == ".":
            tokens.append(SmilesToken(TokenKind.DOT, c, i))
            i += 1
        else:
            raise SmilesSyntaxError(f"unknown symbol {c!r}", i)
    return tokens


def _parse_charge(text: str, pos: int) -> int:
    if text[0] in "+-" and len(text) > 1 and text[1:].isdigit():
        charge = int(text[1:])
    else:
        charge = len(text)
    if text[0] == "-":
        charge = -charge
    if abs(charge) > MAX_CHARGE:
        raise ChargeOverflowError(f"|charge| {abs(charge)} exceeds {MAX_CHARGE}", pos)
    return charge


def _parse_bracket(token: SmilesToken) -> tuple[AtomDraft, bool]:
    """Decompose a bracket token; returns the atom and a stereo-seen flag."""
    m = _BRACKET_RE.match(token.text)
    if m is None:
        raise SmilesSyntaxError(f"malformed bracket atom {token.text!r}", token.pos)
    symbol = m.group("symbol")
    aromatic = False
    if symbol[0].islower():
        element = _LOWERCASE_AROMATIC.get(symbol)
        if element is None:
            raise SmilesSyntaxError(f"unknown aromatic symbol {symbol!r}", token.pos)
        aromatic = True
    else:
        element = atomic_number(symbol)
        if element is None:
            raise SmilesSyntaxError(f"unknown element symbol {symbol!r}", token.pos)
    iso = m.group("isotope")
    hspec = m.group("hcount")
    if hspec is None:
        hcount = 0
    elif hspec == "H":
        hcount = 1
    else:
        hcount = int(hspec[1:])
    charge = 0
    if m.group("charge"):
        charge = _parse_charge(m.group("charge"), token.pos)
    atom = AtomDraft(
        element=element,
        formal_charge=charge,
        isotope=int(iso) if iso else None,
        explicit_h=hcount,
        aromatic_flag=aromatic,
    )
    return atom, m.group("stereo") is not None


def _parse_organic(token: SmilesToken) -> AtomDraft:
    sym = token.text
    if sym in _LOWERCASE_AROMATIC and len(sym) == 1:
        return AtomDraft(element=_LOWERCASE_AROMATIC[sym], aromatic_flag=True)
    element = atomic_number(sym)
    assert element is not None  # tokenizer only emits known symbols
    return AtomDraft(element=element)


_BOND_CHARS = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
}


def parse_smiles(text: str) -> MoleculeDraft:
    """Parse SMILES text into a molecule draft.

    Ring-closure bonds are resolved, branches attached, and dots produce
    disconnected components.  An unspecified bond between two aromatic
    atoms is provisionally aromatic (sanitize demotes it to single when
    it lies outside every ring).
    """
    stripped = text.strip()
    if not stripped:
        raise SmilesSyntaxError("empty SMILES", 0)
    offset = text.index(stripped[0])
    draft = MoleculeDraft(source_text=stripped)
    anchor: int | None = None
    pending: tuple[BondOrder, int] | None = None
    branch_stack: list[int] = []
    open_rings: dict[int, tuple[int, BondOrder | None, int]] = {}

    def take_pending() -> BondOrder | None:
        nonlocal pending
        if pending is None:
            return None
        order = pending[0]
        pending = None
        return order

    def attach(new_idx: int, pos: int) -> None:
        nonlocal anchor
        if anchor is not None:
            order = take_pending()
            if order is None:
                both_aromatic = (
                    draft.atoms[anchor].aromatic_flag and draft.atoms[new_idx].aromatic_flag
                )
                order = BondOrder.AROMATIC if both_aromatic else BondOrder.SINGLE
            try:
                draft.add_bond(anchor, new_idx, order)
            except ValueError as exc:
                raise SmilesSyntaxError(str(exc), pos) from None
        anchor = new_idx

    for tok in tokenize(stripped):
        pos = tok.pos + offset
        if tok.kind is TokenKind.ATOM_BRACKET:
            atom, stereo = _parse_bracket(tok)
            if stereo:
                draft.stereo_ignored = True
            attach(draft.add_atom(atom), pos)
        elif tok.kind is TokenKind.ATOM_ORGANIC:
            attach(draft.add_atom(_parse_organic(tok)), pos)
        elif tok.kind is TokenKind.BOND:
            if pending is not None:
                raise SmilesSyntaxError("two bond symbols in a row", pos)
            if anchor is None:
                raise SmilesSyntaxError("bond symbol before any atom", pos)
            if tok.text in "/\\":
                draft.stereo_ignored = True
                pending = (BondOrder.SINGLE, pos)
            else:
                pending = (_BOND_CHARS[tok.text], pos)
        elif tok.kind is TokenKind.RING:
            num = int(tok.text[1:]) if tok.text.startswith("%") else int(tok.text)
            if anchor is None:
                raise SmilesSyntaxError("ring closure before any atom", pos)
            if num in open_rings:
                other, other_order, other_pos = open_rings.pop(num)
                this_order = take_pending()
                if other_order is not None and this_order is not None and other_order is not this_order:
                    raise SmilesSyntaxError(
                        f"conflicting bond orders on ring closure {num}", pos
                    )
                order = this_order if this_order is not None else other_order
                if order is None:
                    both_aromatic = (
                        draft.atoms[anchor].aromatic_flag
                        and draft.atoms[other].aromatic_flag
                    )
                    order = BondOrder.AROMATIC if both_aromatic else BondOrder.SINGLE
                try:
                    draft.add_bond(anchor, other, order)
                except ValueError as exc:
                    raise SmilesSyntaxError(str(exc), pos) from None
            else:
                open_rings[num] = (anchor, take_pending(), pos)
        elif tok.kind is TokenKind.BRANCH_OPEN:
            if anchor is None:
                raise SmilesSyntaxError("branch before any atom", pos)
            if pending is not None:
                raise SmilesSyntaxError("bond symbol before branch open", pos)
            branch_stack.append(anchor)
        elif tok.kind is TokenKind.BRANCH_CLOSE:
            if not branch_stack:
                raise UnbalancedParenError("unmatched ')'", pos)
            if pending is not None:
                raise SmilesSyntaxError("dangling bond symbol before ')'", pos)
            anchor = branch_stack.pop()
        elif tok.kind is TokenKind.DOT:
            if pending is not None:
                raise SmilesSyntaxError("bond symbol before '.'", pos)
            anchor = None

    if pending is not None:
        raise SmilesSyntaxError("dangling bond symbol at end of input", pending[1])
    if open_rings:
        num, (_, _, pos) = min(open_rings.items(), key=lambda kv: kv[1][2])
        raise UnclosedRingError(f"ring closure {num} never matched", pos)
    if branch_stack:
        raise UnbalancedParenError("unclosed '('", len(text) - 1)
    return draft


def _dense_ranks(keys: list) -> list[int]:
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def _refine(mol: Molecule, ranks: list[int]) -> list[int]:
    """Iterative neighborhood refinement until the partition stabilizes."""
    while True:
        sigs = [
            (
                ranks[i],
                tuple(
                    sorted(
                        (mol.bonds[bidx].order.code, ranks[nbr])
                        for nbr, bidx in mol.neighbors[i]
                    )
                ),
            )
            for i in range(mol.n_atoms)
        ]
        new = _dense_ranks(sigs)
        if new == ranks:
            return ranks
        ranks = new


def canonical_ranks(mol: Molecule) -> list[int]:
    """Canonical per-atom ranks (a permutation of 0..n-1).

    Seeded by (element, degree, charge, implicit hydrogens, aromatic),
    refined by neighbor rank multisets; remaining ties are broken by
    individualizing the smallest original index of the first non-trivial
    class and re-refining.
    """
    n = mol.n_atoms
    seeds = [
        (a.element, a.degree, a.charge, a.implicit_h, a.aromatic) for a in mol.atoms
    ]
    ranks = _refine(mol, _dense_ranks(seeds))
    while len(set(ranks)) < n:
        by_rank: dict[int, list[int]] = {}
        for i, r in enumerate(ranks):
            by_rank.setdefault(r, []).append(i)
        tied = min(r for r, members in by_rank.items() if len(members) > 1)
        chosen = min(by_rank[tied])
        bumped = [r * 2 + (0 if i == chosen else 1) for i, r in enumerate(ranks)]
        ranks = _refine(mol, _dense_ranks(bumped))
    return ranks


def _default_h(mol: Molecule, idx: int) -> int | None:
    n_arom = 0
    other = 0
    for _, bidx in mol.neighbors[idx]:
        order = mol.bonds[bidx].order
        if order is BondOrder.AROMATIC:
            n_arom += 1
        else:
            other += order.value
    return default_implicit_h(mol.atoms[idx].element, 0, n_arom, other)


def _atom_label(mol: Molecule, idx: int) -> str:
    a = mol.atoms[idx]
    sym = symbol_of(a.element)
    if a.aromatic:
        sym = sym.lower()
    plain = (
        a.element in ORGANIC_SUBSET
        and a.charge == 0
        and a.isotope is None
        and _default_h(mol, idx) == a.implicit_h
    )
    if plain:
        return sym
    parts = ["["]
    if a.isotope is not None:
        parts.append(str(a.isotope))
    parts.append(sym)
    if a.implicit_h == 1:
        parts.append("H")
    elif a.implicit_h > 1:
        parts.append(f"H{a.implicit_h}")
    if a.charge == 1:
        parts.append("+")
    elif a.charge == -1:
        parts.append("-")
    elif a.charge > 1:
        parts.append(f"+{a.charge}")
    elif a.charge < -1:
        parts.append(f"-{-a.charge}")
    parts.append("]")
    return "".join(parts)


def _bond_symbol(mol: Molecule, bond: Bond) -> str:
    if bond.order is BondOrder.DOUBLE:
        return "="
    if bond.order is BondOrder.TRIPLE:
        return "#"
    if bond.order is BondOrder.SINGLE:
        if mol.atoms[bond.i].aromatic and mol.atoms[bond.j].aromatic:
            return "-"
    return ""


def write_canonical_smiles(mol: Molecule) -> str:
    """Canonical SMILES: DFS from the lowest-rank atom of each component,
    neighbors in rank order, components ordered by their lowest rank.

    The output depends only on the abstract graph, not on input atom
    order (given that tied rank classes are automorphic, which iterative
    refinement ensures for molecular graphs)."""
    n = mol.n_atoms
    if n == 0:
        return ""
    ranks = canonical_ranks(mol)

    visit_order = [-1] * n
    children: list[list[int]] = [[] for _ in range(n)]
    ring_partners: list[list[int]] = [[] for _ in range(n)]
    roots: list[int] = []
    counter = 0
    seen = [False] * n
    for root in sorted(range(n), key=lambda i: ranks[i]):
        if seen[root]:
            continue
        roots.append(root)
        seen[root] = True
        visit_order[root] = counter
        counter += 1
        stack = [(root, -1, iter(sorted((nbr for nbr, _ in mol.neighbors[root]), key=lambda x: ranks[x])))]
        while stack:
            cur, parent, it = stack[-1]
            advanced = False
            for nbr in it:
                if nbr == parent:
                    continue
                if seen[nbr]:
                    if visit_order[nbr] < visit_order[cur] and cur not in ring_partners[nbr]:
                        # Back edge: record at both endpoints.
                        ring_partners[nbr].append(cur)
                        ring_partners[cur].append(nbr)
                    continue
                seen[nbr] = True
                visit_order[nbr] = counter
                counter += 1
                children[cur].append(nbr)
                stack.append(
                    (nbr, cur, iter(sorted((x for x, _ in mol.neighbors[nbr]), key=lambda x: ranks[x])))
                )
                advanced = True
                break
            if not advanced:
                stack.pop()

    ring_numbers: dict[tuple[int, int], int] = {}
    next_ring = 1

    def ring_digit_str(num: int) -> str:
        if num < 10:
            return str(num)
        if num < 100:
            return f"%{num:02d}"
        raise ValueError("more than 99 open ring closures")

    def atom_text(idx: int) -> str:
        nonlocal next_ring
        parts = [_atom_label(mol, idx)]
        for partner in sorted(ring_partners[idx], key=lambda p: visit_order[p]):
            key = (min(idx, partner), max(idx, partner))
            bond = mol.bond_between(idx, partner)
            assert bond is not None
            if key not in ring_numbers:
                ring_numbers[key] = next_ring
                next_ring += 1
                parts.append(_bond_symbol(mol, bond))
            parts.append(ring_digit_str(ring_numbers[key]))
        return "".join(parts)

    fragments: list[str] = []
    for root in roots:
        parts: list[str] = []
        ops: list[tuple[str, ...]] = [("atom", str(root), "")]
        while ops:
            op = ops.pop()
            if op[0] == "text":
                parts.append(op[1])
                continue
            idx = int(op[1])
            parts.append(op[2] + atom_text(idx))
            kids = children[idx]
            for i in range(len(kids) - 1, -1, -1):
                kid = kids[i]
                bond = mol.bond_between(idx, kid)
                assert bond is not None
                sym = _bond_symbol(mol, bond)
                if i < len(kids) - 1:
                    ops.append(("text", ")"))
                    ops.append(("atom", str(kid), sym))
                    ops.append(("text", "("))
                else:
                    ops.append(("atom", str(kid), sym))
        fragments.append("".join(parts))
    return ".".join(fragments)
