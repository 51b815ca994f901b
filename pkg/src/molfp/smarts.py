"""SMARTS-subset pattern compiler and subgraph matcher.

Atom primitives: #n, element symbols (aromatic lowercase), a/A, *,
D<n>, H<n>, X<n>, R/R<n>, r/r<n>, +/- charges.  Bond primitives:
- = # : ~ @.  Operators: ! (not), & or juxtaposition (and), , (or),
; (low-precedence and).  Recursive SMARTS, stereo, isotopes, and
component grouping are rejected as unsupported.

Matching enumerates injective homomorphisms (pattern bonds must exist
and match in the target; extra target bonds are allowed) by
backtracking, assigning the most constrained query atoms first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .chem import BondOrder, Molecule, atomic_number
from .errors import KeySetError, SmartsSyntaxError, UnsupportedPrimitiveError

_LOWERCASE_AROMATIC = {
    "b": 5, "c": 6, "n": 7, "o": 8, "p": 15, "s": 16, "se": 34, "as": 33,
}
_BARE_TWO = ("Cl", "Br")
_BARE_ONE = set("BCNOPSFI")
_BOND_CHARS = set("-=#:~@!&,;")


@dataclass(frozen=True)
class Prim:
    """Leaf predicate; ``value`` meaning depends on ``kind``."""

    kind: str
    value: int = 0


@dataclass(frozen=True)
class Not:
    arg: "Prim | Not | And | Or"


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


class MoleculeView:
    """Per-molecule property arrays the compiled predicates read.

    Building one is cheap but not free; callers matching many patterns
    against the same molecule should build it once and reuse it.
    """

    def __init__(self, mol: Molecule):
        n = mol.n_atoms
        self.n = n
        self.element = [a.element for a in mol.atoms]
        self.aromatic = [a.aromatic for a in mol.atoms]
        self.degree = [a.degree for a in mol.atoms]
        self.charge = [a.charge for a in mol.atoms]
        self.total_h = list(mol.total_h)
        self.connectivity = [
            len(mol.neighbors[i]) + mol.atoms[i].implicit_h for i in range(n)
        ]
        self.in_ring = list(mol.rings.atom_in_ring)
        self.ring_count = list(mol.rings.atom_ring_count)
        self.smallest_ring = list(mol.rings.smallest_ring_size)
        self.bond_order = [b.order for b in mol.bonds]
        self.bond_in_ring = list(mol.rings.bond_in_ring)
        self.neighbors = mol.neighbors


def _compile_atom(expr):
    if isinstance(expr, Prim):
        kind, value = expr.kind, expr.value
        if kind == "element":
            return lambda v, i: v.element[i] == value
        if kind == "symbol_aliphatic":
            return lambda v, i: v.element[i] == value and not v.aromatic[i]
        if kind == "symbol_aromatic":
            return lambda v, i: v.element[i] == value and v.aromatic[i]
        if kind == "aromatic":
            return lambda v, i: v.aromatic[i]
        if kind == "aliphatic":
            return lambda v, i: not v.aromatic[i]
        if kind == "wildcard":
            return lambda v, i: True
        if kind == "degree":
            return lambda v, i: v.degree[i] == value
        if kind == "total_h":
            return lambda v, i: v.total_h[i] == value
        if kind == "connectivity":
            return lambda v, i: v.connectivity[i] == value
        if kind == "in_ring":
            return lambda v, i: v.in_ring[i]
        if kind == "ring_count":
            return lambda v, i: v.ring_count[i] == value
        if kind == "ring_size":
            return lambda v, i: v.smallest_ring[i] == value
        if kind == "charge":
            return lambda v, i: v.charge[i] == value
        raise AssertionError(f"unknown atom primitive {kind}")
    if isinstance(expr, Not):
        inner = _compile_atom(expr.arg)
        return lambda v, i: not inner(v, i)
    if isinstance(expr, And):
        parts = [_compile_atom(a) for a in expr.args]
        return lambda v, i: all(p(v, i) for p in parts)
    if isinstance(expr, Or):
        parts = [_compile_atom(a) for a in expr.args]
        return lambda v, i: any(p(v, i) for p in parts)
    raise AssertionError(f"bad atom expression {expr!r}")


def _compile_bond(expr):
    if isinstance(expr, Prim):
        kind = expr.kind
        if kind == "single":
            return lambda v, b: v.bond_order[b] is BondOrder.SINGLE
        if kind == "double":
            return lambda v, b: v.bond_order[b] is BondOrder.DOUBLE
        if kind == "triple":
            return lambda v, b: v.bond_order[b] is BondOrder.TRIPLE
        if kind == "aromatic":
            return lambda v, b: v.bond_order[b] is BondOrder.AROMATIC
        if kind == "any":
            return lambda v, b: True
        if kind == "ring":
            return lambda v, b: v.bond_in_ring[b]
        raise AssertionError(f"unknown bond primitive {kind}")
    if isinstance(expr, Not):
        inner = _compile_bond(expr.arg)
        return lambda v, b: not inner(v, b)
    if isinstance(expr, And):
        parts = [_compile_bond(a) for a in expr.args]
        return lambda v, b: all(p(v, b) for p in parts)
    if isinstance(expr, Or):
        parts = [_compile_bond(a) for a in expr.args]
        return lambda v, b: any(p(v, b) for p in parts)
    raise AssertionError(f"bad bond expression {expr!r}")


def _implies_aromatic(expr) -> bool:
    """Whether every atom satisfying the expression is aromatic.

    Conservative: returns False when unsure.  Used only to pick the
    default bond expression between adjacent query atoms.
    """
    if isinstance(expr, Prim):
        return expr.kind in ("symbol_aromatic", "aromatic")
    if isinstance(expr, And):
        return any(_implies_aromatic(a) for a in expr.args)
    if isinstance(expr, Or):
        return bool(expr.args) and all(_implies_aromatic(a) for a in expr.args)
    return False


@dataclass(frozen=True)
class MatchSet:
    """All mappings of a pattern onto a molecule.

    ``mappings`` are tuples indexed by query atom; ``unique_atom_sets``
    deduplicates them by the set of matched target atoms, in first
    discovery order.
    """

    mappings: tuple[tuple[int, ...], ...]
    unique_atom_sets: tuple[frozenset[int], ...]


@dataclass
class SmartsPattern:
    """Compiled query graph over atom and bond predicate expressions."""

    text: str
    atom_exprs: tuple
    bond_list: tuple[tuple[int, int], ...]
    bond_exprs: tuple
    adjacency: tuple[tuple[tuple[int, int], ...], ...]
    _atom_preds: list = field(default=None, repr=False, compare=False)
    _bond_preds: list = field(default=None, repr=False, compare=False)

    @property
    def n_atoms(self) -> int:
        return len(self.atom_exprs)

    def atom_preds(self) -> list:
        if self._atom_preds is None:
            self._atom_preds = [_compile_atom(e) for e in self.atom_exprs]
        return self._atom_preds

    def bond_preds(self) -> list:
        if self._bond_preds is None:
            self._bond_preds = [_compile_bond(e) for e in self.bond_exprs]
        return self._bond_preds

    def __getstate__(self):
        # Compiled closures are rebuilt lazily after unpickling.
        return (self.text, self.atom_exprs, self.bond_list, self.bond_exprs, self.adjacency)

    def __setstate__(self, state):
        self.text, self.atom_exprs, self.bond_list, self.bond_exprs, self.adjacency = state
        self._atom_preds = None
        self._bond_preds = None


class _AtomExprScanner:
    """Recursive-descent parser for one bracket atom expression."""

    def __init__(self, text: str, base_pos: int):
        self.text = text
        self.i = 0
        self.base = base_pos

    def error(self, msg: str):
        raise SmartsSyntaxError(msg, self.base + self.i)

    def unsupported(self, what: str):
        raise UnsupportedPrimitiveError(
            f"unsupported SMARTS primitive {what!r}", self.base + self.i
        )

    def peek(self) -> str:
        return self.text[self.i] if self.i < len(self.text) else ""

    def _number(self) -> int | None:
        j = self.i
        while j < len(self.text) and self.text[j].isdigit():
            j += 1
        if j == self.i:
            return None
        value = int(self.text[self.i : j])
        self.i = j
        return value

    def parse(self):
        expr = self.expr_semi()
        if self.i != len(self.text):
            self.error(f"unexpected {self.peek()!r} in atom expression")
        return expr

    def expr_semi(self):
        parts = [self.expr_or()]
        while self.peek() == ";":
            self.i += 1
            parts.append(self.expr_or())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def expr_or(self):
        parts = [self.expr_and()]
        while self.peek() == ",":
            self.i += 1
            parts.append(self.expr_and())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def expr_and(self):
        parts = [self.unary()]
        while True:
            c = self.peek()
            if c == "&":
                self.i += 1
                parts.append(self.unary())
            elif c and c not in ",;":
                parts.append(self.unary())
            else:
                break
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self):
        if self.peek() == "!":
            self.i += 1
            return Not(self.unary())
        return self.primitive()

    def primitive(self):
        c = self.peek()
        if not c:
            self.error("truncated atom expression")
        if c == "$":
            self.unsupported("$(...) recursive SMARTS")
        if c == "@":
            self.unsupported("@ chirality")
        if c.isdigit():
            self.unsupported("isotope specification")
        if c == "#":
            self.i += 1
            num = self._number()
            if num is None:
                self.error("# needs an atomic number")
            return Prim("element", num)
        if c == "*":
            self.i += 1
            return Prim("wildcard")
        if c in "+-":
            sign = 1 if c == "+" else -1
            self.i += 1
            num = self._number()
            if num is None:
                num = 1
                while self.peek() == c:
                    num += 1
                    self.i += 1
            return Prim("charge", sign * num)
        # Two-letter element symbols win over primitive letters.
        two = self.text[self.i : self.i + 2]
        if len(two) == 2 and two[0].isupper() and two[1].islower():
            elem = atomic_number(two)
            if elem is not None:
                self.i += 2
                return Prim("symbol_aliphatic", elem)
        if two in ("se", "as"):
            self.i += 2
            return Prim("symbol_aromatic", _LOWERCASE_AROMATIC[two])
        if c == "a":
            self.i += 1
            return Prim("aromatic")
        if c == "A":
            self.i += 1
            return Prim("aliphatic")
        if c == "D":
            self.i += 1
            num = self._number()
            return Prim("degree", 1 if num is None else num)
        if c == "H":
            self.i += 1
            num = self._number()
            return Prim("total_h", 1 if num is None else num)
        if c == "X":
            self.i += 1
            num = self._number()
            return Prim("connectivity", 1 if num is None else num)
        if c == "R":
            self.i += 1
            num = self._number()
            if num is None:
                return Prim("in_ring")
            return Prim("ring_count", num)
        if c == "r":
            self.i += 1
            num = self._number()
            if num is None:
                return Prim("in_ring")
            return Prim("ring_size", num)
        if c in _LOWERCASE_AROMATIC:
            self.i += 1
            return Prim("symbol_aromatic", _LOWERCASE_AROMATIC[c])
        if c.isupper():
            elem = atomic_number(c)
            if elem is not None:
                self.i += 1
                return Prim("symbol_aliphatic", elem)
        self.unsupported(c)


def _parse_bond_expr(text: str, base_pos: int):
    """Parse a run of bond-expression characters; None for empty text."""
    if not text:
        return None
    prim_map = {
        "-": Prim("single"),
        "=": Prim("double"),
        "#": Prim("triple"),
        ":": Prim("aromatic"),
        "~": Prim("any"),
        "@": Prim("ring"),
    }
    pos = 0

    def peek() -> str:
        return text[pos] if pos < len(text) else ""

    def unary():
        nonlocal pos
        if peek() == "!":
            pos += 1
            return Not(unary())
        c = peek()
        if c in prim_map:
            pos += 1
            return prim_map[c]
        raise SmartsSyntaxError(f"bad bond expression char {c!r}", base_pos + pos)

    def expr_and():
        nonlocal pos
        parts = [unary()]
        while True:
            c = peek()
            if c == "&":
                pos += 1
                parts.append(unary())
            elif c and c not in ",;":
                parts.append(unary())
            else:
                break
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def expr_or():
        nonlocal pos
        parts = [expr_and()]
        while peek() == ",":
            pos += 1
            parts.append(expr_and())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def expr_semi():
        nonlocal pos
        parts = [expr_or()]
        while peek() == ";":
            pos += 1
            parts.append(expr_or())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    expr = expr_semi()
    if pos != len(text):
        raise SmartsSyntaxError("trailing bond expression characters", base_pos + pos)
    return expr


def parse_smarts(text: str) -> SmartsPattern:
    """Compile SMARTS text into a query pattern graph."""
    stripped = text.strip()
    if not stripped:
        raise SmartsSyntaxError("empty SMARTS", 0)

    atoms: list = []
    bonds: list[tuple[int, int, object]] = []
    anchor: int | None = None
    pending: str = ""
    pending_pos = 0
    branch_stack: list[int] = []
    open_rings: dict[int, tuple[int, str, int]] = {}
    i = 0
    n = len(stripped)

    def add_atom(expr) -> None:
        nonlocal anchor, pending
        atoms.append(expr)
        idx = len(atoms) - 1
        if anchor is not None:
            bonds.append((anchor, idx, _parse_bond_expr(pending, pending_pos)))
        pending = ""
        anchor = idx

    while i < n:
        c = stripped[i]
        if c == "[":
            end = stripped.find("]", i)
            if end < 0:
                raise SmartsSyntaxError("unclosed bracket", i)
            add_atom(_AtomExprScanner(stripped[i + 1 : end], i + 1).parse())
            i = end + 1
        elif c == "$":
            raise UnsupportedPrimitiveError("$(...) recursive SMARTS", i)
        elif c == ".":
            raise UnsupportedPrimitiveError("'.' component grouping", i)
        elif c in "/\\":
            raise UnsupportedPrimitiveError("stereo bond", i)
        elif stripped[i : i + 2] in _BARE_TWO:
            add_atom(Prim("symbol_aliphatic", atomic_number(stripped[i : i + 2])))
            i += 2
        elif c in _BARE_ONE:
            add_atom(Prim("symbol_aliphatic", atomic_number(c)))
            i += 1
        elif c in "bcnops":
            add_atom(Prim("symbol_aromatic", _LOWERCASE_AROMATIC[c]))
            i += 1
        elif c == "*":
            add_atom(Prim("wildcard"))
            i += 1
        elif c == "a":
            add_atom(Prim("aromatic"))
            i += 1
        elif c == "A":
            add_atom(Prim("aliphatic"))
            i += 1
        elif c in _BOND_CHARS:
            if anchor is None:
                raise SmartsSyntaxError("bond expression before any atom", i)
            j = i
            while j < n and stripped[j] in _BOND_CHARS:
                j += 1
            pending = stripped[i:j]
            pending_pos = i
            i = j
        elif c.isdigit() or c == "%":
            if c == "%":
                if i + 2 >= n or not stripped[i + 1 : i + 3].isdigit():
                    raise SmartsSyntaxError("%% ring closure needs two digits", i)
                num = int(stripped[i + 1 : i + 3])
                i += 3
            else:
                num = int(c)
                i += 1
            if anchor is None:
                raise SmartsSyntaxError("ring closure before any atom", i)
            if num in open_rings:
                other, other_run, other_pos = open_rings.pop(num)
                if other_run and pending and other_run != pending:
                    raise SmartsSyntaxError(
                        f"conflicting bond expressions on ring closure {num}", i
                    )
                run = pending or other_run
                run_pos = pending_pos if pending else other_pos
                if other == anchor:
                    raise SmartsSyntaxError(f"ring closure {num} forms a self-loop", i)
                bonds.append((anchor, other, _parse_bond_expr(run, run_pos)))
                pending = ""
            else:
                open_rings[num] = (anchor, pending, pending_pos)
                pending = ""
        elif c == "(":
            if anchor is None:
                raise SmartsSyntaxError("branch before any atom", i)
            branch_stack.append(anchor)
            i += 1
        elif c == ")":
            if not branch_stack:
                raise SmartsSyntaxError("unmatched ')'", i)
            anchor = branch_stack.pop()
            i += 1
        else:
            raise SmartsSyntaxError(f"unknown symbol {c!r}", i)

    if pending:
        raise SmartsSyntaxError("dangling bond expression", pending_pos)
    if open_rings:
        num, (_, _, pos) = min(open_rings.items(), key=lambda kv: kv[1][2])
        raise SmartsSyntaxError(f"ring closure {num} never matched", pos)
    if branch_stack:
        raise SmartsSyntaxError("unclosed '('", n - 1)
    if not atoms:
        raise SmartsSyntaxError("no atoms in pattern", 0)

    resolved_bonds: list[tuple[int, int]] = []
    bond_exprs: list = []
    for qi, qj, expr in bonds:
        if expr is None:
            if _implies_aromatic(atoms[qi]) and _implies_aromatic(atoms[qj]):
                expr = Or((Prim("aromatic"), Prim("single")))
            else:
                expr = Prim("single")
        resolved_bonds.append((qi, qj))
        bond_exprs.append(expr)

    adjacency: list[list[tuple[int, int]]] = [[] for _ in atoms]
    for bidx, (qi, qj) in enumerate(resolved_bonds):
        adjacency[qi].append((qj, bidx))
        adjacency[qj].append((qi, bidx))

    return SmartsPattern(
        text=stripped,
        atom_exprs=tuple(atoms),
        bond_list=tuple(resolved_bonds),
        bond_exprs=tuple(bond_exprs),
        adjacency=tuple(tuple(sorted(a)) for a in adjacency),
    )


def _assignment_order(pattern: SmartsPattern, candidates: list[list[int]]) -> list[int]:
    """Query atom processing order: most constrained first, then grow
    along pattern adjacency, preferring the fewest candidates."""
    qn = pattern.n_atoms
    placed: set[int] = set()
    order: list[int] = []
    while len(order) < qn:
        frontier = [
            q
            for q in range(qn)
            if q not in placed
            and (not placed or any(nbr in placed for nbr, _ in pattern.adjacency[q]))
        ]
        if not frontier:  # disconnected pattern component
            frontier = [q for q in range(qn) if q not in placed]
        pick = min(frontier, key=lambda q: (len(candidates[q]), q))
        order.append(pick)
        placed.add(pick)
    return order


def _search(
    pattern: SmartsPattern, view: MoleculeView, first_only: bool
) -> list[tuple[int, ...]]:
    qn = pattern.n_atoms
    if view.n == 0:
        return []
    apreds = pattern.atom_preds()
    bpreds = pattern.bond_preds()
    candidates = [
        [t for t in range(view.n) if apreds[q](view, t)] for q in range(qn)
    ]
    if any(not c for c in candidates):
        return []
    order = _assignment_order(pattern, candidates)

    # For each step, the already-placed pattern neighbors to check.
    placed_nbrs: list[list[tuple[int, int]]] = []
    placed: set[int] = set()
    for q in order:
        placed_nbrs.append(
            [(nbr, bidx) for nbr, bidx in pattern.adjacency[q] if nbr in placed]
        )
        placed.add(q)

    assignment = [-1] * qn
    used = [False] * view.n
    results: list[tuple[int, ...]] = []

    def bond_between(t1: int, t2: int) -> int | None:
        for nbr, bidx in view.neighbors[t1]:
            if nbr == t2:
                return bidx
        return None

    def backtrack(step: int) -> bool:
        """Returns True (stop now) only in first_only mode once a match lands."""
        q = order[step]
        checks = placed_nbrs[step]
        if checks:
            anchor_q, anchor_bidx = checks[0]
            pool = [
                t
                for t, tb in view.neighbors[assignment[anchor_q]]
                if not used[t] and bpreds[anchor_bidx](view, tb)
            ]
        else:
            pool = [t for t in candidates[q] if not used[t]]
        for t in pool:
            if not apreds[q](view, t):
                continue
            ok = True
            for nbr_q, bidx in checks[1:] if checks else ():
                tb = bond_between(t, assignment[nbr_q])
                if tb is None or not bpreds[bidx](view, tb):
                    ok = False
                    break
            if not ok:
                continue
            assignment[q] = t
            used[t] = True
            done = False
            if step + 1 == qn:
                results.append(tuple(assignment))
                done = first_only
            else:
                done = backtrack(step + 1)
            used[t] = False
            assignment[q] = -1
            if done:
                return True
        return False

    backtrack(0)
    return results


def match(pattern: SmartsPattern, mol: Molecule, view: MoleculeView | None = None) -> MatchSet:
    """Enumerate all injective matches of a pattern in a molecule."""
    if view is None:
        view = MoleculeView(mol)
    mappings = _search(pattern, view, first_only=False)
    seen: set[frozenset[int]] = set()
    unique: list[frozenset[int]] = []
    for m in mappings:
        s = frozenset(m)
        if s not in seen:
            seen.add(s)
            unique.append(s)
    return MatchSet(mappings=tuple(mappings), unique_atom_sets=tuple(unique))


def has_match(pattern: SmartsPattern, mol: Molecule, view: MoleculeView | None = None) -> bool:
    """True when at least one mapping exists; stops at the first."""
    if view is None:
        view = MoleculeView(mol)
    return bool(_search(pattern, view, first_only=True))


def count_unique(pattern: SmartsPattern, mol: Molecule, view: MoleculeView | None = None) -> int:
    """Number of distinct matched target-atom sets."""
    return len(match(pattern, mol, view).unique_atom_sets)


@dataclass(frozen=True)
class SmartsKey:
    key_id: str
    smarts: str
    description: str
    pattern: SmartsPattern


def load_key_set(path: str | Path) -> tuple[SmartsKey, ...]:
    """Load and compile a key-set file.

    Format: one record per line, ``<key_id><TAB><smarts><TAB><description>``;
    lines starting with '#' and blank lines are skipped.  Any structural
    or SMARTS error raises KeySetError naming the offending line, so a
    bad file fails at load time and never mid-batch.
    """
    keys: list[SmartsKey] = []
    seen_ids: set[str] = set()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise KeySetError(f"cannot read key set {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise KeySetError(
                f"{path}:{lineno}: expected 3 tab-separated fields, got {len(fields)}"
            )
        key_id, smarts_text, description = (f.strip() for f in fields)
        if not key_id or key_id in seen_ids:
            raise KeySetError(f"{path}:{lineno}: missing or duplicate key id {key_id!r}")
        seen_ids.add(key_id)
        try:
            pattern = parse_smarts(smarts_text)
        except SmartsSyntaxError as exc:
            raise KeySetError(f"{path}:{lineno}: bad SMARTS {smarts_text!r}: {exc}") from exc
        keys.append(SmartsKey(key_id, smarts_text, description, pattern))
    if not keys:
        raise KeySetError(f"{path}: key set is empty")
    return tuple(keys)


def default_key_set_path() -> Path:
    """Path of the packaged functional-group key set."""
    return Path(resources.files("molfp") / "data" / "functional_groups.smarts")
