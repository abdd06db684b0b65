"""Input files and the session that resolves them.

Space files::

    points: eta sigma
    open:
    open U: eta
    open: eta sigma

Sheaf files (``<open>`` is an index into the canonical open order, a named
open, ``X`` or a point list such as ``{eta}``)::

    sheaf F on sierpinski
    sections X: a b
    sections U: a b c
    restrict X->U: a->a b->b
    op neg X: a->b b->a
    op neg U: a->b b->a c->c

Ring files hold one line ``ring <spec>``. Module files::

    module M over A
    elements: 0 1
    zero: 0
    add 0: 0 1
    add 1: 1 0
    act 0: 0 0
    act 1: 0 1
    map alpha M -> N: 0->0 1->1

Sheaves, modules and maps may refer to objects loaded later; ``resolve``
links everything once all files are read.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from toposforge.core.config import settings
from toposforge.core.errors import ConfigError, ResolutionError, SortError
from toposforge.services.corpus import vee
from toposforge.services.finring import FinModule, FinRing, ModuleMap, is_module_map, make_ring
from toposforge.services.frame import (
    FiniteSpace, Nucleus, discrete, indiscrete, nucleus_closed, nucleus_identity, nucleus_negneg,
    nucleus_open, nucleus_point, sierpinski, validate_space,
)
from toposforge.services.sheaf import Environment, FunctionSymbol, Sheaf, check_sheaf, from_tables

logger = logging.getLogger(__name__)

_OPEN_LINE = re.compile(r"open(?:\s+(?P<name>[A-Za-z_][\w']*))?\s*:(?P<points>.*)")
_SHEAF_HEAD = re.compile(r"sheaf\s+(?P<name>\S+)\s+on\s+(?P<space>\S+)")
_MODULE_HEAD = re.compile(r"module\s+(?P<name>\S+)\s+over\s+(?P<ring>\S+)")
_MAP_LINE = re.compile(r"map\s+(?P<name>\S+)\s+(?P<source>\S+)\s*->\s*(?P<target>\S+)\s*:(?P<entries>.*)")
_IDENTIFIER = re.compile(r"[A-Za-z_][\w']*")


def _named_sierpinski() -> FiniteSpace:
    return sierpinski({"U": ["eta"]})


BUILTIN_SPACES: dict[str, Callable[[], FiniteSpace]] = {
    "sierpinski": _named_sierpinski,
    "point": lambda: discrete(1),
    "discrete2": lambda: discrete(2),
    "discrete3": lambda: discrete(3),
    "indiscrete2": lambda: indiscrete(2),
    "vee": vee,
}


def _content_lines(text: str) -> list[tuple[int, str]]:
    lines = []
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((number, line))
    return lines


def _pairs(entries: str, origin: str) -> list[tuple[str, str]]:
    pairs = []
    for entry in entries.split():
        if "->" not in entry:
            raise ConfigError(f"{origin}: expected source->target, got {entry!r}")
        source, target = entry.split("->", 1)
        pairs.append((source, target))
    return pairs


# ===== Spaces =====

def parse_space(text: str, origin: str = "<space>") -> FiniteSpace:
    points: Optional[list[str]] = None
    opens: list[list[str]] = []
    names: dict[str, list[str]] = {}
    for number, line in _content_lines(text):
        if line.startswith("points:"):
            points = line[len("points:"):].split()
            continue
        match = _OPEN_LINE.fullmatch(line)
        if match is None:
            raise ConfigError(f"{origin}:{number}: expected 'points:' or 'open:' line")
        members = match["points"].split()
        opens.append(members)
        if match["name"]:
            names[match["name"]] = members
    if points is None:
        raise ConfigError(f"{origin}: missing 'points:' line")
    return validate_space(points, opens, names)


# ===== Nuclei =====

def resolve_nucleus(X: FiniteSpace, name: str) -> Nucleus:
    """negneg, id, open_U, closed_U (the closed complement of U) or point_x"""
    if name == "negneg":
        return nucleus_negneg(X)
    if name == "id":
        return nucleus_identity(X.frame)
    kind, _, argument = name.partition("_")
    if kind == "open" and argument:
        return nucleus_open(X, X.named_open(argument))
    if kind == "closed" and argument:
        return nucleus_closed(X, X.full - X.named_open(argument))
    if kind == "point" and argument:
        return nucleus_point(X, X.point_index(argument))
    raise ResolutionError(f"unknown nucleus {name!r}; use negneg, id, open_U, closed_U or point_x")


def standard_nucleus_names(X: FiniteSpace) -> list[str]:
    """Nucleus names a formula can mention in box[...]"""
    names = ["negneg", "id"]
    for U in sorted(X.names, key=lambda V: X.names[V]):
        names += [f"open_{X.names[U]}", f"closed_{X.names[U]}"]
    names += [f"point_{p}" for p in X.points]
    return [name for name in names if _IDENTIFIER.fullmatch(name)]


def register_nuclei(env: Environment) -> Environment:
    for name in standard_nucleus_names(env.space):
        env.add_nucleus(name, resolve_nucleus(env.space, name))
    return env


def resolve_open(X: FiniteSpace, ref: str, where: str = "open"):
    """An index into the canonical open order, X, a named open or a point list {a,b}"""
    if ref.isdigit():
        index = int(ref)
        if index >= len(X.opens):
            raise ConfigError(f"{where}: open index {index} out of range")
        return X.opens[index]
    if ref.startswith("{") and ref.endswith("}"):
        return X.open_of(p.strip() for p in ref[1:-1].split(",") if p.strip())
    return X.named_open(ref)


# ===== Session =====

@dataclass
class SheafRecord:
    name: str
    space: str
    sheaf: Sheaf
    operations: list[FunctionSymbol] = field(default_factory=list)


@dataclass
class Session:
    """Everything loaded for one command, addressed by name"""

    spaces: dict[str, FiniteSpace] = field(default_factory=dict)
    rings: dict[str, FinRing] = field(default_factory=dict)
    sheaves: dict[str, SheafRecord] = field(default_factory=dict)
    modules: dict[str, FinModule] = field(default_factory=dict)
    maps: dict[str, tuple[ModuleMap, str, str]] = field(default_factory=dict)
    schema_bound: Optional[int] = field(default_factory=lambda: settings.SCHEMA_BOUND)
    output_format: str = field(default_factory=lambda: settings.OUTPUT_FORMAT)
    _pending: list[tuple[str, str, str]] = field(default_factory=list, repr=False)

    # ----- loading -----

    def load(self, path: str | Path) -> str:
        """Read one file; returns the name it is registered under"""
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ResolutionError(f"cannot read {path}: {e.strerror}") from None
        return self.load_text(text, path.stem, str(path))

    def load_text(self, text: str, name: str, origin: str = "<text>") -> str:
        lines = _content_lines(text)
        if not lines:
            raise ConfigError(f"{origin}: empty input")
        head = lines[0][1]
        if head.startswith("points:"):
            self.spaces[name] = parse_space(text, origin)
        elif head.startswith("ring "):
            self.rings[name] = make_ring(head[len("ring "):])
        elif head.startswith("sheaf "):
            match = _SHEAF_HEAD.fullmatch(head)
            if match is None:
                raise ConfigError(f"{origin}:{lines[0][0]}: expected 'sheaf <name> on <space>'")
            name = match["name"]
            self._pending.append(("sheaf", text, origin))
        elif head.startswith("module "):
            match = _MODULE_HEAD.fullmatch(head)
            if match is None:
                raise ConfigError(f"{origin}:{lines[0][0]}: expected 'module <name> over <ring>'")
            name = match["name"]
            self._pending.append(("module", text, origin))
        else:
            raise ConfigError(f"{origin}:{lines[0][0]}: cannot tell what kind of file this is")
        logger.debug("loaded %s from %s", name, origin)
        return name

    def resolve(self) -> None:
        """Link pending sheaves, modules and maps; raises on dangling names"""
        pending, self._pending = self._pending, []
        map_lines: list[tuple[str, str, int]] = []
        for kind, text, origin in pending:
            if kind == "module":
                map_lines += self._build_module(text, origin)
        for line, origin, number in map_lines:
            self._build_map(line, origin, number)
        for kind, text, origin in pending:
            if kind == "sheaf":
                self._build_sheaf(text, origin)

    # ----- lookup -----

    def space(self, ref: str) -> FiniteSpace:
        """A loaded space, a builtin name, a space file path or space file text"""
        if ref in self.spaces:
            return self.spaces[ref]
        if ref in BUILTIN_SPACES:
            self.spaces[ref] = BUILTIN_SPACES[ref]()
            return self.spaces[ref]
        if "points:" in ref:
            return parse_space(ref)
        path = Path(ref)
        if path.is_file():
            name = self.load(path)
            self.resolve()
            if name not in self.spaces:
                raise ConfigError(f"{ref} is not a space file")
            return self.spaces[name]
        raise ResolutionError(f"unknown space {ref!r}; builtins are {', '.join(BUILTIN_SPACES)}")

    def space_name(self, X: FiniteSpace) -> Optional[str]:
        for name, Y in self.spaces.items():
            if Y is X:
                return name
        return None

    def ring(self, ref: str) -> FinRing:
        """A loaded ring, a ring file path or a ring spec such as 'zmod 12'"""
        if ref in self.rings:
            return self.rings[ref]
        path = Path(ref)
        if path.is_file():
            name = self.load(path)
            if name not in self.rings:
                raise ConfigError(f"{ref} is not a ring file")
            return self.rings[name]
        self.rings[ref] = make_ring(ref)
        return self.rings[ref]

    def sheaf(self, name: str) -> SheafRecord:
        try:
            return self.sheaves[name]
        except KeyError:
            raise ResolutionError(f"unknown sheaf {name!r}") from None

    def environment(self, X: FiniteSpace) -> Environment:
        """Named opens, the sheaves loaded on X with their operations, and the standard nuclei"""
        env = Environment(X)
        space_name = self.space_name(X)
        for record in self.sheaves.values():
            if record.sheaf.space is X or record.space == space_name:
                env.add_sheaf(record.name, record.sheaf)
                for symbol in record.operations:
                    env.add_function(symbol)
        register_nuclei(env)
        env.set_schema_bound(self.schema_bound)
        return env

    # ----- builders -----

    def _build_sheaf(self, text: str, origin: str) -> None:
        lines = _content_lines(text)
        head = _SHEAF_HEAD.fullmatch(lines[0][1])
        name, space_ref = head["name"], head["space"]
        X = self.space(space_ref)
        sections: dict = {}
        restrictions: dict = {}
        ops: list[tuple[str, object, list[tuple[str, str]], int]] = []
        for number, line in lines[1:]:
            where = f"{origin}:{number}"
            keyword, _, rest = line.partition(" ")
            if ":" not in rest:
                raise ConfigError(f"{where}: missing ':'")
            target, _, body = rest.partition(":")
            match keyword:
                case "sections":
                    sections[resolve_open(X, target.strip(), where)] = body.split()
                case "restrict":
                    if "->" not in target:
                        raise ConfigError(f"{where}: expected 'restrict <U>-><V>:'")
                    left, right = target.split("->", 1)
                    U, V = resolve_open(X, left.strip(), where), resolve_open(X, right.strip(), where)
                    if not V <= U:
                        raise ConfigError(f"{where}: {X.label(V)} is not contained in {X.label(U)}")
                    restrictions[(U, V)] = dict(_pairs(body, where))
                case "op":
                    fn, _, open_ref = target.strip().partition(" ")
                    ops.append((fn, resolve_open(X, open_ref.strip(), where), _pairs(body, where), number))
                case _:
                    raise ConfigError(f"{where}: unknown keyword {keyword!r}")
        sections.setdefault(X.empty, ["*"])
        F = check_sheaf(from_tables(name, X, sections, restrictions))
        self.sheaves[name] = SheafRecord(name, space_ref, F, self._operations(name, F, ops, origin))
        logger.info("✅ Loaded sheaf %s on %s", name, space_ref)

    def _operations(self, sheaf_name: str, F: Sheaf, ops: list, origin: str) -> list[FunctionSymbol]:
        tables: dict[str, dict[tuple, str]] = {}
        arity: dict[str, int] = {}
        for fn, U, pairs, number in ops:
            for source, target in pairs:
                args = tuple(source.split(","))
                if arity.setdefault(fn, len(args)) != len(args):
                    raise ConfigError(f"{origin}:{number}: {fn} used with different arities")
                tables.setdefault(fn, {})[(U, args)] = target

        def make(fn: str) -> FunctionSymbol:
            table = tables[fn]

            def apply(U, *sections):
                key = (U, tuple(F.label(s) for s in sections))
                if key not in table:
                    raise SortError(f"{fn} is not defined on {', '.join(key[1])} over {F.space.label(U)}")
                return F.find_section(table[key], U)

            return FunctionSymbol(fn, (sheaf_name,) * arity[fn], sheaf_name, apply)

        return [make(fn) for fn in sorted(tables)]

    def _build_module(self, text: str, origin: str) -> list[tuple[str, str, int]]:
        lines = _content_lines(text)
        head = _MODULE_HEAD.fullmatch(lines[0][1])
        name, ring_ref = head["name"], head["ring"]
        A = self.ring(ring_ref)
        labels: Optional[list[str]] = None
        zero = None
        add_rows: dict[str, list[str]] = {}
        act_rows: dict[str, list[str]] = {}
        maps = []
        for number, line in lines[1:]:
            where = f"{origin}:{number}"
            if line.startswith("map "):
                maps.append((line, origin, number))
                continue
            key, _, body = line.partition(":")
            words = key.split()
            match words:
                case ["elements"]:
                    labels = body.split()
                case ["zero"]:
                    zero = body.strip()
                case ["add", element]:
                    add_rows[element] = body.split()
                case ["act", scalar]:
                    act_rows[scalar] = body.split()
                case _:
                    raise ConfigError(f"{where}: unknown module line {line!r}")
        if labels is None:
            raise ConfigError(f"{origin}: missing 'elements:' line")
        index = {label: i for i, label in enumerate(labels)}
        try:
            add = [[index[v] for v in add_rows[m]] for m in labels]
            act = [[index[v] for v in act_rows[A.label(r)]] for r in A.elements]
        except KeyError as e:
            raise ConfigError(f"{origin}: incomplete or unknown entry {e.args[0]!r}") from None
        zero_index = index.get(zero if zero is not None else labels[0])
        if zero_index is None:
            raise ConfigError(f"{origin}: zero {zero!r} is not an element")
        self.modules[name] = FinModule(A, labels, add, act, zero_index, name=name)
        logger.info("✅ Loaded module %s over %s", name, A.name)
        return maps

    def _build_map(self, line: str, origin: str, number: int) -> None:
        match = _MAP_LINE.fullmatch(line)
        if match is None:
            raise ConfigError(f"{origin}:{number}: expected 'map <name> <M> -> <N>: m->n ...'")
        try:
            M, N = self.modules[match["source"]], self.modules[match["target"]]
        except KeyError as e:
            raise ResolutionError(f"{origin}:{number}: unknown module {e.args[0]!r}") from None
        images = dict(_pairs(match["entries"], f"{origin}:{number}"))
        try:
            table = tuple(N.labels.index(images[M.label(m)]) for m in M.elements)
        except (KeyError, ValueError):
            raise ConfigError(f"{origin}:{number}: map {match['name']} is not total on {M.name}") from None
        alpha = ModuleMap(M, N, table, name=match["name"])
        if not is_module_map(alpha):
            raise ConfigError(f"{origin}:{number}: {match['name']} is not A-linear")
        self.maps[match["name"]] = (alpha, match["source"], match["target"])
