"""Workbench: one session plus the operations the CLI and the API expose"""
from __future__ import annotations

import logging
from typing import Any, Mapping, Optional

from toposforge.core.errors import ResolutionError, SortError
from toposforge.core.loaders import Session, register_nuclei, resolve_nucleus, resolve_open
from toposforge.models.schemas import (
    EvalResponse, Report, SheafifyResponse, SpecResponse, TranslateResponse, TruthResponse,
)
from toposforge.services.finring import FinRing
from toposforge.services.forcing import ForcingEngine
from toposforge.services.formula import Formula, box_translate, format_formula, free_vars, negneg_translate
from toposforge.services.frame import open_key
from toposforge.services.parser import FormulaParser, parse_sort
from toposforge.services.sheaf import Environment, is_box_separated, is_box_sheaf, plus_construction, sheafify
from toposforge.services.spectrum import describe_spectrum, spectrum_environment
from toposforge.services.verify import SuiteConfig, run_suite

logger = logging.getLogger(__name__)


class Workbench:
    """Resolves spaces and rings into environments and answers queries over them"""

    def __init__(self, session: Optional[Session] = None):
        self.session = session or Session()
        self.parser = FormulaParser()
        self._environments: dict[tuple[str, str], Environment] = {}

    def initialize(self) -> None:
        self.session.resolve()
        logger.info("✅ Workbench ready with %d spaces, %d rings", len(self.session.spaces), len(self.session.rings))

    def get_stats(self) -> dict[str, Any]:
        return {
            "spaces": len(self.session.spaces),
            "rings": len(self.session.rings),
            "sheaves": len(self.session.sheaves),
            "modules": len(self.session.modules),
        }

    def load_text(self, text: str, name: str) -> str:
        """Load file contents and drop environments that may now be stale"""
        name = self.session.load_text(text, name, f"<{name}>")
        self.session.resolve()
        self._environments.clear()
        return name

    # ----- context -----

    def ring_environment(self, A: FinRing) -> Environment:
        modules = {name: M for name, M in self.session.modules.items() if M.ring is A}
        maps = {name: m for name, m in self.session.maps.items() if m[1] in modules and m[2] in modules}
        return register_nuclei(spectrum_environment(A, modules, maps))

    def environment(self, space: Optional[str] = None, ring: Optional[str] = None) -> Environment:
        """Environment for a space or for the spectrum of a ring; exactly one must be given"""
        if (space is None) == (ring is None):
            raise ResolutionError("give exactly one of a space or a ring")
        key = ("ring", ring) if ring is not None else ("space", space)
        if key not in self._environments:
            if ring is not None:
                self._environments[key] = self.ring_environment(self.session.ring(ring))
            else:
                self._environments[key] = self.session.environment(self.session.space(space))
        return self._environments[key]

    def parse(self, text: str, env: Optional[Environment] = None, declare: Mapping[str, str] = {}) -> Formula:
        declarations = {name: parse_sort(sort) for name, sort in declare.items()}
        constants = None if env is None else env.known_names()
        return self.parser.parse(text, declarations, constants)

    @staticmethod
    def bindings(env: Environment, phi: Formula, bind: Mapping[str, str]) -> dict[str, Any]:
        """Global sections named by their labels, one per free variable"""
        sorts = dict(free_vars(phi))
        values = {}
        for name, label in bind.items():
            if name not in sorts:
                raise SortError(f"{name} is not a free variable of the formula")
            values[name] = env.sheaf_for(sorts[name]).find_section(label, env.space.full)
        return values

    @staticmethod
    def _restricted(env: Environment, phi: Formula, values: Mapping[str, Any], U) -> dict[str, Any]:
        sorts = dict(free_vars(phi))
        return {
            name: env.sheaf_for(sorts[name]).restrict(s, env.space.full, U) for name, s in values.items()
        }

    # ----- operations -----

    def evaluate(
        self,
        formula: str,
        space: Optional[str] = None,
        ring: Optional[str] = None,
        open: Optional[str] = None,
        declare: Mapping[str, str] = {},
        bind: Mapping[str, str] = {},
        schema_bound: Optional[int] = None,
    ) -> EvalResponse:
        env = self.environment(space, ring)
        if schema_bound is not None:
            env = env.copy()
            env.set_schema_bound(schema_bound)
        phi = self.parse(formula, env, declare)
        X = env.space
        U = X.full if open is None else resolve_open(X, open)
        values = self.bindings(env, phi, bind)
        engine = ForcingEngine(env)
        forced = engine.force(U, phi, self._restricted(env, phi, values, U))
        truth = engine.truth_value(phi, values)
        return EvalResponse(formula=format_formula(phi), open=X.label(U), forced=forced, truth_value=truth.label)

    def truth(
        self,
        formula: str,
        space: Optional[str] = None,
        ring: Optional[str] = None,
        declare: Mapping[str, str] = {},
        bind: Mapping[str, str] = {},
    ) -> TruthResponse:
        env = self.environment(space, ring)
        phi = self.parse(formula, env, declare)
        truth = ForcingEngine(env).truth_value(phi, self.bindings(env, phi, bind))
        points = [env.space.points[x] for x in sorted(truth.open)]
        return TruthResponse(formula=format_formula(phi), truth_value=truth.label, points=points)

    def translate(self, formula: str, nucleus: str = "j", elide_gray: bool = False) -> TranslateResponse:
        phi = self.parse(formula)
        if nucleus == "negneg":
            result = negneg_translate(phi, elide_gray)
        else:
            result = box_translate(phi, nucleus, elide_gray)
        return TranslateResponse(
            formula=format_formula(phi),
            translated=format_formula(result.formula),
            elided_gray_boxes=result.elided_gray_boxes,
        )

    def sheafify(self, space: str, sheaf: str, nucleus: str = "negneg", plus_only: bool = False) -> SheafifyResponse:
        X = self.session.space(space)
        F = self.session.sheaf(sheaf).sheaf
        if F.space is not X:
            raise ResolutionError(f"sheaf {sheaf} does not live on {space}")
        j = resolve_nucleus(X, nucleus)
        G, unit = plus_construction(F, j) if plus_only else sheafify(F, j)
        sections = {
            X.label(U): [G.label(s) for s in G.sections(U)] for U in sorted(X.opens, key=open_key)
        }
        logger.info("✅ Sheafified %s along %s", sheaf, nucleus)
        return SheafifyResponse(
            sheaf=G.name,
            nucleus=nucleus,
            sections=sections,
            separated=is_box_separated(G, j),
            is_sheaf=is_box_sheaf(G, j),
            unit_injective=unit.is_injective(),
        )

    def spec(self, ring: str) -> SpecResponse:
        return describe_spectrum(self.session.ring(ring))

    def verify(self, suite: str, config: Optional[SuiteConfig] = None) -> Report:
        return run_suite(suite, config or SuiteConfig())
