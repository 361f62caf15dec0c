from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional
import os

from sympy import Symbol

from core.algebra import parse_polynomial
from core.errors import InputError
from core.persistence import FiltrationInput, primed
from core.fields import Field
from core.triangulation import ClosedFormula
from utils.file_manager import FileManager


@dataclass
class Manifest:
    """Input manifest: a filtration problem (S, f, ell, field) or a bare polynomial family.

    Keys: ``variables``, ``params``, ``aux`` (graph variables), ``polynomials``
    (name -> text), ``S`` (atom tree), ``f`` (list of texts) or ``f_graph``
    (atom tree), ``ell``, ``field``, ``caps``, ``d_override``.
    """
    file_path: str
    settings: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def load(cls, path) -> 'Manifest':
        data = FileManager.read_json(path)
        if not isinstance(data, dict):
            raise InputError(f"{path}: a manifest is a JSON object")
        manifest = cls(str(path), data)
        manifest.validate()
        return manifest

    @property
    def filename(self) -> str:
        return os.path.basename(self.file_path)

    @property
    def variables(self) -> List[str]:
        return self._names('variables')

    @property
    def params(self) -> List[str]:
        return self._names('params')

    @property
    def aux(self) -> List[str]:
        return self._names('aux')

    @property
    def ell(self) -> Optional[int]:
        value = self.settings.get('ell')
        return None if value is None else int(value)

    @property
    def field(self) -> Optional[str]:
        return self.settings.get('field')

    @property
    def caps(self) -> dict:
        return dict(self.settings.get('caps', {}))

    @property
    def is_filtration(self) -> bool:
        return 'S' in self.settings

    @property
    def polynomials(self) -> dict:
        """Declared polynomials by name, over ``variables + aux``."""
        scope = self.variables + self.aux
        raw = self.settings.get('polynomials', {})
        if isinstance(raw, list):
            raw = {f"p{i + 1}": text for i, text in enumerate(raw)}
        if not isinstance(raw, dict):
            raise InputError("'polynomials' must map names to polynomial texts")
        return {str(name): parse_polynomial(text, scope) for name, text in raw.items()}

    def _names(self, key) -> List[str]:
        names = self.settings.get(key, [])
        if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
            raise InputError(f"'{key}' must be a list of variable names")
        return list(names)

    def validate(self):
        names = self.variables + self.params + self.aux
        if not self.variables:
            raise InputError(f"{self.filename}: no variables declared")
        if len(set(names)) != len(names):
            raise InputError(f"{self.filename}: duplicate variable names")
        clashes = [n for n in names if primed(Symbol(n)).name in names]
        if clashes:
            raise InputError(f"{self.filename}: names {clashes} clash with the primed parameter copies")
        if self.is_filtration:
            if not self.params:
                raise InputError(f"{self.filename}: a filtration needs parameters")
            if ('f' in self.settings) == ('f_graph' in self.settings):
                raise InputError(f"{self.filename}: give exactly one of 'f' and 'f_graph'")
        elif not self.settings.get('polynomials'):
            raise InputError(f"{self.filename}: neither a filtration ('S') nor a polynomial family")

    def family(self):
        """The declared polynomials in declaration order (for ``decompose``/``bound --count``)."""
        return list(self.polynomials.values())

    def to_input(self, settings: Optional[dict] = None) -> FiltrationInput:
        """The filtration problem, with ``ell``/``field`` taken from the resolved settings."""
        if not self.is_filtration:
            raise InputError(f"{self.filename}: no filtration ('S') declared")
        settings = settings or {}
        named = self.polynomials
        s_formula = ClosedFormula.from_dict(self.settings['S'], self.variables, named)
        f = None
        graph = None
        if 'f' in self.settings:
            f = [named[t] if t in named else parse_polynomial(t, self.variables) for t in self.settings['f']]
        else:
            graph = ClosedFormula.from_dict(self.settings['f_graph'], self.variables + self.aux, named)
        override = None
        if self.settings.get('d_override') is not None:
            scope = self.params + [primed(Symbol(y)).name for y in self.params]
            override = [parse_polynomial(t, scope) for t in self.settings['d_override']]
        ell = settings.get('ell', self.ell if self.ell is not None else 0)
        fld = Field(settings.get('field', self.field or 'gf2'))
        return FiltrationInput(tuple(Symbol(v) for v in self.variables), tuple(Symbol(v) for v in self.params),
                               s_formula, f, graph, tuple(Symbol(v) for v in self.aux), int(ell), fld, override)

    def summary(self) -> str:
        """Returns a short summary of the manifest."""
        if not self.is_filtration:
            return f"{len(self.settings.get('polynomials', {}))} polynomials in {', '.join(self.variables)}"
        kind = "graph" if 'f_graph' in self.settings else "polynomial"
        return (f"S in R^{len(self.variables)}, {kind} f to R^{len(self.params)}"
                f" ({', '.join(self.params)})")
