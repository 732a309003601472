"""Physical quantities: scientific-notation parsing, SI dimension vectors,
and relative-tolerance comparison."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from .errors import DimensionMismatch, NoNumber, UnknownUnit

BASE_UNITS = ("m", "kg", "s", "A", "K", "mol", "cd")
DIMENSIONLESS = (Fraction(0),) * 7

PREFIXES = {
    "f": 1e-15,
    "p": 1e-12,
    "n": 1e-9,
    "mu": 1e-6,
    "u": 1e-6,
    "m": 1e-3,
    "c": 1e-2,
    "d": 1e-1,
    "k": 1e3,
    "M": 1e6,
    "G": 1e9,
    "T": 1e12,
}


@dataclass(frozen=True)
class Quantity:
    magnitude: float  # in SI base units
    dimension: tuple  # 7 rational exponents over (m, kg, s, A, K, mol, cd)
    si_scale: float = 1.0  # factor that was applied to reach base units

    def __post_init__(self):
        if not (self.magnitude == self.magnitude and abs(self.magnitude) != float("inf")):
            raise ValueError("magnitude must be finite")


def _parse_dimension(text: str) -> tuple:
    dim = [Fraction(0)] * 7
    for part in text.split():
        m = re.fullmatch(r"([a-zA-Z]+)(?:\^(-?\d+(?:/\d+)?))?", part)
        if not m or m.group(1) not in BASE_UNITS:
            raise ValueError(f"bad dimension factor {part!r}")
        idx = BASE_UNITS.index(m.group(1))
        dim[idx] += Fraction(m.group(2)) if m.group(2) else Fraction(1)
    return tuple(dim)


class UnitTable:
    """Immutable token -> (dimension, scale) table, prefix-composable."""

    def __init__(self, entries: dict, prefixes: dict = PREFIXES):
        self.entries = dict(entries)
        self.prefixes = dict(prefixes)

    @classmethod
    def from_text(cls, text: str) -> "UnitTable":
        entries = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            token, _, rest = line.partition("=")
            token = token.strip()
            scale_text, _, dim_text = rest.partition(";")
            if token in entries:
                raise ValueError(f"line {lineno}: duplicate unit token {token!r}")
            entries[token] = (_parse_dimension(dim_text.strip()), float(scale_text))
        return cls(entries)

    @classmethod
    def default(cls) -> "UnitTable":
        text = resources.files("seedgrade.data").joinpath("units.tab").read_text("utf-8")
        return cls.from_text(text)

    def resolve(self, token: str):
        """(dimension, scale) for a unit token, trying prefixes after exact match."""
        hit = self.entries.get(token)
        if hit is not None:
            return hit
        for prefix in sorted(self.prefixes, key=len, reverse=True):
            if token.startswith(prefix) and len(token) > len(prefix):
                rest = self.entries.get(token[len(prefix):])
                if rest is not None:
                    dim, scale = rest
                    return dim, scale * self.prefixes[prefix]
        raise UnknownUnit(token)


_DEFAULT_TABLE: UnitTable | None = None


def default_table() -> UnitTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = UnitTable.default()
    return _DEFAULT_TABLE


_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_SCI_RE = re.compile(r"^\s*(?:\\times|\\cdot|\*|x)\s*10\s*\^\s*\{?\s*([+-]?\d+)\s*\}?")
_POW10_RE = re.compile(r"^\s*10\s*\^\s*\{?\s*([+-]?\d+)\s*\}?")


def _unit_tokens(text: str) -> list:
    """[(token, exponent)] from a unit-product string like `m/s^2` or `J \\cdot s`."""
    text = text.replace("\\cdot", " ").replace("\\times", " ").replace("*", " ")
    text = text.replace("{", " ").replace("}", " ").replace("\\", " \\")
    out = []
    sign = 1
    for chunk in re.split(r"(/)", text):
        if chunk == "/":
            sign = -1
            continue
        for m in re.finditer(
            r"(\\?[a-zA-Z]+)\s*(?:\^\s*\{?\s*(-?\d+(?:/\d+)?)\s*\}?)?", chunk
        ):
            token = m.group(1).lstrip("\\")
            exp = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            out.append((token, sign * exp))
    # a bare "mu" is a detached micro prefix: glue it onto the next token
    glued = []
    i = 0
    while i < len(out):
        tok, exp = out[i]
        if tok in ("mu", "u") and i + 1 < len(out) and out[i + 1][0] not in ("mu", "u"):
            nxt, nexp = out[i + 1]
            glued.append(("mu" + nxt, nexp))
            i += 2
            continue
        glued.append((tok, exp))
        i += 1
    return glued


def parse_quantity(src, table: UnitTable | None = None) -> Quantity:
    """Parse `<number> [x 10^b] [unit product]` into an SI-base Quantity."""
    text = src if isinstance(src, str) else src.text
    text = text.strip()
    table = table or default_table()

    m = _NUMBER_RE.search(text)
    if m is None:
        raise NoNumber(f"no numeric literal in {text!r}")
    magnitude = float(m.group(0))
    rest = text[m.end():]
    sci = _SCI_RE.match(rest)
    if sci:
        magnitude *= 10.0 ** int(sci.group(1))
        rest = rest[sci.end():]
    elif m.group(0) == "10":
        p = _POW10_RE.match(text)
        if p:
            magnitude = 10.0 ** int(p.group(1))
            rest = text[p.end():]

    dim = [Fraction(0)] * 7
    scale = 1.0
    for token, exp in _unit_tokens(rest):
        tdim, tscale = table.resolve(token)
        for i in range(7):
            dim[i] += tdim[i] * exp
        scale *= tscale ** float(exp)
    return Quantity(magnitude=magnitude * scale, dimension=tuple(dim), si_scale=scale)


def compare_quantities(pred: Quantity, gt: Quantity, rtol: float = 1e-2) -> bool:
    """True iff dimensions match and magnitudes agree within relative tolerance."""
    if rtol <= 0:
        raise ValueError("rtol must be positive")
    if pred.dimension != gt.dimension:
        raise DimensionMismatch(
            f"dimension {_fmt_dim(pred.dimension)} vs {_fmt_dim(gt.dimension)}"
        )
    if gt.magnitude == 0:
        return abs(pred.magnitude) <= rtol * gt.si_scale
    return abs(pred.magnitude - gt.magnitude) <= rtol * abs(gt.magnitude)


def _fmt_dim(dim: tuple) -> str:
    parts = [
        f"{u}^{e}" for u, e in zip(BASE_UNITS, dim) if e != 0
    ]
    return " ".join(parts) if parts else "1"
