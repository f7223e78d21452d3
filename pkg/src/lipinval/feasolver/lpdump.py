"""Plain-text dump of LP and mixed-binary feasibility instances.

Format, one item per line, ``#`` starts a comment::

    vars 3
    bound x0 -inf 4.5
    binary x2
    1.5*x0 -2*x2 <= 4

Variables are named ``x<index>``; bounds default to ``[0, inf]``.  Floats are
written with ``repr`` so a dump round-trips exactly.
"""

from __future__ import annotations

import math
import re

from .model import LinearProgram, MilfProblem

_TERM = re.compile(r"^([-+]?[^*\s]+)\*x(\d+)$")


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def dumps(problem) -> str:
    if isinstance(problem, MilfProblem):
        lp, binaries, big_m = problem.lp, problem.binary_vars, problem.big_m
    else:
        lp, binaries, big_m = problem, [], None
    lines = ["# lpdump v1", f"vars {lp.num_vars}"]
    if big_m is not None:
        lines.append(f"bigm {_fmt(big_m)}")
    for i, (lo, hi) in enumerate(zip(lp.lo, lp.hi)):
        if lo != 0.0 or hi != math.inf:
            lines.append(f"bound x{i} {_fmt(lo)} {_fmt(hi)}")
    if binaries:
        lines.append("binary " + " ".join(f"x{v}" for v in binaries))
    for c in lp.constraints:
        terms = " ".join(f"{_fmt(val)}*x{var}" for var, val in sorted(c.coeffs.items()))
        lhs = terms if terms else "0"
        lines.append(f"{lhs} {c.rel} {_fmt(c.rhs)}" + (f"  # {c.name}" if c.name else ""))
    return "\n".join(lines) + "\n"


def dump(problem, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(problem))


def loads(text: str):
    """Parse a dump; returns a ``MilfProblem`` if it declares binaries or big-M."""
    lp = None
    binaries: list[int] = []
    big_m = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        try:
            if head == "vars":
                lp = LinearProgram(int(rest[0]))
                continue
            if lp is None:
                raise ValueError("'vars' line must come first")
            if head == "bigm":
                big_m = float(rest[0])
            elif head == "bound":
                v = _var(rest[0])
                lp.lo[v], lp.hi[v] = float(rest[1]), float(rest[2])
            elif head == "binary":
                binaries.extend(_var(tok) for tok in rest)
            else:
                toks = line.split()
                rel, rhs = toks[-2], float(toks[-1])
                coeffs = {}
                for tok in toks[:-2]:
                    if tok == "0":
                        continue
                    match = _TERM.match(tok)
                    if not match:
                        raise ValueError(f"bad term {tok!r}")
                    var = int(match.group(2))
                    coeffs[var] = coeffs.get(var, 0.0) + float(match.group(1))
                lp.add_constraint(coeffs, rel, rhs)
        except (IndexError, ValueError) as exc:
            raise ValueError(f"lpdump line {lineno}: {exc}") from None
    if lp is None:
        raise ValueError("lpdump has no 'vars' line")
    lp.validate()
    if binaries or big_m is not None:
        return MilfProblem(lp, binaries, big_m or 0.0)
    return lp


def _var(tok: str) -> int:
    if not tok.startswith("x"):
        raise ValueError(f"bad variable {tok!r}")
    return int(tok[1:])


def load(path):
    with open(path) as fh:
        return loads(fh.read())
