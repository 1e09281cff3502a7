"""Text serialisation of pulse sequences.

One element per line::

    # comment
    SQR q=2 theta=pi/2 phi=-pi/2
    ZZ angle=pi/4
    ZROT q=1 theta=pi
    SYS kind=xyz j=1.0 t=0.39269908169872414

Expressions follow :func:`dmfpo.expr.parse`.  Header comments of the form
``# name: ...``, ``# source: ...`` and ``# gamma_range: lo hi`` carry
sequence metadata.
"""

import math
import re

from . import expr as ex
from .exceptions import ParseError
from .model import HamiltonianKind
from .sequence import SQR, ZZ, PulseSequence, SysEvolve, ZAxis

_FIELDS = {
    "SQR": ("q", "theta", "phi"),
    "ZZ": ("angle",),
    "ZROT": ("q", "theta"),
    "SYS": ("kind", "j", "t"),
}

_KEY = re.compile(r"([A-Za-z_]+)=")


def dumps(seq):
    lines = [f"# name: {seq.name}", f"# source: {seq.source}"]
    lo, hi = seq.gamma_range
    lines.append(f"# gamma_range: {lo!r} {hi!r}")
    for e in seq.elements:
        if isinstance(e, SQR):
            lines.append(f"SQR q={e.qubit} theta={e.theta.to_text()} phi={e.phi.to_text()}")
        elif isinstance(e, ZZ):
            lines.append(f"ZZ angle={e.angle.to_text()}")
        elif isinstance(e, ZAxis):
            lines.append(f"ZROT q={e.qubit} theta={e.theta.to_text()}")
        else:
            lines.append(f"SYS kind={e.kind.tag} j={e.kind.strength!r} t={e.t.to_text()}")
    return "\n".join(lines) + "\n"


def _split_fields(body, lineno, col0):
    """Split ``k1=v1 k2=v2`` where values may contain spaces inside parentheses."""
    matches = []
    depth = 0
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and (i == 0 or body[i - 1].isspace()):
            m = _KEY.match(body, i)
            if m:
                matches.append(m)
                i = m.end()
                continue
        i += 1
    if body.strip() and (not matches or body[:matches[0].start()].strip()):
        raise ParseError(f"expected key=value, got {body.strip()!r}", lineno, col0 + 1)
    fields = {}
    for k, m in enumerate(matches):
        end = matches[k + 1].start() if k + 1 < len(matches) else len(body)
        key = m.group(1)
        if key in fields:
            raise ParseError(f"duplicate field {key!r}", lineno, col0 + m.start() + 1)
        fields[key] = (body[m.end():end].strip(), col0 + m.end())
    return fields


def loads(text):
    """Parse sequence text.

    Raises
    ------
    ParseError
        With the 1-based line and column of the first problem.
    """
    elements = []
    meta = {"name": "", "source": "reference", "gamma_range": (0.0, math.inf)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            _read_meta(stripped[1:].strip(), meta, lineno)
            continue
        line = raw.split("#", 1)[0].rstrip()
        indent = len(line) - len(line.lstrip())
        tag, _, body = line.lstrip().partition(" ")
        if tag not in _FIELDS:
            raise ParseError(f"unknown element tag {tag!r}", lineno, indent + 1)
        col0 = indent + len(tag) + 1
        fields = _split_fields(body, lineno, col0)
        missing = [f for f in _FIELDS[tag] if f not in fields]
        extra = [f for f in fields if f not in _FIELDS[tag]]
        if missing or extra:
            raise ParseError(f"{tag} needs fields {_FIELDS[tag]}, missing {missing}, "
                             f"unexpected {extra}", lineno, indent + 1)
        elements.append(_build(tag, fields, lineno))
    return PulseSequence(tuple(elements), meta["name"], meta["source"], meta["gamma_range"])


def _read_meta(comment, meta, lineno):
    key, sep, value = comment.partition(":")
    if not sep:
        return
    key = key.strip()
    value = value.strip()
    if key in ("name", "source"):
        meta[key] = value
    elif key == "gamma_range":
        try:
            lo, hi = (float(v) for v in value.split())
        except ValueError:
            raise ParseError(f"bad gamma_range {value!r}", lineno, 1) from None
        meta["gamma_range"] = (lo, hi)


def _qubit(value, lineno, col):
    if value not in ("1", "2"):
        raise ParseError(f"qubit must be 1 or 2, got {value!r}", lineno, col + 1)
    return int(value)


def _build(tag, fields, lineno):
    def expr(name):
        value, col = fields[name]
        return ex.parse(value, lineno, col)

    if tag == "SQR":
        return SQR(_qubit(fields["q"][0], lineno, fields["q"][1]), expr("theta"), expr("phi"))
    if tag == "ZZ":
        return ZZ(expr("angle"))
    if tag == "ZROT":
        return ZAxis(_qubit(fields["q"][0], lineno, fields["q"][1]), expr("theta"))
    kind_name, col = fields["kind"]
    if kind_name not in ("zz", "xyz"):
        raise ParseError(f"SYS kind must be zz or xyz, got {kind_name!r}", lineno, col + 1)
    try:
        j = float(fields["j"][0])
    except ValueError:
        raise ParseError(f"bad coupling {fields['j'][0]!r}", lineno, fields["j"][1] + 1) from None
    return SysEvolve(HamiltonianKind(kind_name, j), expr("t"))


def dump(seq, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(seq))


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
