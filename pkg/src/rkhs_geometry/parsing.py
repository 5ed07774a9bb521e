"""Parsers for kernel spec strings, subspace spec strings and point lists.

Kernel grammar (whitespace is ignored, keys are case-sensitive)::

    spec   := atom | call
    atom   := "dhb:alpha=" NUM | "fock:beta=" NUM | "da:n=" INT
            | "finite-length-example"
            | "radial-bergman:file=" PATH | "custom:file=" PATH
    call   := "product(" spec "," spec ")" | "direct-sum(" spec "," spec ")"
            | "power(" spec "," NUM ")" | "rescale(" spec "," NAME ")"
"""
from __future__ import annotations

import json
import os
import re

import numpy as np

from . import kernels as K
from .errors import SpecParseError, ValidationError

_NUM = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")
_PATH = re.compile(r"[^,()\s]+")

ATOMS = {
    "dhb": ("alpha",),
    "fock": ("beta",),
    "da": ("n",),
    "finite-length-example": (),
    "radial-bergman": ("file",),
    "custom": ("file",),
}
CALLS = ("product", "power", "rescale", "direct-sum")


class _Parser:
    def __init__(self, text, base_dir="."):
        self.text = text
        self.pos = 0
        self.base_dir = base_dir

    def error(self, msg, pos=None):
        raise SpecParseError(msg, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def match(self, regex, what):
        self.skip()
        m = regex.match(self.text, self.pos)
        if not m:
            self.error(f"expected {what}")
        self.pos = m.end()
        return m.group(0)

    def number(self):
        start = self.pos
        tok = self.match(_NUM, "a number")
        try:
            return float(tok)
        except ValueError:
            self.error("malformed number", start)

    def parse(self):
        spec = self.spec()
        if self.peek():
            self.error("unexpected trailing input")
        return spec

    def spec(self):
        self.skip()
        start = self.pos
        name = self.match(_NAME, "a kernel name")
        if self.peek() == "(":
            if name not in CALLS:
                self.error(f"unknown kernel combinator {name!r}", start)
            self.expect("(")
            left = self.spec()
            self.expect(",")
            if name == "power":
                p = self.number()
                self.expect(")")
                return self._build(lambda: K.power(left, p), start)
            if name == "rescale":
                g = self.match(_NAME, "a scaling function name")
                self.expect(")")
                return self._build(lambda: K.rescale(left, g), start)
            right = self.spec()
            self.expect(")")
            if name == "product":
                return self._build(lambda: K.product(left, right), start)
            return self._build(lambda: K.direct_sum(left, right), start)
        if name not in ATOMS:
            self.error(f"unknown kernel family {name!r}", start)
        keys = ATOMS[name]
        params = {}
        if keys:
            self.expect(":")
            for i, key in enumerate(keys):
                if i:
                    self.expect(",")
                kpos = self.pos
                got = self.match(_NAME, f"parameter {key!r}")
                if got != key:
                    self.error(f"expected parameter {key!r}, got {got!r}", kpos)
                self.expect("=")
                params[key] = self.match(_PATH, "a file path") if key == "file" else self.number()
        elif self.peek() == ":":
            self.error(f"{name!r} takes no parameters")
        return self._build(lambda: self._atom(name, params), start)

    def _build(self, fn, pos):
        try:
            return fn()
        except (ValidationError, K.UnsupportedError) as exc:
            self.error(str(exc), pos)

    def _atom(self, name, p):
        if name == "dhb":
            return K.DHB(p["alpha"])
        if name == "fock":
            return K.Fock(p["beta"])
        if name == "da":
            n = p["n"]
            if n != int(n):
                raise ValidationError("da:n must be an integer")
            return K.DruryArveson(int(n))
        if name == "finite-length-example":
            return K.FiniteLengthExample()
        path = os.path.join(self.base_dir, p["file"])
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read {path}: {exc}")
        if name == "radial-bergman":
            moments = data["moments"] if isinstance(data, dict) else data
            return K.radial_weight_bergman([float(m) for m in moments])
        pts = [parse_complex(v) for v in data["points"]]
        mat = [[parse_complex(v) for v in row] for row in data["matrix"]]
        return K.Custom(tuple(pts), np.array(mat, dtype=complex))


def parse_kernel(text: str, base_dir: str = ".") -> K.Kernel:
    """Build a kernel from its spec string."""
    if not isinstance(text, str) or not text.strip():
        raise SpecParseError("empty kernel spec", text or "", 0)
    return _Parser(text, base_dir).parse()


def canonical(text: str) -> str:
    return "".join(text.split())


# ---------------------------------------------------------------------------
# points
# ---------------------------------------------------------------------------


def parse_complex(v) -> complex:
    if isinstance(v, bool):
        raise ValidationError(f"not a number: {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", "").replace("i", "j"))
        except ValueError:
            raise ValidationError(f"cannot parse complex number {v!r}") from None
    if isinstance(v, dict) and ("re" in v or "im" in v):
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(a, (int, float)) for a in v):
        return complex(v[0], v[1])
    raise ValidationError(f"cannot parse complex number {v!r}")


def parse_point(v, kernel: K.Kernel):
    if kernel.domain == "sum":
        if not isinstance(v, dict) or "side" not in v:
            raise ValidationError(f"direct-sum points need a side: {v!r}")
        side = v["side"]
        if side not in ("left", "right"):
            raise ValidationError(f"side must be 'left' or 'right', got {side!r}")
        inner = kernel.left if side == "left" else kernel.right
        return K.Tagged(side, parse_point(v.get("z", v.get("point")), inner))
    if kernel.domain == "ball":
        coords = v if isinstance(v, list) else [v]
        return np.array([parse_complex(c) for c in coords], dtype=complex)
    return parse_complex(v)


def parse_points(source, kernel: K.Kernel):
    """Points from inline JSON text, a ``@file`` reference or a decoded list."""
    data = load_json_arg(source)
    if not isinstance(data, list):
        raise ValidationError("points must be a JSON list")
    return [parse_point(v, kernel) for v in data]


def load_json_arg(source):
    if not isinstance(source, str):
        return source
    text = source
    if source.startswith("@"):
        with open(source[1:], encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON at position {exc.pos}: {exc.msg}") from None


# ---------------------------------------------------------------------------
# subspaces
# ---------------------------------------------------------------------------


def parse_subspace(text: str, kernel: K.Kernel):
    """``vanish:points=[...];orders=[...]`` or ``hardy-inner:zeros=[...]``
    (optionally ``;constant=...``)."""
    from .subspaces import HardyInner, VanishOn

    src = text.strip()
    head, sep, rest = src.partition(":")
    if not sep:
        raise SpecParseError("expected ':' after the subspace kind", text, len(head))
    fields = {}
    offset = len(head) + 1
    for part in _split_fields(rest):
        key, eq, val = part.partition("=")
        if not eq:
            raise SpecParseError("expected key=value", text, offset)
        try:
            fields[key.strip()] = json.loads(val)
        except json.JSONDecodeError as exc:
            raise SpecParseError(f"invalid JSON value for {key.strip()!r}", text, offset + len(key) + 1 + exc.pos)
        offset += len(part) + 1
    if head == "vanish":
        if "points" not in fields:
            raise SpecParseError("vanish subspaces need points=[...]", text, len(head) + 1)
        pts = tuple(parse_complex(v) for v in fields["points"])
        orders = tuple(int(o) for o in fields.get("orders", [1] * len(pts)))
        return VanishOn(kernel, pts, orders)
    if head == "hardy-inner":
        if "zeros" not in fields:
            raise SpecParseError("hardy-inner subspaces need zeros=[...]", text, len(head) + 1)
        zeros = tuple(parse_complex(v) for v in fields["zeros"])
        const = parse_complex(fields.get("constant", 1))
        if not (isinstance(kernel, K.DHB) and kernel.alpha == 1):
            raise ValidationError("hardy-inner subspaces need --kernel dhb:alpha=1")
        return HardyInner(zeros, const, kernel)
    raise SpecParseError(f"unknown subspace kind {head!r}", text, 0)


def _split_fields(text):
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "[{":
            depth += 1
        elif ch in "]}":
            depth -= 1
        if ch == ";" and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur:
        parts.append("".join(cur))
    return parts
