"""Chain-spec files: JSON documents describing a kernel or a generator.

Schema::

    {"type": "discrete" | "continuous", "d": int,
     "birth": [p_0 .. p_{d-1}], "death": [q_1 .. q_d], "hold": [r_0 .. r_d]}

``hold`` is optional and only meaningful for discrete chains.  Entries may be
numbers or strings; strings such as ``"3/4"`` or ``"0.49"`` are exact.
"""

from __future__ import annotations

import json
import os
import re
from importlib import resources
from pathlib import Path

from .core import ContinuousGenerator, DiscreteKernel, MODES
from .errors import ChainConstructionError, ParseError, ValidationError

MODE_ENV = "BD_NUMERIC_MODE"

FIXTURES = {
    "e2": "e2.json",
    "e2c": "e2c.json",
    "e2c-absorbing": "e2c_absorbing.json",
    "cex": "cex.json",
    "d1": "d1.json",
}

_KNOWN_FIELDS = {"type", "d", "birth", "death", "hold", "description", "mode"}


def _field_line(text, field):
    m = re.search(r'"%s"\s*:' % re.escape(field), text)
    if m is None:
        return None
    return text.count("\n", 0, m.start()) + 1


def env_mode(default=None):
    """Numeric mode forced by the environment, if any."""
    mode = os.environ.get(MODE_ENV, "").strip().lower()
    if not mode:
        return default
    if mode not in MODES:
        raise ParseError(f"{MODE_ENV}={mode!r} is not one of {sorted(MODES)}")
    return mode


def fixture_path(name: str) -> Path:
    key = name.lower().replace("_", "-")
    if key not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}")
    return Path(str(resources.files("bdssd") / "fixtures" / FIXTURES[key]))


def load_fixture(name: str, mode=None):
    return parse_chain_spec(fixture_path(name), mode=mode)


def parse_chain_text(text: str, mode=None, source="<string>"):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: malformed JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object", line=1)

    def fail(msg, field):
        raise ParseError(f"{source}: {msg}", field=field, line=_field_line(text, field))

    unknown = sorted(set(doc) - _KNOWN_FIELDS)
    if unknown:
        fail(f"unknown keys {unknown}", unknown[0])
    kind = doc.get("type")
    if kind not in ("discrete", "continuous"):
        fail(f"type must be 'discrete' or 'continuous', got {kind!r}", "type")
    d = doc.get("d")
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        fail(f"d must be an integer >= 1, got {d!r}", "d")
    for field, want in (("birth", d), ("death", d)):
        vals = doc.get(field)
        if not isinstance(vals, list):
            fail(f"{field} must be a list", field)
        if len(vals) != want:
            fail(f"{field} has {len(vals)} entries but d={d} needs {want}", field)
    hold = doc.get("hold")
    if hold is not None:
        if kind == "continuous":
            fail("continuous chains take no hold field", "hold")
        if not isinstance(hold, list) or len(hold) != d + 1:
            fail(f"hold must list d+1={d + 1} entries", "hold")

    mode = mode or env_mode(doc.get("mode"))
    try:
        if kind == "discrete":
            chain = DiscreteKernel(doc["birth"], doc["death"], hold, mode=mode)
        else:
            chain = ContinuousGenerator(doc["birth"], doc["death"], mode=mode)
    except ChainConstructionError as exc:
        raise ParseError(f"{source}: {exc}") from exc
    if kind == "discrete":
        report = chain.report
        if report.violations:
            raise ValidationError(f"{source}: chain fails validation: {report.violations}", report)
    return chain


def parse_chain_spec(path, mode=None):
    """Read a chain-spec file (or a built-in fixture name) into a chain object."""
    p = Path(path)
    if not p.exists() and str(path).lower().replace("_", "-") in FIXTURES:
        p = fixture_path(str(path))
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_chain_text(text, mode=mode, source=str(path))


def dump_chain_spec(chain) -> str:
    return json.dumps(chain.to_spec(), indent=2)
