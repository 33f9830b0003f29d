"""Curve JSON, point and pair CSV files, and the bundled fixture catalog."""
from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from .curve import CubicForm, CurveError, ProjPoint, SingularCertified, evaluate, normalize_point, smoothness_verdict
from .descent import XPair

FIXTURE_ENV = "CUBICCOUNT_FIXTURES"


class CurveFileError(CurveError):
    pass


@dataclass(frozen=True)
class CurveRecord:
    form: CubicForm
    rank: int | None = None
    base_point: ProjPoint | None = None
    notes: str = ""

    @property
    def name(self) -> str:
        return self.form.name


def parse_curve(data: dict, default_name: str = "") -> CurveRecord:
    if not isinstance(data, dict) or "coefficients" not in data:
        raise CurveFileError("curve JSON needs a 'coefficients' field")
    cs = data["coefficients"]
    if not isinstance(cs, list) or len(cs) != 10:
        raise CurveFileError("'coefficients' must list 10 integers")
    try:
        coeffs = [int(c) for c in cs]
    except (TypeError, ValueError) as exc:
        raise CurveFileError(f"bad coefficient: {exc}") from None
    form = CubicForm.from_coefficients(coeffs, str(data.get("name", default_name)))
    rank = data.get("rank")
    if rank is not None and (not isinstance(rank, int) or rank < 0):
        raise CurveFileError("'rank' must be a nonnegative integer")
    base = None
    if data.get("base_point") is not None:
        try:
            base = normalize_point([int(c) for c in data["base_point"]])
        except (TypeError, ValueError) as exc:
            raise CurveFileError(f"bad base point: {exc}") from None
        if evaluate(form, base) != 0:
            raise CurveFileError(f"base point {base} is not on the curve")
    return CurveRecord(form, rank, base, str(data.get("notes", "")))


def load_curve(path) -> CurveRecord:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CurveFileError(f"{path}: malformed JSON ({exc.msg})") from None
    return parse_curve(data, path.stem)


def curve_to_json(rec: CurveRecord) -> str:
    out = {"name": rec.name, "coefficients": [str(c) for c in rec.form.coeffs]}
    if rec.rank is not None:
        out["rank"] = rec.rank
    if rec.base_point is not None:
        out["base_point"] = [str(c) for c in rec.base_point.coords]
    if rec.notes:
        out["notes"] = rec.notes
    return json.dumps(out, indent=2) + "\n"


def points_to_csv(points: Sequence[ProjPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x0", "x1", "x2"])
    for P in points:
        w.writerow(P.coords)
    return buf.getvalue()


def points_from_csv(text: str) -> list[ProjPoint]:
    rows = csv.DictReader(io.StringIO(text))
    return [normalize_point((int(r["x0"]), int(r["x1"]), int(r["x2"]))) for r in rows]


def pairs_to_csv(pairs: Sequence[XPair], form: CubicForm) -> str:
    """A '# {json}' header line with m, R and the curve, then one row per pair."""
    buf = io.StringIO()
    if pairs:
        header = {"m": pairs[0].m, "R": [str(c) for c in pairs[0].R.coords], "curve": [str(c) for c in form.coeffs]}
        buf.write("# " + json.dumps(header) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["P.x0", "P.x1", "P.x2", "Q.x0", "Q.x1", "Q.x2"])
    for pr in pairs:
        w.writerow(pr.P.coords + pr.Q.coords)
    return buf.getvalue()


def pairs_from_csv(text: str) -> tuple[list[XPair], CubicForm]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise CurveFileError("pair file lacks its JSON header")
    header = json.loads(lines[0][2:])
    m = int(header["m"])
    R = normalize_point([int(c) for c in header["R"]])
    form = CubicForm.from_coefficients([int(c) for c in header["curve"]])
    pairs = []
    for r in csv.DictReader(lines[1:]):
        P = normalize_point([int(r[f"P.x{i}"]) for i in range(3)])
        Q = normalize_point([int(r[f"Q.x{i}"]) for i in range(3)])
        pairs.append(XPair(P, Q, R, m))
    return pairs, form


def fixture_dir() -> Path:
    env = os.environ.get(FIXTURE_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("cubiccount") / "fixtures"))


def fixture_catalog(directory=None, negative: bool = False) -> dict[str, CurveRecord]:
    """Named fixtures, each checked on load.

    The main section rejects any curve certified singular; singular curves
    live only in the ``negative`` subdirectory.
    """
    base = Path(directory) if directory is not None else fixture_dir()
    if negative:
        base = base / "negative"
    out = {}
    for path in sorted(base.glob("*.json")):
        rec = load_curve(path)
        if not negative and isinstance(smoothness_verdict(rec.form), SingularCertified):
            raise CurveFileError(f"fixture {path.name} is singular")
        out[rec.name] = rec
    return out


def load_fixture(name: str, negative: bool = False) -> CurveRecord:
    base = fixture_dir() / ("negative" if negative else "")
    path = base / f"{name}.json"
    if not path.exists():
        raise CurveFileError(f"no fixture named {name!r}")
    return load_curve(path)
