"""Scenario files: declarative rings, objects and checks with expected outcomes.

A scenario is a TOML document (``format = 1``) with sections ``[ring]``,
``[[object]]``, optional ``[cover]``, ``[[check]]`` and ``[bounds]``.
``parse_scenario`` validates it and ``run_scenario`` executes every check,
recording failures instead of stopping at the first one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Any, Dict, List, Optional

import tomli
import tomli_w

from oddmf import __version__
from oddmf.cover import (
    CoverError,
    CoverSpec,
    apply_fm_forward,
    build_adjoint_N,
    build_kernel_M,
    check_counit,
    check_generators,
    check_involution,
    check_unit,
    regular_object,
)
from oddmf.homalg import (
    cohomology_dims,
    ext_product,
    find_contraction,
    find_iso,
    hom_complex,
)
from oddmf.mf import (
    MatrixFactorization,
    MfError,
    direct_sum,
    koszul_factorization,
    loop_factorization,
    shift,
    trivial_mf,
    validate_mf,
)
from oddmf.ring import ParseError, Ring, RingError

FORMAT = 1
DEFAULT_POLY_BOUND = 10
DEFAULT_WINDOW = (-6, 6)

OBJECT_KINDS = {"loop", "koszul", "trivial", "explicit", "regular", "fm_forward", "kernel_M", "adjoint_N", "sum", "shift"}
CHECK_OPS = {
    "validate",
    "ext_table",
    "exceptional_collection",
    "find_iso",
    "contraction",
    "ext_algebra",
    "ext_match",
    "loop_search",
    "cover_unit",
    "cover_counit",
    "cover_involution",
    "cover_generators",
}


class ScenarioError(ValueError):
    """Malformed scenario.  ``line``/``column`` are set for syntax errors."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.line, self.column = line, column


# parsing ------------------------------------------------------------------------


@dataclass
class ScenarioFile:
    data: Dict[str, Any]
    ring: Ring
    cover: Optional[CoverSpec]
    objects: Dict[str, MatrixFactorization]

    @property
    def name(self) -> str:
        return self.data["name"]

    @property
    def checks(self) -> List[dict]:
        return self.data.get("check", [])

    def bounds(self, poly_bound=None, window=None):
        b = self.data.get("bounds", {})
        pb = poly_bound if poly_bound is not None else b.get("poly_bound", DEFAULT_POLY_BOUND)
        win = tuple(window) if window is not None else tuple(b.get("window", DEFAULT_WINDOW))
        return int(pb), (int(win[0]), int(win[1]))

    def serialize(self) -> str:
        return serialize_scenario(self.data)


def serialize_scenario(data: Dict[str, Any]) -> str:
    return tomli_w.dumps(data)


def _locate_toml_error(err: tomli.TOMLDecodeError):
    msg = str(err)
    line = col = None
    if "(at line" in msg:
        tail = msg.rsplit("(at line", 1)[1]
        try:
            line = int(tail.split(",")[0])
            col = int(tail.split("column")[1].strip(" )"))
        except (ValueError, IndexError):
            pass
    return line, col


def _build_ring(spec: dict) -> Ring:
    variables = []
    for v in spec.get("variables", []):
        if "name" not in v or "coh" not in v:
            raise ScenarioError("every variable needs a name and a coh degree")
        variables.append((v["name"], str(v["coh"]), tuple(v.get("aux", ()))))
    signs = {}
    for s in spec.get("signs", []):
        a, b = s["pair"]
        signs[(a, b)] = int(s.get("sign", -1))
    return Ring(
        variables,
        signs=signs,
        rewrites=dict(spec.get("rewrites", {})),
        aux_moduli=tuple(spec.get("aux_moduli", ())),
        coh_denominator=int(spec.get("coh_denominator", 1)),
    )


def _fibre(d: dict, default_name: str, default_coh: int):
    return (d.get("name", default_name), str(d.get("coh", default_coh)), tuple(d.get("aux", ())))


def _object_ring(sf_ring: Ring, cover: Optional[CoverSpec], side: str) -> Ring:
    if side in ("", "base"):
        return sf_ring
    if cover is None:
        raise ScenarioError(f"object side {side!r} needs a [cover] section")
    if side == "A":
        return cover.A
    if side == "B":
        return cover.B
    raise ScenarioError(f"unknown object side {side!r}")


def _twist(ring: Ring, o: dict):
    return ring.degree(str(o.get("twist", 0)), tuple(o.get("aux", ())))


def _build_object(o: dict, ring: Ring, base_ring: Ring, cover, objects, curvature) -> MatrixFactorization:
    kind = o.get("kind")
    name = o["name"]
    if kind == "loop":
        return loop_factorization(ring(o["entry"]), _twist(ring, o), name=name)
    if kind == "koszul":
        return koszul_factorization(ring(o["f"]), ring(o["g"]), _twist(ring, o), name=name)
    if kind == "trivial":
        return trivial_mf(ring(o.get("w", str(curvature(ring)))), name=name)
    if kind == "explicit":
        gens = [ring.degree(str(g.get("coh", 0)), tuple(g.get("aux", ()))) for g in o["gens"]]
        w = ring(o["curvature"]) if "curvature" in o else curvature(ring)
        return MatrixFactorization(ring, gens, [[ring(x) for x in row] for row in o["diff"]], w, name=name)
    if kind == "sum":
        return direct_sum(*[objects[p] for p in o["parts"]], name=name)
    if kind == "shift":
        E = shift(objects[o["source"]], int(o.get("k", 1)))
        E.name = name
        return E
    if cover is None:
        raise ScenarioError(f"object kind {kind!r} needs a [cover] section")
    if kind == "regular":
        return regular_object(cover)
    if kind == "fm_forward":
        return apply_fm_forward(cover, objects[o["source"]], name=name)
    if kind == "kernel_M":
        return build_kernel_M(cover)
    if kind == "adjoint_N":
        return build_adjoint_N(cover)
    raise ScenarioError(f"unknown object kind {kind!r}")  # pragma: no cover


def parse_scenario(text: str) -> ScenarioFile:
    """Parse and validate a scenario document."""
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        line, col = _locate_toml_error(e)
        raise ScenarioError(f"syntax error: {e}", line, col) from None
    if data.get("format") != FORMAT:
        raise ScenarioError(f"missing or unsupported format key (expected format = {FORMAT})")
    if "name" not in data:
        raise ScenarioError("scenario needs a name")
    if "ring" not in data:
        raise ScenarioError("scenario needs a [ring] section")
    try:
        ring = _build_ring(data["ring"])
    except (RingError, KeyError, TypeError) as e:
        raise ScenarioError(f"ring: {e}") from None

    cover = None
    if "cover" in data:
        c = data["cover"]
        try:
            cover = CoverSpec(
                ring,
                ring(str(c["f"])),
                ring(str(c.get("w", "0"))),
                q=_fibre(c.get("q", {}), "q", 1),
                y=_fibre(c.get("y", {}), "y", 0),
                name=data["name"],
            )
        except (CoverError, RingError, KeyError) as e:
            raise ScenarioError(f"cover: {e}") from None

    def curvature(r: Ring):
        if cover is not None:
            if r is cover.A:
                return cover.wA
            return cover.wB if r is cover.B else cover.w
        return r(str(data["ring"].get("curvature", "0")))

    objects: Dict[str, MatrixFactorization] = {}
    for o in data.get("object", []):
        name = o.get("name")
        if not name:
            raise ScenarioError("object without a name")
        if name in objects:
            raise ScenarioError(f"duplicate object name {name!r}")
        if o.get("kind") not in OBJECT_KINDS:
            raise ScenarioError(f"object {name!r}: unknown kind {o.get('kind')!r}")
        try:
            r = _object_ring(ring, cover, o.get("side", ""))
            E = _build_object(o, r, ring, cover, objects, curvature)
        except ParseError as e:
            raise ScenarioError(f"object {name!r}: {e}") from None
        except (RingError, MfError, CoverError, KeyError) as e:
            raise ScenarioError(f"object {name!r}: {e}") from None
        if cover is None and E.curvature != curvature(E.ring) and o.get("kind") != "trivial":
            raise ScenarioError(f"object {name!r} has curvature {E.curvature}, not the ring's")
        E.name = name
        objects[name] = E
    seen = set()
    for ch in data.get("check", []):
        n = ch.get("name")
        if not n:
            raise ScenarioError("check without a name")
        if n in seen:
            raise ScenarioError(f"duplicate check name {n!r}")
        seen.add(n)
        if ch.get("op") not in CHECK_OPS:
            raise ScenarioError(f"check {n!r}: unknown op {ch.get('op')!r}")
        for key in ("object", "from", "to", "a", "b"):
            ref = ch.get("params", {}).get(key)
            if ref is not None and ref not in objects:
                raise ScenarioError(f"check {n!r}: unknown object {ref!r}")
    return ScenarioFile(data, ring, cover, objects)


def load_scenario(path: str) -> ScenarioFile:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ScenarioError(f"not UTF-8: {e}") from None
    return parse_scenario(text)


def catalogue() -> List[str]:
    """Names of the built-in scenarios."""
    root = resources.files("oddmf") / "data"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def builtin_text(name: str) -> str:
    p = resources.files("oddmf") / "data" / f"{name}.toml"
    if not p.is_file():
        raise ScenarioError(f"no built-in scenario {name!r}")
    return p.read_text(encoding="utf-8")


def load_builtin(name: str) -> ScenarioFile:
    return parse_scenario(builtin_text(name))


# running --------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    op: str
    status: str  # pass | fail | untrusted
    observed: Any = None
    witness: Any = None
    message: str = ""
    provenance: str = ""

    def to_json(self) -> dict:
        out = {"name": self.name, "op": self.op, "status": self.status, "observed": self.observed}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.message:
            out["message"] = self.message
        if self.provenance:
            out["provenance"] = self.provenance
        return out


@dataclass
class ScenarioReport:
    scenario: str
    poly_bound: int
    window: tuple
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "tool": "oddmf",
            "version": __version__,
            "scenario": self.scenario,
            "bounds": {"poly_bound": self.poly_bound, "window": list(self.window)},
            "ok": self.ok,
            "checks": [c.to_json() for c in self.checks],
        }


def _status_from_table(table, expected_dims: Dict[int, int]):
    bad_trusted, bad_untrusted = [], []
    for n, d in table.dims.items():
        want = expected_dims.get(n, 0)
        if d != want:
            (bad_trusted if table.trusted[n] else bad_untrusted).append(n)
    if bad_trusted:
        return "fail", f"mismatch in trusted degrees {bad_trusted}"
    if bad_untrusted:
        return "untrusted", f"mismatch only in untrusted degrees {bad_untrusted}"
    return "pass", ""


def _dims_param(d: dict) -> Dict[int, int]:
    return {int(k): int(v) for k, v in d.items()}


class _Runner:
    def __init__(self, sf: ScenarioFile, poly_bound: int, window):
        self.sf, self.pb, self.window = sf, poly_bound, window
        self._tables = {}

    def table(self, a: str, b: str, window=None):
        window = window or self.window
        key = (a, b, window)
        if key not in self._tables:
            C = hom_complex(self.sf.objects[a], self.sf.objects[b], window, self.pb)
            self._tables[key] = (C, cohomology_dims(C))
        return self._tables[key]

    def run(self, ch: dict) -> CheckResult:
        op = ch["op"]
        p = ch.get("params", {})
        exp = ch.get("expected", {})
        res = CheckResult(ch["name"], op, "fail", provenance=ch.get("provenance", ""))
        getattr(self, "op_" + op)(p, exp, res)
        return res

    # operations ------------------------------------------------------------

    def op_validate(self, p, exp, res):
        problems = validate_mf(self.sf.objects[p["object"]])
        res.observed = {"ok": not problems, "violations": problems}
        res.status = "pass" if (not problems) == exp.get("ok", True) else "fail"

    def op_ext_table(self, p, exp, res):
        _, t = self.table(p["from"], p["to"])
        res.observed = t.to_json()
        res.status, res.message = _status_from_table(t, _dims_param(exp.get("dims", {})))

    def op_exceptional_collection(self, p, exp, res):
        names = p["objects"]
        tables = {}
        status = "pass"
        msgs = []
        for a, b in itertools.product(names, names):
            _, t = self.table(a, b)
            tables[f"{a}->{b}"] = t.to_json()
            want = {0: 1} if a == b else {}
            st, m = _status_from_table(t, want)
            if st == "fail" or (st == "untrusted" and status == "pass"):
                status = st
            if m:
                msgs.append(f"{a}->{b}: {m}")
        res.observed = tables
        res.status = status
        res.message = "; ".join(msgs)

    def op_find_iso(self, p, exp, res):
        cert = find_iso(self.sf.objects[p["from"]], self.sf.objects[p["to"]], int(p.get("poly_bound", self.pb)), homotopy=bool(p.get("homotopy", False)))
        found = bool(cert)
        res.observed = {"found": found}
        res.witness = cert.to_json() if found else {"not_found_below": cert.poly_bound}
        res.status = "pass" if found == exp.get("found", True) else "fail"

    def op_contraction(self, p, exp, res):
        cert = find_contraction(self.sf.objects[p["object"]], int(p.get("poly_bound", self.pb)))
        found = bool(cert)
        res.observed = {"found": found}
        res.witness = cert.to_json() if found else {"not_found_below": cert.poly_bound}
        res.status = "pass" if found == exp.get("found", True) else "fail"

    def op_ext_algebra(self, p, exp, res):
        """Truncated polynomial algebra Q[t]/t^n with |t| = g."""
        g = int(exp["generator_degree"])
        n = int(exp["nilpotency"])
        degrees = [k * g for k in range(n + 1)]
        lo = min(min(degrees), self.window[0])
        hi = max(max(degrees) + 1, self.window[1])
        C, t = self.table(p["object"], p["object"], (lo, hi))
        alg = ext_product(C, degrees)
        dims_ok = all(alg.dims[k * g] == 1 for k in range(n)) and alg.dims[n * g] == 0
        powers_ok = dims_ok
        if dims_ok:
            for k in range(1, n):
                prod = alg.product((g, 0), (k * g, 0))
                want_zero = k + 1 == n
                if prod is None or (not prod) != want_zero:
                    powers_ok = False
        st, msg = _status_from_table(t, {k * g: 1 for k in range(n)})
        res.observed = {"ext": t.to_json(), "algebra": alg.to_json()}
        if not powers_ok:
            res.status, res.message = "fail", "Ext algebra is not the expected truncated polynomial algebra"
        else:
            res.status, res.message = st, msg

    def op_ext_match(self, p, exp, res):
        _, ta = self.table(p["a"], p["a"])
        _, tb = self.table(p["b"], p["b"])
        res.observed = {"a": ta.to_json(), "b": tb.to_json()}
        common = [n for n in ta.dims if ta.trusted[n] and tb.trusted[n]]
        mism = [n for n in ta.dims if ta.dims[n] != tb.dims[n]]
        if any(n in common for n in mism):
            res.status, res.message = "fail", f"Ext tables differ in trusted degrees {mism}"
        elif mism:
            res.status, res.message = "untrusted", f"Ext tables differ only in untrusted degrees {mism}"
        else:
            res.status = "pass"

    def op_loop_search(self, p, exp, res):
        found = loop_search(self.sf.ring, [self.sf.ring(x) for x in p["generators"]], self.sf.ring(str(self.sf.data["ring"]["curvature"])), int(p.get("height", 3)))
        loops = [loop_factorization(f, name=str(f)) for f in found]
        ok_orth = True
        tables = {}
        for E, F in itertools.product(loops, loops):
            t = cohomology_dims(hom_complex(E, F, self.window, self.pb))
            tables[f"{E.name}->{F.name}"] = t.to_json()
            st, _ = _status_from_table(t, {0: 1} if E is F else {})
            if st != "pass":
                ok_orth = False
        res.observed = {"count": len(found), "loops": [str(f) for f in found], "orthogonal_exceptional": ok_orth}
        res.witness = tables
        res.status = "pass" if len(found) == int(exp["count"]) and ok_orth == exp.get("orthogonal_exceptional", True) else "fail"

    def _cover_report(self, rep, exp, res):
        res.observed = {"ok": rep.ok}
        res.witness = rep.details
        res.status = "pass" if rep.ok == exp.get("ok", True) else "fail"

    def op_cover_unit(self, p, exp, res):
        self._cover_report(check_unit(self.sf.cover, self.window, self.pb), exp, res)

    def op_cover_counit(self, p, exp, res):
        self._cover_report(check_counit(self.sf.cover, self.pb, self.window), exp, res)

    def op_cover_involution(self, p, exp, res):
        samples = [self.sf.objects[n] for n in p["samples"]]
        self._cover_report(check_involution(self.sf.cover, samples, self.pb), exp, res)

    def op_cover_generators(self, p, exp, res):
        self._cover_report(check_generators(self.sf.cover, self.pb), exp, res)


def loop_search(ring: Ring, generators, w, height: int = 3):
    """All ``sum a_i g_i`` with rationals of numerator/denominator at most ``height`` squaring to ``w``."""
    vals = sorted({Fraction(a, b) for a in range(-height, height + 1) for b in range(1, height + 1)})
    out = []
    for coeffs in itertools.product(vals, repeat=len(generators)):
        f = ring.zero()
        for c, g in zip(coeffs, generators):
            f = f + g.scale(c)
        if f * f == w:
            out.append(f)
    return out


def run_scenario(sf: ScenarioFile, poly_bound: Optional[int] = None, window=None) -> ScenarioReport:
    """Execute every check; errors inside a check become failures with a message."""
    pb, win = sf.bounds(poly_bound, window)
    rep = ScenarioReport(sf.name, pb, win)
    runner = _Runner(sf, pb, win)
    for ch in sf.checks:
        try:
            rep.checks.append(runner.run(ch))
        except (MfError, RingError, CoverError, ScenarioError, KeyError, ValueError) as e:
            rep.checks.append(CheckResult(ch["name"], ch["op"], "fail", message=f"{type(e).__name__}: {e}", provenance=ch.get("provenance", "")))
    return rep
