"""Scenario files: JSON ingestion, canonical output and pinching validation.

A scenario lists the prime closed geodesics of a hypothetical Finsler
sphere S^n through their first-return index data.  Schema (version 1):

    {"schema_version": 1, "n": 3, "lambda": 1.2,
     "geodesics": [{"name": ..., "lifts": 1, "initial_index": 2,
                    "initial_nullity": 0, "length": ..., "energy": ...,
                    "waiver": false, "decomposition": {...},
                    "k_table": {"4": [1, 0, 0]}}]}
"""

from dataclasses import dataclass, field
from importlib import resources
import json
import warnings

from .iteration import IndexSeed, mean_index, gap_bounds_check
from .morse import GeodesicRecord
from .normal_forms import Decomposition
from .exact import Angle

SCHEMA_VERSION = 1

_TOP_KEYS = {"schema_version", "n", "lambda", "geodesics"}
_RECORD_KEYS = {"name", "lifts", "initial_index", "initial_nullity", "length", "energy",
                "waiver", "decomposition", "k_table"}
_DECOMP_KEYS = {"p_minus", "p_zero", "p_plus", "q_minus", "q_zero", "q_plus",
                "rotations", "nontrivial_n2", "trivial_n2", "residual_order"}


class ScenarioError(ValueError):
    """Schema or invariant violation, with the offending field path."""

    def __init__(self, where, message):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass
class Scenario:
    n: int
    records: list
    reversibility: float = None

    @property
    def seeds(self):
        return [r.seed for r in self.records]


def _require(obj, key, where, kind=None):
    if key not in obj:
        raise ScenarioError(where, f"missing field '{key}'")
    value = obj[key]
    if kind is int and (not isinstance(value, int) or isinstance(value, bool)):
        raise ScenarioError(f"{where}.{key}", f"expected an integer, got {value!r}")
    return value


def _unknown(obj, allowed, where):
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ScenarioError(where, f"unknown field(s) {', '.join(extra)}")


def _positive(obj, key, where):
    value = obj.get(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
        raise ScenarioError(f"{where}.{key}", f"expected a positive number, got {value!r}")
    return float(value)


def record_from_json(obj, n, where="geodesics[0]"):
    if not isinstance(obj, dict):
        raise ScenarioError(where, "expected an object")
    _unknown(obj, _RECORD_KEYS, where)
    name = _require(obj, "name", where)
    if not isinstance(name, str) or not name:
        raise ScenarioError(f"{where}.name", "expected a non-empty string")
    lifts = _require(obj, "lifts", where, int)
    if lifts < 1:
        raise ScenarioError(f"{where}.lifts", "must be positive")
    i1 = _require(obj, "initial_index", where, int)
    nu1 = _require(obj, "initial_nullity", where, int)
    raw = _require(obj, "decomposition", where)
    if not isinstance(raw, dict):
        raise ScenarioError(f"{where}.decomposition", "expected an object")
    _unknown(raw, _DECOMP_KEYS, f"{where}.decomposition")
    for key in ("rotations", "nontrivial_n2", "trivial_n2"):
        for j, item in enumerate(raw.get(key, [])):
            try:
                Angle.from_json(item)
            except (ValueError, TypeError, KeyError) as exc:
                raise ScenarioError(f"{where}.decomposition.{key}[{j}]", str(exc)) from None
    try:
        d = Decomposition.from_json(raw)
    except (ValueError, TypeError, KeyError) as exc:
        raise ScenarioError(f"{where}.decomposition", str(exc)) from None
    if d.order != 2 * (n - 1):
        raise ScenarioError(f"{where}.decomposition",
                            f"order {d.order} differs from 2(n-1) = {2 * (n - 1)}")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            seed = IndexSeed(i1, nu1, d)
    except ValueError as exc:
        raise ScenarioError(f"{where}.initial_nullity", str(exc)) from None
    k_table = obj.get("k_table")
    if k_table is not None:
        if not isinstance(k_table, dict):
            raise ScenarioError(f"{where}.k_table", "expected an object keyed by iterate")
        try:
            k_table = {int(k): list(v) for k, v in k_table.items()}
        except (TypeError, ValueError):
            raise ScenarioError(f"{where}.k_table", "keys must be integers and values lists") from None
    waiver = obj.get("waiver", False)
    if not isinstance(waiver, bool):
        raise ScenarioError(f"{where}.waiver", "expected true or false")
    try:
        return GeodesicRecord(name, seed, lifts, _positive(obj, "length", where),
                              _positive(obj, "energy", where), k_table, waiver)
    except ValueError as exc:
        field_name = "k_table" if "k_table" in str(exc) else "length"
        raise ScenarioError(f"{where}.{field_name}", str(exc)) from None


def scenario_from_json(obj):
    if not isinstance(obj, dict):
        raise ScenarioError("$", "expected a JSON object")
    _unknown(obj, _TOP_KEYS, "$")
    version = obj.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError("$.schema_version", f"unsupported version {version!r}")
    n = _require(obj, "n", "$", int)
    if n < 2:
        raise ScenarioError("$.n", "dimension must be at least 2")
    lam = obj.get("lambda")
    if lam is not None:
        if isinstance(lam, bool) or not isinstance(lam, (int, float)) or lam < 1:
            raise ScenarioError("$.lambda", "reversibility must be a number >= 1")
        lam = float(lam) if isinstance(lam, float) else lam
    geos = _require(obj, "geodesics", "$")
    if not isinstance(geos, list) or not geos:
        raise ScenarioError("$.geodesics", "expected a non-empty list")
    records = [record_from_json(g, n, f"geodesics[{k}]") for k, g in enumerate(geos)]
    names = [r.name for r in records]
    if len(set(names)) != len(names):
        raise ScenarioError("$.geodesics", "record names must be unique")
    return Scenario(n, records, lam)


def loads_scenario(text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return scenario_from_json(obj)


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        return loads_scenario(fh.read())


def bundled_scenario(name):
    """Load one of the scenarios shipped in the package data, e.g. "replay_s3"."""
    text = resources.files("geodesic_index").joinpath("data", f"{name}.json").read_text("utf-8")
    return loads_scenario(text)


def record_to_json(rec):
    out = {"name": rec.name, "lifts": rec.lifts,
           "initial_index": rec.seed.i1, "initial_nullity": rec.seed.nu1}
    if rec.length is not None:
        out["length"] = rec.length
    if rec.energy is not None:
        out["energy"] = rec.energy
    if rec.waiver:
        out["waiver"] = True
    out["decomposition"] = rec.seed.d.to_json()
    if rec.k_table is not None:
        out["k_table"] = {str(m): list(ks) for m, ks in sorted(rec.k_table.items())}
    return out


def scenario_to_json(s):
    out = {"schema_version": SCHEMA_VERSION, "n": s.n}
    if s.reversibility is not None:
        out["lambda"] = s.reversibility
    out["geodesics"] = [record_to_json(r) for r in s.records]
    return out


def dumps_scenario(s):
    return json.dumps(scenario_to_json(s), indent=2) + "\n"


def save_scenario(s, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_scenario(s))


# pinching

@dataclass
class Finding:
    check: str
    record: str
    message: str
    waived: bool = False

    def to_json(self):
        return {"check": self.check, "record": self.record, "message": self.message,
                "waived": self.waived}


@dataclass
class PinchingReport:
    findings: list = field(default_factory=list)

    @property
    def active(self):
        return [f for f in self.findings if not f.waived]

    @property
    def ok(self):
        return not self.active


def validate_pinching(s, m_max=50):
    """Flag records below the pinched index bounds, and gap-inequality failures up to m_max."""
    report = PinchingReport()
    floor_value = s.n - 1
    for rec in s.records:
        seed = rec.seed

        def flag(check, message):
            report.findings.append(Finding(check, rec.name, message, rec.waiver))

        if seed.i1 < floor_value:
            flag("index_lower_bound", f"i(c) = {seed.i1} < n-1 = {floor_value}")
        mi = mean_index(seed)
        if not mi > floor_value:
            flag("mean_index_bound", f"mean index {mi} <= n-1 = {floor_value}")
        # i(m+1) - i(m) - nu(m) >= i(c) - e/2 >= 0
        half_e = seed.e // 2
        if seed.i1 - half_e < 0:
            flag("gap_inequality", f"i(c) - e/2 = {seed.i1 - half_e} < 0")
        for m in range(1, m_max + 1):
            gap = gap_bounds_check(seed, m)
            if not gap.ok:
                flag("gap_inequality", f"m = {m}: slack ({gap.lower_slack}, {gap.upper_slack})")
                break
    return report
