"""Replays the counting argument for finitely many closed geodesics on a scenario.

Steps, each producing findings that name the check they instantiate:

    jump          a common index jump (N, m_j) for all records
    bounds        iterate bounds around 2 m_j implied by the jump
    candidates    records with i + nu = 2N + n - 1 at 2 m_j and a non-zero
                  critical module in that degree
    profile       the structural profile such a candidate must have
    excluded      records of type R(theta) x hyperbolic, which the parity
                  argument rules out when n = 3
    morse         the Morse inequalities over degrees 0 .. 2N + n - 2
"""

from dataclasses import dataclass, field
from math import lcm

from .iteration import index_iterate, nullity_iterate
from .jump import (DEFAULT_EPSILON, DEFAULT_RELATION_BOUND, DEFAULT_T_BOUND,
                   NoReturnTimeError, find_jump)
from .morse import (InsufficientDataError, critical_module_dims, local_dims,
                    morse_inequality_check, morse_table)


@dataclass
class ReplayFinding:
    step: str
    check: str
    record: str
    message: str
    severity: str = "finding"     # "finding", "info" or "error"

    def to_json(self):
        return {"step": self.step, "check": self.check, "record": self.record,
                "message": self.message, "severity": self.severity}


@dataclass
class ReplayReport:
    n: int
    findings: list = field(default_factory=list)
    certificate: object = None
    candidates: list = field(default_factory=list)
    table: object = None

    @property
    def violations(self):
        return [f for f in self.findings if f.severity == "finding"]

    @property
    def errors(self):
        return [f for f in self.findings if f.severity == "error"]

    @property
    def big_n(self):
        return self.certificate.T if self.certificate is not None else None

    def to_json(self):
        return {
            "n": self.n,
            "N": self.big_n,
            "jump": self.certificate.to_json() if self.certificate is not None else None,
            "candidates": list(self.candidates),
            "morse": None if self.table is None else {"M": self.table.morse, "b": self.table.betti},
            "findings": [f.to_json() for f in self.findings],
        }


def cutoff_modulus(n):
    """N must make 2N times the identity constant integral: k | N (n = 2k+1) or (2k-1) | N (n = 2k)."""
    return (n - 1) // 2 if n % 2 else n - 1


def _bounds(report, rec, big_n, m_j, n, after):
    seed = rec.seed
    at = 2 * m_j

    def fail(check, message):
        report.findings.append(ReplayFinding("bounds", check, rec.name, message))

    i_at, nu_at = index_iterate(seed, at), nullity_iterate(seed, at)
    if i_at < 2 * big_n - (n - 1):
        fail("jump_lower", f"i(c^{at}) = {i_at} < 2N-(n-1) = {2 * big_n - (n - 1)}")
    if i_at + nu_at > 2 * big_n + (n - 1):
        fail("jump_upper", f"i+nu at {at} = {i_at + nu_at} > 2N+(n-1) = {2 * big_n + n - 1}")
    for m in range(1, at):
        it = at - m
        total = index_iterate(seed, it) + nullity_iterate(seed, it)
        if total > 2 * big_n:
            fail("before_jump", f"i+nu at {it} = {total} > 2N = {2 * big_n}")
            break
    for m in range(1, after + 1):
        it = at + m
        value = index_iterate(seed, it)
        if value < 2 * big_n + (n - 1):
            fail("after_jump", f"i(c^{it}) = {value} < 2N+(n-1) = {2 * big_n + n - 1}")
            break


def _profile(rec, n):
    """Failed conditions for a jump candidate: ellipticity, blocks, N2 angles, top module, irrational rotation."""
    d = rec.seed.d
    out = []
    if d.elliptic_height != 2 * (n - 1):
        out.append(("elliptic", f"e = {d.elliptic_height} differs from 2n-2 = {2 * (n - 1)}"))
    forbidden = []
    if d.p_minus:
        forbidden.append("N1(1,1)")
    if d.q_plus:
        forbidden.append("N1(-1,-1)")
    if d.r_star:
        forbidden.append("nontrivial N2")
    if forbidden:
        out.append(("forbidden_blocks", "contains " + ", ".join(forbidden)))
    bad = [str(a) for a in d.trivial_n2 if a.kind != "rational"]
    if bad:
        out.append(("trivial_n2_rational", "trivial N2 at irrational angle(s) " + ", ".join(bad)))
    period = rec.period
    try:
        ks = local_dims(rec, period)
        if ks[-1] == 0:
            out.append(("top_module", f"k_nu vanishes at the period iterate {period}"))
    except InsufficientDataError:
        out.append(("top_module", f"no local data at the period iterate {period}"))
    if not any(a.kind != "rational" for a in d.rotations):
        out.append(("irrational_rotation", "no rotation with irrational angle"))
    return out


def _excluded_case(rec):
    d = rec.seed.d
    return (d.r == 1 and d.residual_order == 2 and d.nullity_at_one == 0
            and not (d.q_minus or d.q_zero or d.q_plus or d.r_star or d.r_zero))


def replay(s, epsilon=DEFAULT_EPSILON, t_bound=DEFAULT_T_BOUND,
           relation_bound=DEFAULT_RELATION_BOUND, modulus=1, after=None, seed=0):
    n = s.n
    report = ReplayReport(n)
    t_modulus = lcm(cutoff_modulus(n), modulus)

    for rec in s.records:
        if n == 3 and _excluded_case(rec):
            report.findings.append(ReplayFinding(
                "excluded", "rotation_hyperbolic", rec.name,
                "R(theta) x hyperbolic cannot appear: the index parity of the iterates "
                "leaves no non-zero critical module at the jump"))

    try:
        cert, _ = find_jump(s.seeds, epsilon, t_bound, relation_bound, t_modulus, seed=seed)
    except NoReturnTimeError as exc:
        report.findings.append(ReplayFinding("jump", "return_time", "*", str(exc), "error"))
        return report
    report.certificate = cert
    if not cert.passed:
        for k, name in cert.failures():
            report.findings.append(ReplayFinding(
                "jump", name, s.records[k].name, "jump relation fails at the certified T"))
    big_n = cert.T

    for rec, m_j in zip(s.records, cert.m_ks):
        _bounds(report, rec, big_n, m_j, n, after if after is not None else 2 * m_j)

    target = 2 * big_n + n - 1
    for rec, m_j in zip(s.records, cert.m_ks):
        at = 2 * m_j
        if index_iterate(rec.seed, at) + nullity_iterate(rec.seed, at) != target:
            continue
        try:
            nonzero = critical_module_dims(rec, at, target) > 0
        except InsufficientDataError as exc:
            report.findings.append(ReplayFinding("candidates", "local_data", rec.name, str(exc), "error"))
            continue
        if not nonzero:
            continue
        report.candidates.append(rec.name)
        fails = _profile(rec, n)
        if not fails:
            report.findings.append(ReplayFinding(
                "profile", "classified", rec.name,
                "elliptic with an irrational rotation; no forbidden blocks", "info"))
        for check, message in fails:
            report.findings.append(ReplayFinding("profile", check, rec.name, message))
    if not report.candidates:
        report.findings.append(ReplayFinding(
            "candidates", "jump_candidate", "*",
            f"no record has i+nu = 2N+n-1 = {target} at 2m_j with a non-zero module there"))

    top = 2 * big_n + n - 2
    try:
        table = morse_table(s.records, n, top)
    except InsufficientDataError as exc:
        report.findings.append(ReplayFinding("morse", "local_data", "*", str(exc), "error"))
        return report
    report.table = table
    for v in morse_inequality_check(table).violations:
        where = f"degree {v.degree}"
        if v.degree == 2 * big_n:
            where += " (= 2N)"
        if v.kind == "rank":
            message = f"{where}: M = {v.lhs} < b = {v.rhs}"
        else:
            message = f"{where}: alternating sum of M = {v.lhs} < that of b = {v.rhs}"
        report.findings.append(ReplayFinding("morse", f"morse_{v.kind}", "*", message))
    return report
