"""Quiver description files, verification pipelines and their reports."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .chern import chern_of_complex, complex_terms, kunneth_decomposition, kunneth_left_components, reassemble, top_class
from .kirwan import (build_fiber, cb_to_nakajima, expected_rank, sigma_tau,
                     transversality_probe, verify_fiber, WINDOW)
from .linalg import BudgetExceeded, Field, QQ, fmt_scalar
from .quiver import INFTY, DimensionVector, Quiver, QuiverError, cb_quiver, constant_gtr_dimension, double, graded_triple
from .representations import (act_cb, cb_setup, in_zero_fiber, ind, ind0, random_group_element,
                              sample_moment_fiber)
from .stability import (UnsupportedChamber, Theta, build_theta_gtr, cb_theta, check_gtr_nondegenerate,
                        check_ind_stability_transfer, is_nondegenerate, is_stable_bruteforce, is_stable_fast)

PIPELINES = ("describe", "nondegen", "theta-gtr", "moment-sample", "stability", "complex-verify", "chern")
DIRECTIVES = {"vertex": 1, "arrow": 3, "dim": 2, "frame": 2, "theta": 2}


class QuiverFileError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuiverFile:
    quiver: Quiver
    v: DimensionVector
    w: DimensionVector
    theta: Theta


def _check_id(s: str, line: int):
    if s == INFTY:
        raise QuiverFileError(line, f"id {s!r} is reserved for the framing vertex")
    if any(ch in s for ch in ":@="):
        raise QuiverFileError(line, f"id {s!r} contains one of ':@='")


def _nat(s: str, line: int, signed: bool = False) -> int:
    try:
        n = int(s)
    except ValueError:
        raise QuiverFileError(line, f"expected an integer, got {s!r}") from None
    if n < 0 and not signed:
        raise QuiverFileError(line, f"expected a non-negative integer, got {n}")
    return n


def parse_quiver_file(text: str) -> QuiverFile:
    """Parse the line-oriented format.

    Missing ``dim`` and ``frame`` entries default to 0, missing ``theta``
    entries to 1.
    """
    vertices, arrows = [], []
    seen_arrows = set()
    values = {"dim": {}, "frame": {}, "theta": {}}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].split()
        if not body:
            continue
        cmd, args = body[0], body[1:]
        if cmd not in DIRECTIVES:
            raise QuiverFileError(lineno, f"unknown directive {cmd!r}")
        if len(args) != DIRECTIVES[cmd]:
            raise QuiverFileError(lineno, f"{cmd} takes {DIRECTIVES[cmd]} argument(s), got {len(args)}")
        if cmd == "vertex":
            _check_id(args[0], lineno)
            if args[0] in vertices or args[0] in seen_arrows:
                raise QuiverFileError(lineno, f"duplicate id {args[0]!r}")
            vertices.append(args[0])
        elif cmd == "arrow":
            aid, s, t = args
            _check_id(aid, lineno)
            if aid in seen_arrows or aid in vertices:
                raise QuiverFileError(lineno, f"duplicate id {aid!r}")
            for v in (s, t):
                if v not in vertices:
                    raise QuiverFileError(lineno, f"arrow {aid!r} references undeclared vertex {v!r}")
            seen_arrows.add(aid)
            arrows.append((aid, s, t))
        else:
            vtx = args[0]
            if vtx not in vertices:
                raise QuiverFileError(lineno, f"{cmd} for undeclared vertex {vtx!r}")
            if vtx in values[cmd]:
                raise QuiverFileError(lineno, f"duplicate {cmd} for vertex {vtx!r}")
            values[cmd][vtx] = _nat(args[1], lineno, signed=(cmd == "theta"))
    if not vertices:
        raise QuiverFileError(0, "no vertices declared")
    Q = Quiver.build(vertices, arrows)
    v = DimensionVector({i: values["dim"].get(i, 0) for i in vertices})
    w = DimensionVector({i: values["frame"].get(i, 0) for i in vertices})
    theta = Theta({i: values["theta"].get(i, 1) for i in vertices})
    return QuiverFile(Q, v, w, theta)


# ------------------------------------------------------------------ report

def fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return fmt_scalar(v)
    if isinstance(v, DimensionVector):
        return ",".join(f"{k}:{v[k]}" for k in v)
    return str(v).replace("\n", " ")


@dataclass
class Report:
    entries: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    checks: int = 0

    def put(self, key: str, value):
        self.entries[key] = value

    def check(self, key: str, ok: bool, detail=None) -> bool:
        self.checks += 1
        self.entries[key] = "pass" if ok else "fail"
        if not ok:
            self.failures.append(key if detail is None else f"{key} ({detail})")
        return ok

    @property
    def ok(self) -> bool:
        return not self.failures


def emit_report(report: Report, fmt: str = "text") -> bytes:
    status = "pass" if report.ok else "fail"
    if fmt == "kv":
        lines = {k: fmt_value(v) for k, v in report.entries.items()}
        lines.update({"checks": str(report.checks), "failures": str(len(report.failures)), "status": status})
        return "".join(f"{k}={lines[k]}\n" for k in sorted(lines)).encode()
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    out = ["qvkirwan report"]
    section = None
    for k, v in report.entries.items():
        head = k.split(".", 1)[0]
        if head != section:
            section = head
            out.append(f"[{head}]")
        out.append(f"  {k.split('.', 1)[-1]}: {fmt_value(v)}")
    out.append(f"checks: {report.checks}")
    out.append(f"failures: {len(report.failures)}")
    out.extend(f"  {f}" for f in report.failures)
    out.append(f"status: {status.upper()}")
    return ("\n".join(out) + "\n").encode()


def parse_kv(data) -> dict:
    if isinstance(data, bytes):
        data = data.decode()
    out = {}
    for line in data.splitlines():
        if line:
            k, _, v = line.partition("=")
            out[k] = v
    return out


# ---------------------------------------------------------------- pipeline

@dataclass(frozen=True)
class JobSpec:
    source: QuiverFile
    window: tuple = WINDOW
    field: Field = QQ
    seed: int = 0
    samples: int = 10
    budget: int = 10**5
    pipelines: tuple = PIPELINES

    def __post_init__(self):
        a, b = self.window
        if a >= b:
            raise PipelineError(f"window [{a},{b}] needs a < b")
        if self.samples < 0 or self.budget <= 0:
            raise PipelineError("samples must be >= 0 and budget > 0")
        unknown = set(self.pipelines) - set(PIPELINES)
        if unknown:
            raise PipelineError(f"unknown pipeline(s) {sorted(unknown)}")


class _Context:
    def __init__(self, job: JobSpec):
        src = job.source
        self.job = job
        try:
            self.cbq = cb_quiver(src.quiver, src.w)
        except QuiverError as exc:
            raise PipelineError(f"framing: {exc}") from exc
        self.D, self.alpha = cb_setup(self.cbq, src.v)
        self.theta = cb_theta(src.theta, src.v)
        self.inf = self.cbq.infinity
        self.fld = job.field
        self._theta_gtr = {}

    def rng(self, name: str) -> random.Random:
        return random.Random(f"{self.job.seed}/{name}")

    def theta_gtr(self, window):
        if window not in self._theta_gtr:
            self._theta_gtr[window] = build_theta_gtr(self.theta, self.alpha, *window, check=False)
        return self._theta_gtr[window]

    def sample(self, rng):
        return sample_moment_fiber(self.D, self.alpha, field=self.fld, cb=self.cbq, rng=rng)

    def stable(self, x) -> bool:
        try:
            return is_stable_fast(x, self.theta).stable
        except UnsupportedChamber:
            if self.fld.p == 0:
                raise PipelineError("mixed-sign character needs a finite field for the brute-force check")
            return is_stable_bruteforce(x, self.theta, self.job.budget).stable


def _describe(ctx: _Context, rep: Report):
    Q = ctx.job.source.quiver
    G = graded_triple(ctx.D, *ctx.job.window)
    rep.put("describe.q.vertices", " ".join(Q.vertices))
    rep.put("describe.q.arrows", " ".join(f"{a}:{s}->{t}" for a, s, t in Q.edges()) or "-")
    rep.put("describe.doubled.arrows", len(double(Q).arrows))
    rep.put("describe.cb.vertices", len(ctx.cbq.quiver.vertices))
    rep.put("describe.cb.arrows", len(ctx.cbq.quiver.arrows))
    rep.put("describe.alpha", ctx.alpha)
    rep.put("describe.gtr.window", "{} {}".format(*ctx.job.window))
    rep.put("describe.gtr.vertices", len(G.vertices))
    rep.put("describe.gtr.arrows", len(G.arrows))
    rep.put("describe.alpha_gtr.total", constant_gtr_dimension(ctx.alpha, *ctx.job.window).total())
    rep.put("describe.expected_rank", expected_rank(ctx.D, ctx.alpha, ctx.inf))


def _nondegen(ctx: _Context, rep: Report) -> bool:
    rep.put("nondegen.theta_cb", ",".join(f"{k}:{ctx.theta[k]}" for k in ctx.alpha))
    try:
        ok, beta = is_nondegenerate(ctx.theta, ctx.alpha, ctx.job.budget)
    except BudgetExceeded as exc:
        raise PipelineError(f"nondegeneracy gate: {exc}") from exc
    rep.check("nondegen.nondegenerate", ok, None if ok else f"witness {fmt_value(beta)}")
    if not ok:
        rep.put("nondegen.witness", beta)
    return ok


def _theta_gtr(ctx: _Context, rep: Report):
    T = ctx.theta_gtr(ctx.job.window)
    agtr = constant_gtr_dimension(ctx.alpha, *ctx.job.window)
    rep.put("theta_gtr.C", T.C)
    try:
        res = check_gtr_nondegenerate(T, agtr, ctx.job.budget)
    except BudgetExceeded as exc:
        rep.put("theta_gtr.exhaustive", f"skipped ({exc})")
        return
    rep.put("theta_gtr.checked", res.checked)
    for case, n in sorted(res.case_counts.items()):
        rep.put(f"theta_gtr.case_inf_{case}", n)
    rep.check("theta_gtr.nondegenerate", res.nondegenerate,
              None if res.nondegenerate else f"witness {res.witness}")


def _moment(ctx: _Context, rep: Report):
    rng = ctx.rng("moment")
    n = ctx.job.samples
    good = sum(in_zero_fiber(ctx.sample(rng)) for _ in range(n))
    rep.put("moment.samples", n)
    rep.put("moment.in_fiber", good)
    rep.check("moment.all_in_fiber", good == n)


def _stability(ctx: _Context, rep: Report):
    rng = ctx.rng("stability")
    brute = ctx.fld.p != 0
    G = graded_triple(ctx.D, *ctx.job.window)
    T = ctx.theta_gtr(ctx.job.window)
    counts = {"stable": 0, "unstable": 0, "compared": 0, "agree": 0, "transfer": 0,
              "transfer_agree": 0, "gtr_stable": 0, "generated": 0, "over_budget": 0}
    for _ in range(ctx.job.samples):
        x = ctx.sample(rng)
        stable = ctx.stable(x)
        counts["stable" if stable else "unstable"] += 1
        if not brute:
            continue
        try:
            tr = check_ind_stability_transfer(x, ctx.theta, T, G, ctx.job.budget)
        except BudgetExceeded:
            counts["over_budget"] += 1
            continue
        counts["compared"] += 1
        counts["agree"] += tr.cb_verdict.stable == stable
        counts["transfer"] += 1
        counts["transfer_agree"] += tr.agree
        if tr.gtr_verdict.stable:
            counts["gtr_stable"] += 1
            counts["generated"] += bool(tr.generated_in_degree_a)
    for k in ("stable", "unstable"):
        rep.put(f"stability.{k}", counts[k])
    if not brute:
        rep.put("stability.bruteforce", "skipped (infinite field)")
        return
    rep.put("stability.over_budget", counts["over_budget"])
    rep.put("stability.fast_vs_bruteforce", f"{counts['agree']}/{counts['compared']}")
    rep.check("stability.oracle_agreement", counts["agree"] == counts["compared"])
    rep.put("stability.ind_transfer", f"{counts['transfer_agree']}/{counts['transfer']}")
    rep.check("stability.transfer_agreement", counts["transfer_agree"] == counts["transfer"])
    rep.put("stability.generated_in_degree_a", f"{counts['generated']}/{counts['gtr_stable']}")
    rep.check("stability.generation", counts["generated"] == counts["gtr_stable"])


def _complex(ctx: _Context, rep: Report):
    if tuple(ctx.job.window) != WINDOW:
        raise PipelineError("complex-verify needs the window [0, 2]")
    rng = ctx.rng("complex")
    fld = ctx.fld
    G = graded_triple(ctx.D, *WINDOW)
    agtr = constant_gtr_dimension(ctx.alpha, *WINDOW)
    er = expected_rank(ctx.D, ctx.alpha, ctx.inf)
    rep.put("complex.expected_rank", er)

    points, stable = [], []
    attempts = 0
    while len(stable) < ctx.job.samples and attempts < 10 * max(ctx.job.samples, 1):
        attempts += 1
        x = ctx.sample(rng)
        points.append(x)
        if ctx.stable(x):
            stable.append(x)
    rep.put("complex.sampled", len(points))
    rep.put("complex.stable", len(stable))

    def lift(x):
        return ind(random_group_element(G.vertices, agtr, rng, fld), x, G)

    composite = 0
    for x, y in zip(points, points[1:] + points[:1]):
        composite += verify_fiber(build_fiber(lift(x), lift(y)), with_hom=False).composite_zero
    rep.put("complex.composite_zero", f"{composite}/{len(points)}")
    rep.check("complex.composite_identity", composite == len(points))

    tally = {"exact": 0, "hom": 0, "rank": 0, "section": 0, "tau_s": 0, "pairs": 0,
             "iso": 0, "orbit_s": 0, "nakajima": 0}
    for idx, x in enumerate(stable):
        g0 = random_group_element(ctx.cbq.base_vertices, ctx.alpha, rng, fld)
        partners = [(x, True), (act_cb(g0, x), True)]
        if len(stable) > 1:
            partners.append((stable[(idx + 1) % len(stable)], None))
        for y, iso in partners:
            r = verify_fiber(build_fiber(lift(x), lift(y)))
            tally["pairs"] += 1
            if iso is None:
                iso = r.hom_VW > 0
            tally["iso"] += iso
            tally["exact"] += r.exact
            tally["hom"] += bool(r.hom_cross_check) and r.dim_ker_D0 == int(iso) == r.dim_coker_D1
            tally["rank"] += r.rank_H0 == er
            tally["section"] += r.s_in_image == iso
            tally["tau_s"] += r.tau_s_zero
        F0 = build_fiber(ind0(x, G), ind0(partners[-1][0], G))
        sig, tau = sigma_tau(x, partners[-1][0])
        P = cb_to_nakajima(F0, ctx.cbq)
        tally["nakajima"] += (P @ F0.d0 == sig) and (tau @ P == F0.d1)
    n = tally["pairs"]
    rep.put("complex.pairs", n)
    rep.put("complex.isomorphic_pairs", tally["iso"])
    for key, label in (("exact", "delta_exact"), ("hom", "hom_cross_check"), ("rank", "rank_identity"),
                       ("section", "section_vanishing"), ("tau_s", "tau_of_section_zero")):
        rep.put(f"complex.{label}", f"{tally[key]}/{n}")
        rep.check(f"complex.{label}_all", tally[key] == n)
    rep.check("complex.nakajima_reduction", tally["nakajima"] == len(stable))

    if stable:
        probes = transversality_probe(stable[0], rng=rng, trials=3)
        control = probes[0]
        rep.check("complex.probe_control_drops", not control.full_rank and bool(control.witness_intertwines))
        consistent = all(p.full_rank != p.oracle_intertwined and (p.full_rank or p.witness_intertwines)
                         for p in probes)
        rep.put("complex.probe_full_rank", sum(p.full_rank for p in probes[1:]))
        rep.check("complex.probe_consistent", consistent)


def _chern(ctx: _Context, rep: Report):
    d = expected_rank(ctx.D, ctx.alpha, ctx.inf)
    rep.put("chern.degree", d)
    if d < 0:
        rep.put("chern.skipped", "negative expected rank")
        return
    c = chern_of_complex(complex_terms(ctx.D, ctx.alpha, ctx.inf), d)
    top = top_class(c, d)
    rep.put("chern.total", c)
    rep.put("chern.top", top)
    gens = kunneth_left_components(top)
    rep.put("chern.generators", len(gens))
    for i, g in enumerate(gens, start=1):
        rep.put(f"chern.generator.{i:02d}", g)
    rep.check("chern.integral", c.is_integral())
    rep.check("chern.kunneth_reassembles", reassemble(kunneth_decomposition(top), d) == top)


STEPS = {"describe": _describe, "theta-gtr": _theta_gtr, "moment-sample": _moment,
         "stability": _stability, "complex-verify": _complex, "chern": _chern}
GATED = {"theta-gtr", "stability", "complex-verify"}


def run_pipeline(job: JobSpec) -> Report:
    ctx = _Context(job)
    rep = Report()
    rep.put("job.field", job.field)
    rep.put("job.seed", job.seed)
    rep.put("job.samples", job.samples)
    rep.put("job.window", "{} {}".format(*job.window))
    selected = [p for p in PIPELINES if p in job.pipelines]
    if "nondegen" in selected or GATED & set(selected):
        if not _nondegen(ctx, rep):
            rep.put("job.gate", "refused: degenerate stability condition")
            return rep
    for name in selected:
        if name == "nondegen":
            continue
        try:
            STEPS[name](ctx, rep)
        except PipelineError:
            raise
        except (ValueError, ArithmeticError, RuntimeError) as exc:
            raise PipelineError(f"{name}: {exc}") from exc
    return rep
