"""Channel assembly, trajectory runs, cross-representation checks and conversion."""

from __future__ import annotations

import csv
import io
import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.linalg import expm

from . import serialize
from .gradflow import (
    Diffusion,
    apply_damping,
    collective_generator,
    correlated_damping,
    damping_matrix,
    gradient_generator,
    independent_damping,
)
from .models import T1Spec, axis_rotation, decohere_about_axis, evolve_correlated, t1_damping, t1_relax
from .plan import ExperimentPlan
from .popcore import allclose, hadamard_transform_op, pauli_string
from .reps import (
    LindbladSet,
    NonPSDError,
    apply_extended,
    apply_kraus,
    collective_two_spin_kraus,
    dense_lindbladian,
    evolve_lindblad,
    extended_kraus_from_damping,
    extended_two_spin,
    independent_kraus,
    independent_lindblads,
    kraus_from_damping,
    lindblad_from_generator,
    lindblads_for_correlated_damping,
)

EXIT_OK, EXIT_INVALID, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_TOL = 1e-9
N_RANDOM_STATES = 20

Route = Callable[[float], Callable[[np.ndarray], np.ndarray]]


class Skipped(Exception):
    """A representation is not available for this model."""


def _conj(u, f):
    if u is None:
        return f
    ud = u.conj().T
    return lambda rho: ud @ f(u @ rho @ ud) @ u


class Channel:
    """All available representations of the channel described by a plan.

    Every route is a factory ``t -> (rho -> rho)``. ``damping_hook`` rewrites
    the damping matrix before the Hadamard, Kraus and extended routes use it.
    """

    def __init__(self, plan: ExperimentPlan, damping_hook=None):
        self.plan = plan
        self.n = plan.n_spins
        self.kind = plan.model["type"]
        self.D = plan.diffusion
        self.hook = damping_hook
        self.frames: list = [None]
        self.stages: list = []
        self.lam = None
        if self.kind in ("collective", "selective", "conditional", "axis"):
            pulses: list = []
            for ev in plan.events:
                if isinstance(ev, Diffusion):
                    self.stages.append((gradient_generator(self.n, pulses), ev.duration))
                else:
                    pulses.append(ev)
            self.lam = gradient_generator(self.n, pulses)
            if self.kind == "axis" and plan.model["axis"] != "z":
                self.frames = [axis_rotation(self.n, plan.model["axis"])]
        elif self.kind == "isotropic":
            self.lam = collective_generator(self.n, plan.model["k_rad_per_m"])
            h = hadamard_transform_op(self.n)
            self.frames = [None, h, axis_rotation(self.n, "y")]
        elif self.kind == "t1":
            self.t1 = T1Spec(plan.model["T1_s"], plan.model["rho_eq"])
        self.rotated = any(u is not None for u in self.frames)

    # -- damping matrix and the representations derived from it

    def raw_damping(self, t: float) -> np.ndarray:
        kind, m = self.kind, self.plan.model
        if self.lam is not None:
            w = damping_matrix(self.lam, self.D, t)
            for lam, dur in self.stages:
                w = w * damping_matrix(lam, self.D, dur)
            return w
        if kind == "independent":
            return independent_damping(self._survival(t))
        if kind == "correlated":
            return correlated_damping(m["R1_per_s"], m["R2_per_s"], m["S_per_s"], t)
        if kind == "t1":
            return t1_damping(self.t1.t1, t)
        raise ValueError(f"unsupported model {kind!r}")

    def damping(self, t: float) -> np.ndarray:
        w = self.raw_damping(t)
        return self.hook(w) if self.hook is not None else w

    def _survival(self, t):
        return [float(np.exp(-k * k * self.D * t)) for k in self.plan.model["k_rad_per_m"]]

    def kraus(self, t: float):
        return kraus_from_damping(self.damping(t))

    def extended(self, t: float):
        return extended_kraus_from_damping(self.damping(t))

    def lindblad(self) -> LindbladSet:
        """Lindblad set of the (final) diffusion period, in the computational frame."""
        if self.lam is not None:
            lset = lindblad_from_generator(self.lam, self.D)
            if self.stages:
                return LindbladSet(lset.n_spins, lset.ops, "generator of the final diffusion period")
            if self.rotated:
                return LindbladSet(lset.n_spins, lset.ops, "acts in the rotated frame of the decoherence axis")
            return lset
        if self.kind == "independent":
            return independent_lindblads(self.plan.model["k_rad_per_m"], self.D)
        if self.kind == "correlated":
            return lindblads_for_correlated_damping(self.plan.rates)
        raise Skipped(f"{self.kind} model has no diagonal Lindblad form")

    # -- routes

    def _framed(self, t, apply_w):
        """Apply a frame-local channel once per frame, or to the T1 deviation."""
        if self.kind == "t1":
            h = hadamard_transform_op(self.n)
            eq = self.t1.rho_eq

            def f(rho):
                dev = np.diag(np.diag(rho - eq))
                relaxed = h @ apply_w(h @ dev @ h) @ h
                return np.diag(np.diag(relaxed + eq)) + rho - np.diag(np.diag(rho))
            return f
        steps = [_conj(u, apply_w) for u in self.frames]

        def g(rho):
            for step in steps:
                rho = step(rho)
            return rho
        return g

    def route_hadamard(self, t):
        if self.kind == "t1":
            return lambda rho: t1_relax(rho, self.t1, t)
        w = self.damping(t)
        if self.kind == "axis":
            return lambda rho: decohere_about_axis(rho, w, self.plan.model["axis"])
        return self._framed(t, lambda r: apply_damping(r, w))

    def route_kraus(self, t):
        ks = self.kraus(t)
        return self._framed(t, lambda r: apply_kraus(r, ks))

    def route_extended(self, t):
        ec = self.extended(t)
        return self._framed(t, lambda r: apply_extended(r, ec))

    def route_lindblad(self, t):
        if self.kind == "t1":
            raise Skipped("relaxation toward equilibrium is affine; no diagonal Lindblad form")
        if self.lam is not None and not self.rotated:
            sets = [(lindblad_from_generator(lam, self.D), dur) for lam, dur in self.stages]
            sets.append((lindblad_from_generator(self.lam, self.D), t))

            def f(rho):
                for lset, dur in sets:
                    rho = evolve_lindblad(rho, lset, dur)
                return rho
            return f
        if self.lam is not None:
            # rotated frames: dense evolution under U^dag L U, one period per frame
            periods = [(lam, dur) for lam, dur in self.stages] + [(self.lam, t)]

            props = []
            for u in self.frames:
                for lam, dur in periods:
                    op = lindblad_from_generator(lam, self.D).ops[0]
                    if u is not None:
                        op = u.conj().T @ op @ u
                    props.append(expm(dense_lindbladian([op]) * dur))

            def g(rho):
                vec = rho.reshape(-1, order="F")
                for prop in props:
                    vec = prop @ vec
                return vec.reshape(rho.shape, order="F")
            return g
        lset = self.lindblad()
        return lambda rho: evolve_lindblad(rho, lset, t)

    def route_kraus_closed(self, t):
        if self.kind == "independent":
            ks = independent_kraus(self._survival(t))
            return lambda rho: apply_kraus(rho, ks)
        lam = self.lam
        if (self.kind == "collective" and self.n == 2 and not self.stages
                and abs(lam[1]) < 1e-15 and abs(lam[2]) < 1e-15 and abs(lam[0] + lam[3]) < 1e-15):
            ks = collective_two_spin_kraus(float(np.exp(-lam[0] ** 2 * self.D * t)))
            return lambda rho: apply_kraus(rho, ks)
        raise Skipped("closed-form Kraus set only for independent and plain two-spin collective channels")

    def route_extended_closed(self, t):
        if self.kind != "correlated":
            raise Skipped("closed-form extended coefficients only for the correlated two-spin channel")
        ec = extended_two_spin(self.plan.rates, t)
        return lambda rho: apply_extended(rho, ec)

    def route_projection(self, t):
        if self.kind != "correlated":
            raise Skipped("z-projection evolution only for the correlated two-spin channel")
        rates = self.plan.rates
        return lambda rho: evolve_correlated(rho, rates, t)

    def routes(self) -> dict[str, Route]:
        return {
            "hadamard": self.route_hadamard,
            "lindblad": self.route_lindblad,
            "kraus": self.route_kraus,
            "extended": self.route_extended,
            "kraus_closed": self.route_kraus_closed,
            "extended_closed": self.route_extended_closed,
            "projection": self.route_projection,
        }

    # -- artifacts

    def documents(self, t: float) -> dict[str, dict | None]:
        docs: dict[str, dict | None] = {"damping": serialize.damping_doc(self.damping(t), t)}
        try:
            docs["lindblad"] = serialize.lindblad_doc(self.lindblad())
        except Skipped:
            docs["lindblad"] = None
        docs["kraus"] = serialize.kraus_doc(self.kraus(t), t)
        docs["extended"] = serialize.extended_doc(self.extended(t), t)
        if self.rotated or self.kind == "t1":
            frame = {"axis": self.plan.model.get("axis"), "isotropic": "z,x,y", "t1": "x"}[self.kind]
            for doc in docs.values():
                if doc is not None:
                    doc["frame"] = frame
        return docs


# ------------------------------------------------------------------ trajectory

_RHO_ENTRY = re.compile(r"^rho\[(\d+),(\d+)\]$")


def _columns(observables):
    cols, getters = [], []
    for name in observables:
        hit = _RHO_ENTRY.match(name)
        if hit:
            i, j = (int(x) for x in hit.groups())
            cols += [f"rho_{i}_{j}_re", f"rho_{i}_{j}_im"]
            getters += [lambda r, i=i, j=j: r[i, j].real, lambda r, i=i, j=j: r[i, j].imag]
        else:
            p = pauli_string(name)
            m = p.shape[0]
            cols.append(f"c_{name}")
            getters.append(lambda r, p=p, m=m: np.sum(p * r.T).real / m)
    return cols, getters


def trajectory(plan: ExperimentPlan, channel: Channel | None = None) -> tuple[list[str], list[list[float]]]:
    channel = channel or Channel(plan)
    cols, getters = _columns(plan.observables)
    header = ["t_s", "trace_re", "purity"] + cols
    rows = []
    for t in plan.times:
        rho = channel.route_hadamard(float(t))(plan.initial_state)
        rows.append([float(t), float(np.trace(rho).real), float(np.trace(rho @ rho).real)]
                    + [float(g(rho)) for g in getters])
    return header, rows


def trajectory_csv(header, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([repr(x) for x in row])
    return buf.getvalue()


def run_plan(plan: ExperimentPlan, out_dir) -> int:
    """Write channel artifacts at the final grid time plus the trajectory table."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    channel = Channel(plan)
    docs = channel.documents(plan.t_end)
    files = []
    for name, doc in docs.items():
        if doc is None:
            continue
        fname = f"{name}.json"
        serialize.write_doc(out / fname, doc)
        files.append(fname)
    header, rows = trajectory(plan, channel)
    (out / "trajectory.csv").write_text(trajectory_csv(header, rows))
    files.append("trajectory.csv")
    manifest = {
        "model": plan.model["type"],
        "n_spins": plan.n_spins,
        "t_end_s": plan.t_end,
        "time_points": len(plan.times),
        "files": files,
        "skipped": sorted(k for k, v in docs.items() if v is None),
    }
    (out / "manifest.json").write_text(serialize.dumps(manifest))
    return EXIT_OK


def convert(plan: ExperimentPlan, to: str, t: float) -> dict:
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    channel = Channel(plan)
    if to == "damping":
        return serialize.damping_doc(channel.damping(t), t)
    if to == "kraus":
        return serialize.kraus_doc(channel.kraus(t), t)
    if to == "extended":
        return serialize.extended_doc(channel.extended(t), t)
    if to == "lindblad":
        return serialize.lindblad_doc(channel.lindblad())
    raise ValueError(f"unknown representation {to!r}")


# ---------------------------------------------------------------- verification

@dataclass
class ReportRow:
    channel: str
    pair: str
    max_dev: float | None
    tol: float
    status: str
    note: str = ""


@dataclass
class VerificationReport:
    rows: list[ReportRow] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        failed = [r for r in self.rows if r.status == "fail"]
        if any("non-PSD" in r.note for r in failed):
            return EXIT_NUMERIC
        return EXIT_VERIFY if failed else EXIT_OK

    def format(self) -> str:
        lines = [f"# {k}: {v}" for k, v in self.metadata.items()]
        lines.append(f"{'channel':<12} {'pair':<28} {'max_dev':>10} {'tol':>8} status  note")
        for r in self.rows:
            dev = "-" if r.max_dev is None else f"{r.max_dev:.3e}"
            lines.append(f"{r.channel:<12} {r.pair:<28} {dev:>10} {r.tol:>8.1e} {r.status:<7} {r.note}".rstrip())
        return "\n".join(lines) + "\n"


def random_states(n_spins: int, count: int, seed: int) -> list[np.ndarray]:
    """Seeded Ginibre states ``G G^dagger / trace``."""
    rng = np.random.default_rng(seed)
    m = 2**n_spins
    out = []
    for _ in range(count):
        g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        rho = g @ g.conj().T
        out.append(rho / np.trace(rho).real)
    return out


def matrix_units(n_spins: int) -> list[np.ndarray]:
    m = 2**n_spins
    units = []
    for i, j in itertools.product(range(m), repeat=2):
        e = np.zeros((m, m), dtype=complex)
        e[i, j] = 1
        units.append(e)
    return units


def verify(plan: ExperimentPlan, tol: float = DEFAULT_TOL, seed: int = 0, damping_hook=None) -> VerificationReport:
    """Compare every available representation pair on random states and matrix units."""
    channel = Channel(plan, damping_hook)
    kind = plan.model["type"]
    states = random_states(plan.n_spins, N_RANDOM_STATES, seed) + matrix_units(plan.n_spins)
    report = VerificationReport(metadata={
        "model": kind, "n_spins": plan.n_spins, "tolerance": tol, "seed": seed,
        "random_states": N_RANDOM_STATES, "matrix_units": 4**plan.n_spins, "time_points": len(plan.times),
    })
    outputs: dict[str, list] = {}
    notes: dict[str, str] = {}
    failures: dict[str, str] = {}
    for name, factory in channel.routes().items():
        try:
            outs = []
            for t in plan.times:
                f = factory(float(t))
                outs.append(np.array([f(s) for s in states]))
            outputs[name] = outs
        except Skipped as exc:
            notes[name] = str(exc)
        except NonPSDError as exc:
            failures[name] = f"non-PSD channel: {exc}"
    if kind == "correlated" and "lindblad" in outputs:
        note = channel.lindblad().note
        if note:
            notes["lindblad"] = note
    for name, msg in failures.items():
        report.rows.append(ReportRow(kind, f"hadamard~{name}", None, tol, "fail", msg))
    for a, b in itertools.combinations(outputs, 2):
        dev = max(float(np.abs(x - y).max()) for x, y in zip(outputs[a], outputs[b]))
        note = "; ".join(notes[k] for k in (a, b) if k in notes)
        report.rows.append(ReportRow(kind, f"{a}~{b}", dev, tol, "pass" if dev <= tol else "fail", note))
    for name, msg in notes.items():
        if name not in outputs:
            report.rows.append(ReportRow(kind, f"hadamard~{name}", None, tol, "skipped", msg))
    if "kraus" in outputs:
        ks = channel.kraus(plan.t_end)
        err = ks.completeness_error()
        report.rows.append(ReportRow(kind, "kraus completeness", err, tol, "pass" if err <= tol else "fail",
                                     f"{len(ks.ops)} operators"))
    w = channel.damping(plan.t_end)
    ok = allclose(w, w.conj().T, tol) and allclose(np.diag(w), np.ones(w.shape[0]), tol)
    report.rows.append(ReportRow(kind, "damping hermitian unit-diag", None, tol, "pass" if ok else "fail"))
    return report
