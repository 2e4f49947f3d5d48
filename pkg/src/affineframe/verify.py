"""Numeric certification of universal rigidity and affine localizability.

Everything here is read-only: checks return report dataclasses and never
raise on a failing framework. Edits in other modules call
:func:`spectral_audit` and refuse to return a framework that fails it.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .framework import Framework, equilibrium_residual, omega_blocks
from .geometry import is_general_position


@dataclass(frozen=True)
class Tolerances:
    """Thresholds used by the audits.

    Spectral tolerances are relative to the largest stress eigenvalue;
    ``residual`` is absolute (the scale of unit-norm phi updates).
    """

    zero_rel: float = 1e-6          # |lambda| below this counts as a kernel direction
    psd_rel: float = 1e-8           # most negative eigenvalue allowed
    pd_rel: float = 1e-12           # Omega_ff minimum eigenvalue must exceed this
    residual: float = 1e-8
    null_space: float = 1e-6        # Frobenius distance between kernel projectors
    reconstruction_rel: float = 1e-6
    neighborhood_cap: int = 12
    general_position: bool = True   # whether condition (c) gates check_universal_rigidity


DEFAULT_TOLERANCES = Tolerances()


@dataclass
class RigidityReport:
    eigenvalues: np.ndarray
    min_eigenvalue: float
    zero_count: int
    expected_zero_count: int
    psd_ok: bool
    rank_ok: bool
    general_position_ok: bool | None
    degenerate_vertices: list[int] = field(default_factory=list)
    require_general_position: bool = True

    @property
    def passed(self) -> bool:
        ok = self.psd_ok and self.rank_ok
        if self.require_general_position and self.general_position_ok is not None:
            ok = ok and self.general_position_ok
        return ok


@dataclass
class LocalizabilityReport:
    min_eigenvalue_ff: float
    pd_ok: bool
    reconstruction_residual: float
    reconstruction_ok: bool

    @property
    def passed(self) -> bool:
        return self.pd_ok and self.reconstruction_ok


@dataclass
class NullSpaceReport:
    distance: float
    passed: bool


@dataclass
class AuditReport:
    n: int
    dim: int
    rigidity: RigidityReport
    localizability: LocalizabilityReport
    null_space: NullSpaceReport
    equilibrium_residual: float
    equilibrium_ok: bool

    @property
    def passed(self) -> bool:
        return (
            self.rigidity.passed
            and self.localizability.passed
            and self.null_space.passed
            and self.equilibrium_ok
        )

    def failures(self) -> list[str]:
        out = []
        r = self.rigidity
        if not r.psd_ok:
            out.append(f"stress not PSD (min eigenvalue {r.min_eigenvalue:.3e})")
        if not r.rank_ok:
            out.append(f"zero-eigenvalue count {r.zero_count} != {r.expected_zero_count}")
        if r.require_general_position and r.general_position_ok is False:
            out.append(f"closed neighborhoods not in general position at {r.degenerate_vertices}")
        loc = self.localizability
        if not loc.pd_ok:
            out.append(f"follower block not positive definite (min eigenvalue {loc.min_eigenvalue_ff:.3e})")
        if not loc.reconstruction_ok:
            out.append(f"follower reconstruction residual {loc.reconstruction_residual:.3e}")
        if not self.null_space.passed:
            out.append(f"kernel differs from affine span (projector distance {self.null_space.distance:.3e})")
        if not self.equilibrium_ok:
            out.append(f"equilibrium residual {self.equilibrium_residual:.3e}")
        return out

    def summary(self) -> str:
        r, loc = self.rigidity, self.localizability
        ev = r.eigenvalues
        nonzero = ev[r.zero_count:] if r.zero_count < len(ev) else ev[:0]
        lines = [
            f"vertices: {self.n}  dimension: {self.dim}",
            f"zero eigenvalues: {r.zero_count} (expected {r.expected_zero_count})",
            f"min eigenvalue: {r.min_eigenvalue:.6g}",
            f"smallest nonzero eigenvalue: {nonzero[0]:.6g}" if len(nonzero) else "smallest nonzero eigenvalue: n/a",
            f"max eigenvalue: {ev[-1]:.6g}" if len(ev) else "max eigenvalue: n/a",
            f"min eig(Omega_ff): {loc.min_eigenvalue_ff:.6g}",
            f"reconstruction residual: {loc.reconstruction_residual:.3e}",
            f"kernel projector distance: {self.null_space.distance:.3e}",
            f"equilibrium residual: {self.equilibrium_residual:.3e}",
        ]
        if r.general_position_ok is not None:
            gp = "ok" if r.general_position_ok else f"FAIL at {r.degenerate_vertices}"
            lines.append(f"neighborhood general position: {gp}")
        lines.append("audit: PASS" if self.passed else "audit: FAIL - " + "; ".join(self.failures()))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rigidity"]["eigenvalues"] = [float(x) for x in self.rigidity.eigenvalues]
        d["passed"] = self.passed
        d["failures"] = self.failures()
        return d


def _spectrum(framework: Framework):
    ev, vecs = np.linalg.eigh(framework.stress)
    lam_max = max(float(np.max(np.abs(ev))), np.finfo(float).tiny) if len(ev) else 1.0
    return ev, vecs, lam_max


def _neighborhood_sets(framework: Framework, cap: int):
    """Yield ``(vertex, ids)`` point sets whose general position is required.

    Small closed neighborhoods are checked whole; larger ones fall back to the
    parent/child addition sets incident to the vertex.
    """
    for v in framework.ids:
        closed = (v, *sorted(framework.neighbors(v)))
        if len(closed) <= cap:
            yield v, closed
            continue
        rec = framework.hierarchy[v]
        if rec.parents:
            yield v, rec.parents + (v,)
        for c in sorted(rec.children):
            yield v, framework.hierarchy[c].parents + (c,)


def check_neighborhoods(framework: Framework, cap: int = 12) -> list[int]:
    """Vertices whose closed neighborhood is not in general position."""
    bad = []
    for v, vids in _neighborhood_sets(framework, cap):
        if v in bad:
            continue
        if not is_general_position(framework.points(vids)):
            bad.append(v)
    return bad


def check_universal_rigidity(framework: Framework, tolerances: Tolerances = DEFAULT_TOLERANCES, *, neighborhoods: bool = True, _eig=None) -> RigidityReport:
    """PSD stress, ``d+1`` zero eigenvalues and general-position neighborhoods."""
    ev, _, lam_max = _eig or _spectrum(framework)
    zero = int(np.sum(np.abs(ev) < tolerances.zero_rel * lam_max))
    min_ev = float(ev[0]) if len(ev) else 0.0
    gp_ok, bad = None, []
    if neighborhoods:
        bad = check_neighborhoods(framework, tolerances.neighborhood_cap)
        gp_ok = not bad
    return RigidityReport(
        eigenvalues=ev,
        min_eigenvalue=min_ev,
        zero_count=zero,
        expected_zero_count=framework.dim + 1,
        psd_ok=min_ev >= -tolerances.psd_rel * lam_max,
        rank_ok=zero == framework.dim + 1,
        general_position_ok=gp_ok,
        degenerate_vertices=bad,
        require_general_position=tolerances.general_position,
    )


def check_affine_localizability(framework: Framework, tolerances: Tolerances = DEFAULT_TOLERANCES, *, _eig=None) -> LocalizabilityReport:
    """Positive definite follower block and exact follower reconstruction."""
    _, _, lam_max = _eig or _spectrum(framework)
    _, _, omega_fl, omega_ff = omega_blocks(framework)
    if omega_ff.size == 0:
        return LocalizabilityReport(np.inf, True, 0.0, True)
    min_ff = float(np.linalg.eigvalsh(omega_ff)[0])
    pd_ok = min_ff > tolerances.pd_rel * lam_max
    p_l = framework.points(framework.leaders)
    p_f = framework.points(framework.followers)
    try:
        rebuilt = np.linalg.solve(omega_ff, -omega_fl @ p_l)
        resid = float(np.max(np.linalg.norm(rebuilt - p_f, axis=1)))
    except np.linalg.LinAlgError:
        resid = np.inf
    scale = max(framework.position_scale, 1.0)
    return LocalizabilityReport(min_ff, pd_ok, resid, bool(resid < tolerances.reconstruction_rel * scale))


def affine_basis(framework: Framework) -> np.ndarray:
    """Columns spanning the affine images of the configuration: ``[p, 1]``."""
    return np.hstack([framework.positions, np.ones((framework.n, 1))])


def check_null_space(framework: Framework, tol: float = 1e-6, *, _eig=None) -> NullSpaceReport:
    """Compare the bottom ``d+1`` eigenspace of the stress with ``col([p, 1])``."""
    ev, vecs, _ = _eig or _spectrum(framework)
    k = framework.dim + 1
    if framework.n < k:
        return NullSpaceReport(np.inf, False)
    bottom = vecs[:, :k]
    p_kernel = bottom @ bottom.T
    q, _ = np.linalg.qr(affine_basis(framework))
    p_affine = q @ q.T
    dist = float(np.linalg.norm(p_kernel - p_affine))
    return NullSpaceReport(dist, dist < tol)


def full_audit(framework: Framework, tolerances: Tolerances = DEFAULT_TOLERANCES, *, neighborhoods: bool = True) -> AuditReport:
    """All checks at once; one eigendecomposition shared between them."""
    eig = _spectrum(framework)
    rig = check_universal_rigidity(framework, tolerances, neighborhoods=neighborhoods, _eig=eig)
    loc = check_affine_localizability(framework, tolerances, _eig=eig)
    null = check_null_space(framework, tolerances.null_space, _eig=eig)
    resid = equilibrium_residual(framework)
    return AuditReport(
        n=framework.n,
        dim=framework.dim,
        rigidity=rig,
        localizability=loc,
        null_space=null,
        equilibrium_residual=resid,
        equilibrium_ok=resid < tolerances.residual * max(1.0, framework.weight_scale * framework.position_scale),
    )


def spectral_audit(framework: Framework, tolerances: Tolerances = DEFAULT_TOLERANCES) -> AuditReport:
    """The audit every edit must pass: :func:`full_audit` without the neighborhood scan.

    Neighborhood general position is a sufficient condition on the input
    geometry, checked locally as a precondition of each edit instead.
    """
    return full_audit(framework, tolerances, neighborhoods=False)
