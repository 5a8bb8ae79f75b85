"""Statevector VQE for operators given in the Pauli basis.

The ansatz is the hardware-efficient layout: per layer an R_y and R_z
rotation on every qubit followed by a chain of CZ gates on neighbouring
qubits, plus one final rotation pair per qubit.  States are propagated
for many parameter sets at once (one batch axis), which makes both the
finite-difference gradient and the line search essentially free; the
classical loop is Polak-Ribiere conjugate gradients with a batched
grid line minimization, optionally preceded by sequential
single-parameter sweeps whose 1-d minimizations are exact (the energy
is a sinusoid in any one angle).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, ParamLengthMismatch, SpecMismatch, StalledOptimization
from .pauli import PauliCoefficients, reconstruct

__all__ = [
    "AnsatzSpec",
    "OptimizerConfig",
    "MinimizeResult",
    "apply_ansatz",
    "energy",
    "sampled_energy",
    "minimize",
    "warm_start_embed",
    "warm_started_chain",
    "trace_to_jsonl",
]


@dataclass(frozen=True)
class AnsatzSpec:
    """Shape of the layered R_y/R_z + CZ-chain circuit."""

    qubits: int
    layers: int

    def __post_init__(self):
        if self.qubits < 1 or self.layers < 1:
            raise ValueError(f"need qubits >= 1 and layers >= 1, got {self}")

    @property
    def n_params(self) -> int:
        return 2 * self.qubits * (self.layers + 1)

    @property
    def gate_count(self) -> int:
        return self.n_params + (self.qubits - 1) * self.layers


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs of minimize; kind picks conjugate gradients or pure sweeps.

    ``patience`` and ``stall_tol`` define the stagnation window: a CG leg
    stops once the best energy has improved by less than ``stall_tol``
    over the last ``patience`` iterations.  The window must be generous;
    the late phase of an ill-conditioned descent moves through long
    plateaus that a short window would misread as convergence.
    """

    kind: str = "conjugate_gradient"
    sweeps: int = 3
    cg_tol: float = 1e-9
    fd_step: float = 1e-6
    seed: int = 0
    max_iter: int = 25000
    patience: int = 600
    rounds: int = 4
    stall_tol: float = 2e-8

    def __post_init__(self):
        if self.kind not in ("conjugate_gradient", "coordinate_sweep"):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")


class MinimizeResult(NamedTuple):
    params: np.ndarray
    energy: float
    trace: list


def _cz_signs(qubits: int) -> np.ndarray:
    """(-1)^(b_q and b_{q+1}) sign table of the CZ chain, one row per pair."""
    basis = np.arange(1 << qubits)
    rows = []
    for q in range(qubits - 1):
        both = ((basis >> q) & 1) & ((basis >> (q + 1)) & 1)
        rows.append(1.0 - 2.0 * both)
    return np.array(rows) if rows else np.empty((0, 1 << qubits))


def _propagate(spec: AnsatzSpec, params: np.ndarray) -> np.ndarray:
    """Ansatz states for a batch of parameter vectors.

    ``params`` has shape (batch, n_params); parameters are ordered layer
    by layer, qubit by qubit, (theta, phi) per qubit.  The R_z(phi)R_y(theta)
    product is applied as one 2x2 gate per qubit, written out on slice
    views (cheaper than a general contraction at these sizes), and the
    diagonal CZ chain collapses to a single sign vector per layer.
    """
    Q, L = spec.qubits, spec.layers
    C = params.shape[0]
    cz = _cz_signs(Q)
    cz_total = cz.prod(axis=0) if cz.size else None
    psi = np.zeros((C, 1 << Q), dtype=complex)
    psi[:, 0] = 1.0
    out = np.empty_like(psi)
    for layer in range(L + 1):
        for q in range(Q):
            base = 2 * (layer * Q + q)
            theta, phi = params[:, base], params[:, base + 1]
            cos, sin = np.cos(theta / 2.0), np.sin(theta / 2.0)
            em, ep = np.exp(-0.5j * phi), np.exp(0.5j * phi)
            u00 = (em * cos)[:, None, None]
            u01 = (em * sin)[:, None, None]
            u10 = (ep * sin)[:, None, None]
            u11 = (ep * cos)[:, None, None]
            view = psi.reshape(C, 1 << (Q - 1 - q), 2, 1 << q)
            dest = out.reshape(C, 1 << (Q - 1 - q), 2, 1 << q)
            lo, hi = view[:, :, 0, :], view[:, :, 1, :]
            dest[:, :, 0, :] = u00 * lo - u01 * hi
            dest[:, :, 1, :] = u10 * lo + u11 * hi
            psi, out = out, psi
        if layer < L and cz_total is not None:
            psi *= cz_total
    return psi


def apply_ansatz(spec: AnsatzSpec, params) -> np.ndarray:
    """Statevector prepared by the circuit from |0...0>."""
    params = np.asarray(params, dtype=float)
    if params.shape != (spec.n_params,):
        raise ParamLengthMismatch(
            f"got {params.shape}, ansatz {spec} needs ({spec.n_params},)"
        )
    return _propagate(spec, params[None, :])[0]


def _word_action(qubits: int, digits) -> tuple[int, np.ndarray]:
    """XOR mask and per-basis-state phase of one Pauli word.

    S|j> = phase[j] |j ^ mask>: X and Y flip their bit, Y contributes
    i*(-1)^bit and Z contributes (-1)^bit.
    """
    basis = np.arange(1 << qubits)
    mask = 0
    phase = np.ones(1 << qubits, dtype=complex)
    for n, d in enumerate(reversed(digits)):  # digit n acts on qubit n
        bit = (basis >> n) & 1
        if d in (1, 2):
            mask |= 1 << n
        if d == 2:
            phase = phase * (1j * (1.0 - 2.0 * bit))
        elif d == 3:
            phase = phase * (1.0 - 2.0 * bit)
    return mask, phase


def _word_expectations(state: np.ndarray, c: PauliCoefficients) -> np.ndarray:
    """<state| S^q |state> for every word with a nonzero coefficient."""
    Q = c.qubits
    basis = np.arange(1 << Q)
    out = np.zeros(4**Q)
    for q in range(4**Q):
        if c.coeffs[q] == 0.0 and q != 0:
            continue
        digits = tuple((q >> (2 * n)) & 3 for n in reversed(range(Q)))
        mask, phase = _word_action(Q, digits)
        flipped = (phase * state)[basis ^ mask]
        out[q] = np.vdot(state, flipped).real
    return out


def energy(state, c: PauliCoefficients) -> float:
    """Expectation of the Pauli-sum operator in the given state.

    Words act through an XOR mask and a phase vector, so each term costs
    O(2^Q) and the words themselves are never materialized.
    """
    state = np.asarray(state, dtype=complex)
    if state.shape != (1 << c.qubits,):
        raise DimensionMismatch(f"state {state.shape} vs {c.qubits} qubits")
    return float(c.coeffs @ _word_expectations(state, c))


def sampled_energy(state, c: PauliCoefficients, shots: int, seed: int = 0):
    """Finite-shot estimate of the energy, term by term.

    Each non-identity word is measured ``shots`` times as a +/-1
    variable with the exact expectation; the identity coefficient enters
    exactly.  Returns (estimate, standard_error) with the standard error
    combined across terms in quadrature.
    """
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    state = np.asarray(state, dtype=complex)
    if state.shape != (1 << c.qubits,):
        raise DimensionMismatch(f"state {state.shape} vs {c.qubits} qubits")
    rng = np.random.default_rng(seed)
    exps = np.clip(_word_expectations(state, c), -1.0, 1.0)
    estimate = c.coeffs[0]
    var = 0.0
    for q in range(1, 4**c.qubits):
        if c.coeffs[q] == 0.0:
            continue
        ones = rng.binomial(shots, (1.0 + exps[q]) / 2.0)
        mean = (2.0 * ones - shots) / shots
        estimate += c.coeffs[q] * mean
        if shots > 1:
            var += c.coeffs[q] ** 2 * (1.0 - mean**2) / (shots - 1)
    return float(estimate), float(np.sqrt(var))


def _params_hash(params: np.ndarray) -> str:
    return hashlib.sha256(params.tobytes()).hexdigest()[:16]


def _sweep_once(spec, params, f, e0):
    """One exact sequential pass over all parameters.

    The energy in any single angle t is a + b*cos(t) + c*sin(t); three
    evaluations pin the sinusoid and the minimizer is closed-form.
    """
    for k in range(params.size):
        t0 = params[k]
        up = params.copy()
        up[k] = t0 + np.pi / 2.0
        dn = params.copy()
        dn[k] = t0 - np.pi / 2.0
        ep, em = f(up), f(dn)
        a = 0.5 * (ep + em)
        params[k] = t0 - np.pi / 2.0 - np.arctan2(2.0 * e0 - ep - em, ep - em)
        e0 = a - np.hypot(e0 - a, 0.5 * (ep - em))
    return params, e0


def _line_min(fbatch, x, d, fx, hint):
    """Batched grid line minimization along d; returns (step, energy) or None.

    One coarse pass of 12 log-spaced multiples of the previous accepted
    step, one linear refinement around the coarse winner, and a parabolic
    polish through the refined triple.  All candidates of a pass are
    evaluated in a single batched propagation, so the whole search costs
    about two gradient-free energy evaluations.
    """
    steps = hint * np.geomspace(1.0 / 32.0, 4.0, 12)
    vals = fbatch(x[None, :] + steps[:, None] * d[None, :])
    i = int(np.argmin(vals))
    if vals[i] >= fx:  # nothing below fx at coarse scale; probe far smaller
        steps = hint * np.geomspace(1e-7, 1.0 / 64.0, 10)
        vals = fbatch(x[None, :] + steps[:, None] * d[None, :])
        i = int(np.argmin(vals))
        if vals[i] >= fx:
            return None
    lo = steps[i - 1] if i > 0 else steps[0] / 4.0
    hi = steps[i + 1] if i < steps.size - 1 else steps[-1] * 2.0
    fine = np.linspace(lo, hi, 10)
    fvals = fbatch(x[None, :] + fine[:, None] * d[None, :])
    j = int(np.argmin(fvals))
    if fvals[j] < vals[i]:
        best_step, best_val = fine[j], fvals[j]
    else:
        best_step, best_val = steps[i], vals[i]
    if 0 < j < fine.size - 1:
        left, mid, right = fvals[j - 1], fvals[j], fvals[j + 1]
        curvature = left - 2.0 * mid + right
        if curvature > 0.0:
            polished = fine[j] + 0.5 * (left - right) / curvature * (fine[1] - fine[0])
            val = fbatch((x + polished * d)[None, :])[0]
            if val < best_val:
                best_step, best_val = polished, val
    return float(best_step), float(best_val)


def _cg(x, fbatch, f, grad, cfg: OptimizerConfig, trace, it0):
    """Polak-Ribiere conjugate gradients with a batched grid line search.

    Along any fixed direction the energy is a trigonometric polynomial,
    which interpolating line searches resolve poorly; the grid search is
    robust to that and, being batched, costs no more than they do.
    Returns (x, fx, iteration, reason) with reason one of "gtol" (the
    gradient-norm target was met), "stall" (the best energy improved by
    less than stall_tol over the last patience iterations) or "budget"
    (max_iter exhausted).
    """
    fx = f(x)
    g = grad(x)
    d = -g
    best_fx = fx
    mark_fx = fx
    hint = 1.0
    it = it0
    reason = "budget"
    for local_it in range(cfg.max_iter):
        gnorm = np.linalg.norm(g)
        trace.append(
            {
                "iteration": it,
                "energy": float(fx),
                "gradient_norm": float(gnorm),
                "params_hash": _params_hash(x),
            }
        )
        it += 1
        if gnorm <= cfg.cg_tol:
            reason = "gtol"
            break
        if local_it and local_it % cfg.patience == 0:
            # cumulative progress over the whole window, not per step:
            # the crawl through an ill-conditioned valley gains little
            # per iteration but plenty across hundreds of them
            if mark_fx - best_fx < cfg.stall_tol:
                reason = "stall"
                break
            mark_fx = best_fx
        if g @ d >= 0.0:  # lost descent; steepest restart
            d = -g
        found = _line_min(fbatch, x, d, fx, hint)
        if found is None:
            if not np.any(d + g):  # already searching along -g; give up
                reason = "stall"
                break
            d = -g
            continue
        hint, fx = found
        x = x + hint * d
        gnew = grad(x)
        beta = max(0.0, gnew @ (gnew - g) / (g @ g))
        d = -gnew + beta * d
        g = gnew
        best_fx = min(best_fx, fx)
    return x, fx, it, reason


def minimize(spec: AnsatzSpec, c: PauliCoefficients, cfg: OptimizerConfig, initial=None) -> MinimizeResult:
    """Minimize the Pauli-sum energy over the ansatz parameters.

    conjugate_gradient runs up to ``rounds`` alternations of ``sweeps``
    sequential passes followed by a CG leg (the sweeps cut through the
    plateaus CG stalls on); coordinate_sweep runs the sweeps alone.  A
    conjugate_gradient run returns as soon as the gradient norm reaches
    cg_tol, or once a whole round -- sweeps and CG leg together -- fails
    to lower the energy by stall_tol, meaning both strategies are out of
    resolvable descent.  The trace records (iteration, energy,
    gradient_norm, params_hash) rows ready for JSON-lines serialization.

    Raises StalledOptimization -- carrying the best parameters, energy
    and trace -- when the rounds budget runs out while the energy is
    still moving, i.e. the run was cut off rather than finished.
    """
    if spec.qubits != c.qubits:
        raise SpecMismatch(f"ansatz on {spec.qubits} qubits, coefficients on {c.qubits}")
    if initial is None:
        rng = np.random.default_rng(cfg.seed)
        x = rng.normal(0.0, 0.3, size=spec.n_params)
    else:
        x = np.asarray(initial, dtype=float).copy()
        if x.shape != (spec.n_params,):
            raise ParamLengthMismatch(f"initial {x.shape} vs ({spec.n_params},)")
    H = reconstruct(c)

    def fbatch(batch):
        psi = _propagate(spec, batch)
        return np.einsum("ci,ij,cj->c", psi.conj(), H, psi).real

    def f(p):
        return float(fbatch(p[None, :])[0])

    def grad(p):
        P = p.size
        batch = np.repeat(p[None, :], 2 * P, axis=0)
        idx = np.arange(P)
        batch[idx, idx] += cfg.fd_step
        batch[P + idx, idx] -= cfg.fd_step
        vals = fbatch(batch)
        return (vals[:P] - vals[P:]) / (2.0 * cfg.fd_step)

    trace: list = []
    fx = f(x)
    it = 0
    if cfg.kind == "coordinate_sweep":
        for _ in range(cfg.sweeps):
            x, fx = _sweep_once(spec, x, f, fx)
            trace.append(
                {
                    "iteration": it,
                    "energy": float(fx),
                    "gradient_norm": float(np.linalg.norm(grad(x))),
                    "params_hash": _params_hash(x),
                }
            )
            it += 1
        return MinimizeResult(x, f(x), trace)

    for _ in range(cfg.rounds):
        round_start = fx
        for _ in range(cfg.sweeps):
            x, fx = _sweep_once(spec, x, f, fx)
        x, fx, it, reason = _cg(x, fbatch, f, grad, cfg, trace, it)
        if reason == "gtol":
            return MinimizeResult(x, f(x), trace)
        if reason == "stall" and round_start - fx < cfg.stall_tol:
            return MinimizeResult(x, f(x), trace)
    raise StalledOptimization(
        f"energy still moving after {cfg.rounds} rounds "
        f"(gradient norm {np.linalg.norm(grad(x)):.3e}, tol {cfg.cg_tol:.1e})",
        params=x,
        energy=f(x),
        trace=trace,
    )


def warm_start_embed(params, spec_from: AnsatzSpec, spec_to: AnsatzSpec) -> np.ndarray:
    """Lift optimal parameters one qubit up, new qubit left untouched.

    The added qubit is the most significant one; with its rotations at
    zero and CZ acting trivially on |0>, the embedded circuit prepares
    exactly the old state inside the first 2^Q coordinates of the nested
    basis.
    """
    if spec_to.qubits != spec_from.qubits + 1 or spec_to.layers != spec_from.layers:
        raise SpecMismatch(f"cannot embed {spec_from} into {spec_to}")
    params = np.asarray(params, dtype=float)
    if params.shape != (spec_from.n_params,):
        raise ParamLengthMismatch(f"params {params.shape} vs ({spec_from.n_params},)")
    out = np.zeros(spec_to.n_params)
    for layer in range(spec_from.layers + 1):
        for q in range(spec_from.qubits):
            src = 2 * (layer * spec_from.qubits + q)
            dst = 2 * (layer * spec_to.qubits + q)
            out[dst : dst + 2] = params[src : src + 2]
    return out


def warm_started_chain(coeff_list, layers: int, cfg: OptimizerConfig, restarts: int = 5):
    """Optimize a nested family of operators with warm-started inits.

    ``coeff_list`` holds PauliCoefficients for Q = 1, 2, ... qubits in
    order.  Each stage starts from the previous optimum embedded one
    qubit up (the first from the seeded random point minimize draws);
    when a run stalls it is retried up to ``restarts`` times from seeded
    perturbations of the best parameters so far, wider with every retry,
    keeping the best result seen.  Returns a list of MinimizeResult.
    """
    results = []
    prev = None
    for c in coeff_list:
        spec = AnsatzSpec(qubits=c.qubits, layers=layers)
        rng = np.random.default_rng(cfg.seed + 977 * c.qubits)
        if prev is not None:
            x0 = warm_start_embed(prev.params, AnsatzSpec(c.qubits - 1, layers), spec)
        else:
            x0 = None
        best = None
        for attempt in range(restarts + 1):
            try:
                res = minimize(spec, c, cfg, initial=x0)
            except StalledOptimization as stall:
                res = MinimizeResult(stall.params, stall.energy, stall.trace)
                if best is None or res.energy < best.energy:
                    best = res
                x0 = best.params + rng.normal(0.0, 0.1 * (attempt + 1), size=spec.n_params)
                continue
            if best is None or res.energy < best.energy:
                best = res
            break
        results.append(best)
        prev = best
    return results


def trace_to_jsonl(trace, path) -> None:
    """Append-free JSON-lines dump of a minimize trace."""
    with open(path, "w") as fh:
        for row in trace:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
