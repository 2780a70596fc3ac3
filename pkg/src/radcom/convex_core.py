"""Self-contained interior-point solver for the two convex inner problems.

Both templates share one structure: Hermitian PSD matrix variables, a
linear-plus-logdet objective, and concave linear-plus-logdet inequality
constraints.  A log-barrier method with exact Newton steps on the real
coordinates of the Hermitian variables solves them; problem sizes here
(matrix dimensions <= ~40, a handful of terms) keep every Newton system
tiny, so no sparsity or structure exploitation is attempted.

Coordinates: an ``n x n`` Hermitian matrix is identified with the real
vector ``(diag, sqrt(2)*Re upper, sqrt(2)*Im upper)`` of length ``n^2``,
an orthonormal expansion under ``<A, B> = tr(AB)``.  log-det terms have the
form ``w * ln det(A0 + sum_j S_j V S_j^H)``; gradients and Hessians in the
coordinate basis follow from ``d ln det W = tr(W^{-1} dW)`` and
``d^2 ln det W = -tr(W^{-1} dW W^{-1} dW)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleProblem, NotConverged
from .scenario import RadarOperators

__all__ = [
    "SolverOptions",
    "PsdVariable",
    "MinTraceResult",
    "OverlapInnerResult",
    "solve_min_trace_logdet",
    "solve_overlap_inner",
    "logdet_gradient",
    "psd_project",
]

POWER_CAP = 1.0e6   # feasibility probes stop growing the allocation here
GAP_TARGET = 1e-5   # final barrier suboptimality bound (m_total / t); larger
                    # targets push t into a regime where the graded barrier
                    # Hessian exceeds double-precision conditioning

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SolverOptions:
    """Iteration budgets and tolerances shared by the AO loops and the barrier."""

    max_outer_iters: int = 100
    tol: float = 0.01
    barrier_mu: float = 10.0
    newton_tol: float = 1e-7
    max_newton: int = 50

    def __post_init__(self):
        if self.max_outer_iters < 1 or self.max_newton < 1:
            raise ValueError("iteration limits must be positive")
        if min(self.tol, self.barrier_mu, self.newton_tol) <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class PsdVariable:
    """A validated Hermitian positive semidefinite matrix."""

    value: np.ndarray
    dim: int

    @classmethod
    def wrap(cls, m: np.ndarray) -> "PsdVariable":
        m = np.asarray(m, dtype=complex)
        scale = max(1.0, float(np.linalg.norm(m)))
        if np.linalg.norm(m - m.conj().T) > 1e-9 * scale:
            raise ValueError("matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        ev = np.linalg.eigvalsh(m)
        if ev[0] < -1e-9 * max(ev[-1], 0.0) - 1e-12:
            raise ValueError(f"matrix is not PSD (min eigenvalue {ev[0]:.3e})")
        return cls(value=m, dim=m.shape[0])


# --------------------------------------------------------------------------
# Hermitian coordinates
# --------------------------------------------------------------------------

class _HermMap:
    def __init__(self, n: int):
        self.n = n
        self.size = n * n
        self.iu = np.triu_indices(n, 1)

    def to_vec(self, m: np.ndarray) -> np.ndarray:
        off = m[self.iu]
        return np.concatenate([np.diag(m).real, _SQRT2 * off.real,
                               _SQRT2 * off.imag])

    def from_vec(self, x: np.ndarray) -> np.ndarray:
        n = self.n
        k = n * (n - 1) // 2
        m = np.zeros((n, n), dtype=complex)
        m[self.iu] = (x[n:n + k] + 1j * x[n + k:]) / _SQRT2
        m = m + m.conj().T
        m[np.diag_indices(n)] = x[:n]
        return m


_HERM_MAPS: dict[int, _HermMap] = {}


def _herm_map(n: int) -> _HermMap:
    if n not in _HERM_MAPS:
        _HERM_MAPS[n] = _HermMap(n)
    return _HERM_MAPS[n]


def _mapped_basis(factors: list[np.ndarray], n: int) -> np.ndarray:
    """Stack ``P_k = sum_j S_j B_k S_j^H`` over the coordinate basis of dim n."""
    hm = _herm_map(n)
    m = factors[0].shape[0]
    out = np.zeros((n * n, m, m), dtype=complex)
    for s in factors:
        outer = np.einsum("mi,nj->ijmn", s, s.conj())
        out[:n] += outer[np.arange(n), np.arange(n)]
        i, j = hm.iu
        if i.size:
            upper = outer[i, j]
            lower = outer[j, i]
            k = i.size
            out[n:n + k] += (upper + lower) / _SQRT2
            out[n + k:] += 1j * (upper - lower) / _SQRT2
    return out


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


# --------------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------------

@dataclass
class _LogDetTerm:
    weight: float
    const: np.ndarray
    factors: dict[int, list[np.ndarray]]  # var index -> congruence factors


@dataclass
class _Expr:
    """``constant + sum_v tr(K_v V_v) + sum_t w_t ln det(...)``."""

    constant: float = 0.0
    linear: dict[int, np.ndarray] = field(default_factory=dict)
    logdets: list[_LogDetTerm] = field(default_factory=list)

    def negated(self) -> "_Expr":
        return _Expr(
            constant=-self.constant,
            linear={u: -k for u, k in self.linear.items()},
            logdets=[_LogDetTerm(weight=-t.weight, const=t.const,
                                 factors=t.factors) for t in self.logdets])


class _CompiledExpr:
    def __init__(self, expr: _Expr, dims: list[int], offsets: list[int],
                 total: int):
        self.constant = expr.constant
        self.total = total
        self.lin_vec = np.zeros(total)
        for u, coeff in expr.linear.items():
            hm = _herm_map(dims[u])
            self.lin_vec[offsets[u]:offsets[u] + hm.size] += hm.to_vec(coeff)
        self.terms = []
        for term in expr.logdets:
            mapped = {u: (offsets[u], dims[u] ** 2, _mapped_basis(fs, dims[u]))
                      for u, fs in term.factors.items()}
            self.terms.append((term.weight, term.const, term.factors, mapped))

    def _inner(self, term_idx: int, mats: list[np.ndarray]) -> np.ndarray:
        _, const, factors, _ = self.terms[term_idx]
        w = const.copy()
        for u, fs in factors.items():
            for s in fs:
                w += s @ mats[u] @ s.conj().T
        return _hermitize(w)

    def value(self, mats: list[np.ndarray], x: np.ndarray) -> float | None:
        """Expression value, or ``None`` outside the log-det domain."""
        val = self.constant + float(self.lin_vec @ x)
        for idx, (weight, _, _, _) in enumerate(self.terms):
            w = self._inner(idx, mats)
            try:
                chol = np.linalg.cholesky(w)
            except np.linalg.LinAlgError:
                return None
            val += weight * 2.0 * float(np.sum(np.log(np.diag(chol).real)))
        return val

    def value_grad_hess(self, mats: list[np.ndarray], x: np.ndarray):
        val = self.constant + float(self.lin_vec @ x)
        grad = self.lin_vec.copy()
        hess = np.zeros((self.total, self.total))
        for idx, (weight, _, _, mapped) in enumerate(self.terms):
            w = self._inner(idx, mats)
            try:
                chol = np.linalg.cholesky(w)
            except np.linalg.LinAlgError:
                return None, None, None
            val += weight * 2.0 * float(np.sum(np.log(np.diag(chol).real)))
            winv = _hermitize(np.linalg.inv(w))
            prods = {}
            for u, (off, size, pstack) in mapped.items():
                grad[off:off + size] += weight * np.einsum(
                    "ab,kba->k", winv, pstack).real
                prods[u] = (off, size, np.matmul(winv[None, :, :], pstack))
            done = []
            for u, (off_u, size_u, a_u) in prods.items():
                for v, (off_v, size_v, a_v) in prods.items():
                    if (v, u) in done:
                        continue
                    done.append((u, v))
                    block = -weight * np.einsum("kab,lba->kl", a_u, a_v).real
                    hess[off_u:off_u + size_u, off_v:off_v + size_v] += block
                    if v != u:
                        hess[off_v:off_v + size_v, off_u:off_u + size_u] += block.T
        return val, grad, hess


# --------------------------------------------------------------------------
# Barrier engine
# --------------------------------------------------------------------------

@dataclass
class _BarrierResult:
    mats: list[np.ndarray]
    t_final: float
    newton_iters: int
    stages: int
    slacks: list[float]
    multipliers: list[float]
    gap_bound: float
    grad_norm: float
    # stationarity residual of the returned primal-dual pair: the Newton
    # decrement of the final barrier (local curvature metric) in original
    # objective units
    kkt_residual: float = 0.0


class _BarrierProblem:
    """minimize convex ``objective`` s.t. concave ``ineqs >= 0`` and PD vars."""

    def __init__(self, dims: list[int], objective: _Expr, ineqs: list[_Expr]):
        self.dims = dims
        self.offsets = []
        total = 0
        for d in dims:
            self.offsets.append(total)
            total += d * d
        self.total = total
        self.obj = _CompiledExpr(objective, dims, self.offsets, total)
        self.ineqs = [_CompiledExpr(e, dims, self.offsets, total) for e in ineqs]
        psd = _Expr(logdets=[
            _LogDetTerm(weight=1.0, const=np.zeros((d, d), dtype=complex),
                        factors={u: [np.eye(d, dtype=complex)]})
            for u, d in enumerate(dims)])
        self.psd = _CompiledExpr(psd, dims, self.offsets, total)
        # barrier count: one per inequality, matrix dimension per PSD cone
        self.m_total = len(ineqs) + sum(dims)

    def unpack(self, x: np.ndarray) -> list[np.ndarray]:
        return [
            _herm_map(d).from_vec(x[off:off + d * d])
            for d, off in zip(self.dims, self.offsets)
        ]

    def pack(self, mats: list[np.ndarray]) -> np.ndarray:
        return np.concatenate([_herm_map(d).to_vec(m)
                               for d, m in zip(self.dims, mats)])

    def slack_values(self, mats, x) -> list[float | None]:
        return [ineq.value(mats, x) for ineq in self.ineqs]

    def phi(self, x: np.ndarray, t: float) -> float | None:
        mats = self.unpack(x)
        obj = self.obj.value(mats, x)
        if obj is None:
            return None
        val = t * obj
        for ineq in self.ineqs:
            g = ineq.value(mats, x)
            if g is None or g <= 0:
                return None
            val -= math.log(g)
        psd_val = self.psd.value(mats, x)
        if psd_val is None:
            return None
        return val - psd_val

    def phi_grad_hess(self, x: np.ndarray, t: float):
        mats = self.unpack(x)
        obj_v, obj_g, obj_h = self.obj.value_grad_hess(mats, x)
        if obj_v is None:
            return None, None, None, None
        val = t * obj_v
        grad = t * obj_g
        hess = t * obj_h
        slacks = []
        for ineq in self.ineqs:
            g, gg, gh = ineq.value_grad_hess(mats, x)
            if g is None or g <= 0:
                return None, None, None, None
            slacks.append(g)
            val -= math.log(g)
            grad -= gg / g
            hess += np.outer(gg, gg) / (g * g) - gh / g
        p_v, p_g, p_h = self.psd.value_grad_hess(mats, x)
        if p_v is None:
            return None, None, None, None
        val -= p_v
        grad -= p_g
        hess -= p_h
        return val, grad, hess, slacks


def _newton_step(hess: np.ndarray, grad: np.ndarray) -> tuple[np.ndarray, float]:
    """Descent direction from the (regularized) Newton system.

    Jacobi scaling keeps the system solvable when barrier curvatures of
    nearly-active cones dwarf the rest; the Tikhonov term grows until the
    computed direction actually descends.
    """
    d = np.sqrt(np.clip(np.diag(hess), 1e-300, None))
    hs = hess / np.outer(d, d)
    gs = grad / d
    n = hs.shape[0]
    tau = 1e-13
    while tau < 1e2:
        try:
            reg = hs + tau * np.eye(n)
            step_s = np.linalg.solve(reg, -gs)
            for _ in range(2):  # iterative refinement for graded curvatures
                resid = reg @ step_s + gs
                step_s -= np.linalg.solve(reg, resid)
            step = step_s / d
        except np.linalg.LinAlgError:
            tau *= 1e4
            continue
        dec2 = float(-grad @ step)
        if np.isfinite(dec2) and dec2 >= 0:
            return step, dec2
        tau *= 1e4
    step = -grad / np.maximum(d * d, 1e-300)  # scaled gradient descent
    return step, float(-grad @ step)


def _barrier_minimize(problem: _BarrierProblem, x0: np.ndarray,
                      opts: SolverOptions, gap_target: float = GAP_TARGET,
                      t0: float = 1.0, stop_when=None,
                      trace=None) -> _BarrierResult:
    x = x0.copy()
    if problem.phi(x, t0) is None:
        raise InfeasibleProblem("starting point is not strictly feasible")
    t = t0
    total_newton = 0
    stages = 0
    grad_norm = np.inf
    while True:
        stages += 1
        final_stage = problem.m_total / t <= gap_target
        tol_grad = opts.newton_tol * (1.0 + t)
        tol_dec = 1e-9 if final_stage else 1e-6
        centered = False
        no_progress = 0
        last_dec2 = np.inf
        for _ in range(opts.max_newton):
            val, grad, hess, slacks = problem.phi_grad_hess(x, t)
            if val is None:
                raise NotConverged("not converged: iterate left the domain")
            grad_norm = float(np.linalg.norm(grad))
            if grad_norm <= tol_grad:
                centered = True
                break
            step, dec2 = _newton_step(hess, grad)
            last_dec2 = dec2
            if dec2 / 2.0 <= tol_dec:
                centered = True
                break
            slope = float(grad @ step)
            alpha = 1.0
            accepted = False
            accepted_val = val
            while alpha >= 1e-14:
                trial = x + alpha * step
                tval = problem.phi(trial, t)
                if tval is not None and tval <= val + 1e-4 * alpha * slope:
                    x = trial
                    accepted = True
                    accepted_val = tval
                    break
                alpha *= 0.5
            total_newton += 1
            if trace is not None:
                trace({"stage": stages, "iteration": total_newton,
                       "objective": val / t, "phi": val,
                       "slack": min(slacks) if slacks else None,
                       "step": alpha if accepted else 0.0})
            # detect the floating-point floor: repeated steps that change
            # the barrier value by less than its evaluation noise mean the
            # iterate is as centered as double precision allows
            progress = val - accepted_val
            if progress <= max(1e-11, 1e-14 * abs(val)):
                no_progress += 1
                if no_progress >= 3:
                    centered = True
                    break
            else:
                no_progress = 0
            if stop_when is not None:
                mats = problem.unpack(x)
                if stop_when(mats):
                    return _BarrierResult(
                        mats=mats, t_final=t, newton_iters=total_newton,
                        stages=stages, slacks=problem.slack_values(mats, x),
                        multipliers=[], gap_bound=problem.m_total / t,
                        grad_norm=grad_norm)
        if not centered and last_dec2 / 2.0 > 0.1:
            # a loosely centered stage is still a usable path point; give up
            # only when real progress was available and the budget died
            raise NotConverged("not converged: Newton budget exhausted")
        if final_stage:
            break
        t *= opts.barrier_mu
    mats = problem.unpack(x)
    slacks = problem.slack_values(mats, x)
    mult = [1.0 / (t * s) for s in slacks]
    _, grad, hess, _ = problem.phi_grad_hess(x, t)
    _, dec2 = _newton_step(hess, grad)
    return _BarrierResult(mats=mats, t_final=t, newton_iters=total_newton,
                          stages=stages, slacks=slacks, multipliers=mult,
                          gap_bound=problem.m_total / t, grad_norm=grad_norm,
                          kkt_residual=math.sqrt(max(dec2, 0.0)) / t)


def _phase_one(dims: list[int], slack_expr: _Expr, other_ineqs: list[_Expr],
               start_mats: list[np.ndarray], opts: SolverOptions,
               margin: float, trace=None) -> tuple[list[np.ndarray], int]:
    """Find mats with ``slack_expr > 0`` or certify infeasibility.

    Maximizes the slack subject to the remaining constraints, exiting early
    once the slack clears ``margin``.
    """
    problem = _BarrierProblem(dims, slack_expr.negated(), other_ineqs)
    x0 = problem.pack(start_mats)
    compiled_slack = _CompiledExpr(slack_expr, dims, problem.offsets,
                                   problem.total)

    def reached(mats):
        v = compiled_slack.value(mats, problem.pack(mats))
        return v is not None and v > margin

    wrapped = None
    if trace is not None:
        wrapped = lambda rec: trace({**rec, "phase": "feasibility"})
    res = _barrier_minimize(problem, x0, opts, gap_target=GAP_TARGET,
                            stop_when=reached, trace=wrapped)
    final = compiled_slack.value(res.mats, problem.pack(res.mats))
    if final is None or final <= 0:
        raise InfeasibleProblem("infeasible")
    return res.mats, res.newton_iters


# --------------------------------------------------------------------------
# Template A: minimum-trace covariance under the variational secrecy constraint
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MinTraceResult:
    q_c: PsdVariable
    lambda_secrecy: float
    slack: float
    newton_iters: int
    stages: int
    gap_bound: float


def _secrecy_slack_expr(h_c, h_d, y_mat, r_bar, n_bar,
                        sigma2_c, sigma2_r) -> _Expr:
    """Constraint slack (nats) of the fixed-Y variational secrecy bound."""
    m = h_c.shape[0]
    _, logdet_y = np.linalg.slogdet(y_mat)
    const = (float(logdet_y) + n_bar - sigma2_r * float(np.trace(y_mat).real)
             - r_bar)
    k = _hermitize(-(h_d.conj().T @ y_mat @ h_d))
    term = _LogDetTerm(weight=1.0,
                       const=sigma2_c * np.eye(m, dtype=complex),
                       factors={0: [np.asarray(h_c, dtype=complex)]})
    return _Expr(constant=const, linear={0: k}, logdets=[term])


def solve_min_trace_logdet(h_c, h_d, y_mat, params, sigma2_c, sigma2_r,
                           opts: SolverOptions | None = None,
                           p_total: float | None = None,
                           q_start: np.ndarray | None = None,
                           trace=None) -> MinTraceResult:
    """Minimize ``tr(Q)`` subject to the fixed-Y secrecy constraint.

    Returns the zero covariance immediately when it is feasible.  Raises
    ``InfeasibleProblem`` when the constraint cannot be met by any PSD
    covariance within the power cap, ``NotConverged`` when a Newton stage
    exhausts its budget.
    """
    opts = opts or SolverOptions()
    h_c = np.asarray(h_c, dtype=complex)
    h_d = np.asarray(h_d, dtype=complex)
    n_t = h_c.shape[1]
    dims = [n_t]
    slack_expr = _secrecy_slack_expr(h_c, h_d, y_mat, params.r_bar,
                                     params.n_bar, sigma2_c, sigma2_r)
    problem = _BarrierProblem(
        dims, _Expr(linear={0: np.eye(n_t, dtype=complex)}), [slack_expr])

    zero = [np.zeros((n_t, n_t), dtype=complex)]
    slack_at_zero = problem.ineqs[0].value(zero, np.zeros(problem.total))
    if slack_at_zero is not None and slack_at_zero >= 0:
        return MinTraceResult(
            q_c=PsdVariable.wrap(zero[0]), lambda_secrecy=0.0,
            slack=float(slack_at_zero), newton_iters=0, stages=0,
            gap_bound=0.0)

    phase1_iters = 0
    start = None
    # interior margin: barrier paths started hard against either boundary
    # produce hopelessly conditioned Newton systems
    margin = max(1e-3, 1e-2 * (1.0 + abs(params.r_bar)))

    def slack_of(q):
        if np.linalg.eigvalsh(q)[0] <= 0:
            return None
        return problem.ineqs[0].value([q], problem.pack([q]))

    candidates = []
    if q_start is not None:
        tr = max(float(np.trace(q_start).real), 1e-9)
        for blend in (0.9, 0.7):
            candidates.append(_hermitize(
                blend * q_start + (1.0 - blend) * (tr / n_t) * np.eye(n_t)))
    delta = (p_total / (10.0 * n_t)) if p_total else 0.1
    candidates.extend(delta * scale * np.eye(n_t, dtype=complex)
                      for scale in (1.0, 10.0, 100.0, 1000.0))
    for q in candidates:
        s = slack_of(q)
        if s is not None and s > margin:
            start = [q]
            break
    if start is None:
        cap = _Expr(constant=POWER_CAP,
                    linear={0: -np.eye(n_t, dtype=complex)})
        base = delta * np.eye(n_t, dtype=complex)
        if q_start is not None:
            blended = candidates[0]
            if np.linalg.eigvalsh(blended)[0] > 0:
                base = blended
        mats, phase1_iters = _phase_one(dims, slack_expr, [cap], [base],
                                        opts, margin=margin, trace=trace)
        q1 = _hermitize(mats[0])
        # pull the phase-I point off the PSD boundary when possible
        tr1 = max(float(np.trace(q1).real), 1e-12)
        for blend in (0.7, 0.9, 0.99, 1.0):
            q = _hermitize(blend * q1 + (1.0 - blend) * (tr1 / n_t) * np.eye(n_t))
            s = slack_of(q)
            if s is not None and s > 0:
                start = [q]
                break

    wrapped = None
    if trace is not None:
        wrapped = lambda rec: trace({**rec, "phase": "optimize"})
    res = _barrier_minimize(problem, problem.pack(start), opts,
                            gap_target=GAP_TARGET, trace=wrapped)
    q = _hermitize(res.mats[0])
    return MinTraceResult(q_c=PsdVariable.wrap(q),
                          lambda_secrecy=res.multipliers[0],
                          slack=res.slacks[0],
                          newton_iters=res.newton_iters + phase1_iters,
                          stages=res.stages, gap_bound=res.gap_bound)


# --------------------------------------------------------------------------
# Template B: SDR inner step of the shared-resource design
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class OverlapInnerResult:
    s_bar: PsdVariable
    q_c: PsdVariable
    objective: float        # nats, at the returned point
    lambda_secrecy: float
    lambda_power: float
    secrecy_slack: float    # nats
    kkt_residual: float
    newton_iters: int
    stages: int


def _block_columns(mat: np.ndarray, block: int) -> list[np.ndarray]:
    return [mat[:, i * block:(i + 1) * block]
            for i in range(mat.shape[1] // block)]


def _overlap_exprs(ops: RadarOperators, h_c, h_d, x_mat, ybar_mat, z_mat,
                   r_hat, p_total, sigma2_c, sigma2_r):
    """Objective (to minimize) and constraints of the SDR inner problem."""
    n_t = h_c.shape[1]
    ln = ops.c_mat.shape[0]
    lnt = ops.d_mat.shape[0]
    l = lnt // n_t
    lm = l * h_c.shape[0]

    t_op = ops.as_mat @ ops.ad_mat
    t_blocks = _block_columns(t_op, n_t)
    hc_bar = np.kron(np.eye(l), np.asarray(h_c, dtype=complex))
    hd_bar = np.kron(np.eye(l), np.asarray(h_d, dtype=complex))
    hc_blocks = _block_columns(hc_bar, n_t)
    hd_blocks = _block_columns(hd_bar, n_t)
    dh = ops.d_mat.conj().T

    c_base = sigma2_r * ops.c_mat  # C(Q) at Q = 0

    # objective of the inner step: ln det(C(Q) + D^H S D) - tr(X C(Q)),
    # negated for minimization; tr(X * const part of C(Q)) is kept so the
    # reported value matches the direct evaluation.
    k_q = sum(tb.conj().T @ x_mat @ tb for tb in t_blocks)
    obj = _Expr(
        constant=float(np.trace(x_mat @ c_base).real),
        linear={1: _hermitize(k_q)},
        logdets=[_LogDetTerm(weight=-1.0, const=c_base,
                             factors={0: [dh], 1: t_blocks})])

    _, logdet_y = np.linalg.slogdet(ybar_mat)
    _, logdet_z = np.linalg.slogdet(z_mat)
    const = (float(logdet_y) + ln - sigma2_r * float(np.trace(ybar_mat).real)
             + float(logdet_z) + lm - sigma2_c * float(np.trace(z_mat).real)
             - r_hat)
    lin_s = _hermitize(-(hd_bar.conj().T @ ybar_mat @ hd_bar)
                       - (hc_bar.conj().T @ z_mat @ hc_bar))
    lin_q = _hermitize(-sum(hb.conj().T @ ybar_mat @ hb for hb in hd_blocks))
    secrecy = _Expr(
        constant=const,
        linear={0: lin_s, 1: lin_q},
        logdets=[
            _LogDetTerm(weight=1.0, const=sigma2_c * np.eye(lm, dtype=complex),
                        factors={0: [hc_bar], 1: hc_blocks}),
            _LogDetTerm(weight=1.0, const=sigma2_r * np.eye(ln, dtype=complex),
                        factors={0: [hd_bar]}),
        ])

    power = _Expr(constant=float(p_total),
                  linear={0: -np.eye(lnt, dtype=complex),
                          1: -np.eye(n_t, dtype=complex)})
    return [lnt, n_t], obj, secrecy, power


def solve_overlap_inner(ops: RadarOperators, h_c, h_d, x_mat, ybar_mat, z_mat,
                        r_hat: float, p_total: float,
                        sigma2_c: float = 1.0, sigma2_r: float = 1.0,
                        opts: SolverOptions | None = None,
                        warm: tuple[np.ndarray, np.ndarray] | None = None,
                        trace=None) -> OverlapInnerResult:
    """SDR inner step: maximize the surrogate SINR objective.

    Decision variables are the radar Gram matrix and the information
    covariance; the secrecy surrogate and the total power budget are the
    constraints.  ``r_hat`` is the per-block threshold in nats.
    """
    opts = opts or SolverOptions()
    if r_hat < 0:
        raise ValueError(f"secrecy threshold must be >= 0, got {r_hat}")
    for name, mat in (("x_mat", x_mat), ("ybar_mat", ybar_mat),
                      ("z_mat", z_mat)):
        ev = np.linalg.eigvalsh(_hermitize(np.asarray(mat, dtype=complex)))
        if ev[0] < -1e-9 * max(ev[-1], 1.0):
            raise ValueError(f"{name} must be PSD")

    dims, obj, secrecy, power = _overlap_exprs(
        ops, h_c, h_d, x_mat, ybar_mat, z_mat, r_hat, p_total,
        sigma2_c, sigma2_r)
    lnt, n_t = dims
    problem = _BarrierProblem(dims, obj, [secrecy, power])

    margin = max(1e-3, 1e-2 * (1.0 + abs(r_hat)))

    def usable(mats):
        x = problem.pack(mats)
        if min(np.linalg.eigvalsh(mats[0])[0],
               np.linalg.eigvalsh(mats[1])[0]) <= 0:
            return False
        vals = problem.slack_values(mats, x)
        return (all(v is not None for v in vals) and vals[1] > 1e-6 * p_total
                and vals[0] > margin)

    def blended(pair, blend):
        out = []
        for m, d in zip(pair, dims):
            tr = max(float(np.trace(m).real), 1e-9)
            out.append(_hermitize(blend * m + (1.0 - blend) * (tr / d)
                                  * np.eye(d)))
        return out

    start = None
    candidates = []
    if warm is not None:
        shrunk = [0.995 * warm[0], 0.995 * warm[1]]
        candidates.extend(blended(shrunk, b) for b in (0.9, 0.7))
    candidates.append([0.49 * p_total / lnt * np.eye(lnt, dtype=complex),
                       0.49 * p_total / n_t * np.eye(n_t, dtype=complex)])
    phase1_iters = 0
    for cand in candidates:
        if usable(cand):
            start = cand
            break
    if start is None:
        base = candidates[-1]
        if warm is not None and _domain_ok(problem, candidates[0]):
            base = candidates[0]
        mats, phase1_iters = _phase_one(dims, secrecy, [power], base, opts,
                                        margin=margin, trace=trace)
        for blend in (0.7, 0.9, 0.99, 1.0):
            cand = blended(mats, blend)
            x = problem.pack(cand)
            vals = problem.slack_values(cand, x)
            if (min(np.linalg.eigvalsh(cand[0])[0],
                    np.linalg.eigvalsh(cand[1])[0]) > 0
                    and all(v is not None and v > 0 for v in vals)):
                start = cand
                break
        if start is None:
            start = mats

    wrapped = None
    if trace is not None:
        wrapped = lambda rec: trace({**rec, "phase": "optimize"})
    res = _barrier_minimize(problem, problem.pack(start), opts,
                            gap_target=GAP_TARGET, trace=wrapped)
    s_bar = _hermitize(res.mats[0])
    q_c = _hermitize(res.mats[1])
    obj_val = problem.obj.value(res.mats, problem.pack(res.mats))
    return OverlapInnerResult(
        s_bar=PsdVariable.wrap(s_bar), q_c=PsdVariable.wrap(q_c),
        objective=-float(obj_val),
        lambda_secrecy=res.multipliers[0], lambda_power=res.multipliers[1],
        secrecy_slack=res.slacks[0],
        kkt_residual=res.kkt_residual,
        newton_iters=res.newton_iters + phase1_iters, stages=res.stages)


def _domain_ok(problem: _BarrierProblem, mats: list[np.ndarray]) -> bool:
    if any(np.linalg.eigvalsh(m)[0] <= 0 for m in mats):
        return False
    vals = problem.slack_values(mats, problem.pack(mats))
    # power slack must be strictly positive; the secrecy slack may be anything
    return vals[1] is not None and vals[1] > 0


# --------------------------------------------------------------------------
# Numeric utilities
# --------------------------------------------------------------------------

def logdet_gradient(h: np.ndarray, q: np.ndarray, sigma2: float) -> np.ndarray:
    """Gradient of ``ln det(H Q H^H + sigma2 I)`` with respect to ``Q``."""
    m = h.shape[0]
    inner = _hermitize(h @ q @ h.conj().T + sigma2 * np.eye(m))
    grad = h.conj().T @ np.linalg.solve(inner, h)
    return _hermitize(grad)


def psd_project(m: np.ndarray) -> PsdVariable:
    """Frobenius-nearest PSD matrix (eigenvalue clipping at zero)."""
    m = np.asarray(m, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(m)))
    if np.linalg.norm(m - m.conj().T) > 1e-9 * scale:
        raise ValueError("matrix is not Hermitian")
    m = _hermitize(m)
    vals, vecs = np.linalg.eigh(m)
    if vals[0] >= 0:
        return PsdVariable(value=m, dim=m.shape[0])
    clipped = (vecs * np.clip(vals, 0.0, None)) @ vecs.conj().T
    return PsdVariable(value=_hermitize(clipped), dim=m.shape[0])
