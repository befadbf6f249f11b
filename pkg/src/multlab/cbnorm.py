"""Completely bounded norms certified by a self-contained dense SDP solver.

Solver
------
``sdp_solve`` minimizes ``c . y`` subject to a list of linear matrix
inequalities ``F0_b + sum_i y_i F_{b,i} >= 0`` over Hermitian blocks.  It is
a primal-dual interior-point method (Mehrotra predictor-corrector with the
HKM search direction), dense and deterministic: no randomness, no external
solver.  It targets desk-scale problems; block sides, parameter counts, and
total data size are capped so a malformed request fails fast instead of
thrashing memory.

Norms
-----
* ``schur_cb_norm(grid)``: multiplier norm of a scalar grid through the
  factorization SDP: minimize t subject to ``[[P, C], [C*, Q]] >= 0`` with
  the diagonal entries P_xx <= t and Q_yy <= t.  The corner blocks are full
  Hermitian variables (they are Gram matrices of the factorization vectors,
  which need not be orthogonal).  At the optimum the two sides balance, so
  t equals min max_x ||a_x|| * max_y ||b_y|| over factorizations
  c(x, y) = <b_y, a_x>.
* ``grid_cb_solution(choi_blocks)``: the operator-valued generalization.
  The input is the (nY, nX, D^2, D^2) array of Choi matrices of the cell
  maps; cell (y, x) holds the Choi matrix of the map applied at column x,
  row y.  Stacking them into one matrix ``rmat`` indexed by (y, i, k) rows
  and (x, j, l) columns, the norm is

      minimize t  s.t.  [[X1, rmat*], [rmat, X2]] >= 0,
                        sum_j X1[(x,j,l), (x,j,l')] <= t I_D  for each x,
                        sum_i X2[(y,i,k), (y,i,k')] <= t I_D  for each y.

  A Gram factorization of the optimal completion yields the dilation
  operators V(x), W(y) with cell(x,y)(a) = W(y)* (a (x) I) V(x); the partial
  traces above are exactly V(x)*V(x) and W(y)*W(y).
* ``cb_norm(map)``: a single map as a 1x1 grid of its Choi matrix.  For
  completely positive maps the value is checked against ||phi(I)||.
* ``hs_cb_norm(model, F)``: norm of a fiber symbol through its transferred
  operator-valued grid.

All norm entry points report the SDP duality gap on request (``details``).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError, ValidationError
from .numerics import frob_norm, operator_norm

MAX_SDP_BLOCK = 200
MAX_SDP_PARAMS = 4200
MAX_SDP_ENTRIES = 20_000_000
MAX_SCALAR_GRID = 24
MAX_GRID_SIDE = 12
MAX_GRID_BLOCK_DIM = 4
MAX_CB_DIM = 8

_STEP_BACK = 0.98


@dataclass
class SdpResult:
    """Outcome of one interior-point solve."""

    status: str
    value: float
    dual_value: float
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    y: np.ndarray = field(repr=False)


@dataclass
class GridSolution:
    """Optimal data of the operator-grid norm SDP (feeds dilations)."""

    value: float
    x1: np.ndarray
    x2: np.ndarray
    rmat: np.ndarray
    nx: int
    ny: int
    block_dim: int
    result: SdpResult


def _hermitize(a):
    return (a + a.conj().T) / 2


def _chol_psd(a, what="matrix"):
    scale = max(abs(np.trace(a).real) / a.shape[0], 1.0)
    for jitter in (0.0, 1e-14, 1e-11, 1e-8):
        try:
            bump = jitter * scale * np.eye(a.shape[0], dtype=a.dtype)
            return np.linalg.cholesky(a + bump)
        except np.linalg.LinAlgError:
            continue
    raise SolverError(f"{what} lost positive definiteness")


def _max_step(a, d):
    """Largest alpha with a + alpha*d >= 0, given a > 0."""
    l = _chol_psd(a, "iterate")
    w = np.linalg.solve(l, d)
    b = np.linalg.solve(l, w.conj().T).conj().T
    lam = np.linalg.eigvalsh(_hermitize(b))[0]
    if lam >= -1e-13:
        return np.inf
    return -1.0 / lam


def sdp_solve(c, blocks, tol=1e-7, max_iter=100, loose_tol=5e-6):
    """Minimize c . y subject to F0_b + sum_i y_i F_{b,i} >= 0 per block.

    ``blocks`` is a list of pairs (F0, Fs) with F0 of shape (h, h) and Fs of
    shape (m, h, h), all Hermitian.  Returns an :class:`SdpResult`; raises
    :class:`SolverError` when the problem looks infeasible or unbounded, or
    when the iteration cap is hit far from optimality.  If the Newton system
    degenerates at the positive-semidefinite boundary (common at degenerate
    optima), the best earlier iterate is returned as ``near_optimal``
    provided it meets ``loose_tol``.
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    m = c.size
    if m == 0 or m > MAX_SDP_PARAMS:
        raise ValidationError(f"parameter count {m} outside (0, {MAX_SDP_PARAMS}]")
    data = []
    total_h = 0
    total_entries = 0
    f0_scale = 1.0
    for f0, fs in blocks:
        f0 = np.asarray(f0, dtype=complex)
        fs = np.asarray(fs, dtype=complex)
        if f0.ndim != 2 or f0.shape[0] != f0.shape[1]:
            raise ValidationError("constant terms must be square matrices")
        h = f0.shape[0]
        if h > MAX_SDP_BLOCK:
            raise ValidationError(f"block size {h} exceeds solver cap {MAX_SDP_BLOCK}")
        if fs.shape != (m, h, h):
            raise ValidationError(f"coefficient stack must have shape {(m, h, h)}")
        scale = max(1.0, np.abs(f0).max(initial=0.0), np.abs(fs).max(initial=0.0))
        if np.abs(f0 - f0.conj().T).max() > 1e-12 * scale:
            raise ValidationError("constant term is not Hermitian")
        if np.abs(fs - fs.conj().transpose(0, 2, 1)).max() > 1e-12 * scale:
            raise ValidationError("coefficient matrices are not Hermitian")
        data.append((f0, fs, fs.reshape(m, h * h)))
        total_h += h
        total_entries += fs.size
        f0_scale = max(f0_scale, frob_norm(f0))
    if not data:
        raise ValidationError("at least one block is required")
    if total_entries > MAX_SDP_ENTRIES:
        raise ValidationError("problem too large for the dense solver")

    norm_c = float(np.linalg.norm(c))
    y = np.zeros(m)
    xvar = []
    svar = []
    for f0, _, _ in data:
        h = f0.shape[0]
        eta = 1.0 + frob_norm(f0)
        svar.append(eta * np.eye(h, dtype=complex))
        xvar.append((1.0 + norm_c) * np.eye(h, dtype=complex))

    blow_up = 1e9 * (1.0 + norm_c) * f0_scale
    best_metric = np.inf
    best_snapshot = None
    pobj = gap = 0.0
    iterations = 0
    stalled = False

    for iterations in range(1, max_iter + 1):
        rres = []
        p = c.copy()
        gap = 0.0
        dobj = 0.0
        dinf = 0.0
        for b, (f0, fs, fflat) in enumerate(data):
            sb, xb = svar[b], xvar[b]
            rb = f0 + np.tensordot(y, fs, axes=(0, 0)) - sb
            rres.append(rb)
            p -= np.real(fflat.conj() @ xb.reshape(-1))
            gap += float(np.real(np.vdot(xb, sb)))
            dobj -= float(np.real(np.vdot(f0, xb)))
            dinf = max(dinf, frob_norm(rb))
        pobj = float(c @ y)
        relgap = abs(gap) / (1.0 + min(abs(pobj), abs(dobj)))
        pinf = float(np.linalg.norm(p)) / (1.0 + norm_c)
        dinf = dinf / (1.0 + f0_scale)
        metric = max(relgap, pinf, dinf)
        if metric < best_metric:
            best_metric = metric
            best_snapshot = (pobj, dobj, gap, pinf, dinf, iterations, y.copy())
        if relgap <= tol and pinf <= tol and dinf <= tol:
            return SdpResult(
                status="optimal", value=pobj, dual_value=dobj, gap=gap,
                primal_residual=pinf, dual_residual=dinf,
                iterations=iterations, y=y,
            )
        if not np.isfinite(gap) or gap > blow_up * 1e6:
            raise SolverError("solver diverged", value=pobj, gap=gap)
        if abs(pobj) > blow_up:
            raise SolverError("problem appears unbounded", value=pobj, gap=gap)
        if sum(float(np.trace(xb).real) for xb in xvar) > blow_up * 1e3:
            raise SolverError("problem appears infeasible", value=pobj, gap=gap)

        mu = gap / total_h
        mat = np.zeros((m, m))
        sinvs = []
        xrsinvs = []
        try:
            for b, (f0, fs, fflat) in enumerate(data):
                sb, xb = svar[b], xvar[b]
                h = sb.shape[0]
                sinv = _hermitize(np.linalg.solve(sb, np.eye(h, dtype=complex)))
                sinvs.append(sinv)
                xrsinvs.append(xb @ rres[b] @ sinv)
                t = np.linalg.solve(sb, fs) @ xb
                mat += np.real(fflat @ t.transpose(0, 2, 1).reshape(m, h * h).T)
            mat = (mat + mat.T) / 2
            diag_scale = max(np.trace(mat) / m, 1e-30)
            newton = None
            for jitter in (0.0, 1e-13, 1e-10, 1e-7):
                try:
                    newton = np.linalg.cholesky(mat + jitter * diag_scale * np.eye(m))
                    break
                except np.linalg.LinAlgError:
                    continue
            if newton is None:
                stalled = True
                break

            def direction(sigma_mu, second_order=None):
                rhs = -p.copy()
                for b, (_, _, fflat) in enumerate(data):
                    v = sigma_mu * sinvs[b] - xvar[b] - xrsinvs[b]
                    if second_order is not None:
                        v = v - second_order[b] @ sinvs[b]
                    rhs += np.real(fflat @ np.ravel(v.T))
                dy = np.linalg.solve(newton.conj().T, np.linalg.solve(newton, rhs))
                ds = []
                dx = []
                for b, (_, fs, _) in enumerate(data):
                    dsb = np.tensordot(dy, fs, axes=(0, 0)) + rres[b]
                    dxb = sigma_mu * sinvs[b] - xvar[b] - xvar[b] @ dsb @ sinvs[b]
                    if second_order is not None:
                        dxb = dxb - second_order[b] @ sinvs[b]
                    ds.append(dsb)
                    dx.append(_hermitize(dxb))
                return dy, dx, ds

            dy_a, dx_a, ds_a = direction(0.0)
            nb = len(data)
            ap = min(1.0, min(_max_step(xvar[b], dx_a[b]) for b in range(nb)))
            ad = min(1.0, min(_max_step(svar[b], ds_a[b]) for b in range(nb)))
            gap_aff = sum(
                float(np.real(np.vdot(xvar[b] + ap * dx_a[b], svar[b] + ad * ds_a[b])))
                for b in range(nb)
            )
            sigma = float(np.clip((max(gap_aff, 0.0) / gap) ** 3, 1e-12, 1.0))
            second = [dx_a[b] @ ds_a[b] for b in range(nb)]
            dy, dx, ds = direction(sigma * mu, second)
            ap = min(1.0, _STEP_BACK * min(_max_step(xvar[b], dx[b]) for b in range(nb)))
            ad = min(1.0, _STEP_BACK * min(_max_step(svar[b], ds[b]) for b in range(nb)))
        except SolverError:
            stalled = True
            break
        y = y + ad * dy
        for b in range(len(data)):
            xvar[b] = _hermitize(xvar[b] + ap * dx[b])
            svar[b] = _hermitize(svar[b] + ad * ds[b])

    if best_snapshot is not None and best_metric <= loose_tol:
        pobj, dobj, gap, pinf, dinf, it_best, y_best = best_snapshot
        return SdpResult(
            status="near_optimal", value=pobj, dual_value=dobj, gap=gap,
            primal_residual=pinf, dual_residual=dinf, iterations=it_best, y=y_best,
        )
    reason = "stalled" if stalled else f"no convergence after {iterations} iterations"
    raise SolverError(reason, value=pobj, gap=gap)


def _herm_params(k):
    """Real parameter list for a k x k Hermitian matrix: diagonal entries,
    then (real, imaginary) parts of the strict upper triangle, row-major."""
    params = [("d", a, a) for a in range(k)]
    for a in range(k):
        for b in range(a + 1, k):
            params.append(("r", a, b))
            params.append(("i", a, b))
    return params


def _herm_build(vals, k):
    x = np.zeros((k, k), dtype=complex)
    for v, (kind, a, b) in zip(vals, _herm_params(k)):
        if kind == "d":
            x[a, a] += v
        elif kind == "r":
            x[a, b] += v
            x[b, a] += v
        else:
            x[a, b] += 1j * v
            x[b, a] -= 1j * v
    return x


def _assemble_grid_problem(rmat, nx, ny, d):
    k1 = nx * d * d
    k2 = ny * d * d
    m = 1 + k1 * k1 + k2 * k2
    if m > MAX_SDP_PARAMS:
        raise ValidationError("problem too large for the dense solver")
    h_big = k1 + k2
    f0_big = np.zeros((h_big, h_big), dtype=complex)
    f0_big[k1:, :k1] = rmat
    f0_big[:k1, k1:] = rmat.conj().T
    fs_big = np.zeros((m, h_big, h_big), dtype=complex)

    small = []
    for side, (k, n, p0, off) in enumerate(
        [(k1, nx, 1, 0), (k2, ny, 1 + k1 * k1, k1)]
    ):
        h = n * d
        f0_s = np.zeros((h, h), dtype=complex)
        fs_s = np.zeros((m, h, h), dtype=complex)
        fs_s[0] = np.eye(h)
        for pi, (kind, a, b) in enumerate(_herm_params(k)):
            p = p0 + pi
            aa, bb = off + a, off + b
            if kind == "d":
                fs_big[p, aa, aa] = 1.0
            elif kind == "r":
                fs_big[p, aa, bb] = 1.0
                fs_big[p, bb, aa] = 1.0
            else:
                fs_big[p, aa, bb] = 1j
                fs_big[p, bb, aa] = -1j
            xa, ra = divmod(a, d * d)
            ja, la = divmod(ra, d)
            xb, rb = divmod(b, d * d)
            jb, lb = divmod(rb, d)
            if xa == xb and ja == jb:
                ga, gb = xa * d + la, xa * d + lb
                if kind == "d":
                    fs_s[p, ga, ga] -= 1.0
                elif kind == "r":
                    fs_s[p, ga, gb] -= 1.0
                    fs_s[p, gb, ga] -= 1.0
                else:
                    fs_s[p, ga, gb] -= 1j
                    fs_s[p, gb, ga] += 1j
        small.append((f0_s, fs_s))

    c = np.zeros(m)
    c[0] = 1.0
    return c, [(f0_big, fs_big)] + small, k1, k2


def grid_cb_solution(choi_blocks, tol=1e-7):
    """Solve the operator-grid norm SDP on stacked Choi blocks.

    ``choi_blocks[y, x]`` is the Choi matrix (D^2 x D^2) of the cell map at
    column x, row y.  Returns a :class:`GridSolution` whose ``value`` is the
    completely bounded multiplier norm of the grid.
    """
    arr = np.asarray(choi_blocks, dtype=complex)
    if arr.ndim != 4 or arr.shape[2] != arr.shape[3]:
        raise ValidationError("expected an (nY, nX, D^2, D^2) array of Choi blocks")
    ny, nx, dd, _ = arr.shape
    d = int(round(np.sqrt(dd)))
    if d * d != dd:
        raise ValidationError("Choi blocks must have square-dimension side D^2")
    single = nx == 1 and ny == 1
    side_cap = MAX_SCALAR_GRID if d == 1 else MAX_GRID_SIDE
    if nx > side_cap or ny > side_cap:
        raise ValidationError(f"grid side exceeds cap {side_cap}")
    if d > (MAX_CB_DIM if single else MAX_GRID_BLOCK_DIM):
        raise ValidationError("grid block dimension exceeds cap")
    rmat = arr.transpose(0, 2, 1, 3).reshape(ny * dd, nx * dd)
    c, blocks, k1, k2 = _assemble_grid_problem(rmat, nx, ny, d)
    res = sdp_solve(c, blocks, tol=tol)
    x1 = _herm_build(res.y[1 : 1 + k1 * k1], k1)
    x2 = _herm_build(res.y[1 + k1 * k1 :], k2)
    return GridSolution(
        value=float(res.value), x1=x1, x2=x2, rmat=rmat,
        nx=nx, ny=ny, block_dim=d, result=res,
    )


def schur_cb_norm(grid, tol=1e-7, details=False):
    """Multiplier norm of a scalar grid via the factorization SDP.

    A scalar grid is the one-dimensional case of the operator grid: the
    Choi matrix of multiplication by c(x, y) is the 1x1 matrix [c(x, y)].
    """
    c = np.asarray(grid, dtype=complex)
    if c.ndim != 2 or c.size == 0:
        raise ValidationError("grid must be a nonempty 2-d array")
    if not np.all(np.isfinite(c)):
        raise ValidationError("grid entries must be finite")
    sol = grid_cb_solution(c.T[:, :, None, None].copy(), tol=tol)
    if details:
        return sol.value, sol.result
    return sol.value


def cb_norm(phi, tol=1e-7, details=False):
    """Completely bounded norm of a map, via its Choi matrix as a 1x1 grid.

    For completely positive inputs the SDP value is cross-checked against
    the closed form ||phi(identity)||.
    """
    d = phi.algebra.total_dim
    if d > MAX_CB_DIM:
        raise ValidationError(f"map dimension {d} exceeds cap {MAX_CB_DIM}")
    sol = grid_cb_solution(phi.choi[None, None, :, :], tol=tol)
    value = sol.value
    if phi.is_cp(tol=1e-8):
        ref = operator_norm(phi.apply(phi.algebra.identity))
        if abs(value - ref) > 1e-6 * (1.0 + ref):
            raise SolverError(
                "completely positive consistency check failed",
                value=value, gap=sol.result.gap,
            )
    if details:
        return value, sol.result
    return value


def schur_symbol_cb_norm(symbol, tol=1e-7, details=False):
    """Norm of an operator-valued grid symbol (object with ``maps[x][y]``)."""
    maps = symbol.maps
    nx = len(maps)
    ny = len(maps[0])
    dd = maps[0][0].algebra.total_dim ** 2
    blocks = np.zeros((ny, nx, dd, dd), dtype=complex)
    for x in range(nx):
        for y_ in range(ny):
            blocks[y_, x] = maps[x][y_].choi
    sol = grid_cb_solution(blocks, tol=tol)
    if details:
        return sol.value, sol.result
    return sol.value


def hs_cb_norm(model, symbol, tol=1e-7, details=False):
    """Norm of a fiber symbol, computed through its transferred grid."""
    from .transference import transfer_symbol

    transferred = transfer_symbol(model, symbol)
    return schur_symbol_cb_norm(transferred, tol=tol, details=details)
