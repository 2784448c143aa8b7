"""Screened fractional semi-norms, component averages and zero-mass realizations.

The screened semi-norm of a P1 function on an interval is a quadratic form
f^T Q f. Q is assembled panel pair by panel pair:

* identical panels: the difference quotient is the constant slope, so the
  contribution is slope^2 times the area of the panel square inside the band
  |y - x| <= rho;
* adjacent panels: the integrand is bounded but not smooth at the shared
  node; a Duffy split around that node removes the radial variable exactly;
* separated panels: tensor Gauss-Legendre, with the rectangle clipped by the
  band edge y - x = rho when it crosses it.

Q depends only on the nodes and the screening radius and is cached.
"""
import math
import threading
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from cornerwaves.config.settings import get_settings
from cornerwaves.core.errors import DimensionError, GeometryError
from cornerwaves.meshing.trace_grid import TraceComponent, TraceGrid
from cornerwaves.traces.fields import FieldLike, TraceField, as_values

NEAR_POINTS = 10
FAR_POINTS = 6
# separated pairs closer than this many panel sizes use NEAR_POINTS
NEAR_FACTOR = 3.0
PAIR_CHUNK = 4096

_GL: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
_gl_lock = threading.Lock()


def _gauss(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    with _gl_lock:
        if n not in _GL:
            xi, w = np.polynomial.legendre.leggauss(n)
            _GL[n] = (0.5 * (xi + 1.0), 0.5 * w)
        return _GL[n]


def _band_area(h: float, rho: float) -> float:
    if rho >= h:
        return h * h
    return h * h - (h - rho) ** 2


def _scatter(Q: np.ndarray, idx: Sequence[int], local: np.ndarray) -> None:
    idx = np.asarray(idx)
    Q[np.ix_(idx, idx)] += local


def _separated_local(a_i, b_i, a_k, b_k, X, Y, W) -> np.ndarray:
    """4x4 form over quadrature points (X in panel i, Y in panel k), nodes (i0, i1, k0, k1)."""
    h_i = b_i - a_i
    h_k = b_k - a_k
    w = np.stack([
        -(b_i - X) / h_i,
        -(X - a_i) / h_i,
        (b_k - Y) / h_k,
        (Y - a_k) / h_k,
    ])
    weights = W / (Y - X) ** 2
    return (w * weights) @ w.T


def _clipped_points(a_i, b_i, a_k, b_k, rho, n):
    """Points of {x in panel i, y in panel k, y - x <= rho} (panel k to the right)."""
    t, w = _gauss(n)
    xs, ys, ws = [], [], []
    # on [lo1, hi1] the upper y-limit is x + rho; on [lo2, hi2] it is b_k
    lo1, hi1 = max(a_i, a_k - rho), min(b_i, b_k - rho)
    lo2, hi2 = max(a_i, b_k - rho), b_i
    for lo, hi, capped in ((lo1, hi1, True), (lo2, hi2, False)):
        if hi <= lo:
            continue
        X = lo + (hi - lo) * t
        WX = w * (hi - lo)
        for x, wx in zip(X, WX):
            top = x + rho if capped else b_k
            if top <= a_k:
                continue
            Y = a_k + (top - a_k) * t
            xs.append(np.full(n, x))
            ys.append(Y)
            ws.append(wx * w * (top - a_k))
    if not xs:
        return None
    return np.concatenate(xs), np.concatenate(ys), np.concatenate(ws)


def _adjacent_local(h_i: float, h_k: float, rho: float) -> np.ndarray:
    """3x3 form for panels [x0, x1], [x1, x2] sharing x1, both orderings of (x, y)."""
    t, w = _gauss(NEAR_POINTS)
    local = np.zeros((3, 3))

    def piece(coeff, denom):
        # coeff(v): (3, n) numerator vectors; denom(v): n
        kink = None
        if math.isfinite(rho):
            # denom is affine in v; find where it equals rho
            d0, d1 = denom(np.array([0.0]))[0], denom(np.array([1.0]))[0]
            if min(d0, d1) < rho < max(d0, d1):
                kink = (rho - d0) / (d1 - d0)
        cuts = [0.0, 1.0] if kink is None else [0.0, kink, 1.0]
        out = np.zeros((3, 3))
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            v = lo + (hi - lo) * t
            wv = w * (hi - lo)
            c = coeff(v)
            d = denom(v)
            umax = np.minimum(1.0, rho / d) if math.isfinite(rho) else np.ones_like(d)
            out += (c * (wv * umax ** 2 / (2.0 * d ** 2))) @ c.T
        return out * h_i * h_k

    local += piece(lambda v: np.stack([-np.ones_like(v), 1.0 - v, v]), lambda v: h_i + h_k * v)
    local += piece(lambda v: np.stack([-v, v - 1.0, np.ones_like(v)]), lambda v: h_i * v + h_k)
    return 2.0 * local


def _panels(node_sets: Sequence[np.ndarray]):
    """Flattened panels: left/right node index (global), endpoints, component id."""
    left, right, a, b, comp = [], [], [], [], []
    offset = 0
    for c, x in enumerate(node_sets):
        m = len(x)
        left.extend(range(offset, offset + m - 1))
        right.extend(range(offset + 1, offset + m))
        a.extend(x[:-1])
        b.extend(x[1:])
        comp.extend([c] * (m - 1))
        offset += m
    return (np.array(left), np.array(right), np.array(a, dtype=float), np.array(b, dtype=float),
            np.array(comp), offset)


def _add_rectangles(Q, ps, qs, n, a, b, h, left, right) -> None:
    """Tensor Gauss-Legendre forms for whole separated panel pairs, scattered into Q."""
    t, w = _gauss(n)
    X = a[ps, None] + h[ps, None] * t[None, :]
    Y = a[qs, None] + h[qs, None] * t[None, :]
    phi_x = np.stack([(b[ps, None] - X) / h[ps, None], (X - a[ps, None]) / h[ps, None]], axis=1)
    phi_y = np.stack([(b[qs, None] - Y) / h[qs, None], (Y - a[qs, None]) / h[qs, None]], axis=1)
    kernel = (w[None, :, None] * w[None, None, :] * (h[ps] * h[qs])[:, None, None]
              / (Y[:, None, :] - X[:, :, None]) ** 2)
    xx = np.einsum("pan,pbn,pnm->pab", phi_x, phi_x, kernel)
    yy = np.einsum("pam,pbm,pnm->pab", phi_y, phi_y, kernel)
    xy = -np.einsum("pan,pbm,pnm->pab", phi_x, phi_y, kernel)
    local = np.zeros((len(ps), 4, 4))
    local[:, :2, :2] = xx
    local[:, 2:, 2:] = yy
    local[:, :2, 2:] = xy
    local[:, 2:, :2] = np.transpose(xy, (0, 2, 1))
    idx = np.stack([left[ps], right[ps], left[qs], right[qs]], axis=1)
    rows = np.repeat(idx, 4, axis=1).ravel()
    cols = np.tile(idx, (1, 4)).ravel()
    np.add.at(Q, (rows, cols), 2.0 * local.ravel())


def gagliardo_matrix(node_sets: Sequence[np.ndarray], rho: float = math.inf) -> np.ndarray:
    """Q with f^T Q f = double integral over |y - x| <= rho of the squared difference quotient.

    node_sets lists the node abscissae of one or more disjoint intervals; the
    integral runs over the product of their union with itself.
    """
    left, right, a, b, comp, n_nodes = _panels(node_sets)
    n_panels = len(a)
    if n_panels == 0:
        raise GeometryError("empty interval")
    h = b - a
    if np.any(h <= 0):
        raise GeometryError("panel nodes must increase strictly")
    Q = np.zeros((n_nodes, n_nodes))

    for p in range(n_panels):
        area = _band_area(h[p], rho)
        _scatter(Q, [left[p], right[p]], area / h[p] ** 2 * np.array([[1.0, -1.0], [-1.0, 1.0]]))

    for p in range(n_panels - 1):
        q = p + 1
        if comp[p] == comp[q] and right[p] == left[q]:
            _scatter(Q, [left[p], right[p], right[q]], _adjacent_local(h[p], h[q], rho))

    whole: Dict[int, List[Tuple[int, int]]] = {NEAR_POINTS: [], FAR_POINTS: []}
    order = np.argsort(a, kind="stable")
    for pos, p in enumerate(order):
        for q in order[pos + 1:]:
            if comp[p] == comp[q] and right[p] == left[q]:
                continue
            gap = a[q] - b[p]
            if gap >= rho:
                break
            if b[q] - a[p] <= rho:
                near = gap < NEAR_FACTOR * max(h[p], h[q])
                whole[NEAR_POINTS if near else FAR_POINTS].append((p, q))
                continue
            pts = _clipped_points(a[p], b[p], a[q], b[q], rho, NEAR_POINTS)
            if pts is not None:
                local = _separated_local(a[p], b[p], a[q], b[q], *pts)
                _scatter(Q, [left[p], right[p], left[q], right[q]], 2.0 * local)

    for n, pairs in whole.items():
        for start in range(0, len(pairs), PAIR_CHUNK):
            ps, qs = np.array(pairs[start:start + PAIR_CHUNK]).T
            _add_rectangles(Q, ps, qs, n, a, b, h, left, right)
    return 0.5 * (Q + Q.T)


@lru_cache(maxsize=64)
def _cached_matrix(key: bytes, sizes: Tuple[int, ...], rho: float) -> np.ndarray:
    flat = np.frombuffer(key, dtype=float)
    sets, start = [], 0
    for m in sizes:
        sets.append(flat[start:start + m])
        start += m
    Q = gagliardo_matrix(sets, rho)
    Q.setflags(write=False)
    return Q


def form_matrix(node_sets: Sequence[np.ndarray], rho: float = math.inf) -> np.ndarray:
    arrays = [np.ascontiguousarray(x, dtype=float) for x in node_sets]
    key = np.concatenate(arrays).tobytes()
    return _cached_matrix(key, tuple(len(x) for x in arrays), float(rho))


def _quadratic_norm(Q: np.ndarray, values: np.ndarray) -> float:
    return math.sqrt(max(0.0, float(values @ (Q @ values))))


def seminorm_screened(values: np.ndarray, x: np.ndarray, rho_screen: float) -> float:
    """Screened semi-norm of the P1 function with nodal values on nodes x.

    rho_screen = inf (or anything >= the interval length) gives the
    unscreened Gagliardo semi-norm.
    """
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(x) < 2 or not x[-1] > x[0]:
        raise GeometryError("empty interval")
    if values.shape != x.shape:
        raise DimensionError(f"{values.shape[0]} values for {x.shape[0]} nodes")
    if not rho_screen > 0:
        raise GeometryError(f"screening radius must be positive, got {rho_screen}")
    return _quadratic_norm(form_matrix([x], rho_screen), values)


def component_screen(comp: TraceComponent, screen_radius: Optional[float] = None) -> float:
    """Bounded components are unscreened; truncated unbounded ones use the screening radius."""
    if comp.originally_unbounded:
        return get_settings().screen_radius if screen_radius is None else screen_radius
    return math.inf


class ScreenedForm:
    """All per-component screened forms of a grid, for repeated evaluation."""

    def __init__(self, grid: TraceGrid, screen_radius: Optional[float] = None):
        self.grid = grid
        self.screens = [component_screen(c, screen_radius) for c in grid.components]
        self.matrices = [form_matrix([c.x], rho) for c, rho in zip(grid.components, self.screens)]

    def component_values(self, field: FieldLike) -> List[float]:
        parts = self.grid.split(as_values(field, self.grid))
        return [_quadratic_norm(Q, v) for Q, v in zip(self.matrices, parts)]


def _p1_integral(x: np.ndarray, values: np.ndarray, lo: float, hi: float) -> float:
    """Exact integral over [lo, hi] of the P1 interpolant."""
    lo = max(lo, x[0])
    hi = min(hi, x[-1])
    if hi <= lo:
        return 0.0
    pts = np.concatenate([[lo], x[(x > lo) & (x < hi)], [hi]])
    vals = np.interp(pts, x, values)
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(pts)))


def component_average(f: FieldLike, j: int, grid: Optional[TraceGrid] = None,
                      window: Optional[Tuple[float, float]] = None) -> float:
    """Average of component j over its averaging window (or an explicit one)."""
    grid = grid if grid is not None else f.grid
    values = as_values(f, grid)
    for comp, part in zip(grid.components, grid.split(values)):
        if comp.index == j:
            break
    else:
        raise KeyError(f"no component {j}")
    lo, hi = window if window is not None else comp.window
    return _p1_integral(comp.x, part, lo, hi) / (hi - lo)


def averages(f: FieldLike, grid: Optional[TraceGrid] = None) -> List[float]:
    grid = grid if grid is not None else f.grid
    return [component_average(f, c.index, grid) for c in grid.components]


def jump_sum(f: FieldLike, grid: Optional[TraceGrid] = None) -> float:
    avg = averages(f, grid)
    return float(sum(abs(q - p) for p, q in zip(avg[:-1], avg[1:])))


def derivative_l2(f: FieldLike, grid: Optional[TraceGrid] = None) -> float:
    """|d/dx f|_L2 over the whole surface, elementwise exact for P1."""
    grid = grid if grid is not None else f.grid
    total = 0.0
    for comp, part in zip(grid.components, grid.split(as_values(f, grid))):
        h = np.diff(comp.x)
        slope = np.diff(part) / h
        total += float(np.sum(slope ** 2 * h))
    return math.sqrt(total)


def seminorm_gammaD(f: FieldLike, s: float = 0.5, grid: Optional[TraceGrid] = None,
                    screen_radius: Optional[float] = None, form: Optional[ScreenedForm] = None) -> float:
    """Surface semi-norm for s = 1/2 or s = 1: fractional (or derivative) part plus average jumps."""
    grid = grid if grid is not None else f.grid
    if s == 0.5:
        form = form if form is not None else ScreenedForm(grid, screen_radius)
        local = float(sum(form.component_values(as_values(f, grid))))
    elif s == 1:
        local = derivative_l2(f, grid)
    else:
        raise ValueError(f"semi-norm order must be 1/2 or 1, got {s}")
    return local + jump_sum(f, grid)


def l2_norm(f: FieldLike, grid: Optional[TraceGrid] = None, mass=None) -> float:
    grid = grid if grid is not None else f.grid
    values = as_values(f, grid)
    if mass is None:
        from cornerwaves.fem.assembly import assemble_boundary_mass
        mass = assemble_boundary_mass(grid)
    return math.sqrt(max(0.0, float(values @ (mass @ values))))


def full_h_half_norm(f: FieldLike, grid: Optional[TraceGrid] = None, mass=None) -> float:
    """Standard H^1/2 norm: L2 part plus the unscreened double integral over the whole surface."""
    grid = grid if grid is not None else f.grid
    values = as_values(f, grid)
    Q = form_matrix([c.x for c in grid.components], math.inf)
    return math.sqrt(l2_norm(values, grid, mass) ** 2 + max(0.0, float(values @ (Q @ values))))


def weighted_mean(f: FieldLike, grid: Optional[TraceGrid] = None) -> float:
    """(sum_j |I_j| avg_j) / (sum_j |I_j|)."""
    grid = grid if grid is not None else f.grid
    lengths = np.array([c.length for c in grid.components])
    return float(lengths @ np.array(averages(f, grid)) / lengths.sum())


def zero_mass_project(f: FieldLike, grid: Optional[TraceGrid] = None) -> TraceField:
    """Subtract the length-weighted mean of the component averages."""
    grid = grid if grid is not None else f.grid
    values = as_values(f, grid)
    return TraceField(grid, values - weighted_mean(values, grid))


def trace_report(f: FieldLike, grid: Optional[TraceGrid] = None, screen_radius: Optional[float] = None) -> List[dict]:
    """Per-component rows: half and one semi-norm parts, average, L2 norm."""
    grid = grid if grid is not None else f.grid
    values = as_values(f, grid)
    form = ScreenedForm(grid, screen_radius)
    halves = form.component_values(values)
    rows = []
    for comp, part, half, screen in zip(grid.components, grid.split(values), halves, form.screens):
        sub = TraceField(_single(comp), part)
        rows.append({
            "component": comp.index,
            "seminorm_half": half,
            "seminorm_one": derivative_l2(sub),
            "average": component_average(values, comp.index, grid),
            "l2": l2_norm(sub),
            "originally_unbounded": comp.originally_unbounded,
            "screen_radius": None if math.isinf(screen) else screen,
        })
    return rows


def _single(comp: TraceComponent) -> TraceGrid:
    return TraceGrid(components=(TraceComponent(
        index=1, node_ids=np.arange(comp.size), x=comp.x, interval=comp.interval, window=comp.window,
        originally_unbounded=comp.originally_unbounded, corner_ends=comp.corner_ends,
    ),))
