"""Grid-sampled differential forms and matrix-valued forms.

A degree-k form is stored per chart as a sparse map from coordinate
multi-indices to node arrays.  Multi-indices are encoded as bitmasks:
bit i set means dx_i is present, so dx0 ^ dx2 on a 3D chart is mask
0b101.  Missing masks are implicit zeros.

The exterior derivative uses 4th-order centered stencils on periodic
axes.  On non-periodic axes the two nodes nearest each edge fall back to
2nd-order one-sided stencils; this is harmless because those regions of
the standard atlases carry zero partition weight.

Matrix-valued forms hold arrays of shape grid_shape + (rows, cols) per
mask and multiply with wedge signs between the scalar coefficients; this
is the algebra that connection matrices and curvatures live in.

Values near declared singular points are stored as-is (possibly huge);
only integration treats singular regions specially.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Callable, Mapping

import numpy as np

from .errors import UsageError
from .meshes import Chart, Manifold, Transition, integrate_scalar

__all__ = [
    "Form",
    "MatrixForm",
    "zero_form",
    "scalar_form",
    "wedge",
    "exterior_derivative",
    "integrate_top",
    "sup_norm",
    "pullback_components",
    "transition_pullback",
    "overlap_residual",
    "identity_matrix_form",
    "matrix_wedge",
    "matrix_trace",
    "scalar_times_matrix",
    "interp_grid",
    "save_form",
    "load_form",
    "masks_of_degree",
]


# ---------------------------------------------------------------------------
# bitmask combinatorics
# ---------------------------------------------------------------------------

def masks_of_degree(dim: int, degree: int) -> list[int]:
    """All strictly increasing multi-indices of the given length, as bitmasks."""
    out = []
    for combo in combinations(range(dim), degree):
        m = 0
        for i in combo:
            m |= 1 << i
        out.append(m)
    return sorted(out)


def mask_axes(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


@lru_cache(maxsize=None)
def _wedge_sign(a: int, b: int) -> int:
    """Sign of sorting the concatenation (axes of a, axes of b).

    Counts pairs (i in a, j in b) with i > j; assumes a & b == 0.
    """
    inv = 0
    for i in mask_axes(a):
        inv += bin(b & ((1 << i) - 1)).count("1")
    return -1 if inv & 1 else 1


@lru_cache(maxsize=None)
def _insert_sign(axis: int, mask: int) -> int:
    """Sign of dx_axis ^ dx_mask, i.e. moving dx_axis past the smaller axes."""
    below = bin(mask & ((1 << axis) - 1)).count("1")
    return -1 if below & 1 else 1


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

def _partial(arr: np.ndarray, axis: int, h: float, periodic: bool) -> np.ndarray:
    if periodic:
        return (-np.roll(arr, -2, axis) + 8.0 * np.roll(arr, -1, axis)
                - 8.0 * np.roll(arr, 1, axis) + np.roll(arr, 2, axis)) / (12.0 * h)
    a = np.moveaxis(arr, axis, 0)
    out = np.empty_like(a, dtype=np.result_type(a.dtype, np.float64))
    if a.shape[0] >= 5:
        out[2:-2] = (-a[4:] + 8.0 * a[3:-1] - 8.0 * a[1:-3] + a[:-4]) / (12.0 * h)
    out[0] = (-3.0 * a[0] + 4.0 * a[1] - a[2]) / (2.0 * h)
    out[1] = (a[2] - a[0]) / (2.0 * h)
    out[-2] = (a[-1] - a[-3]) / (2.0 * h)
    out[-1] = (3.0 * a[-1] - 4.0 * a[-2] + a[-3]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


# ---------------------------------------------------------------------------
# scalar-valued forms
# ---------------------------------------------------------------------------

ChartData = Mapping[int, np.ndarray]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Form:
    """A degree-k differential form sampled at the nodes of every chart."""

    manifold: Manifold
    degree: int
    data: Mapping[str, ChartData]
    value_shape: tuple[int, ...] = ()

    def __post_init__(self):
        if self.degree < 0:
            raise UsageError("negative form degree")
        clean: dict[str, dict[int, np.ndarray]] = {}
        for chart in self.manifold.charts:
            comps = dict(self.data.get(chart.name, {}))
            want = chart.shape + self.value_shape
            for mask, arr in comps.items():
                if bin(mask).count("1") != self.degree:
                    raise UsageError(
                        f"component mask {mask:b} does not match degree {self.degree}")
                if mask.bit_length() > chart.dim:
                    raise UsageError("component mask exceeds chart dimension")
                arr = np.asarray(arr)
                if arr.shape != want:
                    raise UsageError(
                        f"component shape {arr.shape}, expected {want}")
                comps[mask] = _freeze(arr)
            clean[chart.name] = comps
        object.__setattr__(self, "data", clean)

    @property
    def field(self) -> str:
        for comps in self.data.values():
            for arr in comps.values():
                if np.iscomplexobj(arr):
                    return "complex"
        return "real"

    def component(self, chart: str, mask: int) -> np.ndarray:
        c = self.manifold.chart(chart)
        comps = self.data[chart]
        if mask in comps:
            return comps[mask]
        return np.zeros(c.shape + self.value_shape)

    def map_components(self, fn) -> "Form":
        data = {name: {m: fn(a) for m, a in comps.items()}
                for name, comps in self.data.items()}
        return type(self)(self.manifold, self.degree, data, self.value_shape)

    def __add__(self, other: "Form") -> "Form":
        _check_compatible(self, other)
        data = {}
        for name, comps in self.data.items():
            merged = dict(comps)
            for m, arr in other.data[name].items():
                merged[m] = merged[m] + arr if m in merged else arr
            data[name] = merged
        return type(self)(self.manifold, self.degree, data, self.value_shape)

    def __sub__(self, other: "Form") -> "Form":
        return self + other.map_components(np.negative)

    def __neg__(self) -> "Form":
        return self.map_components(np.negative)

    def __mul__(self, c) -> "Form":
        return self.map_components(lambda a: a * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class MatrixForm(Form):
    """Matrix-valued form: node arrays of shape grid + (rows, cols)."""

    @property
    def rows(self) -> int:
        return self.value_shape[0]

    @property
    def cols(self) -> int:
        return self.value_shape[1]

    def __post_init__(self):
        if len(self.value_shape) != 2:
            raise UsageError("MatrixForm needs a (rows, cols) value shape")
        super().__post_init__()


def _check_compatible(a: Form, b: Form) -> None:
    if a.manifold is not b.manifold and a.manifold != b.manifold:
        raise UsageError("forms live on different manifolds")
    if a.degree != b.degree or a.value_shape != b.value_shape:
        raise UsageError("form degree/shape mismatch")


def zero_form(M: Manifold, degree: int, value_shape: tuple[int, ...] = ()) -> Form:
    cls = MatrixForm if len(value_shape) == 2 else Form
    return cls(M, degree, {c.name: {} for c in M.charts}, value_shape)


def scalar_form(M: Manifold, values) -> Form:
    """Degree-0 form from a constant or a per-chart map of node arrays."""
    data = {}
    for c in M.charts:
        if isinstance(values, Mapping):
            arr = np.asarray(values[c.name])
        else:
            arr = np.full(c.shape, values)
        data[c.name] = {0: arr}
    return Form(M, 0, data)


def identity_matrix_form(M: Manifold, rank: int, dtype=float) -> MatrixForm:
    data = {}
    for c in M.charts:
        arr = np.zeros(c.shape + (rank, rank), dtype=dtype)
        for i in range(rank):
            arr[..., i, i] = 1
        data[c.name] = {0: arr}
    return MatrixForm(M, 0, data, (rank, rank))


# ---------------------------------------------------------------------------
# algebra
# ---------------------------------------------------------------------------

def _combine(a: Form, b: Form, pointwise) -> dict[str, dict[int, np.ndarray]]:
    data: dict[str, dict[int, np.ndarray]] = {}
    for chart in a.manifold.charts:
        comps: dict[int, np.ndarray] = {}
        for ma, va in a.data[chart.name].items():
            for mb, vb in b.data[chart.name].items():
                if ma & mb:
                    continue
                term = _wedge_sign(ma, mb) * pointwise(va, vb)
                m = ma | mb
                comps[m] = comps[m] + term if m in comps else term
        data[chart.name] = comps
    return data


def wedge(a: Form, b: Form) -> Form:
    """Graded product of scalar-valued forms."""
    if a.manifold != b.manifold:
        raise UsageError("forms live on different manifolds")
    if a.value_shape or b.value_shape:
        raise UsageError("use matrix_wedge / scalar_times_matrix for matrix forms")
    deg = a.degree + b.degree
    if deg > a.manifold.dim:
        return zero_form(a.manifold, deg)
    return Form(a.manifold, deg, _combine(a, b, np.multiply))


def matrix_wedge(a: MatrixForm, b: MatrixForm) -> MatrixForm:
    """Matrix product with wedge of the scalar coefficients."""
    if a.manifold != b.manifold:
        raise UsageError("forms live on different manifolds")
    if a.cols != b.rows:
        raise UsageError(f"matrix shapes {a.value_shape} x {b.value_shape}")
    deg = a.degree + b.degree
    data = _combine(a, b, lambda x, y: np.einsum("...ij,...jk->...ik", x, y))
    return MatrixForm(a.manifold, deg, data, (a.rows, b.cols))


def scalar_times_matrix(f: Form, A: MatrixForm) -> MatrixForm:
    if f.value_shape:
        raise UsageError("left factor must be scalar-valued")
    deg = f.degree + A.degree
    data = _combine(f, A, lambda x, y: x[..., None, None] * y)
    return MatrixForm(f.manifold, deg, data, A.value_shape)


def matrix_trace(A: MatrixForm) -> Form:
    if A.rows != A.cols:
        raise UsageError("trace of a non-square matrix form")
    data = {name: {m: np.einsum("...ii->...", arr) for m, arr in comps.items()}
            for name, comps in A.data.items()}
    return Form(A.manifold, A.degree, data)


def matrix_transpose(A: MatrixForm, conjugate: bool = False) -> MatrixForm:
    def flip(arr):
        out = np.swapaxes(arr, -1, -2)
        return np.conj(out) if conjugate else out
    data = {name: {m: flip(arr) for m, arr in comps.items()}
            for name, comps in A.data.items()}
    return MatrixForm(A.manifold, A.degree, data, (A.cols, A.rows))


def exterior_derivative(a: Form) -> Form:
    """Finite-difference d, valid for scalar and matrix-valued forms."""
    M = a.manifold
    if a.degree >= M.dim:
        return zero_form(M, a.degree + 1, a.value_shape)
    data: dict[str, dict[int, np.ndarray]] = {}
    for chart in M.charts:
        comps: dict[int, np.ndarray] = {}
        for mask, arr in a.data[chart.name].items():
            for k in range(chart.dim):
                bit = 1 << k
                if mask & bit:
                    continue
                term = _insert_sign(k, mask) * _partial(
                    arr, k, chart.spacing(k), chart.periodic[k])
                m = mask | bit
                comps[m] = comps[m] + term if m in comps else term
        data[chart.name] = comps
    cls = MatrixForm if len(a.value_shape) == 2 else Form
    return cls(M, a.degree + 1, data, a.value_shape)


def sup_norm(a: Form, weighted: bool = False) -> float:
    """Max absolute component value; ``weighted`` restricts to nodes with
    partition weight above 1e-8 (useful on multi-chart atlases where the
    region beyond the weight support is not part of the manifold's seam)."""
    best = 0.0
    for chart in a.manifold.charts:
        mask_w = None
        if weighted:
            mask_w = a.manifold.weight_nodes(chart.name) > 1e-8
        for arr in a.data[chart.name].values():
            mag = np.abs(arr)
            if mask_w is not None:
                mag = mag[mask_w]
            if mag.size:
                best = max(best, float(np.max(mag)))
    return best


def integrate_top(M: Manifold, a: Form):
    if a.degree != M.dim:
        raise UsageError(f"integrating degree {a.degree} over dim {M.dim}")
    if a.value_shape:
        raise UsageError("top integration needs a scalar-valued form")
    full = (1 << M.dim) - 1
    fields = {c.name: a.component(c.name, full) for c in M.charts}
    return integrate_scalar(M, fields)


# ---------------------------------------------------------------------------
# interpolation and pullback
# ---------------------------------------------------------------------------

def interp_grid(chart: Chart, arr: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of a node array at arbitrary points.

    Periodic axes wrap; non-periodic axes clamp to the box.  O(h^2).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    d = chart.dim
    idx, frac = [], []
    for a in range(d):
        lo, _ = chart.box[a]
        h = chart.spacing(a)
        n = chart.shape[a]
        t = (pts[:, a] - lo) / h
        if chart.periodic[a]:
            i0 = np.floor(t).astype(int)
            frac.append(t - i0)
            idx.append(i0 % n)
        else:
            t = np.clip(t, 0.0, n - 1.0)
            i0 = np.minimum(np.floor(t).astype(int), n - 2)
            frac.append(t - i0)
            idx.append(i0)
    value_ndim = arr.ndim - d
    out = None
    for corner in product((0, 1), repeat=d):
        w = np.ones(len(pts))
        ind = []
        for a, c in enumerate(corner):
            w = w * (frac[a] if c else 1.0 - frac[a])
            i = idx[a] + c
            if chart.periodic[a]:
                i = i % chart.shape[a]
            ind.append(i)
        vals = arr[tuple(ind)]
        w = w.reshape((-1,) + (1,) * value_ndim)
        out = w * vals if out is None else out + w * vals
    return out


def _minor(jac: np.ndarray, rows: list[int], cols: list[int]) -> np.ndarray:
    """det of jac[:, rows, cols] for each point; k x k with k <= 4."""
    sub = jac[:, rows][:, :, cols]
    k = len(rows)
    if k == 0:
        return np.ones(jac.shape[0])
    if k == 1:
        return sub[:, 0, 0]
    return np.linalg.det(sub)


def pullback_components(source_eval: Callable[[np.ndarray], Mapping[int, np.ndarray]],
                        phi: Callable[[np.ndarray], np.ndarray],
                        jacobian: Callable[[np.ndarray], np.ndarray],
                        pts: np.ndarray, degree: int,
                        target_dim: int) -> dict[int, np.ndarray]:
    """Pull a k-form back along phi, evaluated at target points.

    ``source_eval`` returns the source components at source points;
    ``jacobian`` returns d(phi)/d(target coords) of shape (N, src_dim,
    target_dim).  The result maps target masks to values at ``pts``.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    src_pts = phi(pts)
    comps = source_eval(src_pts)
    if degree == 0:
        return dict(comps)
    jac = jacobian(pts)
    out: dict[int, np.ndarray] = {}
    for mask_t in masks_of_degree(target_dim, degree):
        cols = mask_axes(mask_t)
        acc = None
        for mask_s, vals in comps.items():
            rows = mask_axes(mask_s)
            minor = _minor(jac, rows, cols)
            term = vals * minor.reshape(minor.shape + (1,) * (vals.ndim - 1))
            acc = term if acc is None else acc + term
        if acc is not None:
            out[mask_t] = acc
    return out


def transition_pullback(a: Form, t: Transition, pts: np.ndarray) -> dict[int, np.ndarray]:
    """Represent the destination-chart data of ``a`` in source coordinates.

    Destination components are sampled by multilinear interpolation, so
    the result matches the stored source components only to O(h^2);
    points must satisfy the transition's domain predicate.
    """
    chart_dst = a.manifold.chart(t.dst)

    def source_eval(src_pts):
        return {m: interp_grid(chart_dst, arr, src_pts)
                for m, arr in a.data[t.dst].items()}

    return pullback_components(source_eval, t.apply, t.jacobian_at, pts,
                               a.degree, a.manifold.chart(t.src).dim)


def overlap_samples(M: Manifold, t: Transition, n: int, seed: int = 0) -> np.ndarray:
    """Random points of the source chart where both charts carry weight."""
    chart = M.chart(t.src)
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in chart.box])
    hi = np.array([b[1] for b in chart.box])
    out = []
    for _ in range(200):
        pts = rng.uniform(lo, hi, size=(4 * n, chart.dim))
        ok = t.domain(pts)
        mapped_ok = np.zeros(len(pts), dtype=bool)
        if np.any(ok):
            mapped = t.apply(pts[ok])
            dst = M.chart(t.dst)
            inside = np.ones(len(mapped), dtype=bool)
            for a2, (l2, h2) in enumerate(dst.box):
                inside &= (mapped[:, a2] > l2) & (mapped[:, a2] < h2)
            mapped_ok[np.nonzero(ok)[0]] = inside
        good = ok & mapped_ok
        w_src = M.weight_fn(t.src)(pts)
        w_dst_full = np.zeros(len(pts))
        if np.any(good):
            w_dst_full[good] = M.weight_fn(t.dst)(t.apply(pts[good]))
        good &= (w_src > 1e-3) & (w_dst_full > 1e-3)
        out.append(pts[good])
        if sum(len(p) for p in out) >= n:
            break
    pts = np.concatenate(out, axis=0)
    if len(pts) < n:
        raise UsageError("could not sample enough overlap points")
    return pts[:n]


def overlap_residual(a: Form, n: int = 100, seed: int = 0) -> float:
    """Worst mismatch between direct and pulled-back components on overlaps."""
    M = a.manifold
    worst = 0.0
    for t in M.transitions:
        pts = overlap_samples(M, t, n, seed)
        pulled = transition_pullback(a, t, pts)
        chart_src = M.chart(t.src)
        for mask in masks_of_degree(chart_src.dim, a.degree):
            direct = interp_grid(chart_src, a.component(t.src, mask), pts)
            got = pulled.get(mask, np.zeros(len(pts)))
            worst = max(worst, float(np.max(np.abs(direct - got))))
    return worst


# ---------------------------------------------------------------------------
# serialization (golden files)
# ---------------------------------------------------------------------------

_MAGIC = b"CWF1"


def save_form(a: Form, path: str) -> None:
    """Columnar little-endian layout; see load_form.  Deterministic byte-wise."""
    if a.value_shape:
        raise UsageError("serialization covers scalar-valued forms")
    is_complex = a.field == "complex"
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IBI", a.degree, 1 if is_complex else 0,
                             len(a.manifold.charts)))
        for chart in a.manifold.charts:
            name = chart.name.encode()
            fh.write(struct.pack("<I", len(name)))
            fh.write(name)
            fh.write(struct.pack("<B", chart.dim))
            fh.write(struct.pack(f"<{chart.dim}I", *chart.shape))
            comps = a.data[chart.name]
            fh.write(struct.pack("<I", len(comps)))
            for mask in sorted(comps):
                fh.write(struct.pack("<I", mask))
                arr = np.ascontiguousarray(comps[mask],
                                           dtype=complex if is_complex else float)
                if is_complex:
                    fh.write(arr.real.astype("<f8").tobytes())
                    fh.write(arr.imag.astype("<f8").tobytes())
                else:
                    fh.write(arr.astype("<f8").tobytes())


def load_form(path: str, M: Manifold) -> Form:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise UsageError(f"{path}: not a serialized form")
        degree, cplx, n_charts = struct.unpack("<IBI", fh.read(9))
        data: dict[str, dict[int, np.ndarray]] = {}
        for _ in range(n_charts):
            (nlen,) = struct.unpack("<I", fh.read(4))
            name = fh.read(nlen).decode()
            (dim,) = struct.unpack("<B", fh.read(1))
            shape = struct.unpack(f"<{dim}I", fh.read(4 * dim))
            count = np.prod(shape, dtype=int)
            (n_comp,) = struct.unpack("<I", fh.read(4))
            comps = {}
            for _ in range(n_comp):
                (mask,) = struct.unpack("<I", fh.read(4))
                re = np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(shape)
                if cplx:
                    im = np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(shape)
                    comps[mask] = re + 1j * im
                else:
                    comps[mask] = re.copy()
            data[name] = comps
    return Form(M, degree, data)
