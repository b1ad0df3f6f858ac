"""Linear 1-D finite elements on a uniform mesh.

Global matrices are symmetric tridiagonal and stored as ``(diag, off)``.
All element integrals use 2-point Gauss quadrature; coefficients may be a
scalar, a vectorised callable ``c(x)`` or an array of shape
``(n_elements, 2)`` holding values at the Gauss points.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

GAUSS_XI = np.array([-1.0, 1.0]) / np.sqrt(3.0)
# shape function values at the Gauss points, rows = gauss point, cols = local node
GAUSS_N = np.column_stack([(1.0 - GAUSS_XI) / 2.0, (1.0 + GAUSS_XI) / 2.0])
RESIDUAL_TOL = 1e-10


class FEMError(RuntimeError):
    pass


@dataclass(frozen=True)
class Mesh1D:
    length: float
    n_elements: int

    def __post_init__(self):
        if self.n_elements < 2:
            raise ValueError("need at least 2 elements")
        if self.length <= 0:
            raise ValueError("length must be positive")

    @property
    def h(self) -> float:
        return self.length / self.n_elements

    @property
    def n_nodes(self) -> int:
        return self.n_elements + 1

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n_nodes)

    @property
    def gauss_points(self) -> np.ndarray:
        """(n_elements, 2) physical coordinates of the quadrature points."""
        left = self.nodes[:-1, None]
        return left + self.h * (1.0 + GAUSS_XI[None, :]) / 2.0

    def interpolate(self, nodal) -> np.ndarray:
        """Nodal values -> values at the Gauss points, (n_elements, 2)."""
        nodal = np.asarray(nodal, dtype=float)
        return nodal[:-1, None] * GAUSS_N[:, 0] + nodal[1:, None] * GAUSS_N[:, 1]

    def gradient(self, nodal) -> np.ndarray:
        """Element-constant derivative of a nodal field."""
        nodal = np.asarray(nodal, dtype=float)
        return np.diff(nodal) / self.h

    def nodal_average(self, elemental) -> np.ndarray:
        """Average element values onto shared nodes."""
        e = np.asarray(elemental, dtype=float)
        out = np.empty(self.n_nodes)
        out[0] = e[0]
        out[-1] = e[-1]
        out[1:-1] = 0.5 * (e[:-1] + e[1:])
        return out


@dataclass
class GlobalSystem:
    diag: np.ndarray
    off: np.ndarray
    rhs: np.ndarray = field(default=None)

    def __post_init__(self):
        n = self.diag.size
        if self.off.size != n - 1:
            raise ValueError("off-diagonal must have n-1 entries")
        if self.rhs is None:
            self.rhs = np.zeros(n)
        elif self.rhs.size != n:
            raise ValueError("rhs size mismatch")

    def __add__(self, other: "GlobalSystem") -> "GlobalSystem":
        return GlobalSystem(self.diag + other.diag, self.off + other.off, self.rhs + other.rhs)

    def copy(self) -> "GlobalSystem":
        return GlobalSystem(self.diag.copy(), self.off.copy(), self.rhs.copy())

    def matvec(self, x) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.off * x[1:]
        y[1:] += self.off * x[:-1]
        return y

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)


@dataclass(frozen=True)
class NodalField:
    values: np.ndarray
    unit: str = ""

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise FEMError("non-finite nodal values")


def _gauss_values(mesh: Mesh1D, coeff) -> np.ndarray:
    if callable(coeff):
        vals = np.asarray(coeff(mesh.gauss_points), dtype=float)
        vals = np.broadcast_to(vals, (mesh.n_elements, 2))
    else:
        vals = np.broadcast_to(np.asarray(coeff, dtype=float), (mesh.n_elements, 2))
    bad = np.flatnonzero(~np.all(np.isfinite(vals), axis=1))
    if bad.size:
        raise FEMError(f"non-finite coefficient in element {int(bad[0])}")
    return vals


def stiffness_bands(mesh: Mesh1D, cg: np.ndarray):
    """Tridiagonal bands of sum_k int c B^T B from Gauss values ``cg``."""
    ke = cg.sum(axis=1) * 0.5 / mesh.h  # int c dx / h^2 with weights h/2
    diag = np.zeros(mesh.n_nodes)
    diag[:-1] += ke
    diag[1:] += ke
    return diag, -ke


def mass_bands(mesh: Mesh1D, cg: np.ndarray):
    """Tridiagonal bands of sum_k int c N^T N from Gauss values ``cg``."""
    w = 0.5 * mesh.h
    n1, n2 = GAUSS_N[:, 0], GAUSS_N[:, 1]
    m11 = w * (cg @ (n1 * n1))
    m22 = w * (cg @ (n2 * n2))
    m12 = w * (cg @ (n1 * n2))
    diag = np.zeros(mesh.n_nodes)
    diag[:-1] += m11
    diag[1:] += m22
    return diag, m12


def load_vector(mesh: Mesh1D, fg: np.ndarray) -> np.ndarray:
    """sum_k int f N dx from Gauss values ``fg``."""
    w = 0.5 * mesh.h
    out = np.zeros(mesh.n_nodes)
    out[:-1] += w * (fg @ GAUSS_N[:, 0])
    out[1:] += w * (fg @ GAUSS_N[:, 1])
    return out


def gradient_load_vector(mesh: Mesh1D, ge: np.ndarray) -> np.ndarray:
    """sum_k g_k B^T for element constants ``g_k`` (already integrated)."""
    out = np.zeros(mesh.n_nodes)
    out[:-1] -= ge / mesh.h
    out[1:] += ge / mesh.h
    return out


def assemble_stiffness(mesh: Mesh1D, coeff=1.0) -> GlobalSystem:
    return GlobalSystem(*stiffness_bands(mesh, _gauss_values(mesh, coeff)))


def assemble_mass(mesh: Mesh1D, coeff=1.0) -> GlobalSystem:
    return GlobalSystem(*mass_bands(mesh, _gauss_values(mesh, coeff)))


def assemble_load(mesh: Mesh1D, f) -> np.ndarray:
    return load_vector(mesh, _gauss_values(mesh, f))


def apply_dirichlet(system: GlobalSystem, node: int, value: float) -> GlobalSystem:
    """Row/column elimination, keeping the matrix symmetric."""
    s = system.copy()
    n = s.diag.size
    node = node % n
    if node > 0:
        s.rhs[node - 1] -= s.off[node - 1] * value
        s.off[node - 1] = 0.0
    if node < n - 1:
        s.rhs[node + 1] -= s.off[node] * value
        s.off[node] = 0.0
    s.diag[node] = 1.0
    s.rhs[node] = value
    return s


def apply_point_load(system: GlobalSystem, node: int, value: float) -> GlobalSystem:
    s = system.copy()
    s.rhs[node] += value
    return s


def solve(system: GlobalSystem, unit: str = "", check: bool = True) -> NodalField:
    """Direct tridiagonal solve (LAPACK gtsv) with a relative residual check."""
    d, e, b = system.diag, system.off, system.rhs
    if d.size == 1:
        if d[0] == 0:
            raise FEMError("singular system")
        return NodalField(b / d, unit)
    _, _, _, x, info = lapack.dgtsv(e, d, e, b)
    if info != 0:
        raise FEMError(f"singular tridiagonal system (zero pivot at row {info})")
    if check:
        res = relative_residual(system, x)
        if not res <= RESIDUAL_TOL:
            raise FEMError(f"ill-conditioned system: relative residual {res:.3e}, "
                           f"condition estimate {condition_estimate(system):.3e}")
    return NodalField(x, unit)


def relative_residual(system: GlobalSystem, x) -> float:
    bn = np.linalg.norm(system.rhs)
    r = np.linalg.norm(system.matvec(x) - system.rhs)
    return float(r / bn) if bn > 0 else float(r)


def condition_estimate(system: GlobalSystem) -> float:
    return float(np.linalg.cond(system.dense())) if system.diag.size <= 2000 else float("nan")
