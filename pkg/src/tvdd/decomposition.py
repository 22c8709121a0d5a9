"""Stripe decompositions of the grid into subdomains.

Subdomains are contiguous slabs along one array axis. In the overlapping
case neighbouring slabs share ``overlap`` grid lines; the internal boundary
of a slab is its outermost line that lies inside a neighbour, and the
partition of unity ramps linearly across each shared band so that it
vanishes on those boundary lines.
"""

from dataclasses import dataclass, field

import numpy as np

from .grid import GridShape


@dataclass(frozen=True, eq=False)
class Decomposition:
    shape: GridShape
    axis: int
    ranges: tuple  # (start, stop) along ``axis`` for every subdomain
    subdomains: tuple  # boolean masks
    boundaries: tuple  # boolean masks
    weights: tuple  # float arrays
    overlapping: bool
    boundary_lines: tuple = field(default=())

    @property
    def J(self):
        return len(self.subdomains)

    def free(self, j):
        """Points where subdomain ``j``'s local unknown may be nonzero."""
        return self.subdomains[j] & ~self.boundaries[j]

    def constrained(self, j):
        return ~self.free(j)

    def summary(self):
        lines = [
            f"shape {' x '.join(map(str, self.shape.dims))}",
            f"axis {self.axis}",
            f"overlapping {str(self.overlapping).lower()}",
            f"subdomains {self.J}",
        ]
        for j, (a, b) in enumerate(self.ranges):
            gam = " ".join(map(str, self.boundary_lines[j])) if self.boundary_lines else ""
            lines.append(f"omega {j} lines {a}:{b} gamma [{gam}]")
        return "\n".join(lines) + "\n"


def _slab_mask(shape, axis, a, b):
    m = np.zeros(shape, dtype=bool)
    sl = [slice(None)] * len(shape)
    sl[axis] = slice(a, b)
    m[tuple(sl)] = True
    return m


def _line_profile(shape, axis, profile):
    """Broadcast a 1D profile along ``axis`` to the full grid."""
    view = [1] * len(shape)
    view[axis] = shape[axis]
    return np.broadcast_to(np.reshape(profile, view), shape).copy()


def _cuts(n, J):
    sizes = [len(c) for c in np.array_split(np.arange(n), J)]
    return np.concatenate([[0], np.cumsum(sizes)]).astype(int)


def _check_axis(shape, axis, J):
    if not 0 <= axis < shape.d:
        raise ValueError(f"axis {axis} out of range for a {shape.d}-dimensional grid")
    if J < 2:
        raise ValueError("need at least two subdomains")
    if shape.dims[axis] < J:
        raise ValueError(f"cannot cut {shape.dims[axis]} lines into {J} slabs")


def split_nonoverlapping(shape, axis=0, J=2):
    """Contiguous disjoint slabs whose sizes differ by at most one."""
    shape = shape if isinstance(shape, GridShape) else GridShape(shape)
    _check_axis(shape, axis, J)
    dims = shape.dims
    cuts = _cuts(dims[axis], J)
    ranges = tuple((int(cuts[j]), int(cuts[j + 1])) for j in range(J))
    subs = tuple(_slab_mask(dims, axis, a, b) for a, b in ranges)
    empty = tuple(np.zeros(dims, dtype=bool) for _ in range(J))
    weights = tuple(m.astype(float) for m in subs)
    return Decomposition(shape, axis, ranges, subs, empty, weights, False, tuple(() for _ in range(J)))


def split_overlapping(shape, axis=0, J=2, overlap=2):
    """Slabs sharing ``overlap`` lines with each neighbour.

    The base cut between slab ``j`` and ``j+1`` sits at line ``c``; slab ``j``
    extends to ``c + overlap // 2`` (exclusive) and slab ``j+1`` starts at
    ``c - (overlap - overlap // 2)``. Interior base slabs must be at least
    ``overlap`` lines wide so that the shared bands stay disjoint; the end
    slabs only need room for their half of a band.
    """
    shape = shape if isinstance(shape, GridShape) else GridShape(shape)
    _check_axis(shape, axis, J)
    if overlap < 2:
        raise ValueError("overlap must be at least 2 lines")
    dims = shape.dims
    n = dims[axis]
    cuts = _cuts(n, J)
    right = overlap // 2
    left = overlap - right
    # bands around neighbouring cuts must stay disjoint and inside the grid
    sizes = np.diff(cuts)
    need = np.full(J, overlap)
    need[0], need[-1] = left, right
    bad = np.flatnonzero(sizes < need)
    if bad.size:
        j = int(bad[0])
        raise ValueError(f"slab {j} has {sizes[j]} lines, too thin for an overlap of {overlap}")
    ranges = []
    for j in range(J):
        a = 0 if j == 0 else int(cuts[j]) - left
        b = n if j == J - 1 else int(cuts[j + 1]) + right
        ranges.append((a, b))

    # internal boundary lines: ends of a slab that fall inside a neighbour
    gamma = [[] for _ in range(J)]
    profiles = [np.zeros(n) for _ in range(J)]
    for j, (a, b) in enumerate(ranges):
        profiles[j][a:b] = 1.0
    for j in range(J - 1):
        s = ranges[j + 1][0]  # first shared line
        e = ranges[j][1] - 1  # last shared line
        gamma[j].append(e)
        gamma[j + 1].append(s)
        ramp = (e - np.arange(s, e + 1)) / (e - s)
        profiles[j][s : e + 1] = ramp
        profiles[j + 1][s : e + 1] = 1.0 - ramp

    subs = tuple(_slab_mask(dims, axis, a, b) for a, b in ranges)
    bounds = []
    for j in range(J):
        prof = np.zeros(n, dtype=bool)
        prof[gamma[j]] = True
        bounds.append(_line_profile(dims, axis, prof))
    weights = tuple(_line_profile(dims, axis, p) for p in profiles)
    return Decomposition(
        shape,
        axis,
        tuple(ranges),
        subs,
        tuple(bounds),
        weights,
        True,
        tuple(tuple(sorted(gm)) for gm in gamma),
    )


def internal_boundary(dec, j):
    """Boundary of subdomain ``j`` lying inside the other subdomains.

    Computed from the masks alone: points of ``Omega_j`` with an axis
    neighbour outside ``Omega_j``, intersected with the union of the other
    subdomains. Used to cross-check the constructors.
    """
    m = dec.subdomains[j]
    edge = np.zeros_like(m)
    for ax in range(m.ndim):
        n = m.shape[ax]
        if n == 1:
            continue
        lo = [slice(None)] * m.ndim
        hi = [slice(None)] * m.ndim
        lo[ax] = slice(0, n - 1)
        hi[ax] = slice(1, n)
        lo, hi = tuple(lo), tuple(hi)
        edge[lo] |= m[lo] & ~m[hi]
        edge[hi] |= m[hi] & ~m[lo]
    others = np.zeros_like(m)
    for k in range(dec.J):
        if k != j:
            others |= dec.subdomains[k]
    return edge & others


def project_onto_subspace(u, j, dec):
    """Orthogonal projection onto signals supported in subdomain ``j``."""
    return np.where(dec.subdomains[j], u, 0.0)


def read_summary(text):
    """Parse the output of :meth:`Decomposition.summary` into a dict."""
    info = {"ranges": [], "gamma": []}
    for line in text.strip().splitlines():
        key, _, rest = line.partition(" ")
        if key == "shape":
            info["shape"] = tuple(int(t) for t in rest.split(" x "))
        elif key == "axis":
            info["axis"] = int(rest)
        elif key == "overlapping":
            info["overlapping"] = rest == "true"
        elif key == "subdomains":
            info["J"] = int(rest)
        elif key == "omega":
            _, _, span, _, gam = rest.split(" ", 4)
            a, b = span.split(":")
            info["ranges"].append((int(a), int(b)))
            info["gamma"].append(tuple(int(t) for t in gam.strip("[]").split()))
        else:
            raise ValueError(f"unrecognized summary line: {line!r}")
    return info
