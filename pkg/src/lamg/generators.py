"""Synthetic Laplacians: grid stencils and small structured graph families."""

import math

import numpy as np
import scipy.sparse as sp

from .graph import EdgeList, SparseLaplacian, assemble_laplacian


def stencil_laplacian(N, legs):
    """Laplacian on an ``N x N`` grid from off-diagonal stencil legs.

    ``legs`` maps offsets ``(dx, dy)`` to the matrix entry ``a_uv``; each leg
    must appear together with its mirror ``(-dx, -dy)`` and the same value.
    Legs leaving the grid are dropped and the diagonal restores zero row sums
    (Neumann closure). Node ``(ix, iy)`` has index ``iy * N + ix``.
    """
    rows, cols, vals = [], [], []
    ix, iy = np.meshgrid(np.arange(N), np.arange(N))
    ix, iy = ix.ravel(), iy.ravel()
    for (dx, dy), a in legs.items():
        if legs.get((-dx, -dy)) != a:
            raise ValueError(f"stencil leg {(dx, dy)} has no symmetric mirror")
        jx, jy = ix + dx, iy + dy
        inside = (jx >= 0) & (jx < N) & (jy >= 0) & (jy < N)
        rows.append(iy[inside] * N + ix[inside])
        cols.append(jy[inside] * N + jx[inside])
        vals.append(np.full(int(inside.sum()), float(a)))
    off = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                        shape=(N * N, N * N))
    return SparseLaplacian(off)


def grid_5pt(N):
    """Standard 5-point Laplacian with Neumann boundaries (unit weights)."""
    return stencil_laplacian(N, {(1, 0): -1.0, (-1, 0): -1.0,
                                 (0, 1): -1.0, (0, -1): -1.0})


def grid_13pt_4th(N):
    """Fourth-order stencil: center 60, axis neighbors -16, distance-2 axis +1."""
    if N < 5:
        raise ValueError("the 13-point stencil needs N >= 5")
    legs = {}
    for d, a in ((1, -16.0), (2, 1.0)):
        for off in ((d, 0), (-d, 0), (0, d), (0, -d)):
            legs[off] = a
    return stencil_laplacian(N, legs)


def anisotropic_coefficients(alpha, eps):
    cxx = math.cos(alpha) ** 2 + eps * math.sin(alpha) ** 2
    cyy = eps * math.cos(alpha) ** 2 + math.sin(alpha) ** 2
    cxy = (1.0 - eps) * math.sin(2.0 * alpha)
    return cxx, cxy, cyy


def anis_stencil_legs(alpha=-math.pi / 4, eps=1e-2, alignment="agnostic"):
    """Off-diagonal legs of the (halved) anisotropic-rotated stencil."""
    cxx, cxy, cyy = anisotropic_coefficients(alpha, eps)
    legs = {(1, 0): -cxx, (-1, 0): -cxx, (0, 1): -cyy, (0, -1): -cyy}
    if alignment == "agnostic":
        # U_xy ~ [NE - NW - SE + SW] / 4; matrix entries are minus the operator
        c = -cxy / 4.0
        legs.update({(1, 1): c, (-1, -1): c, (-1, 1): -c, (1, -1): -c})
    elif alignment == "northeast":
        # U_xy ~ [-N - S - E - W + NE + SW + 2 C] / 2
        c = cxy / 2.0
        for off in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            legs[off] += c
        legs.update({(1, 1): -c, (-1, -1): -c})
    else:
        raise ValueError(f"unknown alignment {alignment!r}")
    return {k: 0.5 * v for k, v in legs.items() if v != 0.0}


def grid_anis_rotated(N, alpha=-math.pi / 4, eps=1e-2, alignment="agnostic"):
    """Anisotropic-rotated Laplacian with an agnostic or northeast cross term."""
    return stencil_laplacian(N, anis_stencil_legs(alpha, eps, alignment))


def path(n, weight=1.0):
    idx = np.arange(n - 1)
    return assemble_laplacian(EdgeList(n, idx, idx + 1, np.full(n - 1, weight)))


def star(n):
    """Star with ``n - 1`` leaves; the center is the last node."""
    leaves = np.arange(n - 1)
    return assemble_laplacian(EdgeList(n, leaves, np.full(n - 1, n - 1), np.ones(n - 1)))


def complete(n):
    u, v = np.triu_indices(n, 1)
    return assemble_laplacian(EdgeList(n, u, v, np.ones(len(u))))


def two_hubs(h=50):
    """Two hubs of degree ``h`` joined by an edge, each with ``h - 1`` leaves.

    Hubs are nodes 0 and 1; leaves of hub 0 are ``2..h``, of hub 1 the rest.
    """
    leaves = h - 1
    n = 2 + 2 * leaves
    u = [0] + [0] * leaves + [1] * leaves
    v = [1] + list(range(2, 2 + leaves)) + list(range(2 + leaves, n))
    return assemble_laplacian(EdgeList(n, u, v, np.ones(len(u))))


def grid_plus_link(N, u, v, weight=1.0):
    """5-point grid with one extra edge ``(u, v)``."""
    e = grid_5pt(N).to_edge_list()
    return assemble_laplacian(EdgeList(N * N, np.append(e.u, u), np.append(e.v, v),
                                       np.append(e.w, weight)))


def structured_families(kind, **params):
    """Dispatch by family name: path, star, complete, two_hubs, grid_plus_link."""
    makers = {"path": path, "star": star, "complete": complete,
              "two_hubs": two_hubs, "grid_plus_link": grid_plus_link}
    if kind not in makers:
        raise ValueError(f"unknown family {kind!r}")
    return makers[kind](**params)


def random_connected(n, extra_edges, rng, weights=(0.5, 2.0)):
    """Random spanning tree plus ``extra_edges`` random edges, uniform weights."""
    rng = np.random.default_rng(rng)
    perm = rng.permutation(n)
    parents = perm[rng.integers(0, np.arange(1, n))]
    u = np.concatenate([perm[1:], rng.integers(0, n, extra_edges)])
    v = np.concatenate([parents, rng.integers(0, n, extra_edges)])
    w = rng.uniform(*weights, size=len(u))
    keep = u != v
    return assemble_laplacian(EdgeList(n, u[keep], v[keep], w[keep]))
