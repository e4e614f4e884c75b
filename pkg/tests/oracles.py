"""Independent reference computations used by the tests.

Nothing here calls the closed-form or assembly code it is meant to check.
"""

import numpy as np


def gauss_coefficients(p1, p2, D, n_points=8):
    """Boundary coefficient matrices by Gauss quadrature with a general chain-rule B.

    At the boundary (radial coordinate 1) the map is ``x = xi * x_b(eta)``;
    inverting the full 2x2 Jacobian gives the radial (B1) and circumferential
    (B2) parts of the strain operator.
    """
    p1, p2 = np.asarray(p1, float), np.asarray(p2, float)
    g, w = np.polynomial.legendre.leggauss(n_points)
    E0 = np.zeros((4, 4))
    E1 = np.zeros((4, 4))
    E2 = np.zeros((4, 4))
    for eta, wt in zip(g, w):
        N = np.array([(1 - eta) / 2, (1 + eta) / 2])
        dN = np.array([-0.5, 0.5])
        xb = N @ np.array([p1, p2])
        dxb = dN @ np.array([p1, p2])
        J = np.array([xb, dxb])           # rows: d/dxi, d/deta at xi = 1
        detJ = np.linalg.det(J)
        Ji = np.linalg.inv(J)             # columns map (d/dxi, d/deta) -> (d/dx, d/dy)
        B1 = np.zeros((3, 4))
        B2 = np.zeros((3, 4))
        for a in range(2):
            gx1, gy1 = Ji[0, 0] * N[a], Ji[1, 0] * N[a]
            gx2, gy2 = Ji[0, 1] * dN[a], Ji[1, 1] * dN[a]
            B1[:, 2 * a:2 * a + 2] = [[gx1, 0], [0, gy1], [gy1, gx1]]
            B2[:, 2 * a:2 * a + 2] = [[gx2, 0], [0, gy2], [gy2, gx2]]
        E0 += wt * detJ * B1.T @ D @ B1
        E1 += wt * detJ * B2.T @ D @ B1
        E2 += wt * detJ * B2.T @ D @ B2
    return E0, E1, E2


def rectangle_stiffness_fine(width, height, D, n=10):
    """Unit-thickness rectangle subdivided n x n, kinematically condensed to its corners.

    Each sub-rectangle stiffness is integrated with a 3x3 tensor Gauss rule and
    the fine DOFs follow the bilinear interpolation of the four corners.
    """
    xs = np.linspace(0, width, n + 1)
    ys = np.linspace(0, height, n + 1)
    g, w = np.polynomial.legendre.leggauss(3)
    nn = (n + 1) ** 2
    K = np.zeros((2 * nn, 2 * nn))
    hx, hy = width / n, height / n
    for j in range(n):
        for i in range(n):
            ids = [j * (n + 1) + i, j * (n + 1) + i + 1, (j + 1) * (n + 1) + i + 1,
                   (j + 1) * (n + 1) + i]
            k = np.zeros((8, 8))
            for a, wa in zip(g, w):
                for b, wb in zip(g, w):
                    dNdx = 0.25 * np.array([-(1 - b), (1 - b), (1 + b), -(1 + b)]) * 2 / hx
                    dNdy = 0.25 * np.array([-(1 - a), -(1 + a), (1 + a), (1 - a)]) * 2 / hy
                    B = np.zeros((3, 8))
                    B[0, 0::2] = dNdx
                    B[1, 1::2] = dNdy
                    B[2, 0::2] = dNdy
                    B[2, 1::2] = dNdx
                    k += wa * wb * hx * hy / 4 * B.T @ D @ B
            d = np.ravel([[2 * m, 2 * m + 1] for m in ids])
            K[np.ix_(d, d)] += k
    X, Y = np.meshgrid(xs / width, ys / height)
    s, t = X.ravel(), Y.ravel()
    Nc = np.column_stack([(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t])
    T = np.zeros((2 * nn, 8))
    T[0::2, 0::2] = Nc
    T[1::2, 1::2] = Nc
    return T.T @ K @ T


def split_rectangle_stiffness(coords, y_cut, D, n_points=6):
    """16x16 shifted-Heaviside stiffness of an axis-aligned rectangle cut at ``y = y_cut``.

    Each half is integrated separately with a tensor Gauss rule.
    """
    coords = np.asarray(coords, float)
    x0, y0 = coords[0]
    x1, y1 = coords[2]
    hx, hy = x1 - x0, y1 - y0
    node_h = np.where(coords[:, 1] > y_cut, 1.0, -1.0)
    g, w = np.polynomial.legendre.leggauss(n_points)
    K = np.zeros((16, 16))
    for ya, yb, h in ((y0, y_cut, -1.0), (y_cut, y1, 1.0)):
        for a, wa in zip(g, w):
            for b, wb in zip(g, w):
                x = x0 + (a + 1) / 2 * hx
                y = ya + (b + 1) / 2 * (yb - ya)
                s, t = (x - x0) / hx, (y - y0) / hy
                dNdx = np.array([-(1 - t), 1 - t, t, -t]) / hx
                dNdy = np.array([-(1 - s), -s, s, 1 - s]) / hy
                B = np.zeros((3, 8))
                B[0, 0::2] = dNdx
                B[1, 1::2] = dNdy
                B[2, 0::2] = dNdy
                B[2, 1::2] = dNdx
                Bf = np.hstack([B, B * np.repeat(h - node_h, 2)])
                K += wa * wb * hx * (yb - ya) / 4 * Bf.T @ D @ Bf
    return K


def constant_stress_boundary_forces(node_coords, connectivity, sigma):
    """Consistent nodal forces of the tractions of a constant stress on a closed polygon."""
    S = np.array([[sigma[0], sigma[2]], [sigma[2], sigma[1]]])
    f = np.zeros(2 * len(node_coords))
    for a, b in connectivity:
        e = node_coords[b] - node_coords[a]
        n = np.array([e[1], -e[0]])       # outward for counterclockwise traversal, length |e|
        t = S @ n
        f[2 * a:2 * a + 2] += 0.5 * t
        f[2 * b:2 * b + 2] += 0.5 * t
    return f
