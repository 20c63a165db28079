"""Generate ``src/twostream/_xx_coefficients.py``.

The linearized strong system is written in jet variables (derivatives of the
background f, g and of the unknowns F, G up to second order).  Solving the
2x2 system for (F_xx, G_xx) gives every coefficient as a polynomial over the
common denominator ``v1^2 + eps*(f_y^2 + f_z^2 + g_y^2 + g_z^2) + eps^2``.

Run from the repository root::

    python scripts/generate_xx_coefficients.py
"""

from pathlib import Path

import sympy as sp

AX = (1, 2, 3)


def jets(name):
    u = sp.Symbol(name)
    d1 = {i: sp.Symbol(f"{name}{i}") for i in AX}
    d2 = {}
    for i in AX:
        for j in AX:
            a, b = sorted((i, j))
            d2[(i, j)] = sp.Symbol(f"{name}{a}{b}")
    return u, d1, d2


f, f1, f2 = jets("f")
g, g1, g2 = jets("g")
F, F1, F2 = jets("F")
G, G1, G2 = jets("G")
eps, Hff, Hfg, Hgg, mu, nu = sp.symbols("eps Hff Hfg Hgg mu nu")

# total derivative of first-order jets
TOTAL = {}
for first, second in ((f1, f2), (g1, g2), (F1, F2), (G1, G2)):
    for j in AX:
        for i in AX:
            TOTAL.setdefault(i, {})[first[j]] = second[(i, j)]
for u, d1 in ((F, F1), (G, G1)):
    for i in AX:
        TOTAL[i][u] = d1[i]


def D(i, expr):
    return sum(sp.diff(expr, s) * ds for s, ds in TOTAL[i].items())


def vec(d):
    return sp.Matrix([d[1], d[2], d[3]])


def div(W):
    return sum(D(i, W[i - 1]) for i in AX)


gf, gg, gF, gG = vec(f1), vec(g1), vec(F1), vec(G1)
v = gf.cross(gg)
dv = gF.cross(gg) + gf.cross(gG)
lapF = sum(F2[(i, i)] for i in AX)
lapG = sum(G2[(i, i)] for i in AX)

mu_expr = -div(gg.cross(dv) + gG.cross(v)) - eps * lapF + Hff * F + Hfg * G
nu_expr = -div(dv.cross(gf) + v.cross(gF)) - eps * lapG + Hfg * F + Hgg * G
mu_expr = sp.expand(mu_expr)
nu_expr = sp.expand(nu_expr)

A = sp.Matrix(
    [
        [mu_expr.coeff(F2[(1, 1)]), mu_expr.coeff(G2[(1, 1)])],
        [nu_expr.coeff(F2[(1, 1)]), nu_expr.coeff(G2[(1, 1)])],
    ]
)
rest = sp.Matrix(
    [
        sp.expand(mu_expr - A[0, 0] * F2[(1, 1)] - A[0, 1] * G2[(1, 1)]),
        sp.expand(nu_expr - A[1, 0] * F2[(1, 1)] - A[1, 1] * G2[(1, 1)]),
    ]
)
det = sp.expand(A.det())
expected = sp.expand(
    (f1[2] * g1[3] - f1[3] * g1[2]) ** 2
    + eps * (f1[2] ** 2 + f1[3] ** 2 + g1[2] ** 2 + g1[3] ** 2)
    + eps**2
)
assert sp.simplify(det - expected) == 0, "unexpected denominator"

adj = A.adjugate()
rhs = sp.Matrix([mu, nu]) - rest
num = (adj * rhs).applyfunc(sp.expand)

TERMS = [
    ("mu", mu),
    ("nu", nu),
    ("F12", F2[(1, 2)]),
    ("F13", F2[(1, 3)]),
    ("F22", F2[(2, 2)]),
    ("F23", F2[(2, 3)]),
    ("F33", F2[(3, 3)]),
    ("G12", G2[(1, 2)]),
    ("G13", G2[(1, 3)]),
    ("G22", G2[(2, 2)]),
    ("G23", G2[(2, 3)]),
    ("G33", G2[(3, 3)]),
    ("F1", F1[1]),
    ("F2", F1[2]),
    ("F3", F1[3]),
    ("G1", G1[1]),
    ("G2", G1[2]),
    ("G3", G1[3]),
    ("F", F),
    ("G", G),
]
term_syms = [s for _, s in TERMS]

coeffs = {}
for row, label in ((0, "F"), (1, "G")):
    poly = sp.Poly(num[row], *term_syms)
    out = []
    for name, s in TERMS:
        c = poly.coeff_monomial(s)
        out.append((name, sp.factor(c) if c != 0 else sp.Integer(0)))
    leftover = sp.expand(num[row] - sum(c * s for (_, c), s in zip(out, term_syms)))
    assert leftover == 0, f"non-linear remainder in {label}: {leftover}"
    coeffs[label] = out

background = sorted(
    {s for lab in coeffs.values() for _, c in lab for s in c.free_symbols},
    key=lambda s: s.name,
)

lines = [
    '"""Coefficients expressing the second x-derivatives of (F, G) through the linearized system.',
    "",
    "Generated by scripts/generate_xx_coefficients.py -- do not edit by hand.",
    "Each coefficient is ``numerator / denominator`` with",
    "``denominator = v1^2 + eps*(f2^2 + f3^2 + g2^2 + g3^2) + eps^2``.",
    '"""',
    "",
    "TERMS = (" + ", ".join(repr(n) for n, _ in TERMS) + ",)",
    "BACKGROUND = (" + ", ".join(repr(s.name) for s in background) + ",)",
    "",
    "",
    "def denominator(f2, f3, g2, g3, eps):",
    f"    return {sp.pycode(expected)}",
    "",
]
for label in ("F", "G"):
    lines.append("")
    lines.append(f"def numerators_{label}(j, eps):")
    lines.append(f'    """Numerators of the coefficients for {label}_xx keyed by term name."""')
    used = sorted({s.name for _, c in coeffs[label] for s in c.free_symbols} - {"eps"})
    for name in used:
        lines.append(f"    {name} = j[{name!r}]")
    lines.append("    out = {}")
    for name, c in coeffs[label]:
        lines.append(f"    out[{name!r}] = {sp.pycode(c)}")
    lines.append("    return out")
    lines.append("")

target = Path(__file__).resolve().parents[1] / "src" / "twostream" / "_xx_coefficients.py"
target.write_text("\n".join(lines) + "\n")
print(f"wrote {target}")
