"""Coefficients expressing the second x-derivatives of (F, G) through the linearized system.

Generated by scripts/generate_xx_coefficients.py -- do not edit by hand.
Each coefficient is ``numerator / denominator`` with
``denominator = v1^2 + eps*(f2^2 + f3^2 + g2^2 + g3^2) + eps^2``.
"""

TERMS = ('mu', 'nu', 'F12', 'F13', 'F22', 'F23', 'F33', 'G12', 'G13', 'G22', 'G23', 'G33', 'F1', 'F2', 'F3', 'G1', 'G2', 'G3', 'F', 'G',)
BACKGROUND = ('Hff', 'Hfg', 'Hgg', 'eps', 'f1', 'f11', 'f12', 'f13', 'f2', 'f22', 'f23', 'f3', 'f33', 'g1', 'g11', 'g12', 'g13', 'g2', 'g22', 'g23', 'g3', 'g33',)


def denominator(f2, f3, g2, g3, eps):
    return eps**2 + eps*f2**2 + eps*f3**2 + eps*g2**2 + eps*g3**2 + f2**2*g3**2 - 2*f2*f3*g2*g3 + f3**2*g2**2


def numerators_F(j, eps):
    """Numerators of the coefficients for F_xx keyed by term name."""
    Hff = j['Hff']
    Hfg = j['Hfg']
    Hgg = j['Hgg']
    f1 = j['f1']
    f11 = j['f11']
    f12 = j['f12']
    f13 = j['f13']
    f2 = j['f2']
    f22 = j['f22']
    f23 = j['f23']
    f3 = j['f3']
    f33 = j['f33']
    g1 = j['g1']
    g11 = j['g11']
    g12 = j['g12']
    g13 = j['g13']
    g2 = j['g2']
    g22 = j['g22']
    g23 = j['g23']
    g3 = j['g3']
    g33 = j['g33']
    out = {}
    out['mu'] = -eps - f2**2 - f3**2
    out['nu'] = -f2*g2 - f3*g3
    out['F12'] = 2*eps*g1*g2 - f1*f2*g2**2 - f1*f3*g2*g3 + f2**2*g1*g2 - f2*f3*g1*g3 + 2*f3**2*g1*g2
    out['F13'] = 2*eps*g1*g3 - f1*f2*g2*g3 - f1*f3*g3**2 + 2*f2**2*g1*g3 - f2*f3*g1*g2 + f3**2*g1*g3
    out['F22'] = -eps**2 - eps*f2**2 - eps*f3**2 - eps*g1**2 - eps*g3**2 + f1*f2*g1*g2 + f1*f3*g1*g3 - f2**2*g1**2 - f2**2*g3**2 + f2*f3*g2*g3 - f3**2*g1**2
    out['F23'] = 2*eps*g2*g3 + f2**2*g2*g3 - f2*f3*g2**2 - f2*f3*g3**2 + f3**2*g2*g3
    out['F33'] = -eps**2 - eps*f2**2 - eps*f3**2 - eps*g1**2 - eps*g2**2 + f1*f2*g1*g2 + f1*f3*g1*g3 - f2**2*g1**2 + f2*f3*g2*g3 - f3**2*g1**2 - f3**2*g2**2
    out['G12'] = -eps*f1*g2 - eps*f2*g1 + f1*f2**2*g2 + 2*f1*f2*f3*g3 - f1*f3**2*g2 - f2**3*g1 - f2*f3**2*g1
    out['G13'] = -eps*f1*g3 - eps*f3*g1 - f1*f2**2*g3 + 2*f1*f2*f3*g2 + f1*f3**2*g3 - f2**2*f3*g1 - f3**3*g1
    out['G22'] = eps*f1*g1 - eps*f2*g2 - f1**2*f2*g2 - f1**2*f3*g3 + f1*f2**2*g1 + f1*f3**2*g1 + f2**2*f3*g3 - f2*f3**2*g2
    out['G23'] = -eps*f2*g3 - eps*f3*g2 - f2**3*g3 + f2**2*f3*g2 + f2*f3**2*g3 - f3**3*g2
    out['G33'] = eps*f1*g1 - eps*f3*g3 - f1**2*f2*g2 - f1**2*f3*g3 + f1*f2**2*g1 + f1*f3**2*g1 - f2**2*f3*g3 + f2*f3**2*g2
    out['F1'] = eps*g1*g22 + eps*g1*g33 - eps*g12*g2 - eps*g13*g3 - 2*f1*f2*g2*g22 - 2*f1*f2*g2*g33 - 2*f1*f3*g22*g3 - 2*f1*f3*g3*g33 - f12*f2*g2**2 - f12*f3*g2*g3 - f13*f2*g2*g3 - f13*f3*g3**2 + f2**2*g1*g22 + f2**2*g1*g33 + f2**2*g12*g2 - f2**2*g13*g3 + f2*f22*g1*g2 + 2*f2*f3*g12*g3 + 2*f2*f3*g13*g2 + f2*f33*g1*g2 + f22*f3*g1*g3 + f3**2*g1*g22 + f3**2*g1*g33 - f3**2*g12*g2 + f3**2*g13*g3 + f3*f33*g1*g3
    out['F2'] = -eps*g1*g12 + eps*g11*g2 + eps*g2*g33 - eps*g23*g3 + 2*f1*f2*g12*g2 + 2*f1*f3*g12*g3 + f11*f2*g2**2 + f11*f3*g2*g3 - f12*f2*g1*g2 - f12*f3*g1*g3 - f2**2*g1*g12 - f2**2*g11*g2 - f2**2*g2*g33 - f2**2*g23*g3 - f2*f23*g2*g3 - 2*f2*f3*g11*g3 + 2*f2*f3*g2*g23 - 2*f2*f3*g3*g33 + f2*f33*g2**2 - f23*f3*g3**2 - f3**2*g1*g12 + f3**2*g11*g2 + f3**2*g2*g33 + f3**2*g23*g3 + f3*f33*g2*g3
    out['F3'] = -eps*g1*g13 + eps*g11*g3 - eps*g2*g23 + eps*g22*g3 + 2*f1*f2*g13*g2 + 2*f1*f3*g13*g3 + f11*f2*g2*g3 + f11*f3*g3**2 - f13*f2*g1*g2 - f13*f3*g1*g3 - f2**2*g1*g13 + f2**2*g11*g3 + f2**2*g2*g23 + f2**2*g22*g3 + f2*f22*g2*g3 - f2*f23*g2**2 - 2*f2*f3*g11*g2 - 2*f2*f3*g2*g22 + 2*f2*f3*g23*g3 + f22*f3*g3**2 - f23*f3*g2*g3 - f3**2*g1*g13 - f3**2*g11*g3 - f3**2*g2*g23 - f3**2*g22*g3
    out['G1'] = eps*f1*g22 + eps*f1*g33 + 2*eps*f12*g2 + 2*eps*f13*g3 - eps*f2*g12 - 2*eps*f22*g1 - eps*f3*g13 - 2*eps*f33*g1 + f1*f2**2*g22 + f1*f2**2*g33 + f1*f2*f22*g2 + f1*f2*f33*g2 + f1*f22*f3*g3 + f1*f3**2*g22 + f1*f3**2*g33 + f1*f3*f33*g3 + f12*f2**2*g2 - f12*f2*f3*g3 + 2*f12*f3**2*g2 + 2*f13*f2**2*g3 - f13*f2*f3*g2 + f13*f3**2*g3 - f2**3*g12 - 2*f2**2*f22*g1 - f2**2*f3*g13 - 2*f2**2*f33*g1 - f2*f3**2*g12 - 2*f22*f3**2*g1 - f3**3*g13 - 2*f3**2*f33*g1
    out['G2'] = -eps*f1*g12 - 2*eps*f11*g2 + 2*eps*f12*g1 + eps*f2*g11 + eps*f2*g33 + 2*eps*f23*g3 - eps*f3*g23 - 2*eps*f33*g2 - f1*f12*f2*g2 - f1*f12*f3*g3 - f1*f2**2*g12 - f1*f3**2*g12 - f11*f2**2*g2 + f11*f2*f3*g3 - 2*f11*f3**2*g2 + 2*f12*f2**2*g1 + 2*f12*f3**2*g1 + f2**3*g11 + f2**3*g33 + 2*f2**2*f23*g3 - f2**2*f3*g23 - f2**2*f33*g2 - f2*f23*f3*g2 + f2*f3**2*g11 + f2*f3**2*g33 + f2*f3*f33*g3 + f23*f3**2*g3 - f3**3*g23 - 2*f3**2*f33*g2
    out['G3'] = -eps*f1*g13 - 2*eps*f11*g3 + 2*eps*f13*g1 - eps*f2*g23 - 2*eps*f22*g3 + 2*eps*f23*g2 + eps*f3*g11 + eps*f3*g22 - f1*f13*f2*g2 - f1*f13*f3*g3 - f1*f2**2*g13 - f1*f3**2*g13 - 2*f11*f2**2*g3 + f11*f2*f3*g2 - f11*f3**2*g3 + 2*f13*f2**2*g1 + 2*f13*f3**2*g1 - f2**3*g23 - 2*f2**2*f22*g3 + f2**2*f23*g2 + f2**2*f3*g11 + f2**2*f3*g22 + f2*f22*f3*g2 - f2*f23*f3*g3 - f2*f3**2*g23 - f22*f3**2*g3 + 2*f23*f3**2*g2 + f3**3*g11 + f3**3*g22
    out['F'] = Hff*eps + Hff*f2**2 + Hff*f3**2 + Hfg*f2*g2 + Hfg*f3*g3
    out['G'] = Hfg*eps + Hfg*f2**2 + Hfg*f3**2 + Hgg*f2*g2 + Hgg*f3*g3
    return out


def numerators_G(j, eps):
    """Numerators of the coefficients for G_xx keyed by term name."""
    Hff = j['Hff']
    Hfg = j['Hfg']
    Hgg = j['Hgg']
    f1 = j['f1']
    f11 = j['f11']
    f12 = j['f12']
    f13 = j['f13']
    f2 = j['f2']
    f22 = j['f22']
    f23 = j['f23']
    f3 = j['f3']
    f33 = j['f33']
    g1 = j['g1']
    g11 = j['g11']
    g12 = j['g12']
    g13 = j['g13']
    g2 = j['g2']
    g22 = j['g22']
    g23 = j['g23']
    g3 = j['g3']
    g33 = j['g33']
    out = {}
    out['mu'] = -f2*g2 - f3*g3
    out['nu'] = -eps - g2**2 - g3**2
    out['F12'] = -eps*f1*g2 - eps*f2*g1 - f1*g2**3 - f1*g2*g3**2 + f2*g1*g2**2 - f2*g1*g3**2 + 2*f3*g1*g2*g3
    out['F13'] = -eps*f1*g3 - eps*f3*g1 - f1*g2**2*g3 - f1*g3**3 + 2*f2*g1*g2*g3 - f3*g1*g2**2 + f3*g1*g3**2
    out['F22'] = eps*f1*g1 - eps*f2*g2 + f1*g1*g2**2 + f1*g1*g3**2 - f2*g1**2*g2 - f2*g2*g3**2 - f3*g1**2*g3 + f3*g2**2*g3
    out['F23'] = -eps*f2*g3 - eps*f3*g2 + f2*g2**2*g3 - f2*g3**3 - f3*g2**3 + f3*g2*g3**2
    out['F33'] = eps*f1*g1 - eps*f3*g3 + f1*g1*g2**2 + f1*g1*g3**2 - f2*g1**2*g2 + f2*g2*g3**2 - f3*g1**2*g3 - f3*g2**2*g3
    out['G12'] = 2*eps*f1*f2 + f1*f2*g2**2 + 2*f1*f2*g3**2 - f1*f3*g2*g3 - f2**2*g1*g2 - f2*f3*g1*g3
    out['G13'] = 2*eps*f1*f3 - f1*f2*g2*g3 + 2*f1*f3*g2**2 + f1*f3*g3**2 - f2*f3*g1*g2 - f3**2*g1*g3
    out['G22'] = -eps**2 - eps*f1**2 - eps*f3**2 - eps*g2**2 - eps*g3**2 - f1**2*g2**2 - f1**2*g3**2 + f1*f2*g1*g2 + f1*f3*g1*g3 + f2*f3*g2*g3 - f3**2*g2**2
    out['G23'] = 2*eps*f2*f3 - f2**2*g2*g3 + f2*f3*g2**2 + f2*f3*g3**2 - f3**2*g2*g3
    out['G33'] = -eps**2 - eps*f1**2 - eps*f2**2 - eps*g2**2 - eps*g3**2 - f1**2*g2**2 - f1**2*g3**2 + f1*f2*g1*g2 + f1*f3*g1*g3 - f2**2*g3**2 + f2*f3*g2*g3
    out['F1'] = -2*eps*f1*g22 - 2*eps*f1*g33 - eps*f12*g2 - eps*f13*g3 + 2*eps*f2*g12 + eps*f22*g1 + 2*eps*f3*g13 + eps*f33*g1 - 2*f1*g2**2*g22 - 2*f1*g2**2*g33 - 2*f1*g22*g3**2 - 2*f1*g3**2*g33 - f12*g2**3 - f12*g2*g3**2 - f13*g2**2*g3 - f13*g3**3 + f2*g1*g2*g22 + f2*g1*g2*g33 + f2*g12*g2**2 + 2*f2*g12*g3**2 - f2*g13*g2*g3 + f22*g1*g2**2 + f22*g1*g3**2 + f3*g1*g22*g3 + f3*g1*g3*g33 - f3*g12*g2*g3 + 2*f3*g13*g2**2 + f3*g13*g3**2 + f33*g1*g2**2 + f33*g1*g3**2
    out['F2'] = 2*eps*f1*g12 + eps*f11*g2 - eps*f12*g1 - 2*eps*f2*g11 - 2*eps*f2*g33 - eps*f23*g3 + 2*eps*f3*g23 + eps*f33*g2 + 2*f1*g12*g2**2 + 2*f1*g12*g3**2 + f11*g2**3 + f11*g2*g3**2 - f12*g1*g2**2 - f12*g1*g3**2 - f2*g1*g12*g2 - f2*g11*g2**2 - 2*f2*g11*g3**2 - f2*g2**2*g33 - f2*g2*g23*g3 - 2*f2*g3**2*g33 - f23*g2**2*g3 - f23*g3**3 - f3*g1*g12*g3 + f3*g11*g2*g3 + 2*f3*g2**2*g23 + f3*g2*g3*g33 + f3*g23*g3**2 + f33*g2**3 + f33*g2*g3**2
    out['F3'] = 2*eps*f1*g13 + eps*f11*g3 - eps*f13*g1 + 2*eps*f2*g23 + eps*f22*g3 - eps*f23*g2 - 2*eps*f3*g11 - 2*eps*f3*g22 + 2*f1*g13*g2**2 + 2*f1*g13*g3**2 + f11*g2**2*g3 + f11*g3**3 - f13*g1*g2**2 - f13*g1*g3**2 - f2*g1*g13*g2 + f2*g11*g2*g3 + f2*g2**2*g23 + f2*g2*g22*g3 + 2*f2*g23*g3**2 + f22*g2**2*g3 + f22*g3**3 - f23*g2**3 - f23*g2*g3**2 - f3*g1*g13*g3 - 2*f3*g11*g2**2 - f3*g11*g3**2 - 2*f3*g2**2*g22 - f3*g2*g23*g3 - f3*g22*g3**2
    out['G1'] = eps*f1*f22 + eps*f1*f33 - eps*f12*f2 - eps*f13*f3 + f1*f2*g2*g22 + f1*f2*g2*g33 + f1*f22*g2**2 + f1*f22*g3**2 + f1*f3*g22*g3 + f1*f3*g3*g33 + f1*f33*g2**2 + f1*f33*g3**2 + f12*f2*g2**2 - f12*f2*g3**2 + 2*f12*f3*g2*g3 + 2*f13*f2*g2*g3 - f13*f3*g2**2 + f13*f3*g3**2 - f2**2*g12*g2 - 2*f2*f22*g1*g2 - f2*f3*g12*g3 - f2*f3*g13*g2 - 2*f2*f33*g1*g2 - 2*f22*f3*g1*g3 - f3**2*g13*g3 - 2*f3*f33*g1*g3
    out['G2'] = -eps*f1*f12 + eps*f11*f2 + eps*f2*f33 - eps*f23*f3 - f1*f12*g2**2 - f1*f12*g3**2 - f1*f2*g12*g2 - f1*f3*g12*g3 - f11*f2*g2**2 + f11*f2*g3**2 - 2*f11*f3*g2*g3 + 2*f12*f2*g1*g2 + 2*f12*f3*g1*g3 + f2**2*g11*g2 + f2**2*g2*g33 + 2*f2*f23*g2*g3 + f2*f3*g11*g3 - f2*f3*g2*g23 + f2*f3*g3*g33 - f2*f33*g2**2 + f2*f33*g3**2 - f23*f3*g2**2 + f23*f3*g3**2 - f3**2*g23*g3 - 2*f3*f33*g2*g3
    out['G3'] = -eps*f1*f13 + eps*f11*f3 - eps*f2*f23 + eps*f22*f3 - f1*f13*g2**2 - f1*f13*g3**2 - f1*f2*g13*g2 - f1*f3*g13*g3 - 2*f11*f2*g2*g3 + f11*f3*g2**2 - f11*f3*g3**2 + 2*f13*f2*g1*g2 + 2*f13*f3*g1*g3 - f2**2*g2*g23 - 2*f2*f22*g2*g3 + f2*f23*g2**2 - f2*f23*g3**2 + f2*f3*g11*g2 + f2*f3*g2*g22 - f2*f3*g23*g3 + f22*f3*g2**2 - f22*f3*g3**2 + 2*f23*f3*g2*g3 + f3**2*g11*g3 + f3**2*g22*g3
    out['F'] = Hff*f2*g2 + Hff*f3*g3 + Hfg*eps + Hfg*g2**2 + Hfg*g3**2
    out['G'] = Hfg*f2*g2 + Hfg*f3*g3 + Hgg*eps + Hgg*g2**2 + Hgg*g3**2
    return out

