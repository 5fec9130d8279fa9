#!/usr/bin/env python3
"""Generate src/manufactured_terms.inc.

Symbolically derives the source terms that force the traveling-wave test
solution through the compressible MHD system (divergence form):

    rho_t + div(rho u)                                    = src_rho
    (rho u^j)_t + div(rho u^j u) + P_xj
        - mu Lap(u^j) - lambda (div u)_xj
        + (|H|^2/2)_xj - div(H^j H)                       = src_m[j]
    H^j_t + div(H^j u - u^j H)                            = src_H[j]

The wave moves along x1, so all fields depend on phi = x1 - sigma*t alone
and the generated functions are polynomials in s = sin(phi), c = cos(phi).
Run from the repository root:  python3 tools/make_manufactured.py
"""

import sympy as sp

x1, t = sp.symbols("x1 t", real=True)

# Case constants; keep in sync with src/manufactured.cpp.
SIGMA = sp.Rational(9, 10)
A_RHO = sp.Rational(5, 100)
A_U1 = sp.Rational(7, 100)
A_U2 = sp.Rational(6, 100)
A_H = sp.Rational(8, 100)
HT = [sp.Rational(3, 10), sp.Rational(2, 10), sp.Rational(1, 10)]
MU = sp.Rational(5, 100)
LAM = sp.Rational(5, 100)
RHO_TILDE = sp.Integer(1)
K_P = sp.Integer(1)
GAMMA = sp.Integer(2)

phi = x1 - SIGMA * t
rho = RHO_TILDE + A_RHO * sp.sin(phi)
u = [A_U1 * sp.sin(phi), A_U2 * sp.sin(phi), sp.Integer(0)]
H = [HT[0], HT[1] + A_H * sp.cos(phi), HT[2]]
P = K_P * rho**GAMMA

dx = lambda e: sp.diff(e, x1)  # noqa: E731  (fields depend on x1 only)
dt_ = lambda e: sp.diff(e, t)  # noqa: E731

src_rho = dt_(rho) + dx(rho * u[0])

div_u = dx(u[0])
h_sq_half = sum(Hj**2 for Hj in H) / 2
src_m = []
for j in range(3):
    expr = dt_(rho * u[j])
    expr += dx(rho * u[j] * u[0])            # div(rho u^j u), only x1 varies
    if j == 0:
        expr += dx(P)
        expr -= LAM * dx(div_u)
        expr += dx(h_sq_half)
    expr -= MU * sp.diff(u[j], x1, 2)
    expr -= dx(H[j] * H[0])                  # div(H^j H)
    src_m.append(expr)

src_H = []
for j in range(3):
    expr = dt_(H[j]) + dx(H[j] * u[0] - u[j] * H[0])
    src_H.append(expr)

s, c = sp.symbols("s c", real=True)


def as_poly_in_sc(expr):
    # The derivatives only ever produce sin(phi) and cos(phi); plain
    # polynomial expansion keeps phi intact for direct substitution.
    expr = sp.expand(expr)
    expr = expr.subs({sp.sin(phi): s, sp.cos(phi): c,
                      sp.sin(-phi): -s, sp.cos(-phi): c})
    expr = sp.expand(expr)
    if expr.free_symbols - {s, c}:
        raise RuntimeError(f"unreduced symbols in {expr}")
    return sp.horner(sp.nsimplify(expr), wrt=s) if expr != 0 else expr


def emit(name, expr):
    code = sp.cxxcode(sp.Float(0) + expr, standard="c++11")
    args = "[[maybe_unused]] double s, [[maybe_unused]] double c"
    return f"inline double {name}({args}) {{\n  return {code};\n}}\n"


parts = [
    "// Generated by tools/make_manufactured.py. Do not edit by hand.\n",
    "// Source terms for the traveling-wave forced case, as polynomials in\n",
    "// s = sin(x1 - 0.9 t) and c = cos(x1 - 0.9 t).\n\n",
    emit("src_rho", as_poly_in_sc(src_rho)),
]
for j in range(3):
    parts.append(emit(f"src_m{j + 1}", as_poly_in_sc(src_m[j])))
for j in range(3):
    parts.append(emit(f"src_h{j + 1}", as_poly_in_sc(src_H[j])))

with open("src/manufactured_terms.inc", "w") as fh:
    fh.write("\n".join(parts))
print("wrote src/manufactured_terms.inc")
