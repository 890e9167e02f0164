"""Reference values frozen into the C++ unit tests.

Written against numpy/scipy only; shares no code with the C++ library.
Run: python3 tests/oracles/oracles.py
"""
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh, expm, logm
from scipy.optimize import root


def ops(nb):
    b = np.diag(np.sqrt(np.arange(1, nb + 1)), 1).astype(complex)
    sp = np.array([[0, 0], [2, 0]], dtype=complex)  # |up><down| with weight 2
    sz = np.diag([-1.0, 1.0]).astype(complex)
    i2, ib = np.eye(2), np.eye(nb + 1)
    # boson-major ordering: index = 2n + s
    kron = lambda a_b, a_s: np.kron(a_b, a_s)
    return dict(b=kron(b, i2), bd=kron(b.conj().T, i2), sp=kron(ib, sp), sm=kron(ib, sp.T),
                sz=kron(ib, sz), n=kron(b.conj().T @ b, i2))


def rabi(nb, g, w0=1.0, w=1.0):
    o = ops(nb)
    return 0.5 * w0 * o["sz"] + w * o["n"] + g * (o["sp"] + o["sm"]) @ (o["bd"] + o["b"])


def creators(nb, level):
    o = ops(nb)
    out = []
    for n in range(1, level + 1):
        out.append(np.linalg.matrix_power(o["bd"], n) / math.sqrt(math.factorial(n)))
    top = level + 1 if level == nb else level
    for n in range(1, top + 1):
        out.append(np.linalg.matrix_power(o["bd"], n - 1) @ o["sp"] / (2 * math.sqrt(math.factorial(n - 1))))
    return out


def ref(dim):
    v = np.zeros(dim, dtype=complex)
    v[0] = 1
    return v


def transformed(h, s, cs):
    S = sum(x * c for x, c in zip(s, cs))
    return expm(-S) @ h @ expm(S)


def ket_eqs(h, s, cs):
    hb = transformed(h, s, cs)
    p0 = ref(h.shape[0])
    return np.array([p0 @ c.conj().T @ hb @ p0 for c in cs])


def bra_grad(h, s, st, cs):
    S = sum(x * c for x, c in zip(s, cs))
    St = np.eye(h.shape[0]) + sum(x * c.conj().T for x, c in zip(st, cs))
    e, ei = expm(S), expm(-S)
    p0 = ref(h.shape[0])
    return np.array([p0 @ St @ ei @ (h @ c - c @ h) @ e @ p0 for c in cs])


def expect(q, s, st, cs):
    S = sum(x * c for x, c in zip(s, cs))
    St = np.eye(q.shape[0]) + sum(x * c.conj().T for x, c in zip(st, cs))
    p0 = ref(q.shape[0])
    return p0 @ St @ expm(-S) @ q @ expm(S) @ p0


def stationary(nb, level, g):
    h = rabi(nb, g)
    cs = creators(nb, level)
    m = len(cs)
    sol = root(lambda x: ket_eqs(h, x, cs).real, np.zeros(m), tol=1e-14, method="hybr")
    s = sol.x.astype(complex)
    # bra equations are linear in s~
    base = bra_grad(h, s, np.zeros(m), cs)
    A = np.column_stack([bra_grad(h, s, np.eye(m)[j], cs) - base for j in range(m)])
    st = np.linalg.solve(A, -base)
    o = ops(nb)
    return expect(h, s, st, cs), expect(o["sz"], s, st, cs)


def nccm_evolve(nb, level, g, t1):
    h = rabi(nb, g)
    cs = creators(nb, level)
    m = len(cs)

    def rhs(t, y):
        z = y[: 2 * m] + 1j * y[2 * m:]
        s, st = z[:m], z[m:]
        ds = -1j * ket_eqs(h, s, cs)
        dst = 1j * bra_grad(h, s, st, cs)
        dz = np.concatenate([ds, dst])
        return np.concatenate([dz.real, dz.imag])

    sol = solve_ivp(rhs, (0, t1), np.zeros(4 * m), method="DOP853", rtol=1e-12, atol=1e-13)
    z = sol.y[:2 * m, -1] + 1j * sol.y[2 * m:, -1]
    return expect(ops(nb)["sz"], z[:m], z[m:], cs)


def ed_dynamics(nb, g, t):
    h = rabi(nb, g)
    e, v = eigh(h)
    psi = v @ (np.exp(-1j * e * t) * (v.conj().T @ ref(h.shape[0])))
    o = ops(nb)
    return (psi.conj() @ o["sz"] @ psi).real, (psi.conj() @ o["n"] @ psi).real


def eccm_sigma(nb, s, st):
    cs = creators(nb, nb)
    S = sum(x * c for x, c in zip(s, cs))
    St = np.eye(S.shape[0]) + sum(x * c.conj().T for x, c in zip(st, cs))
    Sig_t = logm(St)
    p0 = ref(S.shape[0])
    sigma_t = np.array([p0 @ Sig_t @ c @ p0 for c in cs])
    sigma = np.array([p0 @ c.conj().T @ expm(Sig_t) @ S @ p0 for c in cs])
    return sigma, sigma_t


def shift_ket(nb, g, alpha, beta, t):
    o = ops(nb)
    h = rabi(nb, g)
    omega = expm(alpha * o["bd"]) @ expm(beta * o["sp"])
    psi_init = expm(-1j * h * t) @ ref(h.shape[0])
    return np.linalg.solve(omega, psi_init)


def show(name, v):
    if np.iscomplexobj(v) and abs(np.imag(v)) > 0:
        print(f"{name} = {np.real(v):.17g} {np.imag(v):+.17g}i")
    else:
        print(f"{name} = {np.real(v):.17g}")


if __name__ == "__main__":
    for g in (0.1, 0.2, 0.3):
        show(f"ed_ground nb=30 g={g}", eigh(rabi(30, g))[0][0])
    e = eigh(rabi(30, 0.2))[0]
    show("ed_gap nb=30 g=0.2", e[1] - e[0])
    sz, n = ed_dynamics(30, 0.1, 5.0)
    show("ed sz(t=5) nb=30 g=0.1", sz)
    show("ed n(t=5) nb=30 g=0.1", n)
    for level in (2, 4):
        E, sz = stationary(8, level, 0.2)
        show(f"sub{level} energy nb=8 g=0.2", E)
        show(f"sub{level} sz nb=8 g=0.2", sz)
    show("sub2 sz(t=1) nb=6 g=0.3", nccm_evolve(6, 2, 0.3, 1.0))
    s = np.array([0.1 + 0.05j, -0.07, 0.02j, 0.03, 0.01 - 0.02j])
    st = np.array([0.2, 0.1j, -0.05, 0.04 + 0.01j, -0.03j])
    sigma, sigma_t = eccm_sigma(2, s, st)
    for k in range(5):
        show(f"eccm sigma[{k}]", sigma[k])
        show(f"eccm sigma_t[{k}]", sigma_t[k])
    psi = shift_ket(4, 0.3, 0.1 * 2.0, 0.2 * math.cos(1.0), 1.0)
    for k in range(4):
        show(f"shift ket[{k}] nb=4 t=1", psi[k])
