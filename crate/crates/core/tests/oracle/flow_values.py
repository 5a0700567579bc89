"""Arbitrary-precision reference values frozen into tests/flows.rs and tests/schemes.rs.

Each formula is written out by hand from the flow definitions, independently of
the Rust implementation. Run with `python3 flow_values.py`.
"""
from mpmath import mp, mpf, sin, cos, pi

mp.dps = 40


def oscillating_vortex_velocity(k, b, omega, t, p, q):
    phase = k * p + b * sin(omega * t)
    return sin(phase) * cos(k * q), -cos(phase) * sin(k * q)


def oscillating_vortex_hamiltonian(k, b, omega, t, p, q):
    # -H_q and H_p must reproduce the velocity above.
    return -(1 / k) * sin(k * p + b * sin(omega * t)) * sin(k * q)


def cellular_f(theta, t, p):
    return cos(p) + theta * cos(t) * sin(p)


def rotated_taylor_green_step(P, Q, h):
    p_new = P - h * sin(Q)
    q_new = Q + h * sin(p_new)
    return p_new, q_new


if __name__ == "__main__":
    v = oscillating_vortex_velocity(2 * pi, mpf("2.72"), pi, mpf("0.37"), mpf("0.11"), mpf("0.29"))
    print("ov_velocity", mp.nstr(v[0], 20), mp.nstr(v[1], 20))
    h = oscillating_vortex_hamiltonian(2 * pi, mpf(1), pi, mpf("0.5"), mpf("0.2"), mpf("0.3"))
    print("ov_hamiltonian", mp.nstr(h, 20))
    print("cellular_f", mp.nstr(cellular_f(mpf("0.3"), mpf(1), mpf("0.4")), 20))
    s = rotated_taylor_green_step(pi / 2, pi / 2, mpf("0.1"))
    print("tg_step", mp.nstr(s[0], 20), mp.nstr(s[1], 20))
