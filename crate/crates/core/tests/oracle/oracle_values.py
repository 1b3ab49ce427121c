"""Independent high-precision oracles for the frozen constants in the core tests.

Run with `python3 oracle_values.py`. Uses mpmath only; nothing here shares code
with the Rust implementation.
"""
import mpmath as mp

mp.mp.dps = 40


def b(m, beta):
    return (1 - m) * mp.e ** (beta * m) - (1 + m) * mp.e ** (-beta * m)


def m_star(beta):
    # bisection on beta*m - atanh(m)
    lo, hi = mp.mpf("1e-30"), 1 - mp.mpf("1e-30")
    for _ in range(200):
        mid = (lo + hi) / 2
        if beta * mid - mp.atanh(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def K(r, beta):
    a = 2 * beta - 2
    c = beta**3 / 3 - beta**2

    def f(x):
        if abs(x) < mp.mpf("1e-12"):
            return -c * x / a**2  # leading term; below working precision otherwise
        return -(b(x, beta) - a * x) / (a * x * b(x, beta))
    return mp.quad(f, [0, r])


def D(r, beta):
    a = 2 * beta - 2
    return K(r, beta) + mp.log(r) / a + mp.log(a / 2) / (2 * a)


def transit(d, r, beta):
    return mp.quad(lambda x: 1 / b(x, beta), [d, r])


def exact_mean_exit(N, beta, nthr):
    states = list(range(-nthr + 2, nthr - 1, 2))
    k = len(states)
    A = mp.zeros(k, k)
    rhs = mp.matrix([-1] * k)
    for i, n in enumerate(states):
        m = mp.mpf(n) / N
        lp = N * (1 - m) / 2 * mp.e ** (beta * m)
        lm = N * (1 + m) / 2 * mp.e ** (-beta * m)
        A[i, i] = -(lp + lm)
        if i + 1 < k:
            A[i, i + 1] = lp
        if i - 1 >= 0:
            A[i, i - 1] = lm
    u = mp.lu_solve(A, rhs)
    return u[states.index(0)]


def splitmix64(x):
    M = (1 << 64) - 1
    z = (x + 0x9E3779B97F4A7C15) & M
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M
    return z ^ (z >> 31)


def kolmogorov_q(lam):
    return 2 * mp.nsum(lambda k: (-1) ** (k - 1) * mp.e ** (-2 * k * k * lam * lam), [1, mp.inf])


if __name__ == "__main__":
    N, beta, m = 4, 2, mp.mpf("0.5")
    print("rates m=0.5 N=4 beta=2:", N * (1 - m) / 2 * mp.e ** (beta * m), N * (1 + m) / 2 * mp.e ** (-beta * m))
    for be in (1.01, 1.2, 1.5, 2, 3, 5):
        print("m_star", be, m_star(mp.mpf(be)))
    ms = m_star(mp.mpf("1.5"))
    print("F(m*) beta=1.5:", -mp.mpf("1.5") / 2 * ms**2 + (lambda x: x * mp.log(x) + (1 - x) * mp.log(1 - x))(mp.mpf(1) / 2 + ms / 2))
    for be in ("1.5", "2"):
        be = mp.mpf(be)
        r = m_star(be) / 2
        print("beta", be, "r=m*/2", r, "K", K(r, be), "D", D(r, be))
    be = mp.mpf("1.5")
    print("K(1e-3) beta=1.5", K(mp.mpf("1e-3"), be), "series", -(be**3 / 3 - be**2) * mp.mpf("1e-6") / (2 * (2 * be - 2) ** 2))
    print("D(0.3) beta=1.5", D(mp.mpf("0.3"), be))
    print("transit(0.1,0.3) beta=1.5", transit(mp.mpf("0.1"), mp.mpf("0.3"), be))
    print("transit(0.2,0.4) beta=1.5", transit(mp.mpf("0.2"), mp.mpf("0.4"), be))
    print("Q(1e-4) beta=1.5", b(mp.mpf("1e-4"), be) - mp.mpf("1e-4"), "cubic", (be**3 / 3 - be**2) * mp.mpf("1e-12"))
    print("exact_mean_exit N=2 thr=2", exact_mean_exit(2, be, 2))
    print("exact_mean_exit N=4 thr=4 beta=1.5", exact_mean_exit(4, be, 4))
    nthr = int(2 * mp.ceil(50 * ms / 2 / 2))
    print("N=50 beta=1.5 nthr", nthr, exact_mean_exit(50, be, nthr))
    print("N=10 beta=1.5 nthr=6", exact_mean_exit(10, be, 6))
    print("splitmix64(0)", hex(splitmix64(0)))
    print("derive_seed(42, 7)", hex(splitmix64((42 + 7 * 0x9E3779B97F4A7C15) & ((1 << 64) - 1))))
    print("Q_KS(1.36)", kolmogorov_q(mp.mpf("1.36")), "Q_KS(0.5)", kolmogorov_q(mp.mpf("0.5")))
    print("2(1-Phi(1))", mp.erfc(1 / mp.sqrt(2)))
    print("Phi(1.959964)", mp.ncdf(mp.mpf("1.959964")))
    print("median a=1 sigma=1", -mp.log(mp.sqrt(2) * mp.erfinv(mp.mpf("0.5"))))
    mean = mp.quad(lambda z: -mp.log(abs(z)) * mp.npdf(z), [-mp.inf, 0, mp.inf])
    print("E[-ln|Z|]", mean, "closed", (mp.euler + mp.log(2)) / 2)
