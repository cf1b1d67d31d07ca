"""Reference values for the acceptance criteria, from closed forms.

For V(m) = m, tau(m) = ln(m + alpha), g(m) = m / kappa:
  h(m) = m, Theta(m) = (sqrt(alpha^2 + 4m) - alpha)/2,
  Delta(m) = Theta(kappa m), Delta^{-1}(y) = y (y + alpha) / kappa.
Run with: python3 tests/oracles/reference_values.py
"""
from mpmath import mp, mpf, sqrt, log

mp.dps = 30


def schedule(kappa, alpha, b):
    theta_one = (sqrt(alpha**2 + 4) - alpha) / 2
    tau_max = log(1 + alpha)
    seq = [b / kappa]
    while seq[-1] < theta_one:
        seq.append(seq[-1] * (seq[-1] + alpha) / kappa)
    seq.append(mpf(1) / kappa)
    n = len(seq) - 3  # b_0 .. b_{N+1}, then b_{N+2} = g(1)
    t_bar = log(mpf(1) / kappa) - log(b / kappa) + (n + 2) * tau_max
    t_full = t_bar + tau_max - log(mpf(1) / kappa)
    return seq, n, t_bar, t_full, (n + 3) * tau_max - log(b / kappa)


def main():
    seq, n, t_bar, t_full, predicted = schedule(mpf(2), mpf(4), mpf("0.05"))
    print("schedule kappa=2 alpha=4 b=0.05")
    print("  b_seq  ", [mp.nstr(x, 17) for x in seq])
    print("  N      ", n)
    print("  t_bar  ", mp.nstr(t_bar, 17))
    print("  t_full ", mp.nstr(t_full, 17))
    print("  extinction bound (N+3) tau_max - ln h(g(b)) ", mp.nstr(predicted, 17))

    # immature margin rho - (2 xi_bar0 - 1) beta0 with xi_bar0 = kappa alpha^-(gamma + 1)
    for kappa, alpha, delta, gamma, beta0 in [(4, 4.5, 0, 0, 2), (2, 4, 0.1, 0.2, 1)]:
        xi = mpf(kappa) * mpf(alpha) ** (-(mpf(gamma) + 1))
        margin = mpf(delta) + 1 - (2 * xi - 1) * beta0
        print(f"margin kappa={kappa} alpha={alpha} delta={delta} gamma={gamma} beta0={beta0}:",
              mp.nstr(margin, 17))

    # eta = 0 limit case: V(m) = m^2, gamma = 0, delta = 0.5, kappa = 2, Hill(1, 1, 2)
    # xi_bar0 = kappa, rho = delta: rho = (2 kappa - 1) / (1 + C^2)
    C = sqrt((2 * 2 - 1) / mpf("0.5") - 1)
    r = log(mpf(4))
    print("eta=0 limit C", mp.nstr(C, 17), " y_inf = r beta(0,C) C =",
          mp.nstr(r * C / (1 + C**2), 17), "(alpha = 4)")
    print("Hill(1,1,2) x_bar", mp.nstr(1 / (mpf(2) - 1) ** (mpf(1) / 2), 17))


if __name__ == "__main__":
    main()
