"""High-precision oracles (mpmath) for frozen test values."""
import mpmath as mp

mp.mp.dps = 50

def D(lam, nu, zmax=4000):
    # normalizing constant sum_{z>=0} lam^z/(z!)^nu
    lam = mp.mpf(lam); nu = mp.mpf(nu)
    s = mp.mpf(0)
    for z in range(zmax):
        t = lam**z / mp.factorial(z)**nu
        s += t
        if z > 5 and t/s < mp.mpf(10)**-45:
            break
    return s

def mean_cmp(lam, nu, zmax=4000):
    lam = mp.mpf(lam); nu = mp.mpf(nu)
    s0 = mp.mpf(0); s1 = mp.mpf(0)
    for z in range(zmax):
        t = lam**z / mp.factorial(z)**nu
        s0 += t; s1 += z*t
        if z > 5 and t/s0 < mp.mpf(10)**-45:
            break
    return s1/s0

def var_cmp(lam, nu, zmax=4000):
    lam = mp.mpf(lam); nu = mp.mpf(nu)
    s0 = s1 = s2 = mp.mpf(0)
    for z in range(zmax):
        t = lam**z / mp.factorial(z)**nu
        s0 += t; s1 += z*t; s2 += z*z*t
        if z > 5 and t/s0 < mp.mpf(10)**-45:
            break
    m = s1/s0
    return s2/s0 - m*m

def solve_lam(x, nu):
    # root of mean_cmp(lam, nu) = x
    if x == 0:
        return mp.mpf(0)
    f = lambda lam: mean_cmp(lam, nu) - x
    lo, hi = mp.mpf(10)**-12, mp.mpf(max(1.0, float(x)))**nu
    while f(hi) < 0:
        hi *= 2
    return mp.findroot(f, (lo, hi), solver='bisect', tol=mp.mpf(10)**-40)

print("I0(4) = D(4,2):", mp.nstr(D(4, 2), 20))
print("besseli check:", mp.nstr(mp.besseli(0, 4), 20))
print("D(2,1)=e^2:", mp.nstr(D(2, 1), 20))

lam12 = solve_lam(1, 2)
print("lambda(x=1,nu=2):", mp.nstr(lam12, 20))
print("  mean check:", mp.nstr(mean_cmp(lam12, 2), 8))

# cmp_pmf(5, 0.1, 5): nu=10
lam510 = solve_lam(5, 10)
print("lambda(x=5,nu=10):", mp.nstr(lam510, 25))
p55 = lam510**5 / mp.factorial(5)**10 / D(lam510, 10)
print("cmp_pmf(5,0.1,5):", mp.nstr(p55, 20))

# binomial raw-normalizer for sample [0], h=0.1: sum_x ((1-h)/(x+1))^(x+1)
s = mp.mpf(0)
terms = []
for x in range(60):
    t = (mp.mpf('0.9')/(x+1))**(x+1)
    s += t
    terms.append(t)
print("C_n binomial [0] h=.1:", mp.nstr(s, 20))
# minimal M with tail < 1e-8
tail = s
for M in range(40):
    tail = s - sum(terms[:M+1])
    if tail < mp.mpf(10)**-8:
        print("minimal M for tail<1e-8:", M, " tail:", mp.nstr(tail, 6))
        break

# f_A(6), theoretical sd
fA6 = mp.mpf(8)**6*mp.e**-8/mp.factorial(6)
print("f_A(6):", mp.nstr(fA6, 20))
print("sd = sqrt(fA6(1-fA6)):", mp.nstr(mp.sqrt(fA6*(1-fA6)), 20))
print("f_B(0):", mp.nstr(mp.mpf(7)/10 + mp.mpf(3)/10*mp.e**-10, 20))

# log-normalizer expansion check at (100, 2) and (1e4, 2)
def expansion(lam, nu):
    lam = mp.mpf(lam); nu = mp.mpf(nu)
    return (nu*lam**(1/nu) - (nu-1)/(2*nu)*mp.log(lam)
            - mp.log((2*mp.pi)**((nu-1)/2)*mp.sqrt(nu))
            + (nu**2-1)/(24*nu)*lam**(-1/nu)
            + (nu**2-1)/(48*nu**2)*lam**(-2/nu))
for lam in (100, 1000, 10000):
    t = mp.log(D(lam, 2)); a = expansion(lam, 2)
    print(f"logD({lam},2) true {mp.nstr(t,12)} exp {mp.nstr(a,12)} relerr {mp.nstr(abs(a-t)/abs(t),4)}")

# variance asymptote check: x in {5,10,20}, h in {.1,.05,.02}: |var - h*lam^h| <= 2*lam^-h ?
for x in (5, 10, 20):
    for h in ('0.1', '0.05', '0.02'):
        h_ = mp.mpf(h); nu = 1/h_
        lam = solve_lam(x, nu)
        v = var_cmp(lam, nu)
        asym = h_*lam**h_
        bound = 2*lam**(-h_)
        print(f"x={x} h={h}: var={mp.nstr(v,10)} asym={mp.nstr(asym,10)} |diff|={mp.nstr(abs(v-asym),6)} bound={mp.nstr(bound,6)} ok={abs(v-asym)<=bound}")
