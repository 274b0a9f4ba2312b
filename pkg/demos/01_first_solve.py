# A first look: solve one equation with every method and watch the residuals.
import mpmath

from mproots import FamilyParams, MethodSpec, Precision, SolveConfig, builtin, from_expression, solve
from mproots.solvers import FixedIterations

prec = Precision(1000)  # 1000 significant digits, 20 guard digits on top

# f2 is the quintic x^5 + x^4 + 4x^2 - 15 with a root near 1.34742.
f = builtin("f2")
print(f.id, "=", f.text)

# The guess is parsed as the exact decimal 1.5 at working precision.
res = solve(MethodSpec.om8(), f, "1.5", SolveConfig(prec))
print("root  ", mpmath.nstr(res.root, 40))
print("status", res.status.value, "| iterations", res.iterations, "| TNFE", res.tnfe)

# Same start, every method, three iterations each: compare |f(x_n)|.
methods = [MethodSpec.newton(), MethodSpec.steffensen(), MethodSpec.sm7(), MethodSpec.om8()]
print()
print("%-11s" % "method", "  ".join("|f(x_%d)|" % n for n in range(4)))
for m in methods:
    r = solve(m, builtin("f2"), "1.3", SolveConfig(prec, FixedIterations(3)))
    print("%-11s" % m.label, "  ".join("%9s" % mpmath.nstr(t.abs_f, 2) for t in r.trace))

# The family has four free parameters; every choice keeps eighth order.
print()
for params in [FamilyParams(0, 3, 0, 1), FamilyParams(1, 2, 1, 0), FamilyParams("1/2", -4, 3, 7)]:
    r = solve(MethodSpec.om8(params), builtin("f2"), "1.5", SolveConfig(prec, FixedIterations(3)))
    print(params.alpha, params.beta, params.gamma, params.delta, "->", mpmath.nstr(r.residual, 3))

# Any expression in x works too; derivatives come from dual numbers.
g = from_expression("x^3 - 2*x - 5")
r = solve(MethodSpec.om8(), g, "2", SolveConfig(Precision(60)))
print()
print(g.text, "root", mpmath.nstr(r.root, 50))
