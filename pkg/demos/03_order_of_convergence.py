# Measuring order: COC, the derivative-free ladder and the error constant.
from mproots.analysis import constant_report, efficiency_index, measure_coc, measure_ratios
from mproots.expr import builtin
from mproots.numerics import Precision
from mproots.solvers import FamilyParams, MethodSpec

prec = Precision(1000)

# COC uses errors against a 2000-digit reference root, restricted to
# 1e-30 >= |e_n| >= 1e-800 so neither the start nor the precision floor leaks in.
for method, fid, x0 in [
    (MethodSpec.om8(), "f1", "1.7"),
    (MethodSpec.om8(), "f4", "1.5"),
    (MethodSpec.sm7(), "f2", "1.5"),
    (MethodSpec.newton(), "f2", "1.5"),
    (MethodSpec.steffensen(), "f2", "1.3"),
]:
    est = measure_coc(method, builtin(fid), x0, prec)
    print("%-10s %s from %-4s %s" % (method.label, fid, x0, est))

# Efficiency index p^(1/n): eight with four evaluations beats seven with four.
print()
for p, n in [(2, 2), (7, 4), (8, 4)]:
    print("efficiency_index(%d, %d) = %.5f" % (p, n, efficiency_index(p, n)))

# Derivative-free variant: w = x + f(x)^m. Order climbs 5, 7, 8, 8.
print()
for m in (1, 2, 3, 4):
    est = measure_coc(MethodSpec.om8df(m), builtin("f2"), "1.35", prec)
    print("m = %d  COC %.3f" % (m, est.value))
# From 1.5 the shift f(1.5)^m is huge and the iteration stalls:
try:
    measure_coc(MethodSpec.om8df(3), builtin("f2"), "1.5", prec)
except ValueError as exc:
    print("from 1.5:", exc)

# Asymptotic constant e_{n+1}/e_n^8. Two in-window ratios need more digits.
big = Precision(5000)
r8 = measure_ratios(MethodSpec.om8(), builtin("f2"), "1.5", 8, big)
r7 = measure_ratios(MethodSpec.om8(), builtin("f2"), "1.5", 7, big)
print()
print("order 8 ratios:", [float(v) for v in r8.ratios], "drift %.1e" % r8.drift)
print("order 7 ratios:", [big.context.nstr(v, 3) for v in r7.ratios])

# Set the measured constant against both printed closed forms.
print()
for params in (FamilyParams(), FamilyParams(1, 2, 1, 0), FamilyParams("1/2", 4, -1, 2)):
    print(constant_report(builtin("f2"), "1.5", params, big).format())
