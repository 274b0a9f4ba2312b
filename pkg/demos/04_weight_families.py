# Weight functions are polynomials with rational coefficients, so the
# eighth-order conditions are exact identities rather than float comparisons.
from dataclasses import replace

from mproots.solvers import FamilyParams, MethodSpec, WeightPolynomial, validate_weights, weights_from_params

w = weights_from_params(FamilyParams(0, 3, 0, 1))
for name in "ABPQR":
    print(name, "=", getattr(w, name))
print("violations:", validate_weights(w))

# Break one coefficient at a time and see which condition is reported.
print()
for name, k, value in [("A", 2, 1), ("B", 1, 0), ("P", 3, 5), ("Q", 1, 1), ("R", 1, 3)]:
    bad = replace(w, **{name: getattr(w, name).with_coefficient(k, value)})
    print("%s c%d = %s  ->  %s" % (name, k, value, [str(v) for v in validate_weights(bad)]))

# A hand-built family passes as long as the coefficients line up.
mine = replace(w, B=WeightPolynomial.of(1, 1, 5), P=WeightPolynomial.of(0, 0, 1, 8))
print()
print("custom family valid:", validate_weights(mine) == [])
MethodSpec.om8(weights=mine).validate()

# Non-validated experiments go through unchecked().
odd = MethodSpec.om8(weights=replace(w, R=WeightPolynomial.of(1, 1))).unchecked()
odd.validate()
print("unchecked spec accepted:", odd.label)
