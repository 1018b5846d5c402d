"""
From logic programs to PS+ theories
===================================

A normal logic program P is translated into a clausal theory T(P). The
models of (D, T(P)), restricted to the atoms of P, are the supported
models of D together with P.
"""

from psplus import clark_completion, parse_lp, supported_models, translate
from psplus.completion import translated_models

prog = parse_lp("""
p(X) :- e(X,Y), not p(Y).
""")

for f in clark_completion(prog):
    print(f)
print(translate(prog))

# a directed path a -> b -> c
data = ["e(a,b).", "e(b,c)."]
print("supported:", [sorted(m) for m in supported_models(prog, data)])
print("via T(P): ", [sorted(m) for m in translated_models(prog, data)])

# an even loop has two supported models
even = parse_lp("p :- not q.\nq :- not p.")
print(sorted(sorted(m) for m in supported_models(even)))
print(sorted(sorted(m) for m in translated_models(even)))
